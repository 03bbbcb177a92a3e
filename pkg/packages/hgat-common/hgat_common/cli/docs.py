class MainTexts:
    def __init__(self, first_line, name):
        self.header = f"""\b
    {first_line}
    Heterogeneous graph attention motion forecasting - {name}\b\f"""

        self.docs = f"""\b
    Config top level options:
        - Use env-vars (same as cmd options) but uppercase
            and with "_" instead of "-"; all prefixed with "HGAT_"
        - Use command line options as detailed by '--help'
        - Use a KEY=value file passed via --config

    \b
    Examples:
        - hgat-{name} --help                               Detailed help on CLI
        - hgat-{name} generate --out data/train --count 64 Generate synthetic scenarios
        - hgat-{name} train --data data/train --out runs/a Train a model
        - hgat-{name} --threads 1 eval --help              Help on the eval command
    \b
    """
