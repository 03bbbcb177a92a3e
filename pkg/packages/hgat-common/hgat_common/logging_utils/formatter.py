class Formatter:
    """Loguru format callable that shortens module names longer than the
    name column."""

    def __init__(self, format_string: str, name_width: int = 40):
        self.fmt = format_string
        self.name_width = name_width

    def shorten(self, name: str) -> str:
        if len(name) <= self.name_width:
            return name
        parts = name.split(".")
        if len(parts) > 2:
            name = f"{parts[0]}...{parts[-1]}"
        if len(name) > self.name_width:
            name = f"{name[:self.name_width - 3]}..."
        return name

    def format(self, record) -> str:
        record["name"] = self.shorten(record["name"])
        return self.fmt
