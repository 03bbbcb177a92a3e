from typing import List

import typer

# "name version" lines printed after the package version, e.g. file schemas
version_lines: List[str] = []


def version():
    """Print the hgat-forecast version and the file schema versions."""
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version as package_version

    try:
        typer.echo(f"hgat-forecast {package_version('hgat-forecast')}")
    except PackageNotFoundError:
        typer.echo("hgat-forecast (not installed)")
    for line in version_lines:
        typer.echo(line)


def get_typer_app(*schema_lines: str) -> typer.Typer:
    """Typer app holding the shared ``version`` command; ``schema_lines``
    are appended to what it prints."""
    version_lines.extend(line for line in schema_lines if line not in version_lines)
    app = typer.Typer(add_completion=False)
    app.command()(version)
    return app
