from typing import Callable, Dict, Optional

import click
import typer
from hgat_common.confi.types import ConfiEntry
from typer.main import Typer


def create_click_cli(confi_entries: Dict[str, ConfiEntry], callback: Callable) -> click.Group:
    """Wrap ``callback`` in a click group taking every entry as an option:
    ``MODEL_DIM`` becomes ``--model-dim`` and reaches the callback as
    ``MODEL_DIM``."""
    cli = callback
    for entry in confi_entries.values():
        flag = "--" + entry.key.lower().replace("_", "-")
        cli = click.option(flag, entry.key, **entry.get_cli_option_kwargs())(cli)
    cli = click.pass_context(cli)
    return click.group(invoke_without_command=True)(cli)


def get_cli_object_for_config_objects(
    config_objects: list,
    typer_app: Optional[Typer] = None,
    help: Optional[str] = None,
    on_start: Optional[Callable] = None,
) -> click.Group:
    def callback(ctx, **kwargs):
        # write option values back into the config object owning the key
        for key, value in kwargs.items():
            for config_obj in config_objects:
                if key in config_obj.entries:
                    setattr(config_obj, key, value)
        if callable(on_start):
            on_start(ctx, **kwargs)

    if help is not None:
        callback.__doc__ = help
    entries = {}
    for config_obj in config_objects:
        entries.update(config_obj.entries)
    click_group = create_click_cli(entries, callback)
    if typer_app is not None:
        for name, cmd in typer.main.get_command(typer_app).commands.items():
            click_group.add_command(cmd, name)
    return click_group
