"""Typed configuration on top of python-decouple and click.

A config class declares its keys as class attributes (``confi.int(...)``,
``confi.model(...)``, ...). Instantiating it reads every key, in
declaration order, from the process environment, then from an optional
flat ``KEY=value`` file, then falls back to the declared default.
"""

import copy
import inspect
import itertools
import json
import string
from collections import OrderedDict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Type, TypeVar, Union

from decouple import Config, Csv, RepositoryEnv, UndefinedValueError
from decouple import config as environment
from decouple import text_type, undefined
from hgat_common.confi.cli import get_cli_object_for_config_objects
from hgat_common.confi.types import ConfiEntry, no_cast
from loguru import logger
from pydantic import BaseModel, ValidationError
from typer import Typer

ModelT = TypeVar("ModelT", bound=BaseModel)
EnumT = TypeVar("EnumT")

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}

# shared by every config class so entries sort by declaration order
_declaration_counter = itertools.count()


def cast_boolean(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in _TRUE | _FALSE:
        return value.lower() in _TRUE
    raise UndefinedValueError(f"{value} - is not a valid boolean")


def cast_pydantic(model: Type[ModelT]) -> Callable[[Any], ModelT]:
    def cast_pydantic_by_model(value):
        if isinstance(value, model):
            return value
        if isinstance(value, str):
            return model.parse_raw(value)
        return model.parse_obj(value)

    return cast_pydantic_by_model


class Confi:
    """Base class of config sets, and (as the module level ``confi``) the
    factory of their entries."""

    def __init__(
        self,
        prefix: Optional[str] = None,
        env_file: Optional[Union[str, Path]] = None,
    ) -> None:
        """
        Args:
            prefix (str, optional): prepended to every key when reading it.
            env_file (str | Path, optional): flat key-value file (KEY=value lines);
                the process environment still takes precedence.
        """
        self._prefix = prefix
        self._env_file = Path(env_file) if env_file is not None else None
        self._source = (
            Config(RepositoryEnv(str(self._env_file)))
            if self._env_file is not None
            else environment
        )
        self._entries: Dict[str, ConfiEntry] = OrderedDict()
        declared = inspect.getmembers(
            type(self), lambda member: isinstance(member, ConfiEntry)
        )
        for name, template in sorted(declared, key=lambda item: item[1].index):
            entry = copy.copy(template)
            self._entries[name] = entry
            setattr(self, name, self._read(entry))

    @property
    def entries(self) -> Dict[str, ConfiEntry]:
        return self._entries

    @property
    def env_file(self) -> Optional[Path]:
        return self._env_file

    def _read(self, entry: ConfiEntry) -> Any:
        key = f"{self._prefix}{entry.key}" if self._prefix else entry.key
        try:
            return self._source(key, cast=entry.cast)
        except UndefinedValueError:
            if entry.default is undefined:
                raise
            return entry.parse_default()
        except ValidationError:
            logger.error("Failed parsing config key - {key}", key=key)
            raise

    def __setattr__(self, name: str, value: Any) -> None:
        super().__setattr__(name, value)
        # keep the entry in sync, the cli shows it as the default
        if not name.startswith("_") and name in self._entries:
            self._entries[name].value = value

    def __repr__(self) -> str:
        return json.dumps(
            {k: str(v.value) for k, v in self.entries.items()},
            indent=2,
            sort_keys=True,
        )

    def get_cli_object(
        self,
        config_objects: Optional[List["Confi"]] = None,
        typer_app: Optional[Typer] = None,
        help: Optional[str] = None,
        on_start: Optional[Callable] = None,
    ):
        """Click group with one global option per entry of this and the
        other ``config_objects``, and the commands of ``typer_app``."""
        return get_cli_object_for_config_objects(
            list(config_objects or []) + [self],
            typer_app=typer_app,
            help=help,
            on_start=on_start,
        )

    # -- entry factories --

    def _entry(self, key, default, description, cast=no_cast, type=str) -> Any:
        return ConfiEntry(
            key,
            default=default,
            description=description,
            cast=cast,
            type=type,
            index=next(_declaration_counter),
        )

    def str(self, key, default=undefined, description=None) -> str:
        return self._entry(key, default, description)

    def int(self, key, default=undefined, description=None) -> int:
        return self._entry(key, default, description, cast=int, type=int)

    def float(self, key, default=undefined, description=None) -> float:
        return self._entry(key, default, description, cast=float, type=float)

    def bool(self, key, default=undefined, description=None) -> bool:
        return self._entry(key, default, description, cast=cast_boolean, type=bool)

    def list(
        self,
        key,
        default=undefined,
        description=None,
        sub_cast=text_type,
        delimiter=",",
    ) -> list:
        cast = Csv(cast=sub_cast, delimiter=delimiter, strip=string.whitespace)
        return self._entry(key, default, description, cast=cast, type=list)

    def model(self, key, model_type: Type[ModelT], default=undefined, description=None) -> ModelT:
        """An entry parsed into a pydantic model (JSON in the environment)."""
        return self._entry(key, default, description, cast=cast_pydantic(model_type), type=model_type)

    def enum(self, key, enum_type: Type[EnumT], default=undefined, description=None) -> EnumT:
        return self._entry(key, default, description, cast=enum_type, type=enum_type)


confi = Confi()
