from typing import Any, Callable, Optional

from decouple import undefined


class FromStr:
    """Click parameter type for entries parsed from strings (lists, enums,
    pydantic models)."""

    def __init__(self, type, cast):
        self._type = type
        self.cast = cast

    def __call__(self, arg) -> Any:
        if arg is undefined:
            return undefined
        # defaults reach the cli already parsed
        if not isinstance(arg, str):
            return arg
        return self.cast(arg)

    @property
    def __name__(self) -> str:
        return f"<{getattr(self._type, '__name__', repr(self._type))}>"


def no_cast(value):
    return value


class ConfiEntry:
    """One declared config key. Class-level entries are templates: every
    config instance evaluates its own copy into ``value``."""

    def __init__(
        self,
        key: str,
        *,
        default=undefined,
        description: Optional[str] = None,
        cast: Callable = no_cast,
        type=str,
        index: int = -1,
    ) -> None:
        self.key = key
        self.default = default
        self.description = description
        self.cast = cast
        self.type = type
        # declaration order
        self.index = index
        self.value = undefined

    def parse_default(self) -> Any:
        if isinstance(self.default, (str, dict)):
            return self.cast(self.default)
        return self.default

    def get_cli_type(self):
        if self.type in {str, int, float, bool}:
            return self.type
        return FromStr(self.type, self.cast)

    def get_cli_option_kwargs(self) -> dict:
        res = {"type": self.get_cli_type()}
        if self.description is not None:
            res["help"] = self.description
        if self.default is not undefined:
            res["default"] = self.value if self.value is not undefined else self.default
            res["show_default"] = True
        return res
