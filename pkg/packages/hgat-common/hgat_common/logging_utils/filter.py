from typing import List, Optional


class ModuleFilter:
    """Loguru filter on the name of the logging module.

    ``ModuleFilter(["hgat_forecast"], ["hgat_forecast.training"])`` keeps
    only the training loop's logs from the package. Include prefixes win
    over exclude prefixes.
    """

    def __init__(
        self,
        exclude_list: Optional[List[str]] = None,
        include_list: Optional[List[str]] = None,
    ) -> None:
        self._exclude = tuple(exclude_list or ())
        self._include = tuple(include_list or ())

    def filter(self, record) -> bool:
        name: str = record["name"]
        if self._include and name.startswith(self._include):
            return True
        return not (self._exclude and name.startswith(self._exclude))
