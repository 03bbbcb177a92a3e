import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Union

from hgat_common.config import hgat_common_config
from hgat_common.logging_utils.filter import ModuleFilter
from hgat_common.logging_utils.formatter import Formatter
from hgat_common.logging_utils.intercept import InterceptHandler
from loguru import logger


def _module_filter() -> ModuleFilter:
    return ModuleFilter(
        include_list=hgat_common_config.LOG_MODULE_INCLUDE_LIST,
        exclude_list=hgat_common_config.LOG_MODULE_EXCLUDE_LIST,
    )


def configure_logs():
    """Route stdlib logging and ``warnings`` (numpy overflow and invalid
    value warnings included) into loguru, then add the console sink and,
    with LOG_TO_FILE, the rotating file sink."""
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    logging.captureWarnings(True)
    logger.remove()
    pipe = sys.stderr if hgat_common_config.LOG_PIPE_TO_STDERR else sys.stdout
    logger.add(
        pipe,
        filter=_module_filter().filter,
        format=Formatter(hgat_common_config.log_format()).format,
        level=hgat_common_config.LOG_LEVEL,
        backtrace=hgat_common_config.LOG_TRACEBACK,
        diagnose=hgat_common_config.LOG_DIAGNOSE,
        colorize=hgat_common_config.LOG_COLORIZE,
        serialize=hgat_common_config.LOG_SERIALIZE,
    )
    if hgat_common_config.LOG_TO_FILE:
        logger.add(
            hgat_common_config.LOG_FILE_PATH,
            compression=hgat_common_config.LOG_FILE_COMPRESSION,
            retention=hgat_common_config.LOG_FILE_RETENTION,
            rotation=hgat_common_config.LOG_FILE_ROTATION,
            serialize=hgat_common_config.LOG_FILE_SERIALIZE,
            level=hgat_common_config.LOG_FILE_LEVEL,
        )


@contextmanager
def run_log(path: Union[str, Path], level: Optional[str] = None) -> Iterator[Path]:
    """Copy the records of one run (a training or an ablation) into
    ``path`` until the block exits. Follows LOG_FILE_SERIALIZE and
    LOG_FILE_LEVEL unless ``level`` is given."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sink = logger.add(
        path,
        filter=_module_filter().filter,
        format=Formatter(hgat_common_config.log_format()).format,
        level=level or hgat_common_config.LOG_FILE_LEVEL,
        serialize=hgat_common_config.LOG_FILE_SERIALIZE,
        colorize=False,
        mode="w",
    )
    try:
        yield path
    finally:
        logger.remove(sink)
