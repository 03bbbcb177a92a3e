import functools
from typing import Tuple, Type

from loguru import logger as default_logger


def log_exception(
    logger=default_logger,
    rethrow=True,
    ignore: Tuple[Type[BaseException], ...] = (),
):
    """Log exceptions escaping the decorated function with their traceback.

    Exceptions of the ``ignore`` types are re-raised without logging.
    """

    def deco(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except ignore:
                raise
            except Exception as e:
                logger.exception(e)
                if rethrow:
                    raise

        return wrapper

    return deco
