import logging
from typing import Any, MutableMapping, Tuple

from .color import color


logger = logging.getLogger("polyddr")
logger.handlers = [logging.StreamHandler()]
logger.setLevel(logging.INFO)


class CheckLoggerAdapter(logging.LoggerAdapter):
    def process(
        self, message: str, kwargs: MutableMapping[str, Any]
    ) -> Tuple[str, MutableMapping[str, Any]]:
        extra = {} if self.extra is None else self.extra
        prefix = color.check(f"[{extra.get('check', '<none>')}]")
        return f"{prefix} {message}", kwargs


class CellLoggerAdapter(logging.LoggerAdapter):
    def process(
        self, message: str, kwargs: MutableMapping[str, Any]
    ) -> Tuple[str, MutableMapping[str, Any]]:
        extra = {} if self.extra is None else self.extra
        prefix = color.mesh(f"[cell {extra.get('cell', '?')}]")
        return f"{prefix} {message}", kwargs


def check_logger(name: str) -> CheckLoggerAdapter:
    return CheckLoggerAdapter(logger, extra={"check": name})


def cell_logger(cell: int) -> CellLoggerAdapter:
    return CellLoggerAdapter(logger, extra={"cell": cell})
