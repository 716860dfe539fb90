from typing import Callable, Dict, Optional

from . import constants as C


STATUS_STYLES: Dict[str, str] = {"pass": "passed", "fail": "failed", "uncertified": "uncertified"}


class Color:
    """ANSI-256 foreground colours keyed by style name.

    Every key of the style map is also a method, so ``color.mesh(text)`` paints
    ``text`` with the ``mesh`` style.
    """

    reset: str = "\x1b[0m"

    def __init__(
        self, style: Dict[str, Optional[int]] = C.DEFAULT_COLOR_STYLE, enabled: bool = True
    ) -> None:
        self.enabled: bool = enabled
        self.style: Dict[str, Optional[int]] = dict(style)

    def paint(self, style_name: str, text: str) -> str:
        code = self.style.get(style_name)
        if not self.enabled or code is None:
            return text
        return f"\x1b[38;5;{code}m{text}{self.reset}"

    def status(self, status: str) -> str:
        return self.paint(STATUS_STYLES.get(status, status), status)

    def __getattr__(self, style_name: str) -> Callable[[str], str]:
        if style_name.startswith("_") or style_name not in C.DEFAULT_COLOR_STYLE:
            raise AttributeError(style_name)
        return lambda text: self.paint(style_name, text)


color = Color()
