import collections
import json
from typing import Any, Dict, List, Optional

from . import errors as E
from . import constants as C
from .color import color
from .logger import logger

import yaml


_FLOAT_OPTIONS = {
    "adjoint_slope_tol",
    "commutation_tol",
    "consistency_tol",
    "gap_ratio",
    "membership_tol",
    "poincare_spread",
    "rank_tol",
    "residual_tol",
    "slope_tol",
}
_INT_OPTIONS = {
    "k_max",
    "local_exactness_cells",
    "max_dense_dofs",
    "probes",
    "quadrature_margin",
    "random_fields",
    "seed",
}


class ConfigBase(collections.UserDict):
    def __init__(
        self, config: Optional[Dict[str, Any]] = None, path: Optional[str] = None
    ) -> None:
        super().__init__({} if config is None else config)
        self.validate_config()
        self.path: Optional[str] = path

    @classmethod
    def from_yaml_filepath(cls, path: str):
        with open(path) as raw_config:
            return cls(yaml.safe_load(raw_config), path)

    def display_options(self) -> None:
        cls = type(self)
        names = [name for name in dir(cls) if isinstance(getattr(cls, name), property)]
        for name in sorted(names):
            value = json.dumps(getattr(self, name))
            logger.info(f"{name}: {color.config(value)}")

    def validate_config(self) -> None:
        if not isinstance(self.data, dict):
            raise E.InvalidConfigError("mapping expected at top level")

        options = self.data.get("options", {})

        if not isinstance(options, dict):
            raise E.InvalidConfigError("dict expected for options section")

        for name, value in options.items():
            self.validate_option(name, value)

    def validate_option(self, name: str, value: Any) -> None:
        if name in _FLOAT_OPTIONS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise E.InvalidConfigError(f"{name}: number expected")
            if value <= 0:
                raise E.InvalidConfigError(f"{name}: positive value expected")
        elif name in _INT_OPTIONS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise E.InvalidConfigError(f"{name}: integer expected")
            if name == "k_max" and not 0 <= value <= C.DEFAULT_K_MAX:
                raise E.InvalidConfigError(
                    f"{name}: must lie in 0..{C.DEFAULT_K_MAX}, got {value}"
                )
            if name == "quadrature_margin" and value < C.DEFAULT_QUADRATURE_MARGIN:
                raise E.InvalidConfigError(
                    f"{name}: at least {C.DEFAULT_QUADRATURE_MARGIN} needed, got {value}"
                )
            if name not in ("seed", "k_max") and value <= 0:
                raise E.InvalidConfigError(f"{name}: positive value expected")
        elif name == "color_style":
            if not isinstance(value, dict):
                raise E.InvalidConfigError(f"{name}: dict expected")
        elif name == "families":
            if not isinstance(value, dict) or not all(
                isinstance(sizes, list) for sizes in value.values()
            ):
                raise E.InvalidConfigError(f"{name}: dict of lists expected")
        else:
            raise E.InvalidConfigError(f"unknown option: {name}")


class Config(ConfigBase):
    def get_option(self, name: str, default: Any) -> Any:
        return self.data.get("options", {}).get(name, default)

    @property
    def adjoint_slope_tol(self) -> float:
        return self.get_option("adjoint_slope_tol", C.DEFAULT_ADJOINT_SLOPE_TOL)

    @property
    def color_style(self) -> Dict[str, Optional[int]]:
        return self.get_option("color_style", C.DEFAULT_COLOR_STYLE)

    @property
    def commutation_tol(self) -> float:
        return self.get_option("commutation_tol", C.DEFAULT_COMMUTATION_TOL)

    @property
    def consistency_tol(self) -> float:
        return self.get_option("consistency_tol", C.DEFAULT_CONSISTENCY_TOL)

    @property
    def families(self) -> Dict[str, List[int]]:
        return {**C.DEFAULT_FAMILIES, **self.get_option("families", {})}

    @property
    def gap_ratio(self) -> float:
        return self.get_option("gap_ratio", C.DEFAULT_GAP_RATIO)

    @property
    def k_max(self) -> int:
        return self.get_option("k_max", C.DEFAULT_K_MAX)

    @property
    def max_dense_dofs(self) -> int:
        return self.get_option("max_dense_dofs", C.DEFAULT_MAX_DENSE_DOFS)

    @property
    def membership_tol(self) -> float:
        return self.get_option("membership_tol", C.DEFAULT_MEMBERSHIP_TOL)

    @property
    def poincare_spread(self) -> float:
        return self.get_option("poincare_spread", C.DEFAULT_POINCARE_SPREAD)

    @property
    def local_exactness_cells(self) -> int:
        return self.get_option("local_exactness_cells", C.DEFAULT_LOCAL_EXACTNESS_CELLS)

    @property
    def probes(self) -> int:
        return self.get_option("probes", C.DEFAULT_PROBES)

    @property
    def quadrature_margin(self) -> int:
        return self.get_option("quadrature_margin", C.DEFAULT_QUADRATURE_MARGIN)

    @property
    def random_fields(self) -> int:
        return self.get_option("random_fields", C.DEFAULT_RANDOM_FIELDS)

    @property
    def rank_tol(self) -> float:
        return self.get_option("rank_tol", C.DEFAULT_RANK_TOL)

    @property
    def residual_tol(self) -> float:
        return self.get_option("residual_tol", C.DEFAULT_RESIDUAL_TOL)

    @property
    def seed(self) -> int:
        return self.get_option("seed", C.DEFAULT_SEED)

    @property
    def slope_tol(self) -> float:
        return self.get_option("slope_tol", C.DEFAULT_SLOPE_TOL)
