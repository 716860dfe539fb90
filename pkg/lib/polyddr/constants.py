from typing import Dict, List, Optional


DEFAULT_ADJOINT_SLOPE_TOL = 0.4
DEFAULT_COLOR_STYLE: Dict[str, Optional[int]] = {
    "check": 6,
    "config": 2,
    "elapsed": 11,
    "error": 1,
    "failed": 1,
    "header": None,
    "mesh": 3,
    "passed": 2,
    "uncertified": 208,
    "warning": 1,
}
DEFAULT_BOUNDEDNESS_SPREAD = 2.0
DEFAULT_COMMUTATION_TOL = 1e-11
DEFAULT_CONFIG_FILE = "polyddr.yml"
DEFAULT_CONSISTENCY_TOL = 1e-9
DEFAULT_FAMILIES: Dict[str, List[int]] = {
    "consistency": [4, 8, 16],
    "poincare": [2, 4, 8],
}
DEFAULT_GAP_RATIO = 1e3
DEFAULT_K_MAX = 4
DEFAULT_LOCAL_EXACTNESS_CELLS = 5
DEFAULT_MAX_DENSE_DOFS = 20000
DEFAULT_MEMBERSHIP_TOL = 1e-10
DEFAULT_POINCARE_SPREAD = 0.2
DEFAULT_PROBES = 20
DEFAULT_QUADRATURE_MARGIN = 8
DEFAULT_RANDOM_FIELDS = 20
DEFAULT_RANK_TOL = 1e-10
DEFAULT_RESIDUAL_TOL = 1e-12
DEFAULT_SEED = 0
DEFAULT_SLOPE_TOL = 0.3

MESH_FAMILIES: List[str] = [
    "cartesian",
    "split_triangles",
    "distorted_quads",
    "agglomerated_nonconvex",
    "ring_one_hole",
    "ring_two_holes",
]
REPORT_FORMATS: List[str] = ["json", "csv", "md"]
STUDY_KINDS: List[str] = [
    "potential",
    "gradient",
    "rot",
    "product_grad",
    "product_rot",
    "adjoint_grad",
    "adjoint_rot",
]
