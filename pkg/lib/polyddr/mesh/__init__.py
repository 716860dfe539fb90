from .polymesh import (  # noqa: F401
    PolyMesh,
    betti_numbers,
    inner_point,
    load_mesh,
    regularity,
    write_mesh,
)
from .factory import FAMILIES, MeshFactory, generate_mesh  # noqa: F401
