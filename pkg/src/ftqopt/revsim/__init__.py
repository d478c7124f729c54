from .basis import (
    BACKEND,
    DirtyAncillaError,
    SimulationError,
    from_signed,
    run_basis,
    run_batch,
    signed_array,
    to_signed,
)
from .dense import (
    DEFAULT_QUBIT_CAP,
    DimensionError,
    block_extract,
    check_dimension,
    eigenphases,
    householder_from_zero,
    unitarity_defect,
)

__all__ = [
    "BACKEND",
    "DirtyAncillaError",
    "SimulationError",
    "run_basis",
    "run_batch",
    "to_signed",
    "from_signed",
    "signed_array",
    "DEFAULT_QUBIT_CAP",
    "DimensionError",
    "block_extract",
    "check_dimension",
    "eigenphases",
    "householder_from_zero",
    "unitarity_defect",
]
