"""`polyharm` package: exact verification of deformed Nakauchi maps.

The main entry points are exposed at package level so callers can do
`from polyharm import construct_nakauchi` or run the command line through
`python -m polyharm` / `run_polyharm.py`.
"""

from .deformation import (
    biharmonic_admissible,
    biharmonic_t,
    enumerate_admissible,
    triharmonic_admissible,
    triharmonic_roots,
)
from .nakauchi import construct_nakauchi, verify_nakauchi
from .residuals import bitension_report, tension_residual, tritension_report

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "biharmonic_admissible",
    "biharmonic_t",
    "bitension_report",
    "construct_nakauchi",
    "enumerate_admissible",
    "tension_residual",
    "triharmonic_admissible",
    "triharmonic_roots",
    "tritension_report",
    "verify_nakauchi",
]
