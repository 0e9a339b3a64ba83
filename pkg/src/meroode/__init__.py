"""Meromorphic solutions of three families of second-order autonomous ODEs.

Type1  w w'' - w'^2 + P(w) = 0
Type2  w'' + c w'^2 + P(w) = 0
Type3  w'' + c w' + P(w) = 0

The package decides whether nonconstant meromorphic solutions exist, emits
them in closed form (exponential, hyperbolic and Weierstrass elliptic
building blocks), and verifies them numerically: ODE residuals, Laurent
obstructions at movable poles, and Nevanlinna characteristic growth.
"""

__version__ = "0.1.0"

from .classify import ClassificationReport, SolutionFamily, classify, classify_type1, classify_type2, classify_type3
from .ode import OdeSpec

__all__ = [
    "ClassificationReport",
    "OdeSpec",
    "SolutionFamily",
    "classify",
    "classify_type1",
    "classify_type2",
    "classify_type3",
    "__version__",
]
