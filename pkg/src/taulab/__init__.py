"""Exact tau functions of lower-triangular group elements on multi-component fermionic Fock space.

Tau values are computed by independent routes (determinant and residue
formulas, generalized minors, a wedge-space engine) in exact rational
arithmetic, and the bilinear difference systems they satisfy are checked
with zero tolerance.
"""

from .algebra import Scalar, to_scalar
from .conditions import CoefficientArray, random_array
from .looprestrict import QCoefficients, birkhoff_factorize, lift, restrict
from .relations import RelationReport
from .tau import Grid, TauTable, build_table

__all__ = [
    "CoefficientArray",
    "Grid",
    "QCoefficients",
    "RelationReport",
    "Scalar",
    "TauTable",
    "birkhoff_factorize",
    "build_table",
    "lift",
    "random_array",
    "restrict",
    "to_scalar",
]
__version__ = "0.1.0"
