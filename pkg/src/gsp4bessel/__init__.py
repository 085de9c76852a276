"""Exact Bessel functions and zeta integrals for the twisted Steinberg representation of GSp(4)."""

from .besselcore import BesselContext, CosetAddress, b_eval, b_table, dim_and_testvector, make_context, reduce
from .padicbase import FieldData, LElement, build_field_data
from .scalars import RationalFunction, Scalar
from .zeta import TauSpec, ZetaContext, make_zeta_context, verify_integral_theorem

__version__ = "0.1.0"

__all__ = [
    "BesselContext",
    "CosetAddress",
    "FieldData",
    "LElement",
    "RationalFunction",
    "Scalar",
    "TauSpec",
    "ZetaContext",
    "b_eval",
    "b_table",
    "build_field_data",
    "dim_and_testvector",
    "make_context",
    "make_zeta_context",
    "reduce",
    "verify_integral_theorem",
]
