"""SIC POVMs and mutually unbiased bases over finite phase spaces."""
from .finite_field import FieldElement, FieldSpec, make_field
from .operator_core import OperatorFamily, VerificationReport, verify_family

__all__ = ["FieldElement", "FieldSpec", "make_field", "OperatorFamily", "VerificationReport", "verify_family"]
__version__ = "0.1.0"
