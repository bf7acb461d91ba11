"""Joint spectral radius of finite matrix sets via lifted conitopes."""

from .bounds import BruteForceBounds, SmpCandidate, brute_force_bounds, classical_upper, smp_search
from .certificate import CertBlock, Certificate, VerificationReport, verify_certificate
from .conitope import Conitope, Vertex
from .engine import JsrResult, Options, algorithm1, algorithm2
from .errors import BudgetError, InputError, JsrError, NumericError, StateError
from .io import parse_certificate, parse_problem
from .lift import SymPoint, lift_operator, lift_set, lift_vector
from .matrix_core import MatrixSet, product_eval, spectral_radius

__version__ = "0.1.0"

__all__ = [
    "BruteForceBounds",
    "BudgetError",
    "CertBlock",
    "Certificate",
    "Conitope",
    "InputError",
    "JsrError",
    "JsrResult",
    "MatrixSet",
    "NumericError",
    "Options",
    "SmpCandidate",
    "StateError",
    "SymPoint",
    "VerificationReport",
    "Vertex",
    "algorithm1",
    "algorithm2",
    "brute_force_bounds",
    "classical_upper",
    "lift_operator",
    "lift_set",
    "lift_vector",
    "parse_certificate",
    "parse_problem",
    "product_eval",
    "smp_search",
    "spectral_radius",
    "verify_certificate",
]
