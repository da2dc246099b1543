"""2-adic lambda-invariants, root numbers and corank certificates for quadratic twists."""

from .curve import CurveProfile, WeierstrassCurve, build_profile
from .errors import TwistlabError
from .twist import certify, classify_prime, construct_d_with_lambda, matsuno_lambda, twist_root_number

__version__ = "0.1.0"

__all__ = [
    "CurveProfile",
    "TwistlabError",
    "WeierstrassCurve",
    "build_profile",
    "certify",
    "classify_prime",
    "construct_d_with_lambda",
    "matsuno_lambda",
    "twist_root_number",
]
