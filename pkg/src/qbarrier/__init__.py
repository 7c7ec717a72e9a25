"""Complex-valued barrier certificates for Schrodinger dynamics."""

from .certify import certify, convex_combination
from .cpoly import CPolynomial, ExponentPair
from .dynamics import Hamiltonian, builtin_hamiltonian
from .regions import Region
from .synth import BarrierCandidate, SynthesisError, SynthesisProblem, TemplateSpec, normalize, synthesize

__all__ = [
    "BarrierCandidate",
    "CPolynomial",
    "ExponentPair",
    "Hamiltonian",
    "Region",
    "SynthesisError",
    "SynthesisProblem",
    "TemplateSpec",
    "builtin_hamiltonian",
    "certify",
    "convex_combination",
    "normalize",
    "synthesize",
]
