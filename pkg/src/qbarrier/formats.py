"""JSON encodings for Hamiltonians, problems, barriers and reports."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cpoly import CPolynomial, ExponentPair
from .dynamics import BUILTIN, Hamiltonian, builtin_hamiltonian
from .regions import Region
from .synth import BarrierCandidate, SynthesisProblem, TemplateSpec


def hamiltonian_to_json(H: Hamiltonian) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in H.matrix]


def hamiltonian_from_json(data) -> Hamiltonian:
    if isinstance(data, str):
        return builtin_hamiltonian(data)
    M = np.array(data, dtype=float)
    if M.ndim != 3 or M.shape[2] != 2:
        raise ValueError("Hamiltonian must be a nested array of [re, im] pairs")
    return Hamiltonian(M[..., 0] + 1j * M[..., 1])


def problem_to_dict(problem: SynthesisProblem) -> dict:
    H = problem.hamiltonian
    return {
        "hamiltonian": H.name if H.name in BUILTIN else hamiltonian_to_json(H),
        "initial": problem.initial.to_dict(),
        "unsafe": problem.unsafe.to_dict(),
        "template": {"degree": problem.template.degree, "balanced": problem.template.balanced_only},
        "samples": problem.samples,
        "seed": problem.seed,
    }


def problem_from_dict(data: dict) -> SynthesisProblem:
    H = hamiltonian_from_json(data["hamiltonian"])
    tmpl = data.get("template", {})
    return SynthesisProblem(
        H,
        Region.from_dict(data["initial"]),
        Region.from_dict(data["unsafe"]),
        TemplateSpec(H.dim, int(tmpl.get("degree", 2)), bool(tmpl.get("balanced", True))),
        samples=int(data.get("samples", 200)),
        seed=int(data.get("seed", 0)),
    )


def barrier_from_dict(data: dict) -> BarrierCandidate | CPolynomial:
    """Parse a barrier file.

    Files whose coefficients break the reality ties come back as a plain
    polynomial so that certification can report them instead of rejecting
    the input outright.
    """
    try:
        return BarrierCandidate.from_dict(data)
    except ValueError as exc:
        if "tie" not in str(exc):
            raise
    n = int(data["dim"])
    terms = {ExponentPair.from_key(k): float(v) for k, v in data["coefficients"].items()}
    terms[ExponentPair.constant(n)] = float(data.get("constant", 0.0))
    return CPolynomial(n, terms)


def read_json(path: str | Path):
    with open(path) as fh:
        return json.load(fh)


def write_json(path: str | Path, data) -> None:
    # float repr is the shortest string that round-trips exactly
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
