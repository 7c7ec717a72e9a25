"""Registry of the single-qubit and two-qubit case studies."""

from __future__ import annotations

from dataclasses import dataclass

from .cpoly import ExponentPair
from .dynamics import Hamiltonian, builtin_hamiltonian
from .regions import Region
from .synth import BarrierCandidate, SynthesisProblem, TemplateSpec


def _diag(dim: int, j: int) -> ExponentPair:
    unit = tuple(1 if i == j else 0 for i in range(dim))
    return ExponentPair(unit, unit)


def _cross(dim: int, j: int, l: int) -> ExponentPair:
    """Key of z_j * zb_l."""
    return ExponentPair(
        tuple(1 if i == j else 0 for i in range(dim)), tuple(1 if i == l else 0 for i in range(dim))
    )


@dataclass(frozen=True)
class CaseStudy:
    name: str
    hamiltonian: Hamiltonian
    initial: Region
    unsafe: Region
    expected_barrier: BarrierCandidate
    notes: str = ""

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def problem(self, degree: int = 2, balanced_only: bool = True, samples: int = 200, seed: int = 0) -> SynthesisProblem:
        return SynthesisProblem(
            self.hamiltonian, self.initial, self.unsafe,
            TemplateSpec(self.dim, degree, balanced_only), samples=samples, seed=seed,
        )


def _unit_barrier(dim: int, indices, constant: float = 0.9) -> BarrierCandidate:
    return BarrierCandidate(dim, {_diag(dim, j): -1.0 for j in indices}, constant)


_CNOT_ERRATUM = (
    "unsafe set corrected to |z0|^2 + |z1|^2 >= 0.11; the originally stated set "
    "|z1|^2 + |z2|^2 >= 0.11 intersects the initial set and contradicts the reference barrier"
)


def _build() -> dict[str, CaseStudy]:
    had, ph, cx = (builtin_hamiltonian(n) for n in ("hadamard", "phase", "cnot"))
    cases = [
        CaseStudy(
            "hadamard", had,
            Region.build(2, ([0], ">=", 0.9)),
            Region.build(2, ([0], "<=", 0.1)),
            BarrierCandidate(
                2,
                {_diag(2, 0): -3.0, _cross(2, 0, 1): -1.0, _cross(2, 1, 0): -1.0, _diag(2, 1): -1.0},
                11 / 5,
            ),
            "single qubit under the Hadamard Hamiltonian",
        ),
        CaseStudy(
            "phase-z1", ph,
            Region.build(2, ([0], ">=", 0.9)),
            Region.build(2, ([1], ">", 0.11)),
            _unit_barrier(2, [0]),
            "phase gate, start near |0>, avoid |1>",
        ),
        CaseStudy(
            "phase-z2", ph,
            Region.build(2, ([1], ">=", 0.9)),
            Region.build(2, ([0], ">", 0.11)),
            _unit_barrier(2, [1]),
            "phase gate, start near |1>, avoid |0>",
        ),
        CaseStudy(
            "cnot-c00", cx,
            Region.build(4, ([0], ">=", 0.9)),
            Region.build(4, ([1, 2, 3], ">=", 0.11)),
            _unit_barrier(4, [0]),
            "CNOT, start near |00>",
        ),
        CaseStudy(
            "cnot-c01", cx,
            Region.build(4, ([1], ">=", 0.9)),
            Region.build(4, ([0, 2, 3], ">=", 0.11)),
            _unit_barrier(4, [1]),
            "CNOT, start near |01>",
        ),
        CaseStudy(
            "cnot-c10", cx,
            Region.build(4, ([2], ">=", 0.9)),
            Region.build(4, ([0, 1], ">=", 0.11)),
            _unit_barrier(4, [2, 3]),
            "CNOT, start near |10>; erratum: " + _CNOT_ERRATUM,
        ),
        CaseStudy(
            "cnot-c11", cx,
            Region.build(4, ([3], ">=", 0.9)),
            Region.build(4, ([0, 1], ">=", 0.11)),
            _unit_barrier(4, [2, 3]),
            "CNOT, start near |11>; erratum: " + _CNOT_ERRATUM,
        ),
    ]
    return {c.name: c for c in cases}


CASES: dict[str, CaseStudy] = _build()


def get_case(name: str) -> CaseStudy:
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; known cases: {', '.join(CASES)}") from None
