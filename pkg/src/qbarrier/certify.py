"""Validation of barrier candidates against the convex barrier conditions.

Each condition is checked independently of how the candidate was produced:
reality of B, the differential condition (as a symbolic identity or sampled
inequality), the sign conditions on the initial and unsafe regions, and
simulated trajectories as empirical safety evidence. Extremization is
numerical, so the best verdict is "numerically-certified", never a proof.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .cpoly import CPolynomial, conjugate
from .dynamics import NORM_TOL, Hamiltonian, evolve_many, lie_derivative
from .regions import Region, contains_many, extremize, sample
from .synth import BarrierCandidate, SynthesisProblem

SYMBOLIC_TOL = 1e-8
SIGN_TOL = 1e-9
REALITY_TOL = 1e-10

CERTIFIED = "numerically-certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

Barrier = Union[BarrierCandidate, CPolynomial]


def _poly(candidate: Barrier) -> CPolynomial:
    return candidate.polynomial() if isinstance(candidate, BarrierCandidate) else candidate


def _hermitian_part(p: CPolynomial) -> CPolynomial:
    return (p + conjugate(p)) * 0.5


def _state_list(z) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(z, dtype=complex).reshape(-1)]


@dataclass
class RealityResult:
    passed: bool
    ties_ok: bool
    max_imag_residual: float
    witness: np.ndarray | None = None


@dataclass
class DifferentialResult:
    passed: bool
    mode: str
    residual: float
    witness: np.ndarray | None = None
    flagged: bool = False  # passed only in sampled-inequality mode


@dataclass
class RegionResult:
    passed: bool
    value: float  # max of B over Z0, or min of B over Zu
    witness: np.ndarray


@dataclass
class TrajectoryResult:
    passed: bool
    trajectories: int
    worst_b: float
    unsafe_hits: int
    witness: np.ndarray | None = None
    witness_time: float | None = None
    witness_trajectory: int | None = None


@dataclass
class ValidationReport:
    reality: RealityResult
    differential: DifferentialResult
    initial: RegionResult
    unsafe: RegionResult
    trajectories: TrajectoryResult
    verdict: str
    refuted_by: str | None = None
    witness: np.ndarray | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        def clean(obj):
            if isinstance(obj, dict):
                return {k: clean(v) for k, v in obj.items()}
            if isinstance(obj, np.ndarray):
                return _state_list(obj)
            if isinstance(obj, (np.floating, np.bool_)):
                return obj.item()
            return obj

        return clean(asdict(self))


def check_reality(candidate: Barrier, samples: int = 1000, seed: int = 0) -> RealityResult:
    p = _poly(candidate)
    ties_ok = all(p.coefficient(e.swapped()) == c.conjugate() for e, c in p.items())
    Z = sample(Region(p.n), samples, seed)
    imag = np.abs(p.evaluate_many(Z).imag)
    i = int(np.argmax(imag))
    residual = float(imag[i])
    return RealityResult(ties_ok and residual <= REALITY_TOL, ties_ok, residual, Z[i])


def check_differential(
    candidate: Barrier, H: Hamiltonian, mode: str = "symbolic-zero", samples: int = 1000, seed: int = 0
) -> DifferentialResult:
    p = _poly(candidate)
    deriv = lie_derivative(p, H)
    if mode == "symbolic-zero":
        residual = deriv.max_abs_coefficient()
        return DifferentialResult(residual <= SYMBOLIC_TOL, mode, residual)
    if mode == "sampled-inequality":
        Z = sample(Region(p.n), samples, seed)
        vals = deriv.evaluate_many(Z).real
        i = int(np.argmax(vals))
        return DifferentialResult(bool(vals[i] <= SIGN_TOL), mode, float(vals[i]), Z[i])
    raise ValueError(f"unknown differential mode {mode!r}")


def check_initial(candidate: Barrier, initial: Region, seed: int = 0) -> RegionResult:
    """B <= 0 on the initial region (up to the sign tolerance)."""
    ext = extremize(_hermitian_part(_poly(candidate)), initial, "max", seed=seed)
    return RegionResult(bool(ext.value <= SIGN_TOL), float(ext.value), ext.witness)


def check_unsafe(candidate: Barrier, unsafe: Region, seed: int = 0) -> RegionResult:
    """B > 0 on the unsafe region; strict regions are evaluated on their shrunk closure."""
    ext = extremize(_hermitian_part(_poly(candidate)), unsafe, "min", seed=seed)
    return RegionResult(bool(ext.value > SIGN_TOL), float(ext.value), ext.witness)


def check_trajectories(
    candidate: Barrier,
    H: Hamiltonian,
    initial: Region,
    unsafe: Region,
    t_max: float = 10.0,
    count: int = 100,
    seed: int = 0,
    points: int = 1000,
) -> TrajectoryResult:
    p = _poly(candidate)
    times = np.linspace(0.0, t_max, points)
    worst, hits = -np.inf, 0
    witness = witness_t = witness_k = None
    for k, z0 in enumerate(sample(initial, count, seed)):
        states = evolve_many(H, z0, times)
        vals = p.evaluate_many(states).real
        worst = max(worst, float(vals.max()))
        inside = contains_many(unsafe, states, tol=0.0, sphere_tol=NORM_TOL)
        if inside.any():
            hits += 1
            if witness is None:
                i = int(np.argmax(inside))
                witness, witness_t, witness_k = states[i], float(times[i]), k
    passed = worst <= SIGN_TOL and hits == 0
    return TrajectoryResult(passed, count, worst, hits, witness, witness_t, witness_k)


def certify(
    candidate: Barrier,
    problem: SynthesisProblem,
    t_max: float = 10.0,
    trajectories: int = 100,
    seed: int | None = None,
) -> ValidationReport:
    seed = problem.seed if seed is None else seed
    H = problem.hamiltonian
    p = _poly(candidate)
    if p.n != problem.dim:
        raise ValueError(f"dimension mismatch: barrier has n={p.n}, problem has dim {problem.dim}")
    notes = []

    reality = check_reality(p, seed=seed)
    diff = check_differential(p, H, "symbolic-zero")
    if not diff.passed:
        sampled = check_differential(p, H, "sampled-inequality", seed=seed)
        if sampled.passed:
            sampled.flagged = True
            notes.append("dB/dt is not identically zero; accepted in sampled-inequality mode only")
        diff = sampled
    initial = check_initial(p, problem.initial, seed)
    unsafe = check_unsafe(p, problem.unsafe, seed)
    traj = check_trajectories(p, H, problem.initial, problem.unsafe, t_max, trajectories, seed)

    failures = [
        (name, res)
        for name, res in (("reality", reality), ("differential", diff), ("initial", initial), ("unsafe", unsafe))
        if not res.passed
    ]
    if not failures:
        if traj.passed:
            return ValidationReport(reality, diff, initial, unsafe, traj, CERTIFIED, notes=notes)
        notes.append("internal inconsistency: conditions passed but a trajectory check failed")
        return ValidationReport(reality, diff, initial, unsafe, traj, INCONCLUSIVE, notes=notes)
    if traj.unsafe_hits:
        by, witness = "trajectories", traj.witness
    else:
        by, witness = failures[0][0], failures[0][1].witness
    return ValidationReport(reality, diff, initial, unsafe, traj, REFUTED, by, witness, notes)


def convex_combination(b1: BarrierCandidate, b2: BarrierCandidate, lam: float) -> BarrierCandidate:
    """``lam * b1 + (1 - lam) * b2``, coefficient-wise including the constants."""
    if b1.dim != b2.dim:
        raise ValueError(f"dimension mismatch: {b1.dim} != {b2.dim}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    keys = list(b1.coefficients) + [k for k in b2.coefficients if k not in b1.coefficients]
    coeffs = {
        k: lam * b1.coefficients.get(k, 0.0) + (1.0 - lam) * b2.coefficients.get(k, 0.0) for k in keys
    }
    return BarrierCandidate(b1.dim, coeffs, lam * b1.constant + (1.0 - lam) * b2.constant)
