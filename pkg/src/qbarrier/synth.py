"""Barrier synthesis by linear programming.

Pipeline: differential matrix -> reality ties -> LP for the coefficient
vector -> constant from constrained extremization. The differential
condition is imposed as an identity (dB/dt is the zero polynomial), which is
what turns the search into a linear program.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np
from scipy.linalg import null_space, orth
from scipy.optimize import linprog

from .cpoly import CPolynomial, ExponentPair, enumerate_exponents, grlex_key
from .dynamics import Hamiltonian, lie_derivative
from .regions import Region, extremize, sample

log = logging.getLogger(__name__)

DIFF_RESIDUAL_TOL = 1e-10


class SynthesisError(Exception):
    """Algorithm failure at a named stage, with diagnostics for the report."""

    def __init__(self, stage: str, message: str, diagnostics: dict | None = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class TemplateSpec:
    dim: int
    degree: int = 2
    balanced_only: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("template dimension must be >= 1")
        if self.degree < 1:
            raise ValueError("template degree must be >= 1")

    def monomials(self) -> list[ExponentPair]:
        """Template columns; the constant monomial is never included."""
        return [
            e
            for e in enumerate_exponents(self.dim, self.degree)
            if e.degree > 0 and (e.is_balanced or not self.balanced_only)
        ]


@dataclass
class LinearConstraintSystem:
    columns: list[ExponentPair]
    row_keys: list[ExponentPair]
    matrix: np.ndarray  # complex differential matrix, rows indexed by row_keys
    symmetry_pairs: list[tuple[ExponentPair, ExponentPair]] = field(default_factory=list)
    bounds: tuple[float, float] = (-1.0, 1.0)

    @property
    def diff_rows(self) -> np.ndarray:
        """Real and imaginary parts stacked: real ``a`` has ``A a = 0`` iff this times ``a`` is 0."""
        return np.vstack([self.matrix.real, self.matrix.imag])


@dataclass(frozen=True)
class BarrierCandidate:
    """``B(z) = constant + sum a[alpha, beta] z^alpha zb^beta`` with real, tied coefficients."""

    dim: int
    coefficients: Mapping[ExponentPair, float]
    constant: float = 0.0

    def __post_init__(self):
        coeffs = {}
        for e, v in self.coefficients.items():
            if not isinstance(e, ExponentPair):
                e = ExponentPair.from_key(e) if isinstance(e, str) else ExponentPair.make(*e)
            if e.n != self.dim:
                raise ValueError(f"coefficient key {e} does not match dim {self.dim}")
            if e.degree == 0:
                raise ValueError("the constant belongs in `constant`, not in the coefficient map")
            if isinstance(v, complex):
                if v.imag != 0:
                    raise ValueError("barrier coefficients must be real")
                v = v.real
            if float(v) != 0.0:
                coeffs[e] = float(v)
        for e, v in coeffs.items():
            if coeffs.get(e.swapped(), 0.0) != v:
                raise ValueError(f"reality tie violated: a{e} != a{e.swapped()}")
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items(), key=lambda kv: grlex_key(kv[0]))))
        object.__setattr__(self, "constant", float(self.constant))

    def polynomial(self) -> CPolynomial:
        terms: dict[ExponentPair, complex] = dict(self.coefficients)
        terms[ExponentPair.constant(self.dim)] = self.constant
        return CPolynomial(self.dim, terms)

    def b_polynomial(self) -> CPolynomial:
        """The non-constant part ``b``."""
        return CPolynomial(self.dim, dict(self.coefficients))

    def scaled(self, factor: float) -> "BarrierCandidate":
        return BarrierCandidate(
            self.dim, {e: v * factor for e, v in self.coefficients.items()}, self.constant * factor
        )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "constant": self.constant,
            "coefficients": {e.to_key(): v for e, v in self.coefficients.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BarrierCandidate":
        return cls(
            int(data["dim"]),
            {ExponentPair.from_key(k): float(v) for k, v in data.get("coefficients", {}).items()},
            float(data.get("constant", 0.0)),
        )


@dataclass(frozen=True)
class SynthesisProblem:
    hamiltonian: Hamiltonian
    initial: Region
    unsafe: Region
    template: TemplateSpec
    samples: int = 200
    seed: int = 0

    def __post_init__(self):
        dims = {self.hamiltonian.dim, self.initial.dim, self.unsafe.dim, self.template.dim}
        if len(dims) != 1:
            raise ValueError(f"inconsistent problem dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim


def build_diff_matrix(H: Hamiltonian, template: TemplateSpec) -> LinearConstraintSystem:
    """Column j holds the coefficients of the Lie derivative of template monomial j."""
    if H.dim != template.dim:
        raise ValueError(f"dimension mismatch: H is {H.dim}, template is {template.dim}")
    columns = template.monomials()
    derivs = [lie_derivative(CPolynomial(template.dim, {e: 1.0}), H) for e in columns]
    row_keys = sorted({e for d in derivs for e, _ in d.items()}, key=grlex_key)
    index = {e: i for i, e in enumerate(row_keys)}
    A = np.zeros((len(row_keys), len(columns)), dtype=complex)
    for j, d in enumerate(derivs):
        for e, c in d.items():
            A[index[e], j] = c
    return LinearConstraintSystem(columns, row_keys, A)


def build_reality_constraints(template: TemplateSpec) -> list[tuple[ExponentPair, ExponentPair]]:
    """One tie ``a[alpha, beta] = a[beta, alpha]`` per unordered pair with alpha != beta."""
    seen, ties = set(), []
    for e in template.monomials():
        s = e.swapped()
        if s == e or s in seen:
            continue
        seen.add(e)
        ties.append((e, s))
    return ties


class CoefficientSolution(NamedTuple):
    coefficients: dict[ExponentPair, float]
    margin: float  # sampled su - s0 after projection
    lp_margin: float  # optimal LP value before projection
    residual: float  # max |A a| after projection


def _orbits(columns: list[ExponentPair], ties) -> tuple[np.ndarray, list[list[int]]]:
    pos = {e: i for i, e in enumerate(columns)}
    partner = {}
    for e, s in ties:
        partner[pos[e]], partner[pos[s]] = pos[s], pos[e]
    groups, assigned = [], set()
    for i in range(len(columns)):
        if i in assigned:
            continue
        g = [i] + ([partner[i]] if i in partner else [])
        assigned.update(g)
        groups.append(g)
    T = np.zeros((len(columns), len(groups)))
    for k, g in enumerate(groups):
        T[g, k] = 1.0
    return T, groups


def solve_coefficients(
    problem: SynthesisProblem,
    system: LinearConstraintSystem | None = None,
    extra_initial: np.ndarray | None = None,
    extra_unsafe: np.ndarray | None = None,
) -> CoefficientSolution:
    """LP over the tied coefficients maximising the sampled separation margin.

    Variables are one real value per tie orbit plus the two levels s0, su:
    maximise ``su - s0`` subject to ``A a = 0``, ``-1 <= a <= 1``,
    ``b(a, z) <= s0`` on initial samples and ``b(a, z) >= su`` on unsafe
    samples. The LP optimum is projected onto the exact null space of the
    differential system afterwards. ``extra_initial``/``extra_unsafe`` append
    further region points (counterexamples) to the sampled sets.
    """
    system = system or build_diff_matrix(problem.hamiltonian, problem.template)
    ties = system.symmetry_pairs or build_reality_constraints(problem.template)
    system.symmetry_pairs = ties
    cols = system.columns
    T, groups = _orbits(cols, ties)
    reduced = system.diff_rows @ T

    N = null_space(reduced) if reduced.size else np.eye(T.shape[1])
    if N.shape[1] == 0:
        raise SynthesisError(
            "build_diff_matrix",
            "no dB/dt = 0 barrier at this degree (differential matrix has full column rank)",
            {"columns": len(cols)},
        )

    Z0 = sample(problem.initial, problem.samples, problem.seed)
    Zu = sample(problem.unsafe, problem.samples, problem.seed + 1)
    if extra_initial is not None and len(extra_initial):
        Z0 = np.vstack([Z0, extra_initial])
    if extra_unsafe is not None and len(extra_unsafe):
        Zu = np.vstack([Zu, extra_unsafe])
    monos = [CPolynomial(problem.dim, {e: 1.0}) for e in cols]
    phi0 = np.column_stack([m.evaluate_many(Z0).real for m in monos]) @ T
    phiu = np.column_stack([m.evaluate_many(Zu).real for m in monos]) @ T

    k = T.shape[1]
    A_ub = np.vstack([
        np.c_[phi0, -np.ones(len(Z0)), np.zeros(len(Z0))],
        np.c_[-phiu, np.zeros(len(Zu)), np.ones(len(Zu))],
    ])
    b_ub = np.zeros(A_ub.shape[0])
    eq = orth(reduced.T).T if reduced.size and np.any(reduced) else np.zeros((0, k))
    A_eq = np.c_[eq, np.zeros((eq.shape[0], 2))] if eq.shape[0] else None
    b_eq = np.zeros(eq.shape[0]) if eq.shape[0] else None
    lo, hi = system.bounds
    res = linprog(
        np.r_[np.zeros(k), 1.0, -1.0],
        A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        bounds=[(lo, hi)] * k + [(None, None)] * 2,
        method="highs",
    )
    if res.status != 0:
        raise SynthesisError("solve_coefficients", f"linear program failed: {res.message}")
    lp_margin = -float(res.fun)

    x = N @ (N.T @ res.x[:k])
    x[np.abs(x) < 1e-13] = 0.0
    if np.max(np.abs(x)) < 1e-12:
        # The LP optimum was the trivial vector; fall back to a null-space direction.
        x = N[:, 0].copy()
        x[np.abs(x) < 1e-13] = 0.0
    x /= max(1.0, np.max(np.abs(x)) / hi)
    residual = float(np.max(np.abs(reduced @ x))) if reduced.size else 0.0
    if residual > DIFF_RESIDUAL_TOL:
        raise SynthesisError("solve_coefficients", f"projection residual {residual:.3e} exceeds tolerance")

    margin = float((phiu @ x).min() - (phi0 @ x).max())
    coeffs = {cols[i]: float(x[g]) for g, members in enumerate(groups) for i in members if x[g] != 0.0}
    log.debug("LP margin %.6g, projected sample margin %.6g, residual %.3g", lp_margin, margin, residual)
    return CoefficientSolution(coeffs, margin, lp_margin, residual)


class ConstantResult(NamedTuple):
    constant: float
    unsafe_max: float
    initial_witness: np.ndarray
    unsafe_witness: np.ndarray

    @property
    def gap(self) -> float:
        return self.constant - self.unsafe_max


def compute_constant(
    coefficients: Mapping[ExponentPair, float], initial: Region, unsafe: Region, seed: int = 0
) -> ConstantResult:
    """``c = min over Z0 of -b``; succeed only if ``c > max over Zu of -b``."""
    neg_b = CPolynomial(initial.dim, {e: -v for e, v in coefficients.items()})
    lo = extremize(neg_b, initial, "min", seed=seed)
    hi = extremize(neg_b, unsafe, "max", seed=seed)
    result = ConstantResult(lo.value, hi.value, lo.witness, hi.witness)
    if not lo.value > hi.value:
        raise SynthesisError(
            "compute_constant",
            f"the function b is unsuitable: min over Z0 of -b = {lo.value:.6g} "
            f"is not above max over Zu of -b = {hi.value:.6g}",
            {
                "initial_min": lo.value,
                "unsafe_max": hi.value,
                "initial_witness": lo.witness,
                "unsafe_witness": hi.witness,
            },
        )
    return result


def _phase_variants(z: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """``z`` with independent phases per component; region membership is unchanged."""
    phases = np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(count, z.shape[0])))
    return np.vstack([z, phases * z])


def synthesize(problem: SynthesisProblem, max_rounds: int = 40, variants: int = 16) -> BarrierCandidate:
    """Run the full pipeline and return a barrier, or raise :class:`SynthesisError`.

    When the constant check fails although the LP separated the samples, the
    two extremizer witnesses (plus phase-rotated copies) join the sample sets
    and the LP is solved again, for at most ``max_rounds`` rounds.
    """
    system = build_diff_matrix(problem.hamiltonian, problem.template)
    system.symmetry_pairs = build_reality_constraints(problem.template)
    rng = np.random.default_rng(problem.seed + 2)
    extra0 = np.zeros((0, problem.dim), dtype=complex)
    extrau = np.zeros((0, problem.dim), dtype=complex)
    for round_ in range(1, max_rounds + 1):
        sol = solve_coefficients(problem, system, extra0, extrau)
        try:
            const = compute_constant(sol.coefficients, problem.initial, problem.unsafe, problem.seed)
        except SynthesisError as err:
            err.diagnostics.update(sample_margin=sol.margin, rounds=round_)
            if sol.margin <= 0 or round_ == max_rounds:
                raise
            log.debug("round %d: %s", round_, err.message)
            extra0 = np.vstack([extra0, _phase_variants(err.diagnostics["initial_witness"], variants, rng)])
            extrau = np.vstack([extrau, _phase_variants(err.diagnostics["unsafe_witness"], variants, rng)])
            continue
        log.info(
            "synthesised barrier in %d round(s): constant %.6g, gap %.6g", round_, const.constant, const.gap
        )
        return BarrierCandidate(problem.dim, sol.coefficients, const.constant)
    raise AssertionError("unreachable")


def normalize(candidate: BarrierCandidate) -> BarrierCandidate:
    """Divide by the largest coefficient magnitude so coefficients land in [-1, 1]."""
    m = max((abs(v) for v in candidate.coefficients.values()), default=0.0)
    if m == 0.0:
        raise ValueError("cannot normalise an all-zero coefficient map")
    if m == 1.0:
        return candidate
    return BarrierCandidate(
        candidate.dim, {e: v / m for e, v in candidate.coefficients.items()}, candidate.constant / m
    )
