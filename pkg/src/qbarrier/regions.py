"""Amplitude regions on the unit sphere, sampling, and constrained extremization.

A region is the unit sphere ``sum |z_j|^2 = 1`` intersected with constraints
``sum_{j in S} |z_j|^2 (rel) bound``. In probability coordinates
``q_j = |z_j|^2`` every region is a polytope inside the simplex and the
phases are unconstrained, which is what the sampler and optimizers exploit.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize

from .cpoly import CPolynomial, partial_derivative

RELATIONS = (">=", ">", "<=", "<", "=")
STRICT_SHRINK = 1e-9
MEMBERSHIP_TOL = 1e-9


class EmptyRegionError(ValueError):
    pass


@dataclass(frozen=True)
class AmplitudeConstraint:
    indices: tuple[int, ...]
    rel: str
    bound: float

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if not idx:
            raise ValueError("constraint needs at least one index")
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        if not 0.0 <= float(self.bound) <= 1.0:
            raise ValueError(f"bound {self.bound} outside [0, 1]")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "bound", float(self.bound))

    def __str__(self) -> str:
        lhs = " + ".join(f"|z{j}|^2" for j in self.indices)
        return f"{lhs} {self.rel} {self.bound:g}"


@dataclass(frozen=True)
class Region:
    dim: int
    constraints: tuple[AmplitudeConstraint, ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("region dimension must be >= 1")
        cons = tuple(self.constraints)
        for c in cons:
            if max(c.indices) >= self.dim:
                raise ValueError(f"constraint {c} indexes beyond dim {self.dim}")
        object.__setattr__(self, "constraints", cons)

    @classmethod
    def build(cls, dim: int, *specs: tuple[Iterable[int], str, float]) -> "Region":
        """``Region.build(2, ([0], ">=", 0.9))``"""
        return cls(dim, tuple(AmplitudeConstraint(tuple(i), r, b) for i, r, b in specs))

    def __str__(self) -> str:
        if not self.constraints:
            return f"sphere(d={self.dim})"
        return " and ".join(map(str, self.constraints))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "constraints": [
                {"indices": list(c.indices), "rel": c.rel, "bound": c.bound} for c in self.constraints
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Region":
        return cls(
            int(data["dim"]),
            tuple(
                AmplitudeConstraint(tuple(c["indices"]), c["rel"], c["bound"])
                for c in data.get("constraints", [])
            ),
        )


def contains(r: Region, z, tol: float = MEMBERSHIP_TOL, sphere_tol: float | None = None) -> bool:
    return bool(contains_many(r, np.asarray(z, dtype=complex).reshape(1, -1), tol, sphere_tol)[0])


def contains_many(
    r: Region, Z: np.ndarray, tol: float = MEMBERSHIP_TOL, sphere_tol: float | None = None
) -> np.ndarray:
    """Membership of each row of ``Z``; every relation is relaxed by ``tol``.

    The unit-norm check uses ``sphere_tol`` (default ``tol``), so callers can
    test amplitude constraints exactly while still allowing roundoff in the norm.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[1] != r.dim:
        raise ValueError(f"dimension mismatch: region dim {r.dim}, points {Z.shape}")
    q = Z.real**2 + Z.imag**2
    ok = np.abs(q.sum(axis=1) - 1.0) <= (tol if sphere_tol is None else sphere_tol)
    for c in r.constraints:
        s = q[:, list(c.indices)].sum(axis=1)
        b = c.bound
        if c.rel == ">=":
            ok &= s >= b - tol
        elif c.rel == ">":
            ok &= s > b - tol
        elif c.rel == "<=":
            ok &= s <= b + tol
        elif c.rel == "<":
            ok &= s < b + tol
        else:
            ok &= np.abs(s - b) <= tol
    return ok


# --- polytope in probability coordinates --------------------------------------


class _Polytope(NamedTuple):
    origin: np.ndarray  # a point satisfying the equalities
    basis: np.ndarray  # columns span the equality null space
    A: np.ndarray  # A y <= c in basis coordinates
    c: np.ndarray
    center: np.ndarray  # Chebyshev center in basis coordinates
    radius: float


def _polytope(r: Region, shrink: float = STRICT_SHRINK) -> _Polytope:
    d = r.dim
    G, h, E, f = [], [], [np.ones(d)], [1.0]
    for con in r.constraints:
        row = np.zeros(d)
        row[list(con.indices)] = 1.0
        if con.rel == ">=":
            G.append(-row), h.append(-con.bound)
        elif con.rel == ">":
            G.append(-row), h.append(-(con.bound + shrink))
        elif con.rel == "<=":
            G.append(row), h.append(con.bound)
        elif con.rel == "<":
            G.append(row), h.append(con.bound - shrink)
        else:
            E.append(row), f.append(con.bound)
    G.extend(-np.eye(d))
    h.extend([0.0] * d)
    G, h, E, f = np.array(G), np.array(h), np.array(E), np.array(f)

    origin = np.linalg.lstsq(E, f, rcond=None)[0]
    if np.max(np.abs(E @ origin - f)) > 1e-12:
        raise EmptyRegionError(f"equality constraints are inconsistent in {r}")
    basis = null_space(E)
    A, c = G @ basis, h - G @ origin
    k = basis.shape[1]
    if k == 0:
        if np.all(c >= -1e-12):
            return _Polytope(origin, basis, A, c, np.zeros(0), 0.0)
        raise EmptyRegionError(f"region {r} is empty")
    # Chebyshev center: maximise r subject to A y + r |A_i| <= c
    norms = np.linalg.norm(A, axis=1)
    res = linprog(
        np.r_[np.zeros(k), -1.0],
        A_ub=np.c_[A, norms],
        b_ub=c,
        bounds=[(None, None)] * k + [(0.0, 1.0)],
        method="highs",
    )
    if res.status != 0:
        raise EmptyRegionError(f"region {r} is empty")
    return _Polytope(origin, basis, A, c, res.x[:k], float(res.x[k]))


def _states(q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    q = np.clip(q, 0.0, None)
    q /= q.sum(axis=1, keepdims=True)
    phases = rng.uniform(0.0, 2 * np.pi, size=q.shape)
    return np.sqrt(q) * np.exp(1j * phases)


def sample(r: Region, count: int, seed: int = 0, chains: int = 256, burn_in: int = 64, thin: int = 4) -> np.ndarray:
    """Draw ``count`` states from ``r``, shape ``(count, dim)``.

    Probabilities ``|z_j|^2`` are spread uniformly over the region's polytope
    in the simplex by vectorised hit-and-run chains started at its Chebyshev
    centre; phases are independent and uniform. Emptiness is decided exactly
    by a linear program before any sampling.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    P = _polytope(r)
    rng = np.random.default_rng(seed)
    k = P.basis.shape[1]
    if count == 0:
        return np.zeros((0, r.dim), dtype=complex)
    if k == 0 or P.radius <= 1e-12:
        q = np.tile(P.origin + P.basis @ P.center, (count, 1))
        return _states(q, rng)

    chains = max(1, min(chains, count))
    draws = -(-count // chains)
    y = np.tile(P.center, (chains, 1))
    out = np.empty((draws, chains, k))
    for step in range(burn_in + draws * thin):
        u = rng.standard_normal((chains, k))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        slack = np.clip(P.c - y @ P.A.T, 0.0, None)
        rate = u @ P.A.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = slack / rate
        hi = np.where(rate > 1e-15, ratio, np.inf).min(axis=1)
        lo = np.where(rate < -1e-15, ratio, -np.inf).max(axis=1)
        hi, lo = np.maximum(hi, 0.0), np.minimum(lo, 0.0)
        y = y + (lo + (hi - lo) * rng.random(chains))[:, None] * u
        if step >= burn_in and (step - burn_in) % thin == thin - 1:
            out[(step - burn_in) // thin] = y
    q = P.origin + out.reshape(-1, k)[:count] @ P.basis.T
    return _states(q, rng)


# --- extremization --------------------------------------------------------------


class Extremum(NamedTuple):
    value: float
    witness: np.ndarray


def _check_real(p: CPolynomial) -> None:
    scale = max(1.0, p.max_abs_coefficient())
    for e, c in p.items():
        if abs(c - p.coefficient(e.swapped()).conjugate()) > 1e-12 * scale:
            raise ValueError("polynomial is not real-valued (coefficients are not conjugate-symmetric)")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QBARRIER_THREADS", "1")))
    except ValueError:
        return 1


def extremize(
    p: CPolynomial,
    r: Region,
    direction: str = "min",
    *,
    grid: int = 2001,
    starts: int = 64,
    samples: int = 100_000,
    seed: int = 0,
) -> Extremum:
    """Numerical min or max of the real polynomial ``p`` over ``r``.

    d = 2 uses a dense (probability, relative phase) grid followed by local
    refinement. Larger d uses multi-start SLSQP seeded from region samples,
    and the best sample itself is kept as a floor on the answer.
    """
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    if p.n != r.dim:
        raise ValueError(f"dimension mismatch: polynomial n={p.n}, region dim={r.dim}")
    _check_real(p)
    sign = 1.0 if direction == "min" else -1.0
    if r.dim == 2:
        value, z = _extremize_qubit(p, r, sign, grid)
    else:
        value, z = _extremize_multistart(p, r, sign, starts, samples, seed)
    return Extremum(sign * value, z)


def _interval_2d(r: Region) -> tuple[float, float]:
    """Feasible range of ``|z0|^2`` for a two-dimensional region (exact, no LP)."""
    lo, hi = 0.0, 1.0
    for con in r.constraints:
        b = con.bound
        if con.rel == ">":
            b += STRICT_SHRINK
        elif con.rel == "<":
            b -= STRICT_SHRINK
        if con.indices == (0, 1):
            ok = {">=": 1.0 >= b, ">": 1.0 >= b, "<=": 1.0 <= b, "<": 1.0 <= b, "=": b == 1.0}[con.rel]
            if not ok:
                raise EmptyRegionError(f"region {r} is empty")
            continue
        # s = x for index 0, s = 1 - x for index 1
        flip = con.indices == (1,)
        if con.rel == "=":
            x = 1.0 - b if flip else b
            lo, hi = max(lo, x), min(hi, x)
        elif (con.rel in (">=", ">")) != flip:
            lo = max(lo, 1.0 - b if flip else b)
        else:
            hi = min(hi, 1.0 - b if flip else b)
    if lo > hi:
        raise EmptyRegionError(f"region {r} is empty")
    return lo, hi


def _qubit_state(x: float, theta: float, phi: float = 0.0) -> np.ndarray:
    return np.array([np.sqrt(x) * np.exp(1j * phi), np.sqrt(1.0 - x) * np.exp(1j * (phi + theta))])


def _extremize_qubit(p: CPolynomial, r: Region, sign: float, grid: int) -> tuple[float, np.ndarray]:
    lo, hi = _interval_2d(r)
    balanced = all(e.is_balanced for e, _ in p.items())
    nphi = 1 if balanced else 64
    nx = grid if balanced else max(401, grid // 5)
    nth = grid if balanced else max(401, grid // 5)
    xs = np.linspace(lo, hi, nx) if hi > lo else np.array([lo])
    ths = np.linspace(0.0, 2 * np.pi, nth, endpoint=False)
    phis = np.linspace(0.0, 2 * np.pi, nphi, endpoint=False)

    # each term is c * x^{r0/2} (1-x)^{r1/2} e^{i m1 theta} e^{i m phi}: separable in (x, theta)
    terms = list(p.items())
    radial = np.empty((nx, len(terms)), dtype=complex)
    angular = np.empty((len(terms), nth), dtype=complex)
    total_m = np.empty(len(terms))
    for t, (e, c) in enumerate(terms):
        radial[:, t] = c * xs ** ((e.alpha[0] + e.beta[0]) / 2) * (1.0 - xs) ** ((e.alpha[1] + e.beta[1]) / 2)
        angular[t] = np.exp(1j * (e.alpha[1] - e.beta[1]) * ths)
        total_m[t] = sum(e.alpha) - sum(e.beta)

    best = (np.inf, 0.0, 0.0, 0.0)
    for phi in phis:
        vals = sign * (radial * np.exp(1j * total_m * phi)) @ angular
        vals = vals.real
        i = int(np.argmin(vals))
        ix, it = divmod(i, nth)
        if vals.flat[i] < best[0]:
            best = (float(vals.flat[i]), xs[ix], ths[it], phi)

    def f(v):
        return sign * p(_qubit_state(v[0], v[1], v[2] if len(v) > 2 else 0.0)).real

    x0 = [best[1], best[2]] + ([] if balanced else [best[3]])
    bounds = [(lo, hi), (None, None)] + ([] if balanced else [(None, None)])
    res = minimize(f, x0, method="L-BFGS-B", bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-12})
    v = list(res.x) + [0.0] * (3 - len(res.x))
    cand = [best[1:], (min(max(v[0], lo), hi), v[1], v[2])]
    vals = [f(list(c)) for c in cand]
    j = int(np.argmin(vals))
    x, th, phi = cand[j]
    return vals[j], _qubit_state(x, th, phi)


def _extremize_multistart(
    p: CPolynomial, r: Region, sign: float, starts: int, samples: int, seed: int
) -> tuple[float, np.ndarray]:
    d = r.dim
    Z = sample(r, samples, seed)
    vals = sign * p.evaluate_many(Z).real
    order = np.argsort(vals, kind="stable")
    rng = np.random.default_rng(seed + 1)
    n_best = min(len(order), (3 * starts) // 4)
    extra = rng.choice(len(order), size=min(len(order), starts - n_best), replace=False)
    start_idx = list(order[:n_best]) + [i for i in extra if i not in set(order[:n_best])]

    grads = [(partial_derivative(p, j)) for j in range(d)]

    def split(v):
        return v[:d] + 1j * v[d:]

    def fun(v):
        return sign * p(split(v)).real

    def jac(v):
        z = split(v)
        w = np.array([g(z) for g in grads])
        return sign * np.r_[2 * w.real, -2 * w.imag]

    cons = [{"type": "eq", "fun": lambda v: v @ v - 1.0, "jac": lambda v: 2 * v}]
    for con in r.constraints:
        mask = np.zeros(d)
        mask[list(con.indices)] = 1.0
        mask2 = np.r_[mask, mask]
        b = con.bound
        if con.rel in (">=", ">"):
            b = b + (STRICT_SHRINK if con.rel == ">" else 0.0)
            cons.append({"type": "ineq", "fun": lambda v, m=mask2, b=b: m @ (v * v) - b, "jac": lambda v, m=mask2: 2 * m * v})
        elif con.rel in ("<=", "<"):
            b = b - (STRICT_SHRINK if con.rel == "<" else 0.0)
            cons.append({"type": "ineq", "fun": lambda v, m=mask2, b=b: b - m @ (v * v), "jac": lambda v, m=mask2: -2 * m * v})
        else:
            cons.append({"type": "eq", "fun": lambda v, m=mask2, b=b: m @ (v * v) - b, "jac": lambda v, m=mask2: 2 * m * v})

    def local(i):
        z0 = Z[i]
        res = minimize(
            fun, np.r_[z0.real, z0.imag], jac=jac, constraints=cons, method="SLSQP",
            options={"ftol": 1e-15, "maxiter": 200},
        )
        z = split(res.x)
        z = z / np.linalg.norm(z)
        if not contains(r, z, MEMBERSHIP_TOL):
            return None
        return sign * p(z).real, z

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(local, start_idx))

    best_val, best_z = float(vals[order[0]]), Z[order[0]]
    for res in results:
        if res is not None and res[0] < best_val:
            best_val, best_z = res
    return best_val, best_z
