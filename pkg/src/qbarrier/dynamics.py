"""Schrodinger dynamics ``dz/dt = -i H z`` (hbar = 1)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .cpoly import CPolynomial, ExponentPair, partial_derivative

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    matrix: np.ndarray
    name: str = ""
    _eig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
            raise ValueError(f"Hamiltonian must be a square matrix, got shape {M.shape}")
        if np.max(np.abs(M - M.conj().T)) > HERMITIAN_TOL:
            raise ValueError("Hamiltonian is not Hermitian")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        w, V = np.linalg.eigh(M)
        object.__setattr__(self, "_eig", (w, V))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eig[0]

    def __eq__(self, other):
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


BUILTIN = {
    "hadamard": [[1, 1], [1, -1]],
    "phase": [[1, 0], [0, -1]],
    "cnot": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, -1], [0, 0, -1, 1]],
}


def builtin_hamiltonian(name: str) -> Hamiltonian:
    try:
        return Hamiltonian(np.array(BUILTIN[name], dtype=complex), name=name)
    except KeyError:
        raise ValueError(f"unknown Hamiltonian {name!r}; choose from {sorted(BUILTIN)}") from None


def as_state(z, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a unit-norm amplitude vector and return it as a complex array."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    if abs(np.vdot(z, z).real - 1.0) > tol:
        raise ValueError(f"state is not unit norm (|z|^2 = {np.vdot(z, z).real!r})")
    return z


def _check_dim(H: Hamiltonian, z: np.ndarray) -> None:
    if z.shape[-1] != H.dim:
        raise ValueError(f"dimension mismatch: Hamiltonian is {H.dim}x{H.dim}, state has {z.shape[-1]}")


def vector_field(H: Hamiltonian, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    _check_dim(H, z)
    return -1j * (H.matrix @ z)


def evolve(H: Hamiltonian, z0, t: float) -> np.ndarray:
    """Exact ``exp(-i H t) z0`` through the eigendecomposition of ``H``."""
    z0 = as_state(z0)
    _check_dim(H, z0)
    if t == 0:
        return z0.copy()
    w, V = H._eig
    return V @ (np.exp(-1j * w * t) * (V.conj().T @ z0))


def evolve_many(H: Hamiltonian, z0, times) -> np.ndarray:
    """States at each time in ``times``, shape ``(len(times), dim)``."""
    z0 = as_state(z0)
    _check_dim(H, z0)
    times = np.asarray(times, dtype=float)
    w, V = H._eig
    coeffs = V.conj().T @ z0
    states = (np.exp(-1j * np.outer(times, w)) * coeffs) @ V.T
    states[times == 0] = z0
    return states


def trajectory(H: Hamiltonian, z0, t_max: float, steps: int) -> list[tuple[float, np.ndarray]]:
    if steps < 2:
        raise ValueError("a trajectory needs at least 2 steps")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    times = np.linspace(0.0, t_max, steps)
    return list(zip(times.tolist(), evolve_many(H, z0, times)))


def lie_derivative(p: CPolynomial, H: Hamiltonian) -> CPolynomial:
    """Time derivative of ``p(z, zb)`` along ``dz/dt = -i H z``.

    Sum over j of ``dp/dz_j * f_j + dp/dzb_j * conj(f_j)`` with ``f = -i H z``,
    where ``conj(f_j) = sum_l i conj(H[j, l]) zb_l``.
    """
    n = p.n
    if n != H.dim:
        raise ValueError(f"dimension mismatch: polynomial n={n}, Hamiltonian dim={H.dim}")
    zero = (0,) * n
    units = [tuple(1 if i == l else 0 for i in range(n)) for l in range(n)]
    terms: dict[ExponentPair, complex] = {}

    def accumulate(d: CPolynomial, row: np.ndarray, conj_side: bool) -> None:
        for l in range(n):
            coeff = 1j * row[l].conjugate() if conj_side else -1j * row[l]
            if coeff == 0:
                continue
            shift = ExponentPair(zero, units[l]) if conj_side else ExponentPair(units[l], zero)
            for e, c in d.items():
                key = e * shift
                terms[key] = terms.get(key, 0j) + c * coeff

    M = H.matrix
    for j in range(n):
        accumulate(partial_derivative(p, j), M[j], conj_side=False)
        accumulate(partial_derivative(p, j, conjugate_var=True), M[j], conj_side=True)
    return CPolynomial(n, terms)


def bloch_vector(z) -> np.ndarray:
    """``(2 Re(z0 zb1), 2 Im(zb0 z1), |z0|^2 - |z1|^2)`` for a qubit state or rows of states."""
    z = np.asarray(z, dtype=complex)
    z0, z1 = z[..., 0], z[..., 1]
    return np.stack(
        [2 * (z0 * z1.conj()).real, 2 * (z0.conj() * z1).imag, abs(z0) ** 2 - abs(z1) ** 2],
        axis=-1,
    )


def measure_bloch_period(H: Hamiltonian, z0, t_max: float = 20.0, steps: int = 200_001) -> float | None:
    """First time the Bloch vector of ``z0`` comes back to its start.

    Returns None for a fixed point or if no return happens before ``t_max``.
    Only defined for d = 2.
    """
    if H.dim != 2:
        raise ValueError("Bloch period is only defined for single-qubit systems")
    times = np.linspace(0.0, t_max, steps)
    b = bloch_vector(evolve_many(H, z0, times))
    dist = np.linalg.norm(b - b[0], axis=1)
    if dist.max() < 1e-9:
        return None
    far = np.argmax(dist > 0.5 * dist.max())
    inner = dist[1:-1]
    minima = np.flatnonzero(
        (inner <= dist[:-2]) & (inner <= dist[2:]) & (inner < 1e-3 * dist.max() + 1e-6)
    ) + 1
    minima = minima[minima > far]
    if minima.size:
        i = minima[0]
        res = minimize_scalar(
            lambda t: np.linalg.norm(bloch_vector(evolve(H, z0, t)) - b[0]),
            bounds=(times[i - 1], times[i + 1]), method="bounded", options={"xatol": 1e-12},
        )
        return float(res.x)
    return None
