import numpy as np
import pytest
from hypothesis import strategies as st

from qbarrier.cpoly import CPolynomial, ExponentPair
from qbarrier.cases import CASES


def hadamard_b() -> CPolynomial:
    """Non-constant part of the Hadamard barrier: -3|z0|^2 - z0 zb1 - zb0 z1 - |z1|^2."""
    return CPolynomial(2, {
        ExponentPair((1, 0), (1, 0)): -3,
        ExponentPair((1, 0), (0, 1)): -1,
        ExponentPair((0, 1), (1, 0)): -1,
        ExponentPair((0, 1), (0, 1)): -1,
    })


def random_unit_states(rng, count, d):
    z = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_hermitian(rng, d):
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (M + M.conj().T) / 2


@st.composite
def polynomials(draw, n=2, max_degree=3, max_terms=6, integer=False):
    exps = st.tuples(
        st.tuples(*[st.integers(0, max_degree)] * n), st.tuples(*[st.integers(0, max_degree)] * n)
    ).filter(lambda e: sum(e[0]) + sum(e[1]) <= max_degree)
    if integer:
        coeff = st.builds(complex, st.integers(-5, 5), st.integers(-5, 5))
    else:
        coeff = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
    terms = draw(st.dictionaries(exps, coeff, max_size=max_terms))
    return CPolynomial(n, {ExponentPair(*e): c for e, c in terms.items()})


@pytest.fixture(scope="session")
def cases():
    return CASES


def grid_range(p: CPolynomial, lo: float, hi: float, resolution: int = 4001, rows: int = 250) -> tuple[float, float]:
    """Brute-force (min, max) of a real polynomial over qubit states with lo <= |z0|^2 <= hi.

    States are (sqrt(x), sqrt(1 - x) e^{i theta}) on a resolution x resolution
    grid; for balanced p the global phase is irrelevant. Each monomial is
    evaluated directly from its exponents, independently of the library.
    """
    xs = np.linspace(lo, hi, resolution)
    phase = np.exp(1j * np.linspace(0.0, 2 * np.pi, resolution))[None, :]
    low, high = np.inf, -np.inf
    for start in range(0, resolution, rows):
        x = xs[start:start + rows, None]
        z = (np.sqrt(x) + 0j * phase, np.sqrt(1 - x) * phase)
        total = np.zeros((x.shape[0], resolution), dtype=complex)
        for e, c in p.items():
            term = np.full(total.shape, c, dtype=complex)
            for j in range(2):
                if e.alpha[j]:
                    term = term * z[j] ** e.alpha[j]
                if e.beta[j]:
                    term = term * np.conj(z[j]) ** e.beta[j]
            total += term
        low, high = min(low, total.real.min()), max(high, total.real.max())
    return float(low), float(high)


def grid_oracle(p: CPolynomial, lo: float, hi: float, direction: str, resolution: int = 4001) -> float:
    low, high = grid_range(p, lo, hi, resolution)
    return low if direction == "min" else high


def random_balanced_quadratic(rng, n=2) -> CPolynomial:
    """Random real-valued polynomial in the balanced degree-2 template."""
    M = random_hermitian(rng, n)
    terms = {}
    for j in range(n):
        for l in range(n):
            a = tuple(int(i == j) for i in range(n))
            b = tuple(int(i == l) for i in range(n))
            terms[ExponentPair(a, b)] = M[l, j] if j != l else M[j, j].real
    return CPolynomial(n, terms)
