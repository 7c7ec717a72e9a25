"""Sparse polynomials in complex variables z_j and their conjugates.

A monomial ``z^alpha * conj(z)^beta`` is keyed by an :class:`ExponentPair`.
Conjugate variables are independent formal symbols: differentiation treats
``z_j`` and ``zb_j`` separately and :func:`conjugate` is a structural swap of
the two exponent vectors, never a numerical operation.
"""

from __future__ import annotations

import itertools
from math import comb
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np


class ExponentPair(NamedTuple):
    alpha: tuple[int, ...]
    beta: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def degree(self) -> int:
        return sum(self.alpha) + sum(self.beta)

    @property
    def is_balanced(self) -> bool:
        return sum(self.alpha) == sum(self.beta)

    def swapped(self) -> "ExponentPair":
        return ExponentPair(self.beta, self.alpha)

    def __mul__(self, other):  # type: ignore[override]
        if not isinstance(other, ExponentPair):
            return NotImplemented
        return ExponentPair(
            tuple(a + b for a, b in zip(self.alpha, other.alpha)),
            tuple(a + b for a, b in zip(self.beta, other.beta)),
        )

    @classmethod
    def make(cls, alpha: Iterable[int], beta: Iterable[int]) -> "ExponentPair":
        alpha, beta = tuple(int(a) for a in alpha), tuple(int(b) for b in beta)
        if len(alpha) != len(beta) or not alpha:
            raise ValueError("alpha and beta must have equal length n >= 1")
        if any(e < 0 for e in alpha + beta):
            raise ValueError("exponents must be natural numbers")
        return cls(alpha, beta)

    @classmethod
    def constant(cls, n: int) -> "ExponentPair":
        return cls((0,) * n, (0,) * n)

    def to_key(self) -> str:
        """Barrier-file key, e.g. ``"1,0|0,1"`` for z_0 * zb_1."""
        return ",".join(map(str, self.alpha)) + "|" + ",".join(map(str, self.beta))

    @classmethod
    def from_key(cls, key: str) -> "ExponentPair":
        try:
            left, right = key.split("|")
            return cls.make((int(s) for s in left.split(",")), (int(s) for s in right.split(",")))
        except ValueError as exc:
            raise ValueError(f"malformed exponent key {key!r}") from exc


def grlex_key(e: ExponentPair) -> tuple:
    # graded, then larger leading exponent first over the concatenated (alpha, beta)
    return (e.degree, tuple(-x for x in e.alpha + e.beta))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def enumerate_exponents(n: int, k: int) -> list[ExponentPair]:
    """All (alpha, beta) with ``|alpha| + |beta| <= k``, in graded-lex order.

    There are ``C(2n + k, k)`` of them.
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    out = [
        ExponentPair(v[:n], v[n:])
        for d in range(k + 1)
        for v in _compositions(d, 2 * n)
    ]
    out.sort(key=grlex_key)
    assert len(out) == comb(2 * n + k, k)
    return out


class CPolynomial:
    """Immutable sparse polynomial ``sum a[alpha, beta] z^alpha zb^beta``."""

    __slots__ = ("_n", "_terms")

    def __init__(self, n: int, terms: Mapping[ExponentPair, complex] | None = None):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        clean: dict[ExponentPair, complex] = {}
        for e, c in (terms or {}).items():
            if not isinstance(e, ExponentPair):
                e = ExponentPair.make(*e)
            if e.n != n:
                raise ValueError(f"term {e} does not have dimension {n}")
            c = complex(c)
            if c != 0:
                clean[e] = c
        self._n = n
        self._terms = dict(sorted(clean.items(), key=lambda kv: grlex_key(kv[0])))

    # construction helpers

    @classmethod
    def zero(cls, n: int) -> "CPolynomial":
        return cls(n)

    @classmethod
    def const(cls, n: int, value: complex) -> "CPolynomial":
        return cls(n, {ExponentPair.constant(n): value})

    @classmethod
    def monomial(cls, n: int, alpha: Iterable[int], beta: Iterable[int], coeff: complex = 1) -> "CPolynomial":
        return cls(n, {ExponentPair.make(alpha, beta): coeff})

    @classmethod
    def z(cls, n: int, j: int) -> "CPolynomial":
        return cls.monomial(n, _unit(n, j), (0,) * n)

    @classmethod
    def zb(cls, n: int, j: int) -> "CPolynomial":
        return cls.monomial(n, (0,) * n, _unit(n, j))

    # accessors

    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[ExponentPair, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, e: ExponentPair) -> complex:
        return self._terms.get(e, 0j)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def degree(self) -> int:
        return max((e.degree for e in self._terms), default=0)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CPolynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._n, tuple(self._terms.items())))

    # ring operations

    def __add__(self, other):
        if isinstance(other, CPolynomial):
            return add(self, other)
        if isinstance(other, (int, float, complex)):
            return add(self, CPolynomial.const(self._n, other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "CPolynomial":
        return scale(self, -1)

    def __sub__(self, other):
        if isinstance(other, (CPolynomial, int, float, complex)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return scale(self, other)
        if isinstance(other, CPolynomial):
            return multiply(self, other)
        return NotImplemented

    __rmul__ = __mul__

    # evaluation

    def __call__(self, z) -> complex:
        return evaluate(self, z)

    def evaluate_many(self, Z: np.ndarray) -> np.ndarray:
        """Vectorised evaluation at each row of ``Z`` (shape ``(m, n)``)."""
        Z = np.asarray(Z, dtype=complex)
        if Z.ndim != 2 or Z.shape[1] != self._n:
            raise ValueError(f"expected points of shape (m, {self._n}), got {Z.shape}")
        Zc = Z.conj()
        out = np.zeros(Z.shape[0], dtype=complex)
        for e, c in self._terms.items():
            term = np.full(Z.shape[0], c, dtype=complex)
            for j in range(self._n):
                if e.alpha[j]:
                    term *= Z[:, j] ** e.alpha[j]
                if e.beta[j]:
                    term *= Zc[:, j] ** e.beta[j]
            out += term
        return out

    def __repr__(self) -> str:
        return f"CPolynomial({self._n}, {to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)


def _unit(n: int, j: int) -> tuple[int, ...]:
    if not 0 <= j < n:
        raise IndexError(f"variable index {j} out of range for n={n}")
    return tuple(1 if i == j else 0 for i in range(n))


def _check_dims(p: CPolynomial, q: CPolynomial) -> None:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} != {q.n}")


def add(p: CPolynomial, q: CPolynomial) -> CPolynomial:
    _check_dims(p, q)
    terms = dict(p.items())
    for e, c in q.items():
        terms[e] = terms.get(e, 0j) + c
    return CPolynomial(p.n, terms)


def scale(p: CPolynomial, s: complex) -> CPolynomial:
    return CPolynomial(p.n, {e: c * s for e, c in p.items()})


def multiply_monomial(p: CPolynomial, e: ExponentPair, coeff: complex = 1) -> CPolynomial:
    if e.n != p.n:
        raise ValueError(f"dimension mismatch: {p.n} != {e.n}")
    return CPolynomial(p.n, {f * e: c * coeff for f, c in p.items()})


def multiply(p: CPolynomial, q: CPolynomial) -> CPolynomial:
    _check_dims(p, q)
    terms: dict[ExponentPair, complex] = {}
    for e, c in p.items():
        for f, d in q.items():
            g = e * f
            terms[g] = terms.get(g, 0j) + c * d
    return CPolynomial(p.n, terms)


def conjugate(p: CPolynomial) -> CPolynomial:
    """Map ``a z^alpha zb^beta`` to ``conj(a) z^beta zb^alpha``."""
    return CPolynomial(p.n, {e.swapped(): c.conjugate() for e, c in p.items()})


def partial_derivative(p: CPolynomial, index: int, conjugate_var: bool = False) -> CPolynomial:
    """Power-rule derivative with respect to ``z_index`` (or ``zb_index``)."""
    if not 0 <= index < p.n:
        raise IndexError(f"variable index {index} out of range for n={p.n}")
    terms: dict[ExponentPair, complex] = {}
    for e, c in p.items():
        exps = e.beta if conjugate_var else e.alpha
        power = exps[index]
        if power == 0:
            continue
        lowered = exps[:index] + (power - 1,) + exps[index + 1:]
        key = ExponentPair(e.alpha, lowered) if conjugate_var else ExponentPair(lowered, e.beta)
        terms[key] = terms.get(key, 0j) + c * power
    return CPolynomial(p.n, terms)


def evaluate(p: CPolynomial, z) -> complex:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != p.n:
        raise ValueError(f"dimension mismatch: polynomial has n={p.n}, point has {z.shape[0]}")
    zc = z.conj()
    total = 0j
    for e, c in p.items():
        term = c
        for j in range(p.n):
            if e.alpha[j]:
                term *= z[j] ** e.alpha[j]
            if e.beta[j]:
                term *= zc[j] ** e.beta[j]
        total += term
    return complex(total)


def is_real_valued(p: CPolynomial) -> bool:
    """Coefficient test: ``a[alpha, beta] == conj(a[beta, alpha])`` for every key."""
    return all(p.coefficient(e.swapped()) == c.conjugate() for e, c in p.items())


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r}{c.imag:+.17g}j)"


def to_text(p: CPolynomial) -> str:
    """Render as ``coeff * z0^a0 * zb0^b0 + ...`` (unit exponents shown as ``z0``)."""
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.items():
        factors = [_fmt_coeff(c)]
        for j in range(p.n):
            for name, power in ((f"z{j}", e.alpha[j]), (f"zb{j}", e.beta[j])):
                if power == 1:
                    factors.append(name)
                elif power > 1:
                    factors.append(f"{name}^{power}")
        parts.append(" * ".join(factors))
    return " + ".join(parts)


def hermitian_form(M: np.ndarray) -> CPolynomial:
    """The quadratic form ``z^dagger M z = sum_jl M[j, l] zb_j z_l``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    terms = {}
    for j in range(n):
        for l in range(n):
            if M[j, l] != 0:
                terms[ExponentPair(_unit(n, l), _unit(n, j))] = M[j, l]
    return CPolynomial(n, terms)
