"""Exact arithmetic in Z[zeta_p] and Q(zeta_p).

Elements are stored as coefficient vectors over the basis
``1, zeta, ..., zeta^(p-2)``; ``zeta^(p-1)`` is always rewritten as
``-(1 + zeta + ... + zeta^(p-2))``. Rationals are plain
:class:`fractions.Fraction` values.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

__all__ = [
    "SUPPORTED_PRIMES",
    "CycloInt",
    "CycloRat",
    "pi_element",
    "p_over_pi",
    "norm",
    "is_unit",
    "galois",
]

# Coefficient growth stays small for these; enlarge deliberately.
SUPPORTED_PRIMES = frozenset({3, 5, 7})


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def _check_prime(p: int) -> None:
    if not isinstance(p, int) or p < 3 or not _is_prime(p):
        raise ValueError(f"p must be an odd prime, got {p!r}")
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"p={p} is outside the supported set {sorted(SUPPORTED_PRIMES)}")


def _reduce(p: int, full: Sequence) -> tuple:
    """Fold a polynomial in zeta (any length) into canonical coefficients."""
    acc = [0] * p
    for k, c in enumerate(full):
        if c:
            acc[k % p] += c
    top = acc[p - 1]
    return tuple(acc[k] - top for k in range(p - 1))


class _Cyclo:
    __slots__ = ("p", "coeffs")
    _coerce = staticmethod(int)

    def __init__(self, p: int, coeffs: Iterable = ()):
        coeffs = tuple(self._coerce(c) for c in coeffs)
        if len(coeffs) > p - 1:
            coeffs = _reduce(p, coeffs)
        else:
            coeffs = coeffs + (self._coerce(0),) * (p - 1 - len(coeffs))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def from_int(cls, p: int, n) -> "_Cyclo":
        return cls(p, (n,))

    @classmethod
    def zeta_power(cls, p: int, k: int) -> "_Cyclo":
        full = [0] * p
        full[k % p] = 1
        return cls(p, _reduce(p, full))

    def _lift(self, other):
        if isinstance(other, _Cyclo):
            if other.p != self.p:
                raise ValueError(f"mismatched primes {self.p} and {other.p}")
            return other
        if isinstance(other, (int, Fraction)):
            return type(self).from_int(self.p, other) if isinstance(other, int) \
                else CycloRat.from_int(self.p, other)
        return NotImplemented

    def _result_type(self, other):
        if isinstance(self, CycloRat) or isinstance(other, CycloRat):
            return CycloRat
        return CycloInt

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        cls = self._result_type(other)
        return cls(self.p, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return type(self)(self.p, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        p = self.p
        full = [0] * (2 * p - 3)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        full[i + j] += a * b
        return self._result_type(other)(p, _reduce(p, full))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = type(self).from_int(self.p, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        if isinstance(other, _Cyclo):
            return self.p == other.p and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        if not any(self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash((self.p, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def __repr__(self):
        return f"{type(self).__name__}({self.p}, {list(self.coeffs)})"

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if k == 0:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def galois(self, k: int):
        """Image under ``zeta -> zeta^k``."""
        p = self.p
        if k % p == 0:
            raise ValueError(f"k={k} is not invertible mod {p}")
        full = [0] * p
        for j, c in enumerate(self.coeffs):
            full[(j * k) % p] += c
        return type(self)(p, _reduce(p, full))

    def conjugates(self):
        return [self.galois(k) for k in range(1, self.p)]

    def norm(self):
        prod = reduce(lambda a, b: a * b, self.conjugates())
        assert prod.is_rational(), "norm must be rational"
        return prod.coeffs[0]

    def inverse(self) -> "CycloRat":
        conj = self.conjugates()
        n = reduce(lambda a, b: a * b, conj)
        if not n:
            raise ZeroDivisionError("inverse of zero")
        others = reduce(lambda a, b: a * b, conj[1:], CycloRat.from_int(self.p, 1))
        return CycloRat(self.p, (Fraction(c) / n.coeffs[0] for c in others.coeffs))

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other


class CycloInt(_Cyclo):
    """Element of Z[zeta_p]; ``CycloInt(3, (0, 1))`` is omega."""

    __slots__ = ()
    _coerce = staticmethod(int)

    def __init__(self, p: int, coeffs: Iterable[int] = ()):
        _check_prime(p)
        coeffs = tuple(coeffs)
        for c in coeffs:
            if isinstance(c, Fraction) and c.denominator != 1:
                raise ValueError(f"non-integral coefficient {c}")
        super().__init__(p, coeffs)

    def to_rat(self) -> "CycloRat":
        return CycloRat(self.p, self.coeffs)


class CycloRat(_Cyclo):
    """Element of Q(zeta_p) with Fraction coefficients."""

    __slots__ = ()
    _coerce = staticmethod(Fraction)

    def __init__(self, p: int, coeffs: Iterable = ()):
        _check_prime(p)
        super().__init__(p, coeffs)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def to_int(self) -> CycloInt:
        if not self.is_integral():
            raise ValueError(f"{self!r} is not in Z[zeta]")
        return CycloInt(self.p, (int(c) for c in self.coeffs))


def pi_element(p: int) -> CycloInt:
    """``zeta - 1``."""
    return CycloInt(p, (-1, 1))


def p_over_pi(p: int) -> CycloInt:
    """The exact quotient ``p / (zeta - 1)`` in Z[zeta].

    From ``Phi_p(x) - p = (x - 1) * sum_j (p-1-j) x^j`` evaluated at zeta.
    """
    q = CycloInt(p, (-(p - 1 - j) for j in range(p - 1)))
    if q * pi_element(p) != p:
        raise ArithmeticError(f"p/pi check failed for p={p}")
    return q


def norm(a: _Cyclo):
    return a.norm()


def is_unit(a: CycloInt) -> bool:
    return a.norm() in (1, -1)


def galois(a: _Cyclo, k: int):
    return a.galois(k)
