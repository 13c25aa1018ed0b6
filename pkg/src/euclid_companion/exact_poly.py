"""Exact Euclid numbers and Euclid polynomials.

Coefficients are Python integers.  Large products go through Kronecker
substitution: the coefficient vectors are packed into single integers,
multiplied with GMP, and unpacked again.  This is what makes ``E_15``
(degree 16384, coefficients of ~11000 bits) a matter of seconds.

The shifted basis ``u = lambda + 1/2`` is handled with dyadic rationals.
With ``f_n = E_n - 1/2`` the recurrence becomes ``f_{n+1} = f_n**2 + 1/4``,
so every shifted coefficient has a power-of-two denominator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

import gmpy2
import mpmath
import numpy as np

__all__ = [
    "BigIntPoly",
    "DyadicRational",
    "DyadicPoly",
    "Unimodality",
    "euclid_numbers",
    "euclid_numbers_product",
    "euclid_poly",
    "euclid_poly_product",
    "mandelbrot_poly",
    "shifted_euclid_poly",
    "shifted_to_monomial",
    "eval_exact",
    "eval_complex",
    "euclid_recurrence",
    "euclid_recurrence_mp",
    "poly_condition_B",
    "shifted_condition_B",
    "poly_gcd",
    "derivative",
    "unimodality_check",
    "coeff_growth_check",
    "poly_to_json",
    "poly_from_json",
]

# below this length schoolbook multiplication beats packing
_KRONECKER_MIN = 24


# ---------------------------------------------------------------------------
# integer coefficient vectors
# ---------------------------------------------------------------------------

def _trim(c: list[int]) -> list[int]:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _school_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _pack(c: Sequence[int], nbytes: int) -> gmpy2.mpz:
    buf = b"".join(x.to_bytes(nbytes, "little") for x in c)
    return gmpy2.mpz(int.from_bytes(buf, "little"))


def _unpack(v: gmpy2.mpz, nbytes: int, count: int) -> list[int]:
    buf = int(v).to_bytes(nbytes * count, "little")
    return [int.from_bytes(buf[i * nbytes:(i + 1) * nbytes], "little")
            for i in range(count)]


def _kron_mul_nonneg(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of two nonnegative coefficient vectors by Kronecker packing."""
    ba = max(x.bit_length() for x in a)
    bb = max(x.bit_length() for x in b)
    slot_bits = ba + bb + min(len(a), len(b)).bit_length() + 1
    nbytes = (slot_bits + 7) // 8
    pa = _pack(a, nbytes)
    prod = pa * pa if a is b else pa * _pack(b, nbytes)
    return _unpack(prod, nbytes, len(a) + len(b) - 1)


def _mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if min(len(a), len(b)) < _KRONECKER_MIN:
        return _schoolbook_or_zero(a, b)
    if all(x >= 0 for x in a) and all(x >= 0 for x in b):
        return _kron_mul_nonneg(a, b)
    # signed: split into positive and negative parts
    ap = [max(x, 0) for x in a]
    an = [max(-x, 0) for x in a]
    bp = [max(x, 0) for x in b]
    bn = [max(-x, 0) for x in b]
    out = [0] * (len(a) + len(b) - 1)
    for sign, u, v in ((1, ap, bp), (1, an, bn), (-1, ap, bn), (-1, an, bp)):
        if any(u) and any(v):
            for i, x in enumerate(_kron_mul_nonneg(u, v)):
                out[i] += sign * x
    return out


def _schoolbook_or_zero(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if not a or not b:
        return [0]
    return _school_mul(a, b)


def _square(a: Sequence[int]) -> list[int]:
    if len(a) >= _KRONECKER_MIN and all(x >= 0 for x in a):
        return _kron_mul_nonneg(a, a)
    return _mul(a, a)


# ---------------------------------------------------------------------------
# polynomial types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BigIntPoly:
    """Dense polynomial with integer coefficients, ``coeffs[j]`` multiplies ``x**j``."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = _trim([int(x) for x in self.coeffs] or [0])
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_list(cls, coeffs: Iterable[int]) -> "BigIntPoly":
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial reports -1."""
        if self.is_zero():
            return -1
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    @property
    def lead(self) -> int:
        return self.coeffs[-1]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, j: int) -> int:
        return self.coeffs[j]

    def __add__(self, other: Union["BigIntPoly", int]) -> "BigIntPoly":
        o = _as_coeffs(other)
        n = max(len(self.coeffs), len(o))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        for i, x in enumerate(o):
            a[i] += x
        return BigIntPoly(tuple(a))

    __radd__ = __add__

    def __neg__(self) -> "BigIntPoly":
        return BigIntPoly(tuple(-x for x in self.coeffs))

    def __sub__(self, other: Union["BigIntPoly", int]) -> "BigIntPoly":
        return self + (-BigIntPoly(tuple(_as_coeffs(other))))

    def __rsub__(self, other: int) -> "BigIntPoly":
        return (-self) + other

    def __mul__(self, other: Union["BigIntPoly", int]) -> "BigIntPoly":
        if isinstance(other, int):
            return BigIntPoly(tuple(other * x for x in self.coeffs))
        return BigIntPoly(tuple(_mul(self.coeffs, other.coeffs)))

    __rmul__ = __mul__

    def square(self) -> "BigIntPoly":
        return BigIntPoly(tuple(_square(self.coeffs)))

    def content(self) -> int:
        g = 0
        for x in self.coeffs:
            g = math.gcd(g, x)
        return g

    def primitive(self) -> "BigIntPoly":
        """Divide out the content and make the leading coefficient positive."""
        if self.is_zero():
            return self
        g = self.content()
        if self.lead < 0:
            g = -g
        return BigIntPoly(tuple(x // g for x in self.coeffs))

    def max_coeff(self) -> int:
        return max(self.coeffs)

    def __call__(self, x):
        return eval_exact(self, x)

    def __repr__(self) -> str:
        if len(self.coeffs) <= 10:
            return f"BigIntPoly({list(self.coeffs)})"
        return f"BigIntPoly(degree={self.degree})"


def _as_coeffs(p) -> Sequence[int]:
    if isinstance(p, BigIntPoly):
        return p.coeffs
    if isinstance(p, int):
        return (p,)
    raise TypeError(f"cannot combine BigIntPoly with {type(p).__name__}")


@dataclass(frozen=True)
class DyadicRational:
    """``numerator / 2**log2_denominator`` in lowest terms."""

    numerator: int
    log2_denominator: int = 0

    def __post_init__(self):
        n, e = int(self.numerator), int(self.log2_denominator)
        if e < 0:
            n, e = n << -e, 0
        if n == 0:
            e = 0
        elif e > 0:
            tz = (n & -n).bit_length() - 1
            s = min(tz, e)
            n, e = n >> s, e - s
        object.__setattr__(self, "numerator", n)
        object.__setattr__(self, "log2_denominator", e)

    @classmethod
    def from_fraction(cls, q: Fraction) -> "DyadicRational":
        q = Fraction(q)
        d = q.denominator
        if d & (d - 1):
            raise ValueError(f"{q} does not have a power-of-two denominator")
        return cls(q.numerator, d.bit_length() - 1)

    @property
    def denominator(self) -> int:
        return 1 << self.log2_denominator

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __add__(self, other: "DyadicRational") -> "DyadicRational":
        e = max(self.log2_denominator, other.log2_denominator)
        n = (self.numerator << (e - self.log2_denominator)) + \
            (other.numerator << (e - other.log2_denominator))
        return DyadicRational(n, e)

    def __mul__(self, other: "DyadicRational") -> "DyadicRational":
        return DyadicRational(self.numerator * other.numerator,
                              self.log2_denominator + other.log2_denominator)

    def __neg__(self) -> "DyadicRational":
        return DyadicRational(-self.numerator, self.log2_denominator)

    def __sub__(self, other: "DyadicRational") -> "DyadicRational":
        return self + (-other)

    def __abs__(self) -> "DyadicRational":
        return DyadicRational(abs(self.numerator), self.log2_denominator)

    def __eq__(self, other) -> bool:
        if isinstance(other, DyadicRational):
            return (self.numerator, self.log2_denominator) == \
                (other.numerator, other.log2_denominator)
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def __float__(self) -> float:
        return float(self.as_fraction())

    def __str__(self) -> str:
        if self.log2_denominator == 0:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self) -> str:
        return f"DyadicRational({self})"


@dataclass(frozen=True)
class DyadicPoly:
    """Polynomial with dyadic-rational coefficients, indexed by power of ``u``."""

    coeffs: tuple[DyadicRational, ...]

    def __post_init__(self):
        c = list(self.coeffs) or [DyadicRational(0)]
        while len(c) > 1 and c[-1].numerator == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_scaled(cls, numerators: Sequence[int], log2_den: int) -> "DyadicPoly":
        return cls(tuple(DyadicRational(n, log2_den) for n in numerators))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def common_denominator(self) -> tuple[list[int], int]:
        """Integer numerators over the shared denominator ``2**e``."""
        e = max(c.log2_denominator for c in self.coeffs)
        return [c.numerator << (e - c.log2_denominator) for c in self.coeffs], e

    def as_fractions(self) -> list[Fraction]:
        return [c.as_fraction() for c in self.coeffs]

    def __getitem__(self, j: int) -> DyadicRational:
        return self.coeffs[j]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __call__(self, x):
        return eval_exact(self, x)

    def __repr__(self) -> str:
        if len(self.coeffs) <= 10:
            return f"DyadicPoly([{', '.join(str(c) for c in self.coeffs)}])"
        return f"DyadicPoly(degree={self.degree})"


# ---------------------------------------------------------------------------
# Euclid numbers and polynomials
# ---------------------------------------------------------------------------

def euclid_numbers(n_max: int) -> list[int]:
    """``[e_1, ..., e_n_max]`` with ``e_1 = 2`` and ``e_{n+1} = e_n (e_n - 1) + 1``.

    Memory is the only limit: ``e_20`` already has about 10**5 decimal digits.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = [2]
    while len(out) < n_max:
        e = out[-1]
        out.append(e * (e - 1) + 1)
    return out


def euclid_numbers_product(n_max: int) -> list[int]:
    """Same sequence from ``e_{n+1} = e_n e_{n-1} ... e_1 + 1`` (test oracle)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = [2]
    prod = 2
    while len(out) < n_max:
        out.append(prod + 1)
        prod *= out[-1]
    return out


@lru_cache(maxsize=None)
def euclid_poly(k: int) -> BigIntPoly:
    """Euclid polynomial ``E_k`` via ``E_{k+1} = E_k (E_k - 1) + 1``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return BigIntPoly((1, 1))
    prev = euclid_poly(k - 1)
    sq = _square(prev.coeffs)
    # E^2 - E + 1
    for i, c in enumerate(prev.coeffs):
        sq[i] -= c
    sq[0] += 1
    return BigIntPoly(tuple(sq))


def euclid_poly_product(k: int) -> BigIntPoly:
    """``E_k`` from ``E_{n+1} = lambda E_n ... E_1 + 1`` (test oracle, slow)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    polys = [BigIntPoly((1, 1))]
    while len(polys) < k:
        acc = BigIntPoly((0, 1))
        for p in polys:
            acc = acc * p
        polys.append(acc + 1)
    return polys[-1]


@lru_cache(maxsize=None)
def mandelbrot_poly(n: int) -> BigIntPoly:
    """Mandelbrot polynomial ``p_n``: ``p_1 = 1``, ``p_{n+1} = lambda p_n**2 + 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return BigIntPoly((1,))
    sq = _square(mandelbrot_poly(n - 1).coeffs)
    return BigIntPoly(tuple([1] + sq))


@lru_cache(maxsize=None)
def _shifted_f(k: int) -> tuple[tuple[int, ...], int]:
    # f_k = E_k - 1/2 as (integer numerators, log2 of common denominator)
    if k == 1:
        return (0, 1), 0
    num, e = _shifted_f(k - 1)
    sq = _square(num)
    e2 = 2 * e
    if e2 < 2:
        shift = 2 - e2
        sq = [x << shift for x in sq]
        e2 = 2
    sq[0] += 1 << (e2 - 2)
    return tuple(sq), e2


@lru_cache(maxsize=None)
def shifted_euclid_poly(k: int) -> DyadicPoly:
    """``E_k`` expanded in ``u = lambda + 1/2`` with exact dyadic coefficients."""
    if k < 1:
        raise ValueError("k must be >= 1")
    num, e = _shifted_f(k)
    if e == 0:
        # f_1 = u carries no denominator yet; E_1 = u + 1/2 needs one bit
        num, e = [x << 1 for x in num], 1
    num = list(num)
    num[0] += 1 << (e - 1)
    return DyadicPoly.from_scaled(num, e)


def _taylor_shift_int(c: Sequence[int]) -> list[int]:
    """Coefficients of ``p(y + 1)`` from those of ``p(y)``."""
    a = list(c)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] += a[j + 1]
    return a


def shifted_to_monomial(p: DyadicPoly) -> list[Fraction]:
    """Substitute ``u = lambda + 1/2`` and return monomial coefficients exactly."""
    num, e = p.common_denominator()
    d = len(num) - 1
    # p(lambda + 1/2) = 2**-(e+d) * sum_j num_j 2**(d-j) (2 lambda + 1)**j
    scaled = [x << (d - j) for j, x in enumerate(num)]
    shifted = _taylor_shift_int(scaled)  # coefficients in y = 2 lambda
    return [Fraction(c << i, 1 << (e + d)) for i, c in enumerate(shifted)]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_exact(p: Union[BigIntPoly, DyadicPoly], x) -> Fraction:
    """Exact Horner evaluation at a rational point (integers stay integral)."""
    q = Fraction(x)
    if isinstance(p, DyadicPoly):
        num, e = p.common_denominator()
    else:
        num, e = list(p.coeffs), 0
    a, b = q.numerator, q.denominator
    d = len(num) - 1
    # sum_j num_j a**j b**(d-j) / (b**d 2**e)
    acc = num[-1]
    bpow = 1
    for j in range(d - 1, -1, -1):
        bpow *= b
        acc = acc * a + num[j] * bpow
    return Fraction(acc, (b ** d) << e)


def _float_coeffs(p: Union[BigIntPoly, DyadicPoly]) -> np.ndarray:
    if isinstance(p, DyadicPoly):
        vals = [float(c) for c in p.coeffs]
    else:
        vals = []
        for c in p.coeffs:
            try:
                vals.append(float(c))
            except OverflowError:
                vals.append(math.inf)
    arr = np.array(vals, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise OverflowError("coefficients exceed the binary64 range; "
                            "pass precision_bits for the extended path")
    return arr


def eval_complex(p: Union[BigIntPoly, DyadicPoly], z, precision_bits: int | None = None):
    """Horner evaluation of the stored coefficients at complex ``z``.

    In binary64 the coefficients are rounded first, so for ``k >= 9`` the
    monomial coefficients are no longer exact and the result carries the
    polynomial's (exponential) conditioning.  ``precision_bits`` switches to
    an mpmath evaluation with exactly converted coefficients; the result is
    rounded to complex at the end.

    ``z`` may be a scalar or a numpy array (binary64 path only).

    Raises OverflowError if the value is not finite.
    """
    if precision_bits is not None:
        if np.ndim(z):
            return np.array([eval_complex(p, zz, precision_bits)
                             for zz in np.ravel(z)]).reshape(np.shape(z))
        with mpmath.workprec(int(precision_bits)):
            coeffs = _mp_coeffs(p)
            zz = mpmath.mpc(complex(z))
            acc = mpmath.mpc(0)
            for c in reversed(coeffs):
                acc = acc * zz + c
            out = complex(acc)
    else:
        c = _float_coeffs(p)
        zz = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            acc = np.zeros_like(zz)
            for cj in c[::-1]:
                acc = acc * zz + cj
        out = acc if np.ndim(acc) else complex(acc)
    if not np.all(np.isfinite(out)):
        raise OverflowError("polynomial value overflowed binary64")
    return out


def _mp_coeffs(p):
    if isinstance(p, DyadicPoly):
        return [mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) for c in p.coeffs]
    return [mpmath.mpf(c) for c in p.coeffs]


def euclid_recurrence(k: int, z, derivative: bool = False):
    """``E_k(z)`` (and optionally ``E_k'(z)``) without touching coefficients.

    Uses ``E_{j+1} = E_j (E_j - 1) + 1`` and ``E'_{j+1} = (2 E_j - 1) E'_j``,
    O(k) operations per point.  Works elementwise on numpy arrays; results
    may contain ``inf`` for points far outside the root cluster.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    zz = np.asarray(z)
    dtype = complex if np.iscomplexobj(zz) else float
    e = zz.astype(dtype) + 1
    d = np.ones_like(e)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(k - 1):
            if derivative:
                d = (2 * e - 1) * d
            e = e * (e - 1) + 1
    if np.ndim(z) == 0:
        e = e[()]
        d = d[()]
    return (e, d) if derivative else e


def euclid_recurrence_mp(k: int, z, precision_bits: int = 256, derivative: bool = False):
    """mpmath version of :func:`euclid_recurrence` for a single point."""
    with mpmath.workprec(int(precision_bits)):
        e = mpmath.mpmathify(z) + 1
        d = mpmath.mpf(1)
        for _ in range(k - 1):
            if derivative:
                d = (2 * e - 1) * d
            e = e * (e - 1) + 1
        return (+e, +d) if derivative else +e


def _positive_recurrence(k: int, x: float) -> float:
    val = euclid_recurrence(k, float(x))
    if not math.isfinite(val):
        raise OverflowError(f"E_{k}({x}) overflows binary64")
    return float(val)


def poly_condition_B(k: int, z) -> float:
    """``B_k(z) = sum_j E_{j,k} |z|**j``.

    All coefficients are positive, so this is ``E_k(|z|)``, evaluated with the
    recurrence.  Raises OverflowError when it leaves the binary64 range.
    """
    return _positive_recurrence(k, abs(complex(z)))


def shifted_condition_B(k: int, u: float) -> float:
    """``sum_j |v_j| |u|**j`` for the shifted coefficients ``v_j`` of ``E_k``.

    The ``v_j`` are all nonnegative, so this equals ``E_k`` at
    ``lambda = |u| - 1/2``.
    """
    if u < 0:
        raise ValueError("u must be nonnegative")
    return _positive_recurrence(k, abs(float(u)) - 0.5)


# ---------------------------------------------------------------------------
# gcd, derivative, coefficient properties
# ---------------------------------------------------------------------------

def derivative(p: BigIntPoly) -> BigIntPoly:
    if len(p.coeffs) == 1:
        return BigIntPoly((0,))
    return BigIntPoly(tuple(j * c for j, c in enumerate(p.coeffs) if j))


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of a by b (both trimmed, deg a >= deg b)."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(r) - 1 >= db and any(r):
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [lb * x for x in r]
        for i, bi in enumerate(b):
            r[i + shift] -= lr * bi
        r.pop()
        _trim(r)
        if r == [0]:
            break
    return r


def _gcd_mod_degree(a: Sequence[int], b: Sequence[int], p: int) -> int:
    def red(c):
        c = [x % p for x in c]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        return c

    u, v = red(a), red(b)
    while v != [0]:
        inv = pow(v[-1], -1, p)
        r = list(u)
        while len(r) >= len(v) and r != [0]:
            f = r[-1] * inv % p
            s = len(r) - len(v)
            for i, vi in enumerate(v):
                r[i + s] = (r[i + s] - f * vi) % p
            r.pop()
            while len(r) > 1 and r[-1] == 0:
                r.pop()
            if not r:
                r = [0]
        u, v = v, r
    return len(u) - 1


_GCD_PRIME = (1 << 127) - 1


def poly_gcd(p: BigIntPoly, q: BigIntPoly) -> BigIntPoly:
    """Primitive gcd over the rationals, positive leading coefficient.

    A modular gcd over a Mersenne prime that divides neither leading
    coefficient bounds the true degree from above; when it is 0 the answer
    is 1 without running the integer remainder sequence.  Otherwise a
    primitive pseudo-remainder sequence gives the exact result.
    """
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    if p.is_zero():
        return q.primitive()
    if q.is_zero():
        return p.primitive()
    if p.lead % _GCD_PRIME and q.lead % _GCD_PRIME:
        if _gcd_mod_degree(p.coeffs, q.coeffs, _GCD_PRIME) == 0:
            return BigIntPoly((1,))
    a, b = p.primitive(), q.primitive()
    if a.degree < b.degree:
        a, b = b, a
    a_c, b_c = list(a.coeffs), list(b.coeffs)
    while b_c != [0]:
        r = _prem(a_c, b_c)
        if r != [0]:
            r = list(BigIntPoly(tuple(r)).primitive().coeffs)
        a_c, b_c = b_c, r
    return BigIntPoly(tuple(a_c)).primitive()


@dataclass(frozen=True)
class Unimodality:
    unimodal: bool
    peak: tuple[int, int]

    def __bool__(self) -> bool:
        return self.unimodal


def unimodality_check(p: Union[BigIntPoly, Sequence[int]]) -> Unimodality:
    """Rise (ties allowed) to a peak plateau, then fall (ties allowed).

    The returned ``peak`` is the index range of the first run of maximal
    coefficients.
    """
    c = list(p.coeffs if isinstance(p, BigIntPoly) else p)
    if not c or any(x <= 0 for x in c):
        raise ValueError("unimodality is defined for positive coefficient vectors")
    m = max(c)
    lo = c.index(m)
    hi = lo
    while hi + 1 < len(c) and c[hi + 1] == m:
        hi += 1
    falling = False
    ok = True
    for a, b in zip(c, c[1:]):
        if b < a:
            falling = True
        elif b > a and falling:
            ok = False
            break
    return Unimodality(ok, (lo, hi))


def coeff_growth_check(k: int) -> bool:
    """``max E_{k+1}`` is at least ``(max E_k)**2``, exact comparison."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return euclid_poly(k + 1).max_coeff() >= euclid_poly(k).max_coeff() ** 2


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def poly_to_json(p: Union[BigIntPoly, DyadicPoly], k: int | None = None) -> str:
    """``{"basis", "k", "coeffs"}`` with coefficients as exact strings, ascending."""
    basis = "shifted" if isinstance(p, DyadicPoly) else "monomial"
    return json.dumps({"basis": basis, "k": k, "coeffs": [str(c) for c in p.coeffs]})


def poly_from_json(text: str) -> tuple[Union[BigIntPoly, DyadicPoly], int | None]:
    d = json.loads(text)
    if d["basis"] == "monomial":
        return BigIntPoly(tuple(int(s) for s in d["coeffs"])), d.get("k")
    if d["basis"] == "shifted":
        return DyadicPoly(tuple(DyadicRational.from_fraction(Fraction(s))
                                for s in d["coeffs"])), d.get("k")
    raise ValueError(f"unknown basis {d['basis']!r}")
