"""Exact rational polynomials for the overtaking probability.

Everything here is integer/Fraction arithmetic: these objects feed the
machine verification of inequalities, where floating point would prove
nothing.  ``q_poly`` builds the probability that a fixed colour overtakes at
a vertex with ``d`` out-neighbours, as a polynomial in the per-neighbour
move probability ``f``; ``q_oracle_poly`` recomputes the same polynomial by
exhaustive enumeration and exists purely to cross-check ``q_poly``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

# ---------------------------------------------------------------------------
# rational polynomials
# ---------------------------------------------------------------------------


class RationalPolynomial:
    """Dense univariate polynomial with Fraction coefficients.

    Coefficients run from the constant term upward.  Instances are immutable
    and normalised (no trailing zero coefficients).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs) -> None:
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("RationalPolynomial is immutable")

    @classmethod
    def from_ints(cls, int_coeffs, denominator: int = 1) -> "RationalPolynomial":
        return cls([Fraction(c, denominator) for c in int_coeffs])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        """Horner evaluation; exact when x is a Fraction/int."""
        acc = x * 0  # zero of the argument's type
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(
            [k * c for k, c in enumerate(self.coeffs)][1:]
        )

    def abs_coeff_sum(self) -> Fraction:
        return sum((abs(c) for c in self.coeffs), Fraction(0))

    # -- arithmetic ---------------------------------------------------------

    def _lifted(self, other):
        if isinstance(other, RationalPolynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalPolynomial([other])
        return None

    def __add__(self, other):
        o = self._lifted(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return RationalPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._lifted(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lifted(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if not a or not b:
            return RationalPolynomial([])
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        o = self._lifted(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:  # pragma: no cover
        if not self.coeffs:
            return "RationalPolynomial(0)"
        terms = " + ".join(f"({c})*f^{k}" for k, c in enumerate(self.coeffs) if c)
        return f"RationalPolynomial({terms})"


# ---------------------------------------------------------------------------
# integer coefficient-list helpers (fast inner loops avoid Fraction overhead)
# ---------------------------------------------------------------------------


def _int_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return out


def _int_pow_table(base: list[int], emax: int) -> list[list[int]]:
    """[base^0, base^1, ..., base^emax] as integer coefficient lists."""
    table = [[1]]
    for _ in range(emax):
        table.append(_int_mul(table[-1], base))
    return table


# ---------------------------------------------------------------------------
# the overtaking probability polynomial
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def q_poly(d: int) -> RationalPolynomial:
    """Probability that a fixed colour overtakes at a vertex of out-degree d.

    Model: each of the d out-neighbours holds one of three colours uniformly
    and independently; each then moves with probability f, and a mover picks
    one of the two other colours uniformly.  The returned polynomial in f is
    the probability that the fixed colour's count was at most d/2 before the
    moves and exceeds d/2 after them.

    Exact rational arithmetic throughout: all coefficients are integers over
    3**d.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return RationalPolynomial([])
    h = d // 2
    pow_1mf = _int_pow_table([1, -1], d)  # (1 - f)^e
    pow_2mf = _int_pow_table([2, -1], d)  # (2 - f)^e

    # For the i neighbours that start on the fixed colour, k of them move
    # away; of the d-i others, b move onto it.  The final count exceeds d/2
    # exactly when b > h + k - i.  Group the sum over b into binomial tails:
    #   tail[c][m] = sum_{b > m} C(c, b) f^b (2 - f)^(c - b)
    # built downward from tail[c][c] = 0.
    acc = [0] * (d + 1)
    for i in range(h + 1):
        c = d - i
        tails: list[list[int] | None] = [None] * (c + 1)
        run = [0]
        tails[c] = run
        for m in range(c - 1, h - i - 1, -1):
            term = [x * comb(c, m + 1) for x in pow_2mf[c - m - 1]]
            run = run + [0] * (len(term) + m + 1 - len(run))
            for j, x in enumerate(term):
                run[m + 1 + j] += x
            tails[m] = run
            run = list(run)
        cdi = comb(d, i)
        for k in range(i + 1):
            m = h + k - i
            if m >= c:
                continue
            outer = _int_mul(pow_1mf[i - k], tails[m])
            scale = cdi * comb(i, k)
            for j, x in enumerate(outer):
                if x:
                    acc[j + k] += scale * x
    return RationalPolynomial.from_ints(acc, 3**d)


_ORACLE_MAX_D = 7


def q_oracle_poly(d: int) -> RationalPolynomial:
    """Brute-force recomputation of ``q_poly`` by enumerating all scenarios.

    Walks every (initial colour, final colour) assignment of the d
    out-neighbours -- 9**d cases -- and adds up exact scenario weights.
    Deliberately simple and independent of the closed-form construction so
    the two can be compared coefficient by coefficient.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d > _ORACLE_MAX_D:
        raise ValueError(
            f"q_oracle_poly enumerates 9**d scenarios; d={d} exceeds the "
            f"guard (max {_ORACLE_MAX_D})"
        )
    if d == 0:
        return RationalPolynomial([])
    h = d // 2
    idx = np.arange(9**d, dtype=np.int64)
    before = np.zeros(idx.size, dtype=np.int16)  # neighbours on the colour, t-1
    after = np.zeros(idx.size, dtype=np.int16)  # neighbours on the colour, t
    moved = np.zeros(idx.size, dtype=np.int16)
    for pos in range(d):
        digit = (idx // 9**pos) % 9
        a = digit // 3  # initial colour of this neighbour (0 = the fixed one)
        b = digit % 3  # final colour
        before += a == 0
        after += b == 0
        # a == b is "stayed" (weight 1-f); a != b is a move onto a uniformly
        # chosen other colour (weight f/2 per target)
        moved += a != b
    sel = (before <= h) & (after > h)
    cnt = np.bincount(moved[sel], minlength=d + 1).astype(object)
    # scenario weight for k movers: (1/3)^d (1-f)^(d-k) (f/2)^k
    pow_1mf = _int_pow_table([1, -1], d)
    acc = [0] * (d + 1)
    for k in range(d + 1):
        if not cnt[k]:
            continue
        scale = int(cnt[k]) * 2 ** (d - k)
        for j, x in enumerate(pow_1mf[d - k]):
            if x:
                acc[j + k] += scale * x
    return RationalPolynomial.from_ints(acc, 6**d)


def q_prime0(d: int) -> Fraction:
    """Exact derivative of ``q_poly(d)`` at f = 0 (closed form)."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return Fraction(0)
    h = d // 2
    return Fraction(comb(d, h) * (d - h) * 2 ** (d - h - 1), 3**d)


# ---------------------------------------------------------------------------
# closed-form slope constants
# ---------------------------------------------------------------------------


def overtake_slope_bound(d: int) -> Fraction:
    """Exact constant a_d bounding the derivative of ``q_poly(d)`` on [0, 1/3].

    a_d = (d/3) * P[Bin(d-1, 1/3) >= floor(d/2)], written out as an exact
    binomial sum.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return Fraction(0)
    h = d // 2
    s = sum(
        Fraction(comb(d - 1, i) * 2 ** (d - 1 - i), 3 ** (d - 1))
        for i in range(h, d)
    )
    return Fraction(d, 3) * s


def overtake_slope_bound_crude(d: int) -> Fraction:
    """Cruder closed form b_d with a_d <= b_d / 2; easy to compare across d."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return Fraction(0)
    h = d // 2
    return Fraction(2 * d * comb(d - 1, h) * 2 ** (d - h), 3**d)
