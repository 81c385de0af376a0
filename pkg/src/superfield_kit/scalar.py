"""Exact coefficient scalars: Q(i)[parameters] tensored with a Grassmann algebra.

A GrassmannScalar is a finite sum of terms

    coefficient * (parameter monomial) * alpha_{i1} alpha_{i2} ... alpha_{ir}

with coefficient in Q(i), parameters free commuting symbols (c, m, t, j, ...)
with integer (possibly negative) exponents, and alpha_i odd exterior
generators.  Terms are keyed by (parameter monomial, generator bitmask); the
bitmask stores the strictly increasing generator subset, and products are
sign-normalized on construction (alpha_b alpha_a -> -alpha_a alpha_b,
alpha_a^2 -> 0).  i^2 = -1 lives inside the coefficient field.

Values are immutable and compared structurally.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import NotInvertible
from .qi import QI, QI_ONE, coerce_qi

Pmono = tuple  # tuple of (name, exponent), sorted by name, exponent != 0


def _merge_sign(m1: int, m2: int) -> int:
    """Sign that sorts alpha^{m1} alpha^{m2} into increasing order.

    Assumes the masks are disjoint: counts the transpositions needed to
    interleave the two increasing words.
    """
    sign = 0
    m = m1
    while m:
        low = m & (-m)
        sign += (m2 & (low - 1)).bit_count()
        m ^= low
    return -1 if sign & 1 else 1


def _pmono_mul(p1: Pmono, p2: Pmono) -> Pmono:
    if not p1:
        return p2
    if not p2:
        return p1
    acc = dict(p1)
    for name, exp in p2:
        e = acc.get(name, 0) + exp
        if e:
            acc[name] = e
        else:
            del acc[name]
    return tuple(sorted(acc.items()))


class GrassmannScalar:
    """Element of Q(i)[params] tensor Lambda(alpha_1, ..., alpha_k)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, coeff in terms.items():
                if coeff:
                    clean[key] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("GrassmannScalar is immutable")

    # -- constructors --------------------------------------------------

    @classmethod
    def from_qi(cls, x) -> "GrassmannScalar":
        q = coerce_qi(x)
        if q is None:
            raise TypeError("not a scalar: %r" % (x,))
        return cls({((), 0): q})

    @classmethod
    def param(cls, name: str, exp: int = 1) -> "GrassmannScalar":
        if exp == 0:
            return cls.from_qi(1)
        return cls({(((name, exp),), 0): QI_ONE})

    @classmethod
    def alpha(cls, index: int) -> "GrassmannScalar":
        if index < 1:
            raise ValueError("generator indices start at 1")
        return cls({((), 1 << (index - 1)): QI_ONE})

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def parity(self):
        """0 for even, 1 for odd, None for mixed (zero counts as even)."""
        seen = {mask.bit_count() & 1 for (_, mask) in self.terms}
        if not seen:
            return 0
        if len(seen) > 1:
            return None
        return seen.pop()

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        other = coerce_scalar(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = coerce_scalar(other)
        if other is None:
            return NotImplemented
        acc = dict(self.terms)
        for key, coeff in other.terms.items():
            s = acc.get(key)
            acc[key] = coeff if s is None else s + coeff
        return GrassmannScalar(acc)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannScalar({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = coerce_scalar(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = coerce_scalar(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = coerce_scalar(other)
        if other is None:
            return NotImplemented
        acc = {}
        for (p1, m1), c1 in self.terms.items():
            for (p2, m2), c2 in other.terms.items():
                if m1 & m2:
                    continue
                key = (_pmono_mul(p1, p2), m1 | m2)
                coeff = c1 * c2
                if _merge_sign(m1, m2) < 0:
                    coeff = -coeff
                s = acc.get(key)
                acc[key] = coeff if s is None else s + coeff
        return GrassmannScalar(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = SC_ONE
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other):
        other = coerce_scalar(other)
        if other is None:
            return NotImplemented
        return self * other.gr_invert()

    # -- structure maps -----------------------------------------------------

    def body(self) -> "GrassmannScalar":
        """The Grassmann-degree-0 part (parameters allowed)."""
        return GrassmannScalar(
            {key: c for key, c in self.terms.items() if key[1] == 0}
        )

    def soul(self) -> "GrassmannScalar":
        return GrassmannScalar(
            {key: c for key, c in self.terms.items() if key[1] != 0}
        )

    def parity_split(self):
        """(even part, odd part) by Grassmann degree."""
        ev, od = {}, {}
        for key, c in self.terms.items():
            (ev if key[1].bit_count() % 2 == 0 else od)[key] = c
        return GrassmannScalar(ev), GrassmannScalar(od)

    def gr_invert(self) -> "GrassmannScalar":
        """Two-sided inverse via the finite geometric series in the soul.

        The body must be a single parameter monomial with nonzero Q(i)
        coefficient; general multi-term rational-function bodies are outside
        the monomial coefficient tower and raise NotInvertible.
        """
        b = self.body()
        if b.is_zero():
            raise NotInvertible("body is zero")
        if len(b.terms) != 1:
            raise NotInvertible(
                "body %s is not a single monomial; cannot invert exactly" % b
            )
        (pmono, _), coeff = next(iter(b.terms.items()))
        binv = GrassmannScalar(
            {(tuple((n, -e) for n, e in pmono), 0): coeff.inv()}
        )
        n = self - b
        if n.is_zero():
            return binv
        step = -(binv * n)
        out = SC_ONE
        power = step
        while not power.is_zero():
            out = out + power
            power = power * step
        return out * binv

    def subs_param(self, name: str, value) -> "GrassmannScalar":
        """Substitute an exact scalar value for a named parameter."""
        val = coerce_qi(value)
        if val is None:
            raise TypeError("substitution value must be scalar")
        acc = {}
        for (pmono, mask), coeff in self.terms.items():
            rest = []
            for pname, exp in pmono:
                if pname != name:
                    rest.append((pname, exp))
                    continue
                if not val:
                    if exp < 0:
                        raise NotInvertible(
                            "parameter %s set to 0 but appears inverted" % name
                        )
                    coeff = None
                    break
                coeff = coeff * val**exp
            if coeff is None or not coeff:
                continue
            key = (tuple(rest), mask)
            s = acc.get(key)
            acc[key] = coeff if s is None else s + coeff
        return GrassmannScalar(acc)

    def coeff(self, pmono: Pmono = (), mask: int = 0) -> QI:
        return self.terms.get((pmono, mask), QI(0))

    # -- rendering -----------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (pmono, mask) in sorted(
            self.terms, key=lambda k: (k[1].bit_count(), k[1], k[0])
        ):
            coeff = self.terms[(pmono, mask)]
            factors = []
            for name, exp in pmono:
                factors.append(name if exp == 1 else "%s^%d" % (name, exp))
            bit, pos = mask, 1
            while bit:
                if bit & 1:
                    factors.append("a%d" % pos)
                bit >>= 1
                pos += 1
            if not factors:
                parts.append(str(coeff))
            elif coeff == QI_ONE:
                parts.append("*".join(factors))
            elif coeff == QI(-1):
                parts.append("-" + "*".join(factors))
            else:
                parts.append("%s*%s" % (coeff, "*".join(factors)))
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def __repr__(self):
        return "<GrassmannScalar %s>" % self


def coerce_scalar(x):
    """Return x as a GrassmannScalar, or None if it cannot be one."""
    if isinstance(x, GrassmannScalar):
        return x
    q = coerce_qi(x)
    if q is not None:
        return GrassmannScalar({((), 0): q})
    return None


def rat(p, q=1) -> GrassmannScalar:
    return GrassmannScalar.from_qi(QI(Fraction(p, q)))


SC_ZERO = GrassmannScalar()
SC_ONE = GrassmannScalar.from_qi(1)
SC_I = GrassmannScalar.from_qi(QI(0, 1))
