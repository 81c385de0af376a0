"""Truncated formal super-series.

A chart declares one or two even variables, each with N odd companions, a
variant tag (NW or NK) and optionally the complex pairing of the two odd
variables used for N=2.  A SuperSeries over a chart is a finite map

    (even exponent tuple, odd variable bitmask)  ->  GrassmannScalar

understood with the coefficient written to the LEFT of the odd monomial:

    term = coeff * theta^{mask} * z^{e}.

Odd variables are flattened across groups (first group's odds get the low
bits), and odd monomials are stored increasing, so extracting the left
coefficient of a trailing-group monomial needs no sign.

Truncation is tracked in total even degree: ``trunc = t`` means every term
of total even degree >= t is unknown and has been dropped; ``trunc = None``
means the series is exact.  Arithmetic propagates the sharpest sound bound.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    ChartMismatch,
    NonNilpotentAtOrder,
    NotInvertible,
    UnknownDerivation,
)
from .qi import QI
from .scalar import GrassmannScalar, coerce_scalar, rat

# Internal truncation bounds are exclusive: trunc = t means total even degree
# >= t is unknown (the usual O(z^t)).  The user-facing "order" keeps degree
# <= k, so order k corresponds to the internal bound k + 1.  The default
# working order is 6.
DEFAULT_ORDER = 6
DEFAULT_TRUNC = DEFAULT_ORDER + 1


def order_bound(order) -> int:
    """Internal truncation bound for a user-facing inclusive order."""
    return order + 1


def _merge_sign(m1: int, m2: int) -> int:
    sign = 0
    m = m1
    while m:
        low = m & (-m)
        sign += (m2 & (low - 1)).bit_count()
        m ^= low
    return -1 if sign & 1 else 1


class Chart:
    """Variable layout: ((even, (odd, ...)), ...) plus variant flags."""

    __slots__ = ("groups", "variant", "complex_pair", "_key")

    def __init__(self, groups, variant="NK", complex_pair=False):
        groups = tuple((ev, tuple(odds)) for ev, odds in groups)
        if variant not in ("NW", "NK"):
            raise ValueError("variant must be NW or NK")
        names = [ev for ev, _ in groups]
        for _, odds in groups:
            names.extend(odds)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        sizes = {len(odds) for _, odds in groups}
        if len(sizes) > 1:
            raise ValueError("all groups need the same number of odd variables")
        if complex_pair and groups and len(groups[0][1]) != 2:
            raise ValueError("complex pairing needs exactly two odd variables")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "complex_pair", complex_pair)
        object.__setattr__(self, "_key", (groups, variant, complex_pair))

    def __setattr__(self, name, value):
        raise AttributeError("Chart is immutable")

    @property
    def evens(self):
        return tuple(ev for ev, _ in self.groups)

    @property
    def odds(self):
        out = []
        for _, group_odds in self.groups:
            out.extend(group_odds)
        return tuple(out)

    @property
    def n(self) -> int:
        return len(self.groups[0][1]) if self.groups else 0

    def even_index(self, name: str) -> int:
        for i, (ev, _) in enumerate(self.groups):
            if ev == name:
                return i
        raise ChartMismatch("no even variable %r on chart" % name)

    def odd_bit(self, name: str) -> int:
        for i, od in enumerate(self.odds):
            if od == name:
                return i
        raise ChartMismatch("no odd variable %r on chart" % name)

    def group_odd_bits(self, group: int) -> int:
        """Bitmask covering the odd variables of one group."""
        n = self.n
        return ((1 << n) - 1) << (group * n)

    def univariate(self, group: int = 0) -> "Chart":
        return Chart((self.groups[group],), self.variant, self.complex_pair)

    def __eq__(self, other):
        return isinstance(other, Chart) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return "Chart(%r, %s%s)" % (
            self.groups,
            self.variant,
            ", complex" if self.complex_pair else "",
        )


def chart_n(n: int, variant: str = "NK", complex_pair: bool = False,
            even: str = "z", prefix: str = "th") -> Chart:
    """Standard single chart: (z, th1..thN), or (z, thp, thm) for N=2 complex."""
    if complex_pair:
        odds = (prefix + "p", prefix + "m")
    else:
        odds = tuple("%s%d" % (prefix, i) for i in range(1, n + 1))
    return Chart(((even, odds),), variant, complex_pair)


def bichart(n: int, variant: str = "NK", complex_pair: bool = False) -> Chart:
    """Two-point chart (z, th...) x (w, ze...); base point group comes first."""
    if complex_pair:
        g1 = ("z", ("thp", "thm"))
        g2 = ("w", ("zep", "zem"))
    else:
        g1 = ("z", tuple("th%d" % i for i in range(1, n + 1)))
        g2 = ("w", tuple("ze%d" % i for i in range(1, n + 1)))
    return Chart((g1, g2), variant, complex_pair)


def _min_trunc(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class SuperSeries:
    __slots__ = ("chart", "coeffs", "trunc")

    def __init__(self, chart: Chart, coeffs=None, trunc=None):
        clean = {}
        if coeffs:
            ne = len(chart.groups)
            for (etuple, omask), c in coeffs.items():
                c = coerce_scalar(c)
                if c is None or c.is_zero():
                    continue
                if len(etuple) != ne:
                    raise ChartMismatch("exponent tuple has wrong arity")
                if trunc is not None and sum(etuple) >= trunc:
                    continue
                key = (tuple(etuple), omask)
                prev = clean.get(key)
                clean[key] = c if prev is None else prev + c
                if clean[key].is_zero():
                    del clean[key]
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "trunc", trunc)

    def __setattr__(self, name, value):
        raise AttributeError("SuperSeries is immutable")

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def low(self) -> int:
        """Lowest total even degree with a known term (trunc if none)."""
        if self.coeffs:
            return min(sum(e) for e, _ in self.coeffs)
        return self.trunc if self.trunc is not None else 0

    def coeff(self, etuple, omask=0) -> GrassmannScalar:
        return self.coeffs.get((tuple(etuple), omask), GrassmannScalar())

    def constant_term(self) -> GrassmannScalar:
        zero = (0,) * len(self.chart.groups)
        return self.coeffs.get((zero, 0), GrassmannScalar())

    @property
    def parity(self):
        """0 even, 1 odd, None mixed; parity counts coefficient and odd vars."""
        seen = set()
        for (_, omask), c in self.coeffs.items():
            p = c.parity
            if p is None:
                return None
            seen.add((p + omask.bit_count()) & 1)
        if not seen:
            return 0
        if len(seen) > 1:
            return None
        return seen.pop()

    def equals(self, other: "SuperSeries") -> bool:
        """Equality of every coefficient below the shared truncation."""
        if self.chart != other.chart:
            raise ChartMismatch("comparing series on different charts")
        t = _min_trunc(self.trunc, other.trunc)
        for key in set(self.coeffs) | set(other.coeffs):
            if t is not None and sum(key[0]) >= t:
                continue
            if self.coeffs.get(key, GrassmannScalar()) != other.coeffs.get(
                key, GrassmannScalar()
            ):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, SuperSeries):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.chart, self.trunc, frozenset(self.coeffs)))

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, SuperSeries):
            if other.chart != self.chart:
                raise ChartMismatch(
                    "series on %r vs %r" % (self.chart, other.chart)
                )
            return other
        c = coerce_scalar(other)
        if c is None:
            return None
        zero = (0,) * len(self.chart.groups)
        return SuperSeries(self.chart, {(zero, 0): c})

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc = dict(self.coeffs)
        for key, c in other.coeffs.items():
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        return SuperSeries(self.chart, acc, _min_trunc(self.trunc, other.trunc))

    __radd__ = __add__

    def __neg__(self):
        return SuperSeries(
            self.chart, {k: -c for k, c in self.coeffs.items()}, self.trunc
        )

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self.coeffs:
            t = None if self.trunc is None else _mul_trunc(self, other)
            return SuperSeries(self.chart, {}, t)
        if not other.coeffs:
            t = None if other.trunc is None else _mul_trunc(self, other)
            return SuperSeries(self.chart, {}, t)
        t = _mul_trunc(self, other)
        acc = {}
        gsplit = [
            (key, c, c.parity_split()) for key, c in other.coeffs.items()
        ]
        for (e1, m1), c1 in self.coeffs.items():
            d1 = sum(e1)
            odd_mask_parity = m1.bit_count() & 1
            for (e2, m2), c2, (c2e, c2o) in gsplit:
                if m1 & m2:
                    continue
                if t is not None and d1 + sum(e2) >= t:
                    continue
                cross = c2 if not odd_mask_parity else c2e - c2o
                coeff = c1 * cross
                if _merge_sign(m1, m2) < 0:
                    coeff = -coeff
                if coeff.is_zero():
                    continue
                key = (tuple(a + b for a, b in zip(e1, e2)), m1 | m2)
                prev = acc.get(key)
                acc[key] = coeff if prev is None else prev + coeff
        return SuperSeries(self.chart, acc, t)

    def __rmul__(self, other):
        # only scalars land here, and scalars multiply from the left
        c = coerce_scalar(other)
        if c is None:
            return NotImplemented
        acc = {}
        for (e, m), coeff in self.coeffs.items():
            acc[(e, m)] = c * coeff
        return SuperSeries(self.chart, acc, self.trunc)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = ss_const(self.chart, 1)
        for _ in range(n):
            out = out * self
        return out

    def truncate(self, t) -> "SuperSeries":
        t = _min_trunc(self.trunc, t)
        return SuperSeries(self.chart, self.coeffs, t)

    # -- extraction ----------------------------------------------------------

    def left_coeff_table(self, group: int = 1):
        """Split off the trailing group: map (exponent, local odd mask) to the
        left coefficient, a series on the remaining chart.

        Only the last group may be extracted; its odd monomial sits rightmost
        in the canonical order, so no signs appear.
        """
        if group != len(self.chart.groups) - 1:
            raise ChartMismatch("only the trailing group can be extracted")
        n = self.chart.n
        shift = group * n
        gbits = self.chart.group_odd_bits(group)
        rest = Chart(
            tuple(g for i, g in enumerate(self.chart.groups) if i != group),
            self.chart.variant,
            self.chart.complex_pair,
        )
        tables = {}
        for (etuple, omask), c in self.coeffs.items():
            gexp = etuple[group]
            gmask = (omask & gbits) >> shift
            rkey = (
                tuple(e for i, e in enumerate(etuple) if i != group),
                omask & ~gbits,
            )
            tables.setdefault((gexp, gmask), {})[rkey] = c
        out = {}
        for key, coeffs in tables.items():
            # the inner series keeps the sharpest sound total bound: terms of
            # joint degree >= trunc were dropped, so at fixed group exponent g
            # the remainder is known below trunc - g.
            t = None if self.trunc is None else self.trunc - key[0]
            out[key] = SuperSeries(rest, coeffs, t)
        return out

    # -- rendering -----------------------------------------------------------

    def __str__(self):
        if not self.coeffs:
            base = "0"
        else:
            parts = []
            for (etuple, omask) in sorted(
                self.coeffs,
                key=lambda k: (sum(k[0]), k[0], k[1].bit_count(), k[1]),
            ):
                c = self.coeffs[(etuple, omask)]
                factors = []
                ctext = str(c)
                if len(c.terms) > 1 or ctext.startswith("-"):
                    ctext = "(%s)" % ctext
                if ctext != "1":
                    factors.append(ctext)
                bit = 0
                m = omask
                while m:
                    if m & 1:
                        factors.append(self.chart.odds[bit])
                    m >>= 1
                    bit += 1
                for (ev, _), e in zip(self.chart.groups, etuple):
                    if e == 1:
                        factors.append(ev)
                    elif e:
                        factors.append("%s^%d" % (ev, e))
                parts.append("*".join(factors) if factors else ctext)
            base = " + ".join(parts)
        if self.trunc is not None:
            return "%s + O(%d)" % (base, self.trunc)
        return base

    def __repr__(self):
        return "<SuperSeries %s>" % self


def _mul_trunc(f: SuperSeries, g: SuperSeries):
    if f.trunc is None and g.trunc is None:
        return None
    cands = []
    if f.trunc is not None:
        cands.append(f.trunc + g.low)
    if g.trunc is not None:
        cands.append(g.trunc + f.low)
    return min(cands)


# -- constructors -------------------------------------------------------------


def ss_const(chart: Chart, value, trunc=None) -> SuperSeries:
    zero = (0,) * len(chart.groups)
    return SuperSeries(chart, {(zero, 0): coerce_scalar(value)}, trunc)


def ss_zero(chart: Chart, trunc=None) -> SuperSeries:
    return SuperSeries(chart, {}, trunc)


def ss_var(chart: Chart, name: str, trunc=None) -> SuperSeries:
    zero = [0] * len(chart.groups)
    for i, (ev, _) in enumerate(chart.groups):
        if ev == name:
            zero[i] = 1
            return SuperSeries(chart, {(tuple(zero), 0): rat(1)}, trunc)
    bit = chart.odd_bit(name)
    return SuperSeries(chart, {(tuple(zero), 1 << bit): rat(1)}, trunc)


def ss_monomial(chart: Chart, coeff, etuple, omask=0, trunc=None) -> SuperSeries:
    return SuperSeries(chart, {(tuple(etuple), omask): coerce_scalar(coeff)}, trunc)


# -- arithmetic dispatcher (spec-level API) -----------------------------------


def ss_arith(op: str, f: SuperSeries, g) -> SuperSeries:
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    if op == "scale":
        return g * f if not isinstance(g, SuperSeries) else f * g
    raise ValueError("unknown arithmetic op %r" % op)


# -- derivations ---------------------------------------------------------------


def d_even(f: SuperSeries, name: str) -> SuperSeries:
    gi = f.chart.even_index(name)
    acc = {}
    for (etuple, omask), c in f.coeffs.items():
        e = etuple[gi]
        if e == 0:
            continue
        nk = list(etuple)
        nk[gi] = e - 1
        key = (tuple(nk), omask)
        term = rat(e) * c
        prev = acc.get(key)
        acc[key] = term if prev is None else prev + term
    t = None if f.trunc is None else f.trunc - 1
    return SuperSeries(f.chart, acc, t)


def d_odd(f: SuperSeries, name: str) -> SuperSeries:
    """Left partial derivative by an odd variable."""
    bit = 1 << f.chart.odd_bit(name)
    acc = {}
    for (etuple, omask), c in f.coeffs.items():
        if not (omask & bit):
            continue
        below = (omask & (bit - 1)).bit_count()
        ce, co = c.parity_split()
        # the derivation passes the coefficient with a Koszul sign, then
        # anticommutes past the odd variables stored below the target bit
        term = ce - co
        if below & 1:
            term = -term
        key = (etuple, omask & ~bit)
        prev = acc.get(key)
        acc[key] = term if prev is None else prev + term
    return SuperSeries(f.chart, acc, f.trunc)


def ss_derive(d: str, f: SuperSeries, group: int = 0) -> SuperSeries:
    """Apply a named derivation: Dz, Dth<i>, D<i>, Dbar<i>, D+, D-.

    The group argument picks which (even, odds) pair of a two-point chart the
    operator differentiates; names are resolved inside that group.
    """
    chart = f.chart
    ev, odds = chart.groups[group]
    if d == "Dz":
        return d_even(f, ev)
    if d.startswith("Dth"):
        idx = int(d[3:])
        if not 1 <= idx <= chart.n:
            raise UnknownDerivation(d)
        return d_odd(f, odds[idx - 1])
    if d in ("D+", "D-"):
        if not chart.complex_pair or chart.variant != "NK":
            raise UnknownDerivation("%s needs the complex NK chart" % d)
        plus = d == "D+"
        other = odds[1] if plus else odds[0]  # differentiate by theta-minus for D+
        own = odds[0] if plus else odds[1]
        half = rat(1, 2)
        return d_odd(f, other) + ss_var(chart, own) * (half * d_even(f, ev))
    if d.startswith("Dbar"):
        idx = int(d[4:])
        if chart.variant != "NK" or chart.complex_pair:
            raise UnknownDerivation("Dbar lives on real NK charts")
        if not 1 <= idx <= chart.n:
            raise UnknownDerivation(d)
        th = odds[idx - 1]
        return d_odd(f, th) - ss_var(chart, th) * d_even(f, ev)
    if d.startswith("D"):
        try:
            idx = int(d[1:])
        except ValueError:
            raise UnknownDerivation(d) from None
        if chart.variant != "NK" or chart.complex_pair:
            raise UnknownDerivation("D%d lives on real NK charts" % idx)
        if not 1 <= idx <= chart.n:
            raise UnknownDerivation(d)
        th = odds[idx - 1]
        return d_odd(f, th) + ss_var(chart, th) * d_even(f, ev)
    raise UnknownDerivation(d)


# -- inversion, roots, antiderivative ------------------------------------------


def ss_invert(f: SuperSeries, trunc=None) -> SuperSeries:
    c0 = f.constant_term()
    if c0.body().is_zero():
        raise NotInvertible("constant term %s has zero body" % c0)
    t = f.trunc if trunc is None else _min_trunc(f.trunc, trunc)
    if t is None:
        t = DEFAULT_TRUNC
    c0inv = c0.gr_invert()
    h = (c0inv * f).truncate(t) - 1
    out = ss_const(f.chart, 1, t)
    power = -h
    while not power.is_zero():
        out = out + power
        power = (power * (-h)).truncate(t)
    # f = c0 (1 + h), so the inverse carries c0^{-1} on the right
    return out * c0inv


def ss_sqrt(f: SuperSeries, trunc=None) -> SuperSeries:
    """Square root with constant term 1 (Newton iteration, exact rationals)."""
    t = f.trunc if trunc is None else _min_trunc(f.trunc, trunc)
    if t is None:
        t = DEFAULT_TRUNC
    if f.constant_term() != coerce_scalar(1):
        raise NotInvertible("square root requires constant term 1")
    s = ss_const(f.chart, 1, t)
    half = rat(1, 2)
    while True:
        nxt = half * (s + f.truncate(t) * ss_invert(s, t))
        if nxt.equals(s):
            return nxt
        s = nxt


def ss_integrate(f: SuperSeries, name: str) -> SuperSeries:
    """Antiderivative in an even variable, constant term 0."""
    gi = f.chart.even_index(name)
    acc = {}
    for (etuple, omask), c in f.coeffs.items():
        e = etuple[gi]
        if e == -1:
            raise NotInvertible("cannot integrate a 1/%s term" % name)
        nk = list(etuple)
        nk[gi] = e + 1
        acc[(tuple(nk), omask)] = rat(1, e + 1) * c
    t = None if f.trunc is None else f.trunc + 1
    return SuperSeries(f.chart, acc, t)


# -- substitution ---------------------------------------------------------------


def _nilpotency_order(u: SuperSeries, cap: int) -> int:
    """Smallest k with u^k = 0, or raise if not reached within cap."""
    power = u
    k = 1
    while not power.is_zero():
        if k > cap:
            raise NonNilpotentAtOrder(
                "substituted constant part is not nilpotent"
            )
        power = power * u
        k += 1
    return k


def ss_subs(f: SuperSeries, mapping, target_chart: Chart) -> SuperSeries:
    """Substitute series for every variable of f's chart.

    mapping: variable name -> SuperSeries on target_chart.  Parities must
    match (even variables get even series, odd get odd).  The result's
    truncation is the sharpest sound bound derivable from the inputs.
    """
    chart = f.chart
    for ev, odds in chart.groups:
        for name in (ev, *odds):
            if name not in mapping:
                raise ChartMismatch("substitution missing variable %r" % name)
    for name, g in mapping.items():
        if g.chart != target_chart:
            raise ChartMismatch("substitution target for %r on wrong chart" % name)

    # truncation bookkeeping: an unknown term of f sits in even degree
    # >= f.trunc, and each even image whose constant part is nilpotent of
    # order nu can soak up nu - 1 of that degree before the rest must land
    # on positive powers of the image.
    cands = []
    cap = 2 * len(target_chart.odds) + 8
    deficit = 0
    all_images_constant = True
    for ev, odds in chart.groups:
        g = mapping[ev]
        if g.parity == 1:
            raise ChartMismatch("odd series substituted for even variable %r" % ev)
        if g.trunc is not None:
            cands.append(g.trunc)
        if any(sum(k[0]) > 0 for k in g.coeffs):
            all_images_constant = False
        if f.trunc is not None:
            const_part = SuperSeries(
                target_chart,
                {k: c for k, c in g.coeffs.items() if sum(k[0]) == 0},
                None,
            )
            if not const_part.is_zero():
                deficit += _nilpotency_order(const_part, cap) - 1
        for od in odds:
            go = mapping[od]
            if go.parity == 0 and not go.is_zero():
                raise ChartMismatch(
                    "even series substituted for odd variable %r" % od
                )
            if go.trunc is not None:
                cands.append(go.trunc)
    if f.trunc is not None:
        if all_images_constant and deficit < f.trunc:
            pass  # every unknown term of f evaluates to zero
        else:
            cands.append(max(f.trunc - deficit, 0))
    out_trunc = min(cands) if cands else None

    # evaluate
    flat_odds = chart.odds
    even_pows = {}
    for ev, _ in chart.groups:
        even_pows[ev] = {0: ss_const(target_chart, 1)}
    out = ss_zero(target_chart, out_trunc)
    for (etuple, omask), c in f.coeffs.items():
        term = ss_const(target_chart, c, out_trunc)
        bit = 0
        m = omask
        while m:
            if m & 1:
                term = term * mapping[flat_odds[bit]]
            m >>= 1
            bit += 1
        for (ev, _), e in zip(chart.groups, etuple):
            if e < 0:
                raise NotInvertible(
                    "negative exponent of %s under substitution" % ev
                )
            pows = even_pows[ev]
            while e not in pows:
                top = max(pows)
                pows[top + 1] = (pows[top] * mapping[ev]).truncate(out_trunc)
            term = term * pows[e]
        out = out + term.truncate(out_trunc)
    return out.truncate(out_trunc)


# -- the two shift conventions ---------------------------------------------------


def nk_pairing(chart: Chart, odds_a, odds_b) -> SuperSeries:
    """P(xi, eta): sum of xi^i eta^i, or the half-sum pairing on complex charts."""
    out = ss_zero(chart)
    if chart.complex_pair:
        half = rat(1, 2)
        xp, xm = odds_a
        yp, ym = odds_b
        return half * (
            ss_var(chart, xp) * ss_var(chart, ym)
            + ss_var(chart, xm) * ss_var(chart, yp)
        )
    for xa, xb in zip(odds_a, odds_b):
        out = out + ss_var(chart, xa) * ss_var(chart, xb)
    return out


def taylor_shift(f: SuperSeries, bi: Chart, direction: str = "left") -> SuperSeries:
    """Expand a series in W = (w, ze...) at the shifted point.

    direction "left" substitutes Z+W, direction "right" W+Z; the NW variant
    adds coordinates plainly, the NK variant inserts the odd pairing into the
    even part, and the two directions genuinely differ there.
    """
    if direction not in ("left", "right"):
        raise ValueError("direction must be left or right")
    (z, ths), (w, zes) = bi.groups
    mapping = {name: ss_var(bi, name) for name in (z, w, *ths, *zes)}
    shifted_even = ss_var(bi, z) + ss_var(bi, w)
    if bi.variant == "NK":
        p = nk_pairing(bi, ths, zes)
        shifted_even = shifted_even + p if direction == "left" else shifted_even - p
    mapping[w] = shifted_even
    for th, ze in zip(ths, zes):
        mapping[ze] = ss_var(bi, th) + ss_var(bi, ze)
    return ss_subs(f, mapping, bi)
