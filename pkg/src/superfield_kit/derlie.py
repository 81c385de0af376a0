"""Superderivations of the formal disk and exponential coordinates.

A SuperVectorField is a first-order derivation a*d_z + sum_i b_i*d_theta^i
with series coefficients written on the left.  Four families of such fields
are built in: the coordinate fields of a plain (1|1) disk (labels T, J, Q,
H), the contact fields for one odd variable (L, G), and the contact fields
for two odd variables in the real (L, J, G1, G2) and complex (L, J, G+, G-)
bases.  Each family carries the commutator table its generators satisfy;
verify_family recomputes every bracket inside an index window and reports
what fails to match.

exp_coordinates goes the other way: it takes a coordinate change, localizes
it at a moving point, and solves for the coefficients v_i, w_i, ... of the
factorized exponential that produces the localized change.  The equations
are triangular, so each coefficient is read off a left-coefficient table
once the earlier ones are known, with no approximation.  reexponentiate
rebuilds the localized change from the solved coefficients, which lets a
round trip be checked exactly up to the solved order.
"""

from fractions import Fraction

from .disk import is_superconformal, localize
from .errors import (
    ChartMismatch,
    NonNilpotentAtOrder,
    NotInvertible,
    NotSuperconformal,
    OutOfRange,
    ParityError,
    SingularJet,
)
from .qi import QI
from .scalar import coerce_scalar, rat
from .series import (
    Chart,
    SuperSeries,
    bichart,
    chart_n,
    d_even,
    d_odd,
    ss_invert,
    ss_monomial,
    ss_subs,
    ss_var,
    ss_zero,
)

_FAMILIES = {
    "w11": "W11",
    "k11": "K11",
    "k12": "K12",
    "k12complex": "K12complex",
}

# generator labels and their parities
_LABELS = {
    "W11": {"T": 0, "J": 0, "Q": 1, "H": 1},
    "K11": {"L": 0, "G": 1},
    "K12": {"L": 0, "J": 0, "G1": 1, "G2": 1},
    "K12complex": {"L": 0, "J": 0, "G+": 1, "G-": 1},
}

# labels indexed by half-odd integers
_HALF = {"G", "G1", "G2", "G+", "G-"}


def _family_key(family):
    key = str(family).lower()
    if key not in _FAMILIES:
        raise ValueError("unknown family %r" % (family,))
    return _FAMILIES[key]


def family_chart(family):
    """The single chart a family's fields live on."""
    fam = _family_key(family)
    if fam == "W11":
        return chart_n(1, "NW")
    if fam == "K11":
        return chart_n(1)
    if fam == "K12":
        return chart_n(2)
    return chart_n(2, complex_pair=True)


class SuperVectorField:
    """a*d_even + sum_i b_i*d_odd^i on one (even, odds) group of a chart.

    Coefficients sit on the left of the coordinate derivatives.  On a
    two-point chart the group argument picks whether the field moves the
    base point (group 0) or the moving point (group 1).
    """

    __slots__ = ("chart", "group", "even_coeff", "odd_coeffs")

    def __init__(self, chart, even_coeff=None, odd_coeffs=None, group=0):
        _, odds = chart.groups[group]
        zero = ss_zero(chart)
        ec = zero if even_coeff is None else self._as_series(chart, even_coeff)
        if odd_coeffs is None:
            ocs = tuple(zero for _ in odds)
        else:
            ocs = tuple(self._as_series(chart, c) for c in odd_coeffs)
            if len(ocs) != len(odds):
                raise ChartMismatch(
                    "expected %d odd coefficients, got %d" % (len(odds), len(ocs))
                )
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "even_coeff", ec)
        object.__setattr__(self, "odd_coeffs", ocs)

    def __setattr__(self, name, value):
        raise AttributeError("SuperVectorField is immutable")

    @staticmethod
    def _as_series(chart, c):
        if isinstance(c, SuperSeries):
            if c.chart != chart:
                raise ChartMismatch("coefficient lives on a different chart")
            return c
        s = coerce_scalar(c)
        if s is None:
            raise ChartMismatch("cannot use %r as a field coefficient" % (c,))
        zero = (0,) * len(chart.groups)
        return SuperSeries(chart, {(zero, 0): s})

    # -- structure -----------------------------------------------------------

    @property
    def parity(self):
        """0 even, 1 odd, None mixed; an odd derivative flips the count."""
        seen = set()
        if not self.even_coeff.is_zero():
            p = self.even_coeff.parity
            if p is None:
                return None
            seen.add(p)
        for c in self.odd_coeffs:
            if c.is_zero():
                continue
            p = c.parity
            if p is None:
                return None
            seen.add((p + 1) & 1)
        if len(seen) > 1:
            return None
        return seen.pop() if seen else 0

    def is_zero(self):
        return self.even_coeff.is_zero() and all(c.is_zero() for c in self.odd_coeffs)

    def _check(self, other):
        if self.chart != other.chart or self.group != other.group:
            raise ChartMismatch("fields act on different charts or groups")

    def equals(self, other):
        self._check(other)
        if not self.even_coeff.equals(other.even_coeff):
            return False
        return all(a.equals(b) for a, b in zip(self.odd_coeffs, other.odd_coeffs))

    # -- module operations -----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, SuperVectorField):
            return NotImplemented
        self._check(other)
        return SuperVectorField(
            self.chart,
            self.even_coeff + other.even_coeff,
            [a + b for a, b in zip(self.odd_coeffs, other.odd_coeffs)],
            self.group,
        )

    def __neg__(self):
        return SuperVectorField(
            self.chart,
            -self.even_coeff,
            [-c for c in self.odd_coeffs],
            self.group,
        )

    def __sub__(self, other):
        if not isinstance(other, SuperVectorField):
            return NotImplemented
        return self + (-other)

    def __rmul__(self, other):
        """Left multiplication by a scalar or a series on the same chart."""
        if isinstance(other, SuperVectorField):
            return NotImplemented
        c = self._as_series(self.chart, other)
        return SuperVectorField(
            self.chart,
            c * self.even_coeff,
            [c * b for b in self.odd_coeffs],
            self.group,
        )

    # -- action ---------------------------------------------------------------

    def apply(self, f):
        """Differentiate a series on the same chart."""
        if f.chart != self.chart:
            raise ChartMismatch("field and series live on different charts")
        ev, odds = self.chart.groups[self.group]
        out = ss_zero(self.chart)
        if not (self.even_coeff.is_zero() and self.even_coeff.trunc is None):
            out = out + self.even_coeff * d_even(f, ev)
        for name, c in zip(odds, self.odd_coeffs):
            if c.is_zero() and c.trunc is None:
                continue
            out = out + c * d_odd(f, name)
        return out

    def __str__(self):
        ev, odds = self.chart.groups[self.group]
        parts = []
        if not self.even_coeff.is_zero():
            parts.append("(%s)*d_%s" % (self.even_coeff, ev))
        for name, c in zip(odds, self.odd_coeffs):
            if not c.is_zero():
                parts.append("(%s)*d_%s" % (c, name))
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return "SuperVectorField(%s)" % self


def vf_bracket(x, y):
    """Super commutator [x, y] = x y - (-1)^(|x||y|) y x."""
    x._check(y)
    px, py = x.parity, y.parity
    if px is None or py is None:
        raise ParityError("bracket of inhomogeneous fields")
    both_odd = bool(px and py)

    def comm(a, b):
        return x.apply(b) + y.apply(a) if both_odd else x.apply(b) - y.apply(a)

    ec = comm(x.even_coeff, y.even_coeff)
    ocs = [comm(a, b) for a, b in zip(x.odd_coeffs, y.odd_coeffs)]
    return SuperVectorField(x.chart, ec, ocs, x.group)


# -- the four families --------------------------------------------------------


def _field_components(chart, group, fam, label, idx):
    """Even and odd coefficients of one family generator on a chart group."""
    nloc = chart.n
    zero = ss_zero(chart)

    def mono(c, k, lm=0):
        et = [0] * len(chart.groups)
        et[group] = k
        return ss_monomial(chart, c, tuple(et), lm << (group * nloc))

    m = int(idx) if idx.denominator == 1 else None
    k = int(idx - Fraction(1, 2)) if idx.denominator == 2 else None

    if fam == "W11":
        if label == "T":
            return mono(-1, m + 1), [mono(-(m + 1), m, 1)]
        if label == "J":
            return zero, [mono(-1, m, 1)]
        if label == "Q":
            return zero, [mono(-1, m + 1)]
        return mono(1, m, 1), [zero]  # H
    if fam == "K11":
        if label == "L":
            return mono(-1, m + 1), [mono(rat(-(m + 1), 2), m, 1)]
        return mono(1, k + 1, 1), [mono(-1, k + 1)]  # G
    if fam == "K12":
        if label == "L":
            c = rat(-(m + 1), 2)
            return mono(-1, m + 1), [mono(c, m, 1), mono(c, m, 2)]
        if label == "J":
            return zero, [mono(QI(0, -1), m, 2), mono(QI(0, 1), m, 1)]
        if label == "G1":
            return mono(1, k + 1, 1), [mono(-1, k + 1), mono(k + 1, k, 3)]
        return mono(1, k + 1, 2), [mono(-(k + 1), k, 3), mono(-1, k + 1)]  # G2
    # K12complex
    if label == "L":
        c = rat(-(m + 1), 2)
        return mono(-1, m + 1), [mono(c, m, 1), mono(c, m, 2)]
    if label == "J":
        return zero, [mono(-1, m, 1), mono(1, m, 2)]
    if label == "G+":
        dplus = mono(-1, k + 1) + mono(rat(-(k + 1), 2), k, 3)
        return mono(rat(1, 2), k + 1, 2), [dplus, zero]
    dminus = mono(-1, k + 1) + mono(rat(k + 1, 2), k, 3)
    return mono(rat(1, 2), k + 1, 1), [zero, dminus]  # G-


def _as_index(n):
    try:
        return Fraction(n)
    except (TypeError, ValueError):
        raise OutOfRange("generator index must be rational, got %r" % (n,)) from None


def generator(family, label, n):
    """One family generator as a vector field on the family chart."""
    fam = _family_key(family)
    labels = _LABELS[fam]
    if label not in labels:
        raise OutOfRange("family %s has no generator %r" % (fam, label))
    q = _as_index(n)
    if label in _HALF:
        if q.denominator != 2 or q < 0:
            raise OutOfRange(
                "%s is indexed by 1/2, 3/2, ...; got %s" % (label, q)
            )
    else:
        if q.denominator != 1 or q < 0:
            raise OutOfRange("%s is indexed by 0, 1, 2, ...; got %s" % (label, q))
    chart = family_chart(fam)
    ev, odds = _field_components(chart, 0, fam, label, q)
    return SuperVectorField(chart, ev, odds)


# canonical bracket tables; each unordered label pair appears in one order and
# the other order follows from super antisymmetry
_CANON = {
    "W11": {
        ("T", "T"): lambda m, n: [(m - n, "T", m + n)],
        ("T", "J"): lambda m, n: [(-n, "J", m + n)],
        ("T", "Q"): lambda m, n: [(m - n, "Q", m + n)],
        ("T", "H"): lambda m, n: [(-n, "H", m + n)],
        ("J", "J"): lambda m, n: [],
        ("J", "Q"): lambda m, n: [(1, "Q", m + n)],
        ("J", "H"): lambda m, n: [(-1, "H", m + n)],
        ("Q", "Q"): lambda m, n: [],
        ("H", "H"): lambda m, n: [],
        ("H", "Q"): lambda m, n: [(1, "T", m + n), (-m, "J", m + n)],
    },
    "K11": {
        ("L", "L"): lambda m, n: [(m - n, "L", m + n)],
        ("L", "G"): lambda m, n: [(m / 2 - n, "G", m + n)],
        ("G", "G"): lambda m, n: [(2, "L", m + n)],
    },
    "K12": {
        ("L", "L"): lambda m, n: [(m - n, "L", m + n)],
        ("L", "J"): lambda m, n: [(-n, "J", m + n)],
        ("L", "G1"): lambda m, n: [(m / 2 - n, "G1", m + n)],
        ("L", "G2"): lambda m, n: [(m / 2 - n, "G2", m + n)],
        ("J", "J"): lambda m, n: [],
        ("J", "G1"): lambda m, n: [(QI(0, -1), "G2", m + n)],
        ("J", "G2"): lambda m, n: [(QI(0, 1), "G1", m + n)],
        ("G1", "G1"): lambda m, n: [(2, "L", m + n)],
        ("G1", "G2"): lambda m, n: [(QI(0, n - m), "J", m + n)],
        ("G2", "G2"): lambda m, n: [(2, "L", m + n)],
    },
    "K12complex": {
        ("L", "L"): lambda m, n: [(m - n, "L", m + n)],
        ("L", "J"): lambda m, n: [(-n, "J", m + n)],
        ("L", "G+"): lambda m, n: [(m / 2 - n, "G+", m + n)],
        ("L", "G-"): lambda m, n: [(m / 2 - n, "G-", m + n)],
        ("J", "J"): lambda m, n: [],
        ("J", "G+"): lambda m, n: [(1, "G+", m + n)],
        ("J", "G-"): lambda m, n: [(-1, "G-", m + n)],
        ("G+", "G+"): lambda m, n: [],
        ("G+", "G-"): lambda m, n: [
            (1, "L", m + n),
            ((m - n) / 2, "J", m + n),
        ],
        ("G-", "G-"): lambda m, n: [],
    },
}


def _bracket_terms(fam, la, m, lb, n):
    tab = _CANON[fam]
    if (la, lb) in tab:
        return tab[(la, lb)](m, n)
    terms = tab[(lb, la)](n, m)
    pa, pb = _LABELS[fam][la], _LABELS[fam][lb]
    s = 1 if (pa and pb) else -1
    return [(s * c, label, k) for c, label, k in terms]


def bracket_table(family, la, m, lb, n):
    """Table value of [la_m, lb_n] as a vector field (central terms drop)."""
    fam = _family_key(family)
    for label in (la, lb):
        if label not in _LABELS[fam]:
            raise OutOfRange("family %s has no generator %r" % (fam, label))
    chart = family_chart(fam)
    out = SuperVectorField(chart)
    for coeff, label, k in _bracket_terms(fam, la, _as_index(m), lb, _as_index(n)):
        out = out + coeff * generator(fam, label, k)
    return out


def verify_family(family, window=4):
    """Check every generator bracket with indices in the window against the
    family's commutator table; returns a list of mismatch descriptions."""
    fam = _family_key(family)
    gens = []
    for label in _LABELS[fam]:
        if label in _HALF:
            indices = [Fraction(2 * j + 1, 2) for j in range(window)]
        else:
            indices = [Fraction(j) for j in range(window + 1)]
        gens.extend((label, idx) for idx in indices)
    fields = {key: generator(fam, *key) for key in gens}
    report = []
    for la, m in gens:
        for lb, n in gens:
            got = vf_bracket(fields[la, m], fields[lb, n])
            want = bracket_table(fam, la, m, lb, n)
            if not got.equals(want):
                report.append(
                    "[%s_%s, %s_%s] differs from the table" % (la, m, lb, n)
                )
    return report


# -- truncated exponential ------------------------------------------------------


def _total_low(f):
    return min(sum(e) + m.bit_count() for (e, m) in f.coeffs)


def exp_action(x, f, order):
    """sum_{k<=order} x^k(f)/k!, exact when the series terminates.

    Raises NonNilpotentAtOrder when the first dropped term still has total
    degree (even exponents plus odd letters) within the requested order, so
    the truncation would actually lose something.
    """
    if f.chart != x.chart:
        raise ChartMismatch("field and series live on different charts")
    if order < 0:
        raise ValueError("order must be >= 0")
    out = f
    term = f
    for k in range(1, order + 1):
        term = rat(1, k) * x.apply(term)
        out = out + term
    tail = x.apply(term)
    if not tail.is_zero() and _total_low(tail) <= order:
        raise NonNilpotentAtOrder(
            "power %d of the field keeps terms of total degree %d <= order %d"
            % (order + 1, _total_low(tail), order)
        )
    return out


# -- exponential coordinates of a change ---------------------------------------


class ExpCoords:
    """Named coefficients of the factorized exponential of a localized change."""

    __slots__ = ("family", "order", "coeffs")

    def __init__(self, family, order, coeffs):
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", dict(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("ExpCoords is immutable")

    def __getitem__(self, name):
        return self.coeffs[name]

    def __contains__(self, name):
        return name in self.coeffs

    def names(self):
        return sorted(self.coeffs)

    def __str__(self):
        body = ", ".join("%s = %s" % (k, self.coeffs[k]) for k in self.names())
        return "%s order %d: %s" % (self.family, self.order, body)


def _rest_chart(bi):
    return Chart((bi.groups[0],), bi.variant, bi.complex_pair)


def _jet_invert(s):
    try:
        return ss_invert(s)
    except NotInvertible:
        raise SingularJet("the 1-jet of the change is singular") from None


def _entry(tables, gexp, gmask, rest, trunc):
    got = tables.get((gexp, gmask))
    if got is not None:
        return got
    t = None if trunc is None else max(trunc - gexp, 0)
    return SuperSeries(rest, {}, t)


def exp_coordinates(rho, family, order=2):
    """Solve for the exponential coefficients that produce the localized rho.

    The factorization is solved up to total moving degree 2: the grading
    scalings (A, B and the degree-zero odd shifts for the plain family) plus
    the i = 1 coefficients, and w2 for the contact families.  Higher
    coefficients would need a deeper window, so any other order is refused.
    """
    fam = _family_key(family)
    if fam == "K12complex":
        fam = "K12"
    if order != 2:
        raise ValueError("the factorization is solved at order 2 only")
    chart = rho.chart

    if fam == "K11":
        if chart.n != 1 or chart.variant != "NK" or chart.complex_pair:
            raise ChartMismatch("K11 coordinates need a (1|1) NK chart")
        ok, _ = is_superconformal(rho, "N1")
        if not ok:
            raise NotSuperconformal("change does not preserve the contact form")
        loc = localize(rho)
        rest = _rest_chart(loc.chart)
        psi = loc.psis[0]
        pt = psi.left_coeff_table()
        a = _entry(pt, 0, 1, rest, psi.trunc)
        ai = _jet_invert(a)
        w1 = ai * _entry(pt, 1, 0, rest, psi.trunc)
        v1 = ai * _entry(pt, 1, 1, rest, psi.trunc)
        w2 = ai * _entry(pt, 2, 0, rest, psi.trunc) - v1 * w1
        return ExpCoords("K11", 2, {"A": a, "v1": v1, "w1": w1, "w2": w2})

    if fam == "K12":
        if chart.n != 2 or chart.variant != "NK" or not chart.complex_pair:
            raise ChartMismatch("K12 coordinates need the complex (1|2) NK chart")
        ok, _ = is_superconformal(rho, "N2oriented")
        if not ok:
            raise NotSuperconformal(
                "change is not an oriented N=2 superconformal map"
            )
        loc = localize(rho)
        rest = _rest_chart(loc.chart)
        psip, psim = loc.psis
        tp = psip.left_coeff_table()
        tm = psim.left_coeff_table()
        pp = _entry(tp, 0, 1, rest, psip.trunc)
        pm = _entry(tm, 0, 2, rest, psim.trunc)
        ppi = _jet_invert(pp)
        pmi = _jet_invert(pm)
        w1p = ppi * _entry(tp, 1, 0, rest, psip.trunc)
        w1m = pmi * _entry(tm, 1, 0, rest, psim.trunc)
        yp = ppi * _entry(tp, 1, 1, rest, psip.trunc)
        ym = pmi * _entry(tm, 1, 2, rest, psim.trunc)
        half = rat(1, 2)
        v1 = half * (yp + ym)
        u1 = half * (yp - ym) + half * (w1p * w1m)
        w2p = ppi * _entry(tp, 2, 0, rest, psip.trunc) - half * (
            w1p * (2 * v1 + u1)
        )
        w2m = pmi * _entry(tm, 2, 0, rest, psim.trunc) - half * (
            w1m * (2 * v1 - u1)
        )
        return ExpCoords(
            "K12",
            2,
            {
                "BA": pp,
                "BinvA": pm,
                "A2": pp * pm,
                "v1": v1,
                "u1": u1,
                "w1+": w1p,
                "w1-": w1m,
                "w2+": w2p,
                "w2-": w2m,
            },
        )

    # W11
    if chart.n != 1 or chart.variant != "NW":
        raise ChartMismatch("W11 coordinates need a plain (1|1) chart")
    loc = localize(rho)
    rest = _rest_chart(loc.chart)
    ft = loc.f.left_coeff_table()
    pt = loc.psis[0].left_coeff_table()
    tf, tpsi = loc.f.trunc, loc.psis[0].trunc
    p = _entry(pt, 0, 1, rest, tpsi)
    pi = _jet_invert(p)
    q0 = pi * _entry(pt, 1, 0, rest, tpsi)
    f10 = _entry(ft, 1, 0, rest, tf)
    f01 = _entry(ft, 0, 1, rest, tf)
    a = f10 + q0 * f01
    ai = _jet_invert(a)
    h0 = -(ai * f01)
    b = p * ai
    v1 = ai * (_entry(ft, 2, 0, rest, tf) + (pi * _entry(pt, 2, 0, rest, tpsi)) * f01)
    q1 = pi * _entry(pt, 2, 0, rest, tpsi) - v1 * q0
    h1 = ai * ((pi * _entry(pt, 1, 1, rest, tpsi)) * f01 - _entry(ft, 1, 1, rest, tf))
    u1 = pi * _entry(pt, 1, 1, rest, tpsi) - h1 * q0 - 2 * v1
    return ExpCoords(
        "W11",
        2,
        {"A": a, "B": b, "q0": q0, "h0": h0, "v1": v1, "u1": u1, "q1": q1, "h1": h1},
    )


def _lift_base(s, bi):
    mapping = {name: ss_var(bi, name) for name in s.chart.evens + s.chart.odds}
    return ss_subs(s, mapping, bi)


def _moving(bi, fam, label, idx):
    ev, odds = _field_components(bi, 1, fam, label, Fraction(idx))
    return SuperVectorField(bi, ev, odds, group=1)


def reexponentiate(coords):
    """Rebuild the localized change from solved exponential coefficients.

    Returns (f_model, psi_models) on the standard two-point chart.  The
    models agree with localize(rho) on every left-table key of total moving
    degree <= coords.order; beyond that window the unsolved higher
    coefficients are missing, so compare windowed tables only.
    """
    fam = coords.family
    if fam == "K11":
        bi = bichart(1)
        a = _lift_base(coords["A"], bi)
        x = -(
            _lift_base(coords["v1"], bi) * _moving(bi, "K11", "L", 1)
            + _lift_base(coords["w1"], bi) * _moving(bi, "K11", "G", Fraction(1, 2))
            + _lift_base(coords["w2"], bi) * _moving(bi, "K11", "G", Fraction(3, 2))
        )
        w = ss_var(bi, "w")
        ze = ss_var(bi, "ze1")
        f = exp_action(x, (a * a) * w, coords.order)
        psi = exp_action(x, a * ze, coords.order)
        return f, (psi,)
    if fam == "K12":
        bi = bichart(2, complex_pair=True)
        ba = _lift_base(coords["BA"], bi)
        bia = _lift_base(coords["BinvA"], bi)
        x = -(
            _lift_base(coords["v1"], bi) * _moving(bi, "K12complex", "L", 1)
            + _lift_base(coords["u1"], bi) * _moving(bi, "K12complex", "J", 1)
            + _lift_base(coords["w1+"], bi) * _moving(bi, "K12complex", "G+", Fraction(1, 2))
            + _lift_base(coords["w1-"], bi) * _moving(bi, "K12complex", "G-", Fraction(1, 2))
            + _lift_base(coords["w2+"], bi) * _moving(bi, "K12complex", "G+", Fraction(3, 2))
            + _lift_base(coords["w2-"], bi) * _moving(bi, "K12complex", "G-", Fraction(3, 2))
        )
        w = ss_var(bi, "w")
        f = exp_action(x, (ba * bia) * w, coords.order)
        psip = exp_action(x, ba * ss_var(bi, "zep"), coords.order)
        psim = exp_action(x, bia * ss_var(bi, "zem"), coords.order)
        return f, (psip, psim)
    # W11
    bi = bichart(1, "NW")
    a = _lift_base(coords["A"], bi)
    b = _lift_base(coords["B"], bi)
    q0 = _lift_base(coords["q0"], bi)
    h0 = _lift_base(coords["h0"], bi)
    x = -(
        _lift_base(coords["v1"], bi) * _moving(bi, "W11", "T", 1)
        + _lift_base(coords["u1"], bi) * _moving(bi, "W11", "J", 1)
        + _lift_base(coords["q1"], bi) * _moving(bi, "W11", "Q", 1)
        + _lift_base(coords["h1"], bi) * _moving(bi, "W11", "H", 1)
    )
    w = ss_var(bi, "w")
    ze = ss_var(bi, "ze1")
    p = b * a
    t_img = (a + a * (q0 * h0)) * w - (a * h0) * ze
    z_img = p * ze + (q0 * p) * w
    f = exp_action(x, t_img, coords.order)
    psi = exp_action(x, z_img, coords.order)
    return f, (psi,)
