"""Formal delta distributions on finite coefficient windows.

The delta function and its divided derivatives have no finite series
representation, so they are handled as coefficient tables over explicit
exponent windows: a BiWindow stores, for a two-point chart, the coefficients
of z^a w^b theta^C zeta^B with (a, b) inside declared per-variable bounds.
Everything outside the bounds is unknown, and every operation tracks how the
bounds shrink.

The two expansion routes for the derived delta (applying the divided
derivative operator to the delta table, and expanding the shifted negative
power directly) are built independently so that their agreement is an actual
check.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ChartMismatch
from .qi import QI
from .scalar import GrassmannScalar, coerce_scalar, rat
from .series import Chart, SuperSeries, bichart, nk_pairing, ss_const, ss_var
from .signs import sigma_mask, sign_sigma_full


def binom(k: int, m: int) -> Fraction:
    """Generalized binomial coefficient with integer (possibly negative) top."""
    out = Fraction(1)
    for i in range(m):
        out *= Fraction(k - i, i + 1)
    return out


class BiWindow:
    """Coefficient table over per-even-variable exponent windows."""

    __slots__ = ("chart", "bounds", "coeffs")

    def __init__(self, chart: Chart, bounds, coeffs=None):
        bounds = tuple((int(lo), int(hi)) for lo, hi in bounds)
        if len(bounds) != len(chart.groups):
            raise ChartMismatch("one bound pair per even variable")
        clean = {}
        if coeffs:
            for (etuple, omask), c in coeffs.items():
                c = coerce_scalar(c)
                if c is None or c.is_zero():
                    continue
                if all(lo <= e <= hi for e, (lo, hi) in zip(etuple, bounds)):
                    key = (tuple(etuple), omask)
                    prev = clean.get(key)
                    clean[key] = c if prev is None else prev + c
                    if clean[key].is_zero():
                        del clean[key]
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("BiWindow is immutable")

    def is_zero(self) -> bool:
        return not self.coeffs

    def _common_bounds(self, other):
        return tuple(
            (max(l1, l2), min(h1, h2))
            for (l1, h1), (l2, h2) in zip(self.bounds, other.bounds)
        )

    def __add__(self, other):
        if self.chart != other.chart:
            raise ChartMismatch("window tables on different charts")
        acc = dict(self.coeffs)
        for key, c in other.coeffs.items():
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        return BiWindow(self.chart, self._common_bounds(other), acc)

    def __neg__(self):
        return BiWindow(
            self.chart, self.bounds, {k: -c for k, c in self.coeffs.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "BiWindow":
        c = coerce_scalar(c)
        return BiWindow(
            self.chart, self.bounds, {k: c * v for k, v in self.coeffs.items()}
        )

    def mul_poly(self, poly: SuperSeries, side: str = "right") -> "BiWindow":
        """Multiply by an exact finite series, table on the given side."""
        if poly.chart != self.chart:
            raise ChartMismatch("polynomial lives on a different chart")
        if poly.trunc is not None:
            raise ChartMismatch("window tables only multiply by exact polynomials")
        ne = len(self.chart.groups)
        degs = [[e[i] for e, _ in poly.coeffs] or [0] for i in range(ne)]
        bounds = tuple(
            (lo + max(degs[i]), hi + min(degs[i]))
            for i, (lo, hi) in enumerate(self.bounds)
        )
        acc = {}
        for (e1, m1), c1 in self.coeffs.items():
            for (e2, m2), c2 in poly.coeffs.items():
                if m1 & m2:
                    continue
                if side == "right":
                    la, ma, ca = e1, m1, c1
                    lb, mb, cb = e2, m2, c2
                else:
                    la, ma, ca = e2, m2, c2
                    lb, mb, cb = e1, m1, c1
                cbe, cbo = cb.parity_split()
                cross = cb if ma.bit_count() % 2 == 0 else cbe - cbo
                coeff = ca * cross
                if sigma_or_zero(ma, mb) < 0:
                    coeff = -coeff
                key = (tuple(x + y for x, y in zip(la, lb)), ma | mb)
                prev = acc.get(key)
                acc[key] = coeff if prev is None else prev + coeff
        return BiWindow(self.chart, bounds, acc)

    def d_even(self, name: str) -> "BiWindow":
        gi = self.chart.even_index(name)
        acc = {}
        for (etuple, omask), c in self.coeffs.items():
            e = etuple[gi]
            if e == 0:
                continue
            nk = list(etuple)
            nk[gi] = e - 1
            acc[(tuple(nk), omask)] = rat(e) * c
        bounds = tuple(
            (lo - 1, hi - 1) if i == gi else (lo, hi)
            for i, (lo, hi) in enumerate(self.bounds)
        )
        return BiWindow(self.chart, bounds, acc)

    def d_odd(self, name: str) -> "BiWindow":
        bit = 1 << self.chart.odd_bit(name)
        acc = {}
        for (etuple, omask), c in self.coeffs.items():
            if not (omask & bit):
                continue
            below = (omask & (bit - 1)).bit_count()
            ce, co = c.parity_split()
            term = ce - co
            if below & 1:
                term = -term
            key = (etuple, omask & ~bit)
            prev = acc.get(key)
            acc[key] = term if prev is None else prev + term
        return BiWindow(self.chart, self.bounds, acc)

    def restrict(self, bounds) -> "BiWindow":
        joint = tuple(
            (max(l1, l2), min(h1, h2))
            for (l1, h1), (l2, h2) in zip(self.bounds, bounds)
        )
        return BiWindow(self.chart, joint, self.coeffs)

    def agrees_with(self, other: "BiWindow") -> bool:
        """Coefficient equality on the intersection of the two windows."""
        if self.chart != other.chart:
            raise ChartMismatch("window tables on different charts")
        bounds = self._common_bounds(other)

        def inside(key):
            return all(lo <= e <= hi for e, (lo, hi) in zip(key[0], bounds))

        for key in set(self.coeffs) | set(other.coeffs):
            if not inside(key):
                continue
            a = self.coeffs.get(key, GrassmannScalar())
            b = other.coeffs.get(key, GrassmannScalar())
            if a != b:
                return False
        return True

    def __str__(self):
        if not self.coeffs:
            return "0 on %s" % (self.bounds,)
        parts = []
        for key in sorted(self.coeffs, key=lambda k: (k[0], k[1])):
            parts.append("%s %s" % (key, self.coeffs[key]))
        return "; ".join(parts)


def sigma_or_zero(m1: int, m2: int) -> int:
    sign = 0
    m = m1
    while m:
        low = m & (-m)
        sign += (m2 & (low - 1)).bit_count()
        m ^= low
    return -1 if sign & 1 else 1


def odd_diff_poly(bi: Chart, mask: int) -> SuperSeries:
    """Product over the masked indices, increasing, of (theta^i - zeta^i)."""
    n = bi.n
    out = ss_const(bi, 1)
    for i in range(n):
        if mask & (1 << i):
            th = ss_var(bi, bi.groups[0][1][i])
            ze = ss_var(bi, bi.groups[1][1][i])
            out = out * (th - ze)
    return out


def zw_expansion_difference(k: int, bi: Chart, bounds) -> BiWindow:
    """(i_{z,w} - i_{w,z}) applied to (z - w)^k on the window; zero for k >= 0."""
    if k >= 0:
        return BiWindow(bi, bounds, {})
    (lo_z, hi_z), (lo_w, hi_w) = bounds
    acc = {}
    # |z| > |w| branch: sum_j binom(k,j) z^{k-j} (-w)^j, j >= 0
    j = max(0, lo_w, k - hi_z)
    while j <= hi_w and k - j >= lo_z:
        c = binom(k, j) * (-1) ** j
        if c:
            acc[((k - j, j), 0)] = GrassmannScalar.from_qi(QI(c))
        j += 1
    # |w| > |z| branch, subtracted: (z-w)^k = (-1)^k (w-z)^k expands to
    # (-1)^k sum_j binom(k,j) w^{k-j} (-z)^j
    ksign = 1 if k % 2 == 0 else -1
    j = max(0, lo_z, k - hi_w)
    while j <= hi_z and k - j >= lo_w:
        c = binom(k, j) * (-1) ** j * ksign
        if c:
            key = ((j, k - j), 0)
            prev = acc.get(key, GrassmannScalar())
            acc[key] = prev - GrassmannScalar.from_qi(QI(c))
        j += 1
    return BiWindow(bi, bounds, acc)


def shifted_power_table(p: int, omask: int, bi: Chart, bounds) -> BiWindow:
    """(i_{z,w} - i_{w,z}) (Z - W)^{p | omask} on the window.

    The even part is (z - w)^p in the NW variant and (z - w - P)^p in the NK
    variant, with P the odd pairing; the nilpotent P is pulled out by the
    binomial series, which terminates.
    """
    out = BiWindow(bi, bounds, {})
    if bi.variant == "NW":
        out = out + zw_expansion_difference(p, bi, bounds)
    else:
        pairing = nk_pairing(bi, bi.groups[0][1], bi.groups[1][1])
        minus_p_pow = ss_const(bi, 1)
        m = 0
        while True:
            if not minus_p_pow.is_zero():
                base = zw_expansion_difference(p - m, bi, bounds)
                coeffed = base.mul_poly(
                    GrassmannScalar.from_qi(QI(binom(p, m))) * minus_p_pow,
                    side="left",
                ).restrict(bounds)
                out = out + coeffed
            else:
                break
            m += 1
            minus_p_pow = minus_p_pow * (-pairing)
    if omask:
        out = out.mul_poly(odd_diff_poly(bi, omask), side="right").restrict(bounds)
    return out


def delta_table(bi: Chart, bounds) -> BiWindow:
    """The delta function itself: full odd mask, even power -1."""
    n = bi.n
    return shifted_power_table(-1, (1 << n) - 1, bi, bounds)


def apply_dw_divided(table: BiWindow, j: int, Jmask: int) -> BiWindow:
    """The divided derivative in W: prefactor (-1)^{s(s+1)/2}/j! times
    d_w^j composed with the increasing word of odd derivations, rightmost
    factor applied first."""
    bi = table.chart
    wname = bi.groups[1][0]
    zes = bi.groups[1][1]
    out = table
    idxs = [i for i in range(bi.n) if Jmask & (1 << i)]
    for i in reversed(idxs):
        ze = zes[i]
        if bi.variant == "NK":
            out = out.d_odd(ze) + out.d_even(wname).mul_poly(
                ss_var(bi, ze), side="left"
            )
        else:
            out = out.d_odd(ze)
    for _ in range(j):
        out = out.d_even(wname)
    s = len(idxs)
    pref = Fraction((-1) ** (s * (s + 1) // 2), 1)
    for i in range(1, j + 1):
        pref /= i
    return out.scale(GrassmannScalar.from_qi(QI(pref)))


def delta_expand(j: int, J, n: int, variant: str, window: int = 6):
    """Build D_W^{(j|J)} delta(Z, W) two independent ways over |exponents| <=
    window and report agreement.

    Route "direct" applies the divided derivative to the delta table; route
    "closed" expands sigma(J, N\\J) (i_{z,w} - i_{w,z})(Z-W)^{-1-j | N\\J}.
    Returns a dict with both tables and the comparison flag.
    """
    bi = bichart(n, variant=variant)
    J = tuple(J)
    Jmask = 0
    for i in J:
        Jmask |= 1 << (i - 1)
    pad = j + len(J) + n
    big = ((-window - pad, window + pad), (-window - pad, window + pad))
    target = ((-window, window), (-window, window))
    direct = apply_dw_divided(delta_table(bi, big), j, Jmask).restrict(target)
    full = (1 << n) - 1
    closed = shifted_power_table(-1 - j, full & ~Jmask, bi, target).scale(
        rat(sign_sigma_full(Jmask, n))
    )
    return {
        "direct": direct,
        "closed": closed,
        "agree": direct.agrees_with(closed),
    }


def annihilation_checks(n: int, variant: str, window: int = 6):
    """(Z-W)^{1|0} delta = 0 and (Z-W)^{0|e_i} delta = 0 on the window."""
    bi = bichart(n, variant=variant)
    pad = n + 1
    big = ((-window - pad, window + pad), (-window - pad, window + pad))
    d = delta_table(bi, big)
    zw1 = ss_var(bi, "z") - ss_var(bi, "w")
    if variant == "NK":
        zw1 = zw1 - nk_pairing(bi, bi.groups[0][1], bi.groups[1][1])
    results = {"even": d.mul_poly(zw1, side="left").is_zero()}
    for i in range(n):
        poly = ss_var(bi, bi.groups[0][1][i]) - ss_var(bi, bi.groups[1][1][i])
        results["odd%d" % (i + 1)] = d.mul_poly(poly, side="left").is_zero()
    return results
