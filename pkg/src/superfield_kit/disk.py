"""Formal coordinate changes on the superdisk and their geometry.

A coordinate change rho = (F, Psi^1..Psi^N) sends the chart coordinates
(z, theta^i) to (F, Psi^i) with F even, Psi^i odd and an invertible 1-jet.
This module provides the group operations (compose, localize at a moving
base point), the superdeterminant and Jacobian, superconformal predicates
with residuals, both Schwarzian derivatives, the dual-curve transition and
the induced N=2 extension cocycle, plus samplers used throughout the tests.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    ChartMismatch,
    NotInvertible,
    NotSuperconformal,
    ParityError,
    SingularJet,
    SingularOddBlock,
    UnsupportedN,
)
from .qi import QI
from .scalar import GrassmannScalar, coerce_scalar, rat
from .series import (
    Chart,
    DEFAULT_TRUNC,
    SuperSeries,
    bichart,
    chart_n,
    d_even,
    d_odd,
    ss_const,
    ss_derive,
    ss_integrate,
    ss_invert,
    ss_monomial,
    ss_subs,
    ss_var,
    ss_zero,
    taylor_shift,
)


def _qi_det(rows):
    """Determinant of a small matrix of QI values."""
    k = len(rows)
    if k == 0:
        return QI(1)
    if k == 1:
        return rows[0][0]
    acc = QI(0)
    for j in range(k):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = rows[0][j] * _qi_det(minor)
        acc = acc - term if j & 1 else acc + term
    return acc


class CoordinateChange:
    """An element (F, Psi^1..Psi^N) of the group of formal coordinate changes."""

    __slots__ = ("chart", "f", "psis")

    def __init__(self, chart: Chart, f: SuperSeries, psis):
        psis = tuple(psis)
        if len(chart.groups) != 1:
            raise ChartMismatch("coordinate changes live on one-point charts")
        if len(psis) != chart.n:
            raise ChartMismatch(
                "expected %d odd components, got %d" % (chart.n, len(psis))
            )
        if f.chart != chart or any(p.chart != chart for p in psis):
            raise ChartMismatch("components must live on the declared chart")
        if f.parity != 0:
            raise ParityError("even component has odd or mixed terms")
        for p in psis:
            if not p.is_zero() and p.parity != 1:
                raise ParityError("odd component has even or mixed terms")
        if f.trunc is not None and f.trunc <= 1:
            raise SingularJet("truncation too small to read the 1-jet")
        jet_even = f.coeff((1,), 0).body().coeff()
        jet_odd = [
            [psis[i].coeff((0,), 1 << j).body().coeff() for j in range(chart.n)]
            for i in range(chart.n)
        ]
        if not jet_even or not _qi_det(jet_odd):
            raise SingularJet("1-jet is not invertible")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "psis", psis)

    def __setattr__(self, name, value):
        raise AttributeError("CoordinateChange is immutable")

    @property
    def trunc(self):
        t = self.f.trunc
        for p in self.psis:
            if p.trunc is not None and (t is None or p.trunc < t):
                t = p.trunc
        return t

    def components(self):
        return (self.f,) + self.psis

    def equals(self, other: "CoordinateChange") -> bool:
        if self.chart != other.chart:
            raise ChartMismatch("changes on different charts")
        return self.f.equals(other.f) and all(
            a.equals(b) for a, b in zip(self.psis, other.psis)
        )

    def __eq__(self, other):
        if not isinstance(other, CoordinateChange):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.f == other.f
            and self.psis == other.psis
        )

    def __str__(self):
        return "(%s)" % "; ".join(str(c) for c in self.components())

    def __repr__(self):
        return "<CoordinateChange %s>" % self


def identity_change(chart: Chart, trunc=None) -> CoordinateChange:
    ev = chart.evens[0]
    return CoordinateChange(
        chart,
        ss_var(chart, ev, trunc),
        tuple(ss_var(chart, od, trunc) for od in chart.odds),
    )


def compose(rho: CoordinateChange, tau: CoordinateChange) -> CoordinateChange:
    """The group law (rho * tau)(Z) = tau(rho(Z))."""
    if rho.chart != tau.chart:
        raise ChartMismatch("composing changes on different charts")
    chart = rho.chart
    mapping = {chart.evens[0]: rho.f}
    for name, p in zip(chart.odds, rho.psis):
        mapping[name] = p
    f = ss_subs(tau.f, mapping, chart)
    psis = tuple(ss_subs(p, mapping, chart) for p in tau.psis)
    return CoordinateChange(chart, f, psis)


# -- supermatrices ------------------------------------------------------------


def _one_like(entry):
    if isinstance(entry, SuperSeries):
        return ss_const(entry.chart, 1)
    return coerce_scalar(1)


def _inv_entry(entry):
    if isinstance(entry, SuperSeries):
        return ss_invert(entry)
    return entry.gr_invert()


def _det(rows, one):
    k = len(rows)
    if k == 0:
        return one
    if k == 1:
        return rows[0][0]
    acc = None
    for j in range(k):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = rows[0][j] * _det(minor, one)
        if j & 1:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def _mat_mul(a, b):
    out = []
    for i in range(len(a)):
        row = []
        for j in range(len(b[0])):
            acc = None
            for k in range(len(b)):
                term = a[i][k] * b[k][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out


def _mat_sub(a, b):
    return [
        [x - y for x, y in zip(ra, rb)]
        for ra, rb in zip(a, b)
    ]


def _mat_inv(rows, one):
    """Inverse of a square matrix with commuting (even) entries."""
    k = len(rows)
    dinv = _inv_entry(_det(rows, one))
    if k == 1:
        return [[dinv]]
    adj = []
    for i in range(k):
        row = []
        for j in range(k):
            minor = [
                [rows[r][c] for c in range(k) if c != i]
                for r in range(k)
                if r != j
            ]
            cof = _det(minor, one)
            if (i + j) & 1:
                cof = -cof
            row.append(cof * dinv)
        adj.append(row)
    return adj


class SuperMatrix:
    """A matrix with parity-graded rows and columns.

    Entries are GrassmannScalars or SuperSeries on a common chart.  The
    product is the plain row-by-column one, which is the composition rule
    for parity-preserving (even) matrices.
    """

    __slots__ = ("row_par", "col_par", "rows")

    def __init__(self, row_par, col_par, rows):
        row_par = tuple(row_par)
        col_par = tuple(col_par)
        rows = tuple(tuple(r) for r in rows)
        if len(rows) != len(row_par) or any(
            len(r) != len(col_par) for r in rows
        ):
            raise ValueError("matrix shape does not match the parity lists")
        object.__setattr__(self, "row_par", row_par)
        object.__setattr__(self, "col_par", col_par)
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, name, value):
        raise AttributeError("SuperMatrix is immutable")

    def entry(self, i, j):
        return self.rows[i][j]

    def is_even(self) -> bool:
        for i, rp in enumerate(self.row_par):
            for j, cp in enumerate(self.col_par):
                e = self.rows[i][j]
                if e.is_zero():
                    continue
                if e.parity != ((rp + cp) & 1):
                    return False
        return True

    def __matmul__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        if self.col_par != other.row_par:
            raise ValueError("inner parities do not match")
        return SuperMatrix(
            self.row_par, other.col_par, _mat_mul(self.rows, other.rows)
        )

    def __add__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        if self.row_par != other.row_par or self.col_par != other.col_par:
            raise ValueError("shapes do not match")
        return SuperMatrix(
            self.row_par,
            self.col_par,
            [
                [x + y for x, y in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ],
        )

    def __neg__(self):
        return SuperMatrix(
            self.row_par, self.col_par, [[-x for x in r] for r in self.rows]
        )

    def supertranspose(self) -> "SuperMatrix":
        rows = []
        for i, cp in enumerate(self.col_par):
            row = []
            for j, rp in enumerate(self.row_par):
                e = self.rows[j][i]
                if rp == 0 and cp == 1:
                    e = -e
                row.append(e)
            rows.append(row)
        return SuperMatrix(self.col_par, self.row_par, rows)

    def equals(self, other: "SuperMatrix") -> bool:
        if self.row_par != other.row_par or self.col_par != other.col_par:
            return False
        for ra, rb in zip(self.rows, other.rows):
            for x, y in zip(ra, rb):
                if isinstance(x, SuperSeries):
                    if not x.equals(y):
                        return False
                elif x != y:
                    return False
        return True

    def __str__(self):
        return "[%s]" % "; ".join(
            ", ".join(str(e) for e in r) for r in self.rows
        )

    def __repr__(self):
        return "<SuperMatrix %s>" % self


def sdet(m: SuperMatrix):
    """Superdeterminant det(K - L N^{-1} M) det(N)^{-1} of an even matrix."""
    if not m.is_even():
        raise ParityError("sdet needs a parity-preserving matrix")
    er = [i for i, p in enumerate(m.row_par) if p == 0]
    orr = [i for i, p in enumerate(m.row_par) if p == 1]
    ec = [j for j, p in enumerate(m.col_par) if p == 0]
    oc = [j for j, p in enumerate(m.col_par) if p == 1]
    if len(er) != len(ec) or len(orr) != len(oc):
        raise ValueError("parity blocks are not square")
    one = _one_like(m.rows[0][0])
    kk = [[m.rows[i][j] for j in ec] for i in er]
    if not orr:
        return _det(kk, one)
    nn = [[m.rows[i][j] for j in oc] for i in orr]
    try:
        det_n = _det(nn, one)
        det_n_inv = _inv_entry(det_n)
        n_inv = _mat_inv(nn, one)
    except NotInvertible as exc:
        raise SingularOddBlock(str(exc)) from None
    if er:
        ll = [[m.rows[i][j] for j in oc] for i in er]
        mm = [[m.rows[i][j] for j in ec] for i in orr]
        kk = _mat_sub(kk, _mat_mul(ll, _mat_mul(n_inv, mm)))
    return _det(kk, one) * det_n_inv


def jacobian(rho: CoordinateChange) -> SuperMatrix:
    """Partials of (F, Psi) by (z, theta): rows differentiate, columns list targets."""
    chart = rho.chart
    ev = chart.evens[0]
    targets = rho.components()
    rows = [[d_even(t, ev) for t in targets]]
    for od in chart.odds:
        rows.append([d_odd(t, od) for t in targets])
    par = (0,) + (1,) * chart.n
    return SuperMatrix(par, par, rows)


# -- localization at a moving base point ---------------------------------------


def _lift(f: SuperSeries, bi: Chart, group: int) -> SuperSeries:
    """Re-read a one-point series as living in one group of a two-point chart."""
    src = f.chart
    ev, odds = src.groups[0]
    tev, todds = bi.groups[group]
    mapping = {ev: ss_var(bi, tev)}
    for a, b in zip(odds, todds):
        mapping[a] = ss_var(bi, b)
    return ss_subs(f, mapping, bi)


def _value_pairing(chart: Chart, avals, bvals) -> SuperSeries:
    """The bilinear form of the NK addition law, on point values."""
    if chart.complex_pair:
        half = rat(1, 2)
        return half * (avals[0] * bvals[1] + avals[1] * bvals[0])
    out = None
    for a, b in zip(avals, bvals):
        term = a * b
        out = term if out is None else out + term
    return out


class LocalizedChange:
    """rho_Z: a change in the moving coordinates W with coefficients in Z."""

    __slots__ = ("chart", "f", "psis")

    def __init__(self, chart: Chart, f: SuperSeries, psis):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "psis", tuple(psis))

    def __setattr__(self, name, value):
        raise AttributeError("LocalizedChange is immutable")

    def components(self):
        return (self.f,) + self.psis

    def tables(self):
        """Left-coefficient tables of every component over the moving group."""
        return tuple(c.left_coeff_table() for c in self.components())

    def equals(self, other: "LocalizedChange") -> bool:
        if self.chart != other.chart:
            raise ChartMismatch("localized changes on different charts")
        return all(
            a.equals(b) for a, b in zip(self.components(), other.components())
        )

    def rebased(self, rho: CoordinateChange) -> "LocalizedChange":
        """Replace the base point Z by rho(Z) in every coefficient."""
        bi = self.chart
        zname = bi.evens[0]
        n = bi.n
        mapping = {zname: _lift(rho.f, bi, 0)}
        for name, p in zip(bi.odds[:n], rho.psis):
            mapping[name] = _lift(p, bi, 0)
        mapping[bi.evens[1]] = ss_var(bi, bi.evens[1])
        for name in bi.odds[n:]:
            mapping[name] = ss_var(bi, name)
        comps = [ss_subs(c, mapping, bi) for c in self.components()]
        return LocalizedChange(bi, comps[0], comps[1:])

    def then(self, other: "LocalizedChange") -> "LocalizedChange":
        """Compose in the moving coordinates: self first, then other."""
        bi = self.chart
        if other.chart != bi:
            raise ChartMismatch("localized changes on different charts")
        n = bi.n
        mapping = {
            bi.evens[0]: ss_var(bi, bi.evens[0]),
            bi.evens[1]: self.f,
        }
        for name in bi.odds[:n]:
            mapping[name] = ss_var(bi, name)
        for name, p in zip(bi.odds[n:], self.psis):
            mapping[name] = p
        comps = [ss_subs(c, mapping, bi) for c in other.components()]
        return LocalizedChange(bi, comps[0], comps[1:])

    def __str__(self):
        return "(%s)" % "; ".join(str(c) for c in self.components())

    def __repr__(self):
        return "<LocalizedChange %s>" % self


def localize(rho: CoordinateChange, variant=None) -> LocalizedChange:
    """Expand rho at the base point Z: rho_Z(W) = rho(W + Z) - rho(Z).

    Both the addition and the subtraction follow the chart's formal group
    law, so the NK variant inserts odd pairing terms into the even parts.
    """
    chart = rho.chart
    if variant is not None and variant != chart.variant:
        raise ChartMismatch(
            "localization variant %r does not match the chart" % variant
        )
    bi = bichart(chart.n, chart.variant, chart.complex_pair)
    shifted_f = taylor_shift(_lift(rho.f, bi, 1), bi, "right")
    shifted_psis = [
        taylor_shift(_lift(p, bi, 1), bi, "right") for p in rho.psis
    ]
    base_f = _lift(rho.f, bi, 0)
    base_psis = [_lift(p, bi, 0) for p in rho.psis]
    f_loc = shifted_f - base_f
    if chart.variant == "NK" and chart.n:
        f_loc = f_loc - _value_pairing(bi, shifted_psis, base_psis)
    psis_loc = [s - b for s, b in zip(shifted_psis, base_psis)]
    return LocalizedChange(bi, f_loc, psis_loc)


# -- superconformal predicates ---------------------------------------------------


def is_superconformal(rho: CoordinateChange, level: str):
    """Residual test for the contact conditions; returns (flag, residuals)."""
    chart = rho.chart
    f = rho.f
    if chart.variant != "NK":
        raise ChartMismatch("contact conditions live on NK charts")
    if level == "N1":
        if chart.n != 1 or chart.complex_pair:
            raise ChartMismatch("N1 level needs a (1|1) real chart")
        psi = rho.psis[0]
        res = ss_derive("D1", f) - psi * ss_derive("D1", psi)
        residuals = (res,)
    elif level == "N2":
        if chart.n != 2:
            raise ChartMismatch("N2 level needs a (1|2) chart")
        residuals = []
        if chart.complex_pair:
            half = rat(1, 2)
            pp, pm = rho.psis
            for d in ("D+", "D-"):
                rhs = half * (pp * ss_derive(d, pm) + pm * ss_derive(d, pp))
                residuals.append(ss_derive(d, f) - rhs)
        else:
            for i in (1, 2):
                d = "D%d" % i
                rhs = None
                for p in rho.psis:
                    term = p * ss_derive(d, p)
                    rhs = term if rhs is None else rhs + term
                residuals.append(ss_derive(d, f) - rhs)
        residuals = tuple(residuals)
    elif level == "N2oriented":
        if chart.n != 2 or not chart.complex_pair:
            raise ChartMismatch("N2oriented level needs the complex (1|2) chart")
        _, residuals = is_superconformal(rho, "N2")
        pp, pm = rho.psis
        residuals = residuals + (
            ss_derive("D+", pp),
            ss_derive("D-", pm),
        )
    else:
        raise ValueError("unknown level %r" % level)
    return all(r.is_zero() for r in residuals), residuals


def pullback_form(rho: CoordinateChange):
    """Coefficients of the pullback of dz + sum theta^i dtheta^i."""
    chart = rho.chart
    if chart.n not in (1, 2) or chart.complex_pair:
        raise UnsupportedN("the contact form lives on real (1|1) or (1|2) charts")
    ev = chart.evens[0]
    cz = d_even(rho.f, ev)
    for p in rho.psis:
        cz = cz + p * d_even(p, ev)
    out = [cz]
    for od in chart.odds:
        c = -d_odd(rho.f, od)
        for p in rho.psis:
            c = c + p * d_odd(p, od)
        out.append(c)
    return tuple(out)


# -- Schwarzian derivatives -------------------------------------------------------


def schwarzian_n1(g: SuperSeries) -> SuperSeries:
    """sigma(G) = D^3G/G - 2 (DG D^2G)/G^2 on a (1|1) NK chart."""
    chart = g.chart
    if (
        len(chart.groups) != 1
        or chart.n != 1
        or chart.complex_pair
        or chart.variant != "NK"
    ):
        raise ChartMismatch("the N=1 Schwarzian needs a (1|1) NK chart")
    ginv = ss_invert(g)
    d1 = ss_derive("D1", g)
    d2 = ss_derive("D1", d1)
    d3 = ss_derive("D1", d2)
    return d3 * ginv - rat(2) * ((d1 * d2) * (ginv * ginv))


def schwarzian_of_change(rho: CoordinateChange) -> SuperSeries:
    return schwarzian_n1(ss_derive("D1", rho.psis[0]))


def _u1_closed(rho: CoordinateChange) -> SuperSeries:
    """The weight-one Jacobi coefficient of an oriented N=2 change."""
    chart = rho.chart
    ev = chart.evens[0]
    pp, pm = rho.psis
    dmp = ss_derive("D-", pp)
    dpm = ss_derive("D+", pm)
    dmp_inv = ss_invert(dmp)
    dpm_inv = ss_invert(dpm)
    xp = ss_derive("D-", d_even(pp, ev)) * dmp_inv
    xm = ss_derive("D+", d_even(pm, ev)) * dpm_inv
    cross = (d_even(pp, ev) * d_even(pm, ev)) * (dmp_inv * dpm_inv)
    half = rat(1, 2)
    return half * (xp - xm) + half * cross


def schwarzian_n2(rho: CoordinateChange) -> SuperSeries:
    """sigma_2(Psi^+, Psi^-) = -u_1 for an oriented superconformal change."""
    ok, residuals = is_superconformal(rho, "N2oriented")
    if not ok:
        raise NotSuperconformal(
            "change is not an oriented N=2 superconformal map"
        )
    return -_u1_closed(rho)


# -- dual curve and the N=2 extension ----------------------------------------------


def dual_transition(rho: CoordinateChange) -> CoordinateChange:
    """(F, Psi) -> (F + (DF/DPsi) Psi, DF/DPsi) on a (1|1) NK chart."""
    chart = rho.chart
    if chart.n != 1 or chart.complex_pair or chart.variant != "NK":
        raise ChartMismatch("the dual curve needs a (1|1) NK chart")
    df = ss_derive("D1", rho.f)
    dpsi = ss_derive("D1", rho.psis[0])
    r = df * ss_invert(dpsi)
    return CoordinateChange(chart, rho.f + r * rho.psis[0], (r,))


def n2_from_n1(rho: CoordinateChange):
    """Transition of the added odd coordinate: (multiplier, shift)."""
    chart = rho.chart
    if chart.n != 1 or chart.complex_pair:
        raise ChartMismatch("the N=2 extension starts from a (1|1) chart")
    od = chart.odds[0]
    mult = sdet(jacobian(rho))
    shift = d_odd(rho.f, od) * ss_invert(d_odd(rho.psis[0], od))
    return mult, shift


# -- samplers -----------------------------------------------------------------------


def _odd_parts(f: SuperSeries):
    """Split a (1|1) series into the theta-free part and the left theta part."""
    chart = f.chart
    p0, p1 = {}, {}
    for (etuple, omask), c in f.coeffs.items():
        (p1 if omask else p0)[(etuple, 0)] = c
    return (
        SuperSeries(chart, p0, f.trunc),
        SuperSeries(chart, p1, f.trunc),
    )


def superconformal_from_psi(psi: SuperSeries) -> CoordinateChange:
    """Solve DF = Psi DPsi for F, fixing the even integration constant to 0."""
    chart = psi.chart
    ev = chart.evens[0]
    g = psi * ss_derive("D1", psi)
    g0, g1 = _odd_parts(g)
    f = ss_integrate(g1, ev) + ss_var(chart, chart.odds[0]) * g0
    return CoordinateChange(chart, f.truncate(psi.trunc), (psi,))


def sample_superconformal_n1(rng, trunc=DEFAULT_TRUNC, alpha_base=1) -> CoordinateChange:
    """A random invertible solution of DF = Psi DPsi."""
    chart = chart_n(1)
    unit = Fraction(rng.choice([1, 1, 2, -1, 3]))
    u = ss_const(chart, unit, trunc)
    for k in range(1, 4):
        c = Fraction(rng.randint(-2, 2), rng.choice([1, 2, 3]))
        if c:
            u = u + ss_monomial(chart, c, (k,), 0, trunc)
    psi = ss_var(chart, chart.odds[0], trunc) * u
    for k in range(0, 3):
        if rng.random() < 0.5:
            soul = GrassmannScalar.alpha(alpha_base + k) * rat(
                rng.randint(-2, 2)
            )
            psi = psi + ss_monomial(chart, soul, (k,), 0, trunc)
    return superconformal_from_psi(psi)


def _proj_dilation(chart, a, trunc):
    f = ss_monomial(chart, a * a, (1,), 0, trunc)
    psi = ss_monomial(chart, a, (0,), 1, trunc)
    m = [
        [rat(a), rat(0), rat(0)],
        [rat(0), rat(1) / rat(a), rat(0)],
        [rat(0), rat(0), rat(1)],
    ]
    return CoordinateChange(chart, f, (psi,)), m


def _proj_lower(chart, c, trunc):
    den_inv = ss_invert(
        ss_const(chart, 1, trunc) + ss_monomial(chart, c, (1,), 0, trunc)
    )
    f = ss_var(chart, chart.evens[0], trunc) * den_inv
    psi = ss_var(chart, chart.odds[0], trunc) * den_inv
    m = [
        [rat(1), rat(0), rat(0)],
        [rat(c), rat(1), rat(0)],
        [rat(0), rat(0), rat(1)],
    ]
    return CoordinateChange(chart, f, (psi,)), m


def _proj_translation(chart, b, trunc):
    f = ss_var(chart, chart.evens[0], trunc) + ss_const(chart, b, trunc)
    psi = ss_var(chart, chart.odds[0], trunc)
    m = [
        [rat(1), b, rat(0)],
        [rat(0), rat(1), rat(0)],
        [rat(0), rat(0), rat(1)],
    ]
    return CoordinateChange(chart, f, (psi,)), m


def _proj_odd_translation(chart, eps, trunc):
    f = ss_var(chart, chart.evens[0], trunc) + ss_var(
        chart, chart.odds[0], trunc
    ) * eps
    psi = ss_var(chart, chart.odds[0], trunc) + ss_const(chart, eps, trunc)
    m = [
        [rat(1), rat(0), -eps],
        [rat(0), rat(1), rat(0)],
        [rat(0), eps, rat(1)],
    ]
    return CoordinateChange(chart, f, (psi,)), m


def _proj_odd_special(chart, s, trunc):
    f = ss_var(chart, chart.evens[0], trunc) + ss_monomial(
        chart, s, (1,), 1, trunc
    )
    psi = ss_var(chart, chart.odds[0], trunc) - ss_monomial(
        chart, s, (1,), 0, trunc
    )
    m = [
        [rat(1), rat(0), rat(0)],
        [rat(0), rat(1), -s],
        [-s, rat(0), rat(1)],
    ]
    return CoordinateChange(chart, f, (psi,)), m


def sample_superprojective(rng, trunc=DEFAULT_TRUNC, steps=4, with_matrix=False):
    """Compose random superconformal fractional-linear generators.

    Every generator is realized by a (2|1) matrix of superdeterminant one,
    so the sample carries a superprojective structure; the matrix of the
    composite is returned on request.
    """
    chart = chart_n(1)
    out = identity_change(chart, trunc)
    matrix = [
        [rat(1), rat(0), rat(0)],
        [rat(0), rat(1), rat(0)],
        [rat(0), rat(0), rat(1)],
    ]
    alpha = 1
    for _ in range(steps):
        kind = rng.randrange(5)
        if kind == 0:
            a = Fraction(rng.choice([1, 2, 3, -1, -2]), rng.choice([1, 2]))
            step, m = _proj_dilation(chart, a, trunc)
        elif kind == 1:
            c = Fraction(rng.randint(-2, 2), rng.choice([1, 2, 3]))
            step, m = _proj_lower(chart, c, trunc)
        elif kind == 2:
            b = (
                GrassmannScalar.alpha(alpha)
                * GrassmannScalar.alpha(alpha + 1)
                * rat(rng.choice([1, 2, -1]))
            )
            alpha += 2
            step, m = _proj_translation(chart, b, trunc)
        elif kind == 3:
            eps = GrassmannScalar.alpha(alpha) * rat(rng.choice([1, 2, -1]))
            alpha += 1
            step, m = _proj_odd_translation(chart, eps, trunc)
        else:
            s = GrassmannScalar.alpha(alpha) * rat(rng.choice([1, 2, -1]))
            alpha += 1
            step, m = _proj_odd_special(chart, s, trunc)
        out = compose(out, step)
        matrix = _mat_mul(m, matrix)
    if with_matrix:
        return out, SuperMatrix((0, 0, 1), (0, 0, 1), matrix)
    return out


def sample_oriented_n2(rng, trunc=DEFAULT_TRUNC, alpha_base=1) -> CoordinateChange:
    """A random oriented N=2 superconformal change in complex coordinates.

    Psi^+ is built from (z + theta^+theta^-/2, theta^+) only and Psi^- from
    the conjugate pair, which makes D^+Psi^+ = D^-Psi^- = 0; the even part
    is then solved from the contact conditions.
    """
    chart = chart_n(2, complex_pair=True)
    zv = ss_var(chart, "z", trunc)
    tp = ss_var(chart, "thp", trunc)
    tm = ss_var(chart, "thm", trunc)
    half = rat(1, 2)
    u = zv + half * (tp * tm)
    v = zv - half * (tp * tm)

    def poly(base, count=2):
        out = ss_const(chart, Fraction(rng.choice([1, 1, 2, -1])), trunc)
        for k in range(1, count + 1):
            c = Fraction(rng.randint(-2, 2), rng.choice([1, 2, 3]))
            if c:
                out = out + rat(c) * base ** k
        return out

    def soul_poly(base, a0, count=2):
        out = ss_zero(chart, trunc)
        for k in range(count):
            if rng.random() < 0.6:
                out = out + ss_const(
                    chart,
                    GrassmannScalar.alpha(a0 + k) * rat(rng.randint(-2, 2)),
                    trunc,
                ) * base ** k
        return out

    pp = soul_poly(u, alpha_base) + tp * poly(u)
    pm = soul_poly(v, alpha_base + 2) + tm * poly(v)

    gp = half * (pp * ss_derive("D+", pm))
    gm = half * (pm * ss_derive("D-", pp))
    # components of D^+F = gp and D^-F = gm in the basis 1, thp, thm, thp thm
    hp = _complex_component(gp, 0)
    bp = _complex_component(gp, 1)
    hm = _complex_component(gm, 0)
    bm = _complex_component(gm, 2)
    f0 = ss_integrate(bp + bm, "z")
    h0 = half * (bm - bp)
    f = (
        f0
        + tp * hm
        + tm * hp
        + (tp * tm) * h0
    )
    rho = CoordinateChange(chart, f.truncate(trunc), (pp, pm))
    ok, _ = is_superconformal(rho, "N2oriented")
    if not ok:
        raise NotSuperconformal("sampler produced an inconsistent change")
    return rho


def _complex_component(f: SuperSeries, mask: int) -> SuperSeries:
    """Left coefficient of the odd monomial with the given mask, z kept."""
    chart = f.chart
    acc = {}
    for (etuple, omask), c in f.coeffs.items():
        if omask == mask:
            acc[(etuple, 0)] = c
    return SuperSeries(chart, acc, f.trunc)


def sample_change(rng, chart=None, trunc=DEFAULT_TRUNC, alpha_base=1) -> CoordinateChange:
    """A generic coordinate change with invertible 1-jet, no contact condition."""
    if chart is None:
        chart = chart_n(1)
    n = chart.n
    ev = chart.evens[0]
    odds = chart.odds
    a = Fraction(rng.choice([1, 1, 2, -1, 3]))
    f = ss_monomial(chart, a, (1,), 0, trunc)
    for k in (2, 3):
        c = Fraction(rng.randint(-2, 2), rng.choice([1, 2, 3]))
        if c:
            f = f + ss_monomial(chart, c, (k,), 0, trunc)
    alpha = alpha_base
    # even soul constant and mixed theta terms keep F even
    f = f + ss_const(
        chart,
        GrassmannScalar.alpha(alpha) * GrassmannScalar.alpha(alpha + 1),
        trunc,
    ) * rat(rng.randint(-1, 1))
    alpha += 2
    for i in range(n):
        if rng.random() < 0.6:
            c = GrassmannScalar.alpha(alpha) * rat(rng.randint(-2, 2))
            alpha += 1
            f = f + ss_monomial(chart, c, (rng.randint(0, 2),), 1 << i, trunc)
    if n == 2 and rng.random() < 0.7:
        f = f + ss_monomial(
            chart, Fraction(rng.randint(-2, 2)), (rng.randint(0, 1),), 3, trunc
        )
    psis = []
    for i in range(n):
        p = ss_zero(chart, trunc)
        for j in range(n):
            if j == i:
                c = Fraction(rng.choice([1, 2, -1, 3]))
            elif j > i:
                c = Fraction(rng.randint(-1, 1))
            else:
                c = 0
            if c:
                p = p + ss_monomial(chart, c, (0,), 1 << j, trunc)
            cz = Fraction(rng.randint(-1, 1), rng.choice([1, 2]))
            if cz:
                p = p + ss_monomial(chart, cz, (rng.randint(1, 2),), 1 << j, trunc)
        if rng.random() < 0.6:
            c = GrassmannScalar.alpha(alpha) * rat(rng.randint(-2, 2))
            alpha += 1
            p = p + ss_monomial(chart, c, (rng.randint(0, 2),), 0, trunc)
        if n == 2 and rng.random() < 0.5:
            c = GrassmannScalar.alpha(alpha) * rat(rng.randint(-2, 2))
            alpha += 1
            p = p + ss_monomial(chart, c, (rng.randint(0, 1),), 3, trunc)
        psis.append(p)
    return CoordinateChange(chart, f, psis)


def affine_change(chart: Chart, a, b, xi, trunc=None) -> CoordinateChange:
    """(a^2 z + theta xi a + b, theta a + xi) on a (1|1) chart."""
    a = coerce_scalar(a)
    xi = coerce_scalar(xi)
    zv = ss_var(chart, chart.evens[0], trunc)
    tv = ss_var(chart, chart.odds[0], trunc)
    f = (a * a) * zv + (tv * xi) * a + ss_const(chart, b, trunc)
    psi = tv * a + ss_const(chart, xi, trunc)
    return CoordinateChange(chart, f, (psi,))
