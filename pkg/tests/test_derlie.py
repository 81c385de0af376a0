import random
from fractions import Fraction

import pytest

from superfield_kit.derlie import (
    ExpCoords,
    SuperVectorField,
    bracket_table,
    exp_action,
    exp_coordinates,
    family_chart,
    generator,
    reexponentiate,
    verify_family,
    vf_bracket,
)
from superfield_kit.disk import (
    CoordinateChange,
    identity_change,
    localize,
    sample_change,
    sample_oriented_n2,
    sample_superconformal_n1,
    schwarzian_n1,
    schwarzian_n2,
)
from superfield_kit.errors import (
    ChartMismatch,
    NonNilpotentAtOrder,
    NotSuperconformal,
    OutOfRange,
    ParityError,
)
from superfield_kit.scalar import GrassmannScalar, rat
from superfield_kit.series import (
    chart_n,
    d_even,
    d_odd,
    order_bound,
    ss_derive,
    ss_invert,
    ss_monomial,
    ss_var,
)

N1 = chart_n(1)
N1W = chart_n(1, "NW")
N2C = chart_n(2, complex_pair=True)

HALF = Fraction(1, 2)


def window(series, order):
    """Left-table window of a localized series: keys of moving degree <= order."""
    out = {}
    for (e, m), c in series.coeffs.items():
        if sum(e) + m.bit_count() <= order:
            out[(e, m)] = c
    return out


def random_family_field(rng, fam, parity):
    labels = {
        "W11": (("T", 0), ("J", 0), ("Q", 1), ("H", 1)),
        "K11": (("L", 0), ("G", 1)),
        "K12complex": (("L", 0), ("J", 0), ("G+", 1), ("G-", 1)),
    }[fam]
    pool = [lab for lab, p in labels if p == parity]
    out = None
    for _ in range(rng.randint(1, 3)):
        lab = rng.choice(pool)
        if lab in ("G", "G+", "G-"):
            idx = Fraction(2 * rng.randint(0, 2) + 1, 2)
        else:
            idx = Fraction(rng.randint(0, 3))
        term = rat(rng.randint(1, 3)) * generator(fam, lab, idx)
        out = term if out is None else out + term
    return out


# -- generators and brackets -------------------------------------------------


def test_generator_frozen_forms():
    t0 = generator("W11", "T", 0)
    assert t0.even_coeff.equals(ss_monomial(N1W, -1, (1,)))
    assert t0.odd_coeffs[0].equals(ss_monomial(N1W, -1, (0,), 1))

    g = generator("K11", "G", HALF)
    assert g.even_coeff.equals(ss_monomial(N1, 1, (1,), 1))
    assert g.odd_coeffs[0].equals(ss_monomial(N1, -1, (1,)))

    j0 = generator("K12complex", "J", 0)
    assert j0.even_coeff.is_zero()
    assert j0.odd_coeffs[0].equals(ss_monomial(N2C, -1, (0,), 1))
    assert j0.odd_coeffs[1].equals(ss_monomial(N2C, 1, (0,), 2))


def test_generator_parity():
    assert generator("W11", "T", 2).parity == 0
    assert generator("W11", "Q", 1).parity == 1
    assert generator("K11", "G", Fraction(3, 2)).parity == 1
    assert generator("K12", "J", 1).parity == 0


def test_generator_index_validation():
    with pytest.raises(OutOfRange):
        generator("K11", "G", 1)
    with pytest.raises(OutOfRange):
        generator("K11", "L", HALF)
    with pytest.raises(OutOfRange):
        generator("W11", "T", -1)
    with pytest.raises(OutOfRange):
        generator("K11", "G", -HALF)
    with pytest.raises(OutOfRange):
        generator("K11", "X", 0)
    with pytest.raises(ValueError):
        generator("K13", "L", 0)


def test_bracket_examples():
    for m in range(3):
        for n in range(3):
            got = vf_bracket(generator("W11", "T", m), generator("W11", "T", n))
            assert got.equals(rat(m - n) * generator("W11", "T", m + n))
    for m in (HALF, Fraction(3, 2)):
        for n in (HALF, Fraction(5, 2)):
            got = vf_bracket(generator("K11", "G", m), generator("K11", "G", n))
            assert got.equals(rat(2) * generator("K11", "L", m + n))
    # [X, X] = 0 for even X
    x = generator("K12", "L", 2)
    assert vf_bracket(x, x).is_zero()


def test_bracket_input_checks():
    with pytest.raises(ChartMismatch):
        vf_bracket(generator("W11", "T", 0), generator("K11", "L", 0))
    mixed = generator("W11", "T", 0) + generator("W11", "Q", 0)
    with pytest.raises(ParityError):
        vf_bracket(mixed, generator("W11", "T", 0))


def test_super_antisymmetry_sampled():
    rng = random.Random(11)
    for fam in ("W11", "K11", "K12complex"):
        for _ in range(8):
            px, py = rng.randint(0, 1), rng.randint(0, 1)
            x = random_family_field(rng, fam, px)
            y = random_family_field(rng, fam, py)
            lhs = vf_bracket(x, y)
            rhs = vf_bracket(y, x)
            if px and py:
                assert lhs.equals(rhs)
            else:
                assert lhs.equals(-rhs)


def test_super_jacobi_sampled():
    rng = random.Random(12)
    for fam in ("W11", "K11", "K12complex"):
        for _ in range(6):
            px, py = rng.randint(0, 1), rng.randint(0, 1)
            x = random_family_field(rng, fam, px)
            y = random_family_field(rng, fam, py)
            z = random_family_field(rng, fam, rng.randint(0, 1))
            lhs = vf_bracket(x, vf_bracket(y, z))
            rhs = vf_bracket(vf_bracket(x, y), z)
            inner = vf_bracket(y, vf_bracket(x, z))
            if px and py:
                rhs = rhs - inner
            else:
                rhs = rhs + inner
            assert lhs.equals(rhs)


def test_verify_family_window_4():
    for fam in ("W11", "K11", "K12", "K12complex"):
        assert verify_family(fam, window=4) == []


def test_bracket_table_flip_consistency():
    # the canonical table stores (H, Q); the flipped order must follow the
    # sign rule for two odd generators
    hq = bracket_table("W11", "H", 2, "Q", 1)
    qh = bracket_table("W11", "Q", 1, "H", 2)
    assert hq.equals(qh)
    lj = bracket_table("K12", "J", 1, "L", 2)
    assert lj.equals(-bracket_table("K12", "L", 2, "J", 1))


# -- exponential action -------------------------------------------------------


def test_exp_action_polynomial_example():
    t = GrassmannScalar.param("t")
    x = SuperVectorField(N1, ss_monomial(N1, -1, (2,)) * t)
    out = exp_action(x, ss_var(N1, "z"), 2)
    expect = (
        ss_var(N1, "z")
        - t * ss_monomial(N1, 1, (2,))
        + (t * t) * ss_monomial(N1, 1, (3,))
    )
    assert out.equals(expect)


def test_exp_action_zero_field_and_bad_order():
    x = SuperVectorField(N1)
    f = ss_monomial(N1, 3, (2,), 1)
    assert exp_action(x, f, 4).equals(f)
    with pytest.raises(ValueError):
        exp_action(x, f, -1)


def test_exp_action_odd_shift():
    # exp(-w1 G_{1/2}) moves theta by w1 z, and z picks up the contact term
    w1 = GrassmannScalar.alpha(1)
    x = -(w1 * generator("K11", "G", HALF))
    got_th = exp_action(x, ss_var(N1, "th1"), 2)
    assert got_th.equals(ss_var(N1, "th1") + w1 * ss_monomial(N1, 1, (1,)))
    got_z = exp_action(x, ss_var(N1, "z"), 2)
    assert got_z.equals(ss_var(N1, "z") - w1 * ss_monomial(N1, 1, (1,), 1))


def test_exp_action_detects_degree_lowering():
    x = SuperVectorField(N1, ss_monomial(N1, -1, (1,)))
    with pytest.raises(NonNilpotentAtOrder):
        exp_action(x, ss_var(N1, "z"), 3)
    with pytest.raises(ChartMismatch):
        exp_action(x, ss_var(N1W, "z"), 2)


# -- exponential coordinates ---------------------------------------------------


def test_exp_coordinates_identity():
    t = order_bound(4)
    k = exp_coordinates(identity_change(N1, t), "K11")
    assert k["A"].equals(ss_monomial(k["A"].chart, 1, (0,), 0, k["A"].trunc))
    for name in ("v1", "w1", "w2"):
        assert k[name].is_zero()

    w = exp_coordinates(identity_change(N1W, t), "W11")
    one = ss_monomial(w["A"].chart, 1, (0,), 0, w["A"].trunc)
    assert w["A"].equals(one)
    assert w["B"].equals(ss_monomial(w["B"].chart, 1, (0,), 0, w["B"].trunc))
    for name in ("q0", "h0", "v1", "u1", "q1", "h1"):
        assert w[name].is_zero()


def test_exp_coordinates_rejects_other_orders():
    t = order_bound(4)
    with pytest.raises(ValueError):
        exp_coordinates(identity_change(N1, t), "K11", order=3)


def test_exp_coordinates_chart_and_contact_checks():
    t = order_bound(4)
    with pytest.raises(ChartMismatch):
        exp_coordinates(identity_change(N1, t), "W11")
    with pytest.raises(ChartMismatch):
        exp_coordinates(identity_change(N1W, t), "K11")
    bad = CoordinateChange(
        N1,
        ss_var(N1, "z", t) + ss_monomial(N1, 1, (2,), 0, t),
        (ss_var(N1, "th1", t),),
    )
    with pytest.raises(NotSuperconformal):
        exp_coordinates(bad, "K11")


def test_k11_solver_closed_forms():
    for seed in range(6):
        rng = random.Random(400 + seed)
        rho = sample_superconformal_n1(rng)
        coords = exp_coordinates(rho, "K11")
        dpsi = ss_derive("D1", rho.psis[0])
        inv = ss_invert(dpsi)
        d2 = ss_derive("D1", dpsi)
        d3 = ss_derive("D1", d2)
        assert (coords["A"] - dpsi).is_zero()
        assert (coords["w1"] - d2 * inv).is_zero()
        assert (coords["v1"] - d3 * inv).is_zero()
        assert (coords["w2"] - rat(1, 2) * schwarzian_n1(dpsi)).is_zero()


def test_k12_solver_closed_forms():
    for seed in range(5):
        rng = random.Random(500 + seed)
        rho = sample_oriented_n2(rng)
        coords = exp_coordinates(rho, "K12")
        pp, pm = rho.psis
        dmp = ss_derive("D-", pp)
        dpm = ss_derive("D+", pm)
        dmpi = ss_invert(dmp)
        dpmi = ss_invert(dpm)
        assert (coords["BA"] - dmp).is_zero()
        assert (coords["BinvA"] - dpm).is_zero()
        assert (coords["A2"] - dmp * dpm).is_zero()
        ppz = d_even(pp, "z")
        pmz = d_even(pm, "z")
        assert (coords["w1+"] - ppz * dmpi).is_zero()
        assert (coords["w1-"] - pmz * dpmi).is_zero()
        xp = ss_derive("D-", ppz) * dmpi
        xm = ss_derive("D+", pmz) * dpmi
        half = rat(1, 2)
        assert (coords["v1"] - half * (xp + xm)).is_zero()
        assert (coords["u1"] + schwarzian_n2(rho)).is_zero()
        w2p = half * (dmpi * (d_even(ppz, "z") - half * ((xm + 3 * xp) * ppz)))
        w2m = half * (dpmi * (d_even(pmz, "z") - half * ((xp + 3 * xm) * pmz)))
        assert (coords["w2+"] - w2p).is_zero()
        assert (coords["w2-"] - w2m).is_zero()


def test_w11_solver_closed_forms():
    half = rat(1, 2)
    for seed in range(5):
        rng = random.Random(600 + seed)
        rho = sample_change(rng, chart=N1W)
        coords = exp_coordinates(rho, "W11")
        f, p = rho.f, rho.psis[0]
        fz = d_even(f, "z")
        fth = d_odd(f, "th1")
        pz = d_even(p, "z")
        pth = d_odd(p, "th1")
        den = fz * pth - pz * fth
        deni = ss_invert(den)
        den2i = ss_invert(fth * pz - pth * fz)
        pthi = ss_invert(pth)
        fzz = d_even(fz, "z")
        pzz = d_even(pz, "z")
        fzth = d_odd(fz, "th1")
        pzth = d_odd(pz, "th1")
        expect = {
            "A": den * pthi,
            "B": (pth * pth) * deni,
            "h0": (fth * pth) * deni,
            "q0": pz * pthi,
            "v1": half * ((fzz * pth - pzz * fth) * deni),
            "q1": half * ((fzz * pz - pzz * fz) * den2i),
            "h1": (fzth * pth - pzth * fth) * deni,
            "u1": (fzth * pz - pzth * fz) * den2i
            + (pzz * fth - fzz * pth) * deni,
        }
        for name, value in expect.items():
            assert (coords[name] - value).is_zero(), name


def roundtrip_mismatches(rho, family):
    coords = exp_coordinates(rho, family)
    f_model, psi_models = reexponentiate(coords)
    loc = localize(rho)
    bad = []
    pairs = [("f", f_model, loc.f)]
    pairs += [
        ("psi%d" % i, m, r) for i, (m, r) in enumerate(zip(psi_models, loc.psis))
    ]
    for name, model, real in pairs:
        wm = window(model, coords.order)
        wr = window(real, coords.order)
        for key in sorted(set(wm) | set(wr)):
            a, b = wm.get(key), wr.get(key)
            if a is None or b is None or not (a - b).is_zero():
                bad.append((name, key))
    return bad


def test_roundtrip_k11():
    for seed in range(4):
        rho = sample_superconformal_n1(random.Random(700 + seed))
        assert roundtrip_mismatches(rho, "K11") == []


def test_roundtrip_k12():
    for seed in range(4):
        rho = sample_oriented_n2(random.Random(800 + seed))
        assert roundtrip_mismatches(rho, "K12") == []


def test_roundtrip_w11():
    for seed in range(4):
        rho = sample_change(random.Random(900 + seed), chart=N1W)
        assert roundtrip_mismatches(rho, "W11") == []


def test_exp_coords_container():
    t = order_bound(4)
    coords = exp_coordinates(identity_change(N1, t), "K11")
    assert isinstance(coords, ExpCoords)
    assert coords.family == "K11"
    assert coords.order == 2
    assert "w1" in coords and "nope" not in coords
    assert coords.names() == ["A", "v1", "w1", "w2"]
    with pytest.raises(AttributeError):
        coords.order = 3


def test_family_chart_lookup():
    assert family_chart("w11") == N1W
    assert family_chart("K12complex") == N2C
    with pytest.raises(ValueError):
        family_chart("K14")
