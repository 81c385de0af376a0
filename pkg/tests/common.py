"""Shared seeded generators for randomized structural tests."""

from fractions import Fraction

from superfield_kit.qi import QI
from superfield_kit.scalar import GrassmannScalar
from superfield_kit.series import SuperSeries


def random_fraction(rng, span=4):
    return Fraction(rng.randint(-span, span), rng.randint(1, 3))


def random_scalar(rng, parity=None, alphas=2, span=4):
    """A small random GrassmannScalar, optionally of fixed Grassmann parity."""
    terms = {}
    for _ in range(rng.randint(1, 3)):
        mask = rng.randrange(1 << alphas)
        if parity is not None:
            while mask.bit_count() % 2 != parity:
                mask = rng.randrange(1 << alphas)
        coeff = QI(random_fraction(rng, span))
        key = ((), mask)
        terms[key] = terms.get(key, QI(0)) + coeff
    return GrassmannScalar(terms)


def random_series(rng, chart, trunc, parity=None, grassmann=False):
    """Random series with small rational (optionally Grassmann) coefficients.

    parity, when given, fixes the total parity of every term (coefficient
    parity plus odd-variable count).
    """
    ngroups = len(chart.groups)
    nodd = len(chart.odds)
    coeffs = {}
    for _ in range(rng.randint(2, 6)):
        etuple = tuple(rng.randint(0, max(0, trunc - 1)) for _ in range(ngroups))
        if sum(etuple) >= trunc:
            continue
        omask = rng.randrange(1 << nodd)
        cpar = None if parity is None else (parity + omask.bit_count()) % 2
        if grassmann and rng.random() < 0.4:
            c = random_scalar(rng, parity=cpar)
        else:
            if cpar == 1:
                continue
            c = GrassmannScalar.from_qi(QI(random_fraction(rng)))
        key = (etuple, omask)
        prev = coeffs.get(key)
        coeffs[key] = c if prev is None else prev + c
    return SuperSeries(chart, coeffs, trunc)
