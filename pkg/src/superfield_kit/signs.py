"""Reordering signs for subsets of odd indices.

sigma(I, J) is defined for disjoint subsets by theta^I theta^J =
sigma(I, J) theta^{I union J}, with both monomials written in increasing
order.  Subsets are 1-based index iterables at the API; bitmask forms are
provided for hot paths.
"""

from __future__ import annotations

from .errors import Overlap


def mask_of(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return mask


def indices_of(mask: int):
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def sigma_mask(m1: int, m2: int) -> int:
    if m1 & m2:
        raise Overlap("index sets overlap: %s and %s" % (indices_of(m1), indices_of(m2)))
    sign = 0
    m = m1
    while m:
        low = m & (-m)
        sign += (m2 & (low - 1)).bit_count()
        m ^= low
    return -1 if sign & 1 else 1


def sign_sigma(I, J) -> int:
    return sigma_mask(mask_of(I), mask_of(J))


def sign_sigma_full(J, n: int) -> int:
    """sigma(J, complement of J in {1..n})."""
    mj = mask_of(J) if not isinstance(J, int) else J
    full = (1 << n) - 1
    return sigma_mask(mj, full & ~mj)
