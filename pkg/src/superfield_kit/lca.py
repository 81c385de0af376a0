"""SUSY Lie conformal algebras: bracket presentations and mode calculus.

A presentation lists generators with parities and a table of brackets
[a_L b] written as polynomials in the bracket variables (l, x1..xN) with
coefficients built from translation words (T, S1..SN) applied to generators
or to the vacuum symbol.  From the table alone the module recovers the
structure modes a_(j|J) b, translates words into mode shifts, and computes
commutators of arbitrary Fourier modes, including the central terms coming
from the vacuum rule.  Physics-style relabelings (L_n, G_r, J_n, ...) sit on
top as invertible index dictionaries, so component tables of the catalog
algebras can be reproduced and compared against their classical forms.

Conventions, fixed once and validated by the frozen mode tables in the test
suite:

* ``Z^{n|I}`` means the odd word first: theta^I z^n, increasing indices.
* Modes are extracted by ``a_(n|I) = sigma(I) res_Z Z^{n|I} Y(a,Z)``, so the
  state-field expansion reads ``Y(a,Z) = sum Z^{-1-n|N\\I} a_(n|I)``.
* The vacuum has a single nonzero mode: ``vac_(-1|N) = Id``.
* ``[a_L b] = sum c(j,J) l^j x^J (a_(j|J) b)`` with
  ``c(j,J) = sigma(J, N\\J) (-1)^{s(s-1)/2 + s(N-s)} / j!`` and ``s = |J|``.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import factorial

from .deltas import delta_expand
from .errors import (
    MissingStructureConstant,
    NonCanonical,
    NoWeightData,
    ParityError,
    UnsupportedN,
)
from .qi import QI
from .scalar import GrassmannScalar, coerce_scalar, rat
from .signs import indices_of, sigma_mask, sign_sigma, sign_sigma_full

__all__ = [
    "LambdaPoly",
    "LCAPresentation",
    "ModeElement",
    "lp_zero",
    "lp_gen",
    "lp_vac",
    "modes_from_lambda",
    "assemble_lambda",
    "structure_element",
    "gen_mode",
    "mode_parity",
    "element_mode",
    "mode_bracket",
    "relabel_modes",
    "physics_mode",
    "express_physics",
    "catalog",
    "catalog_names",
    "check_mode_consistency",
    "ope_distribution",
    "sign_sigma",
    "sign_sigma_full",
]

VAC = "1"

_I = QI(0, 1)


def _bits(mask: int) -> int:
    return bin(mask).count("1")


def _coerce(value) -> GrassmannScalar:
    c = coerce_scalar(value)
    if c is None:
        raise TypeError("not coercible to a Grassmann scalar: %r" % (value,))
    return c


def _definite_parity(c: GrassmannScalar) -> int:
    p = c.parity
    if p is None:
        raise ParityError("coefficient of mixed parity where a definite one is needed")
    return p


def _below(i: int, mask: int) -> int:
    """Number of set bits of mask strictly below index i (1-based)."""
    return _bits(mask & ((1 << (i - 1)) - 1))


class LambdaPoly:
    """Polynomial in the bracket variables with translation-word targets.

    Terms are keyed by (l-power, x-mask, T-power, S-mask, target symbol) and
    carry Grassmann scalar coefficients sitting to the left of everything.
    The x-mask and S-mask record strictly increasing odd words; the NK
    Clifford relations (x^i x^i = -l, S^i S^i = T) are eliminated on the fly
    by the multiplication methods, so stored terms are always canonical.
    """

    __slots__ = ("variant", "n", "terms")

    def __init__(self, variant: str, n: int, terms=None):
        if variant not in ("NW", "NK"):
            raise NonCanonical("variant must be NW or NK")
        if not isinstance(n, int) or n < 0:
            raise NonCanonical("n must be a non-negative integer")
        full = (1 << n) - 1
        clean = {}
        if terms:
            for key, coeff in terms.items():
                try:
                    j, chi, tp, smask, sym = key
                except (TypeError, ValueError):
                    raise NonCanonical("malformed term key: %r" % (key,))
                if j < 0 or tp < 0:
                    raise NonCanonical("negative power in %r" % (key,))
                if chi & ~full or smask & ~full:
                    raise NonCanonical("odd index out of range in %r" % (key,))
                if not isinstance(sym, str):
                    raise NonCanonical("target must be a symbol string")
                if sym == VAC and (tp or smask):
                    raise NonCanonical("translation word applied to the vacuum")
                c = _coerce(coeff)
                if c.is_zero():
                    continue
                prev = clean.get(key)
                clean[key] = c if prev is None else prev + c
                if clean[key].is_zero():
                    del clean[key]
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("LambdaPoly is immutable")

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def equals(self, other: "LambdaPoly") -> bool:
        return (
            self.variant == other.variant
            and self.n == other.n
            and self.terms == other.terms
        )

    def __eq__(self, other):
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        return self.equals(other)

    def __hash__(self):
        return hash((self.variant, self.n, frozenset(self.terms.items())))

    # -- linear structure ----------------------------------------------------

    def _check(self, other: "LambdaPoly"):
        if self.variant != other.variant or self.n != other.n:
            raise NonCanonical("mixing polynomials of different shape")

    def __add__(self, other: "LambdaPoly") -> "LambdaPoly":
        self._check(other)
        acc = dict(self.terms)
        for key, c in other.terms.items():
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        return LambdaPoly(self.variant, self.n, acc)

    def __neg__(self) -> "LambdaPoly":
        return LambdaPoly(
            self.variant, self.n, {k: -c for k, c in self.terms.items()}
        )

    def __sub__(self, other: "LambdaPoly") -> "LambdaPoly":
        return self + (-other)

    def scale(self, value) -> "LambdaPoly":
        """Multiply by a scalar from the left."""
        c = _coerce(value)
        return LambdaPoly(
            self.variant, self.n, {k: c * v for k, v in self.terms.items()}
        )

    def __rmul__(self, value):
        return self.scale(value)

    # -- bracket-variable and word multiplication ---------------------------

    def mul_lambda(self, k: int = 1) -> "LambdaPoly":
        if k < 0:
            raise NonCanonical("negative l power")
        return LambdaPoly(
            self.variant,
            self.n,
            {(j + k, chi, tp, sm, sym): c for (j, chi, tp, sm, sym), c in self.terms.items()},
        )

    def mul_chi(self, i: int) -> "LambdaPoly":
        """Multiply by x^i from the left, eliminating Clifford relations."""
        if not 1 <= i <= self.n:
            raise NonCanonical("odd index %d out of range" % i)
        bit = 1 << (i - 1)
        acc = {}
        for (j, chi, tp, sm, sym), c in self.terms.items():
            sgn = -1 if _definite_parity(c) else 1
            if chi & bit:
                if self.variant == "NW":
                    continue
                # x^i anticommutes into place, then x^i x^i = -l.
                if _below(i, chi) & 1:
                    sgn = -sgn
                key = (j + 1, chi & ~bit, tp, sm, sym)
                sgn = -sgn
            else:
                if sigma_mask(bit, chi) < 0:
                    sgn = -sgn
                key = (j, chi | bit, tp, sm, sym)
            val = c if sgn > 0 else -c
            prev = acc.get(key)
            acc[key] = val if prev is None else prev + val
        return LambdaPoly(self.variant, self.n, acc)

    def apply_T(self) -> "LambdaPoly":
        """Prepend T to the translation word; kills vacuum terms."""
        acc = {}
        for (j, chi, tp, sm, sym), c in self.terms.items():
            if sym == VAC:
                continue
            key = (j, chi, tp + 1, sm, sym)
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        return LambdaPoly(self.variant, self.n, acc)

    def apply_S(self, i: int) -> "LambdaPoly":
        """Prepend S^i to the translation word (NK: S^i S^i = T)."""
        if not 1 <= i <= self.n:
            raise NonCanonical("odd index %d out of range" % i)
        bit = 1 << (i - 1)
        acc = {}
        for (j, chi, tp, sm, sym), c in self.terms.items():
            if chi:
                raise NonCanonical("S applied across x factors")
            if sym == VAC:
                continue
            sgn = -1 if _definite_parity(c) else 1
            if sm & bit:
                if self.variant == "NW":
                    continue
                if _below(i, sm) & 1:
                    sgn = -sgn
                key = (j, chi, tp + 1, sm & ~bit, sym)
            else:
                if sigma_mask(bit, sm) < 0:
                    sgn = -sgn
                key = (j, chi, tp, sm | bit, sym)
            val = c if sgn > 0 else -c
            prev = acc.get(key)
            acc[key] = val if prev is None else prev + val
        return LambdaPoly(self.variant, self.n, acc)

    # -- display -------------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for key in sorted(self.terms, key=lambda k: (k[4], k[0], k[1], k[2], k[3])):
            j, chi, tp, sm, sym = key
            c = self.terms[key]
            bits = []
            cs = str(c)
            if cs != "1" or (j == 0 and chi == 0 and tp == 0 and sm == 0):
                bits.append(cs if ("+" not in cs[1:] and "-" not in cs[1:]) else "(%s)" % cs)
            if j:
                bits.append("l" if j == 1 else "l^%d" % j)
            for i in indices_of(chi):
                bits.append("x%d" % i)
            if tp:
                bits.append("T" if tp == 1 else "T^%d" % tp)
            for i in indices_of(sm):
                bits.append("S%d" % i)
            if sym != VAC or not bits:
                bits.append(sym)
            pieces.append(" ".join(bits))
        return " + ".join(pieces)

    def __repr__(self):
        return "LambdaPoly(%r, %d, <%d terms>)" % (self.variant, self.n, len(self.terms))


def lp_zero(variant: str, n: int) -> LambdaPoly:
    return LambdaPoly(variant, n)


def lp_gen(variant: str, n: int, sym: str) -> LambdaPoly:
    """The bare generator as a bracket polynomial."""
    if sym == VAC:
        raise NonCanonical("use lp_vac for the vacuum")
    return LambdaPoly(variant, n, {(0, 0, 0, 0, sym): rat(1)})


def lp_vac(variant: str, n: int) -> LambdaPoly:
    return LambdaPoly(variant, n, {(0, 0, 0, 0, VAC): rat(1)})


class LCAPresentation:
    """Generators, parities, and the bracket table of a SUSY LCA.

    ``gens`` maps symbol to (parity, weight-or-None); ``table`` maps ordered
    symbol pairs to LambdaPoly entries.  ``complete`` marks presentations
    whose unlisted pairs are genuinely zero (all catalog entries); for user
    presentations a missing pair that cannot be recovered from the reversed
    entry raises MissingStructureConstant instead of guessing.
    """

    __slots__ = ("name", "variant", "n", "gens", "table", "central", "complete",
                 "_struct_cache", "_bracket_cache")

    def __init__(self, name, variant, n, gens, table, central=None, complete=False):
        if variant not in ("NW", "NK"):
            raise NonCanonical("variant must be NW or NK")
        gdict = {}
        for sym, parity, weight in gens:
            if sym == VAC or sym in gdict:
                raise NonCanonical("bad generator symbol %r" % sym)
            gdict[sym] = (parity & 1, weight)
        tdict = {}
        for (a, b), entry in table.items():
            if a not in gdict or b not in gdict:
                raise NonCanonical("bracket for unknown generator (%s, %s)" % (a, b))
            if entry.variant != variant or entry.n != n:
                raise NonCanonical("entry shape does not match the presentation")
            expected = (gdict[a][0] + gdict[b][0] + n) & 1
            for (j, chi, tp, sm, sym), c in entry.terms.items():
                if sym != VAC and sym not in gdict:
                    raise NonCanonical("entry targets unknown symbol %r" % sym)
                tparity = _definite_parity(c) + _bits(chi) + _bits(sm)
                tparity += gdict[sym][0] if sym != VAC else 0
                if tparity & 1 != expected:
                    raise ParityError(
                        "entry [%s, %s] violates the bracket parity rule" % (a, b)
                    )
            tdict[(a, b)] = entry
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "gens", gdict)
        object.__setattr__(self, "table", tdict)
        object.__setattr__(self, "central", central)
        object.__setattr__(self, "complete", bool(complete))
        object.__setattr__(self, "_struct_cache", {})
        object.__setattr__(self, "_bracket_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("LCAPresentation is immutable")

    def parity(self, sym: str) -> int:
        return self.gens[sym][0]

    def weight(self, sym: str):
        return self.gens[sym][1]

    def __repr__(self):
        return "LCAPresentation(%r, %s, n=%d, gens=%s)" % (
            self.name, self.variant, self.n, list(self.gens),
        )


# -- lambda <-> mode pairing -------------------------------------------------


def _pairing_const(j: int, Jmask: int, n: int) -> GrassmannScalar:
    """Coefficient of l^j x^J (a_(j|J) b) in the bracket expansion."""
    s = _bits(Jmask)
    sgn = sign_sigma_full(Jmask, n) * (-1) ** ((s * (s - 1)) // 2 + s * (n - s))
    return rat(sgn, factorial(j))


def modes_from_lambda(entry: LambdaPoly):
    """Structure elements a_(j|J) b keyed by (j, J-mask).

    Values are bracket-variable-free LambdaPoly sums of translation words
    applied to generators (or the vacuum); they are what the commutator
    formula consumes.
    """
    out = {}
    for (j, chi, tp, sm, sym), coeff in entry.terms.items():
        nb = _bits(chi)
        inv = sign_sigma_full(chi, entry.n)
        inv *= (-1) ** ((nb * (nb - 1)) // 2 + nb * (entry.n - nb))
        s = coeff * rat(inv * factorial(j))
        # Moving the stored coefficient back across x^J flips by its parity.
        if _definite_parity(coeff) and nb & 1:
            s = -s
        key = (j, chi)
        elem = out.get(key)
        add = LambdaPoly(entry.variant, entry.n, {(0, 0, tp, sm, sym): s})
        out[key] = add if elem is None else elem + add
    return {k: v for k, v in out.items() if not v.is_zero()}


def assemble_lambda(modes, variant: str, n: int) -> LambdaPoly:
    """Inverse of modes_from_lambda: rebuild the bracket polynomial."""
    total = lp_zero(variant, n)
    for (j, chi), elem in modes.items():
        if elem.variant != variant or elem.n != n:
            raise NonCanonical("structure element shape mismatch")
        c = _pairing_const(j, chi, n)
        acc = {}
        for (jj, cc, tp, sm, sym), s in elem.terms.items():
            if jj or cc:
                raise NonCanonical("structure element carries bracket variables")
            val = c * s
            if _definite_parity(s) and _bits(chi) & 1:
                val = -val
            acc[(j, chi, tp, sm, sym)] = val
        total = total + LambdaPoly(variant, n, acc)
    return total


def _struct(alg: LCAPresentation, a: str, b: str):
    """Structure elements for the ordered pair, skew-completing if needed."""
    key = (a, b)
    cached = alg._struct_cache.get(key)
    if cached is not None:
        return cached
    if key in alg.table:
        out = modes_from_lambda(alg.table[key])
    elif (b, a) in alg.table:
        out = _skew_complete(alg, a, b)
    elif alg.complete and a in alg.gens and b in alg.gens:
        out = {}
    elif VAC in (a, b):
        out = {}
    else:
        raise MissingStructureConstant("no bracket listed for (%s, %s)" % (a, b))
    alg._struct_cache[key] = out
    return out


def _skew_complete(alg: LCAPresentation, a: str, b: str):
    """Recover a_(m|M) b from the table entry for (b, a).

    Skew-symmetry of the state-field assignment gives

        a_(m|M) b = (-1)^{|a||b|} sum_{r >= 0, R subset N\\M}
            [(-1)^{s(s-1)/2} / r!] (-1)^{1+k+N+|K|} (-1)^{s(N-|K|)}
            sigma(R, N\\K) T^r S^R (b_(k|K) a)

    with k = m + r, K = M u R and s = |R|.  The sum terminates because only
    finitely many structure elements are nonzero.
    """
    base = _struct(alg, b, a)
    n = alg.n
    full = (1 << n) - 1
    sign_ab = (-1) ** (alg.parity(a) * alg.parity(b))
    kmax = max((k for (k, _) in base), default=-1)
    out = {}
    for m in range(kmax + 1):
        for M in range(full + 1):
            total = lp_zero(alg.variant, n)
            rest = full & ~M
            for r in range(kmax - m + 1):
                k = m + r
                sub = rest
                while True:
                    K = M | sub
                    elem = base.get((k, K))
                    if elem is not None:
                        s = _bits(sub)
                        word = elem
                        for i in reversed(indices_of(sub)):
                            word = word.apply_S(i)
                        for _ in range(r):
                            word = word.apply_T()
                        if not word.is_zero():
                            sgn = (-1) ** ((s * (s - 1)) // 2)
                            sgn *= (-1) ** (1 + k + n + _bits(K))
                            sgn *= (-1) ** (s * (n - _bits(K)))
                            sgn *= sigma_mask(sub, full & ~K)
                            total = total + word.scale(rat(sign_ab * sgn, factorial(r)))
                    if sub == 0:
                        break
                    sub = (sub - 1) & rest
            if not total.is_zero():
                out[(m, M)] = total
    return out


def structure_element(alg: LCAPresentation, a: str, b: str, j: int, Jmask: int) -> LambdaPoly:
    """The element a_(j|J) b, zero when the pair has no such mode."""
    elem = _struct(alg, a, b).get((j, Jmask))
    return elem if elem is not None else lp_zero(alg.variant, alg.n)


# -- mode elements -----------------------------------------------------------


class ModeElement:
    """Formal sum of generator Fourier modes plus a central scalar.

    Terms are keyed by (symbol, internal integer index, odd mask).  Vacuum
    modes collapse at construction: (-1 | full) contributes to the central
    scalar, every other vacuum mode is zero.
    """

    __slots__ = ("n", "terms", "central")

    def __init__(self, n: int, terms=None, central=0):
        full = (1 << n) - 1
        clean = {}
        cent = _coerce(central)
        if terms:
            for (sym, k, imask), coeff in terms.items():
                c = _coerce(coeff)
                if c.is_zero():
                    continue
                if sym == VAC:
                    if k == -1 and imask == full:
                        cent = cent + c
                    continue
                key = (sym, k, imask)
                prev = clean.get(key)
                clean[key] = c if prev is None else prev + c
                if clean[key].is_zero():
                    del clean[key]
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "central", cent)

    def __setattr__(self, name, value):
        raise AttributeError("ModeElement is immutable")

    def is_zero(self) -> bool:
        return not self.terms and self.central.is_zero()

    def equals(self, other: "ModeElement") -> bool:
        return (
            self.n == other.n
            and self.terms == other.terms
            and self.central == other.central
        )

    def __eq__(self, other):
        if not isinstance(other, ModeElement):
            return NotImplemented
        return self.equals(other)

    def __add__(self, other: "ModeElement") -> "ModeElement":
        if self.n != other.n:
            raise NonCanonical("mode elements of different odd dimension")
        acc = dict(self.terms)
        for key, c in other.terms.items():
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        return ModeElement(self.n, acc, self.central + other.central)

    def __neg__(self) -> "ModeElement":
        return ModeElement(
            self.n, {k: -c for k, c in self.terms.items()}, -self.central
        )

    def __sub__(self, other: "ModeElement") -> "ModeElement":
        return self + (-other)

    def scale(self, value) -> "ModeElement":
        c = _coerce(value)
        return ModeElement(
            self.n,
            {k: c * v for k, v in self.terms.items()},
            c * self.central,
        )

    def __rmul__(self, value):
        return self.scale(value)

    def __str__(self):
        pieces = []
        for (sym, k, imask) in sorted(self.terms, key=lambda t: (t[0], t[1], t[2])):
            c = self.terms[(sym, k, imask)]
            cs = str(c)
            head = "" if cs == "1" else ("(%s) " % cs if "+" in cs[1:] or "-" in cs[1:] else cs + " ")
            if self.n:
                idx = "%d|%s" % (k, "".join(str(i) for i in indices_of(imask)))
            else:
                idx = "%d" % k
            pieces.append("%s%s_(%s)" % (head, sym, idx))
        if not self.central.is_zero():
            pieces.append("(%s)" % self.central)
        return " + ".join(pieces) if pieces else "0"

    def __repr__(self):
        return "ModeElement(n=%d, <%d terms>)" % (self.n, len(self.terms))


def gen_mode(alg: LCAPresentation, sym: str, k: int, imask: int = 0, coeff=1) -> ModeElement:
    if sym not in alg.gens:
        raise NonCanonical("unknown generator %r" % sym)
    if imask & ~((1 << alg.n) - 1):
        raise NonCanonical("odd mask out of range")
    return ModeElement(alg.n, {(sym, int(k), imask): _coerce(coeff)})


def mode_parity(alg: LCAPresentation, sym: str, imask: int) -> int:
    """Parity of the mode a_(k|I): |a| + N + |I| mod 2."""
    return (alg.parity(sym) + alg.n + _bits(imask)) & 1


def element_mode(alg: LCAPresentation, elem: LambdaPoly, k: int, imask: int) -> ModeElement:
    """The (k|I) Fourier mode of a translation-word element.

    Words are peeled from the left using the quotient relations of the mode
    Lie algebra: (T x)_(n|I) = -n x_(n-1|I), and for S^i the variant rules
    derived from S^i a ~ -(-1)^{|a|N} a (x) d_{theta^i} (+ theta^i d_z in the
    NK case).  The S rules carry the operand parity through (-1)^{|y|(N+1)}.
    """
    n = alg.n
    full = (1 << n) - 1
    acc = {}
    central = rat(0)
    for (j0, chi, tp, smask, sym), s in elem.terms.items():
        if j0 or chi:
            raise NonCanonical("element carries bracket variables")
        pg = alg.parity(sym) if sym != VAC else 0
        word = indices_of(smask)
        states = {(int(k), imask): Fraction(1)}
        for _ in range(tp):
            nxt = {}
            for (kk, ii), f in states.items():
                if kk == 0:
                    continue
                key = (kk - 1, ii)
                nxt[key] = nxt.get(key, Fraction(0)) - kk * f
            states = nxt
        for pos, i in enumerate(word):
            py = (pg + len(word) - 1 - pos) & 1
            pfac = (-1) ** (py * (n + 1))
            bit = 1 << (i - 1)
            nxt = {}
            for (kk, ii), f in states.items():
                u = _bits((full & ~ii) & (bit - 1))
                if ii & bit:
                    sgn = pfac * (-1) ** u
                    key = (kk, ii & ~bit)
                    nxt[key] = nxt.get(key, Fraction(0)) + sgn * f
                elif alg.variant == "NK" and kk != 0:
                    uu = _bits((full & ~(ii | bit)) & (bit - 1))
                    sgn = pfac * (-1) ** uu
                    key = (kk - 1, ii | bit)
                    nxt[key] = nxt.get(key, Fraction(0)) - sgn * kk * f
            states = nxt
        for (kk, ii), f in states.items():
            if not f:
                continue
            contrib = rat(f.numerator, f.denominator) * s
            if sym == VAC:
                if kk == -1 and ii == full:
                    central = central + contrib
                continue
            key = (sym, kk, ii)
            prev = acc.get(key)
            acc[key] = contrib if prev is None else prev + contrib
    return ModeElement(n, acc, central)


# -- mode commutators ---------------------------------------------------------


def _dw_word(nexp: int, Imask: int, j: int, Jmask: int, n: int, variant: str):
    """Monomials of the divided derivative D_W^(j|J) applied to W^{n|I}.

    Returns {(power, mask): Fraction}.  W^{n|I} means zeta^I w^n; the odd
    derivations use left derivatives, the NK variant adds zeta^i d_w, and
    the word applies its rightmost factor first with the divided prefactor
    (-1)^{s(s+1)/2}/j!.
    """
    terms = {(nexp, Imask): Fraction(1)}
    idxs = indices_of(Jmask)
    for i in reversed(idxs):
        bit = 1 << (i - 1)
        nxt = {}
        for (p, P), c in terms.items():
            if P & bit:
                sgn = (-1) ** _below(i, P)
                key = (p, P & ~bit)
                nxt[key] = nxt.get(key, Fraction(0)) + sgn * c
            elif variant == "NK" and p != 0:
                sgn = sigma_mask(bit, P)
                key = (p - 1, P | bit)
                nxt[key] = nxt.get(key, Fraction(0)) + sgn * p * c
        terms = nxt
    for _ in range(j):
        terms = {(p - 1, P): c * p for (p, P), c in terms.items() if p != 0}
    s = len(idxs)
    pref = Fraction((-1) ** ((s * (s + 1)) // 2), factorial(j))
    return {key: c * pref for key, c in terms.items() if c}


def _gen_pair_bracket(alg: LCAPresentation, sa, na, Ia, sb, nb, Mb) -> ModeElement:
    key = (sa, na, Ia, sb, nb, Mb)
    cached = alg._bracket_cache.get(key)
    if cached is not None:
        return cached
    n = alg.n
    full = (1 << n) - 1
    structure = _struct(alg, sa, sb)
    total = ModeElement(n)
    sig_i = sign_sigma_full(Ia, n)
    for (j, J), elem in structure.items():
        sgn = sig_i * sign_sigma_full(J, n)
        sgn *= (-1) ** ((_bits(J) * n + _bits(Ia) * n + _bits(Ia) * _bits(J)) & 1)
        for (p, P), c in _dw_word(na, Ia, j, J, n, alg.variant).items():
            if P & Mb:
                continue
            rest = full & ~(Mb | P)
            s2 = sigma_mask(P, rest)
            coeff = rat(c.numerator, c.denominator) * rat(sgn * s2)
            total = total + element_mode(alg, elem, nb + p, Mb | P).scale(coeff)
    if mode_parity(alg, sa, Ia) and (n - _bits(Mb)) & 1:
        total = -total
    alg._bracket_cache[key] = total
    return total


def mode_bracket(x: ModeElement, y: ModeElement, alg: LCAPresentation) -> ModeElement:
    """Commutator of two mode sums through the structure elements.

    Central parts of the inputs commute with everything and drop out; the
    scalar coefficients pass across the left mode with the usual sign.
    """
    if x.n != alg.n or y.n != alg.n:
        raise NonCanonical("mode elements do not match the presentation")
    total = ModeElement(alg.n)
    for (sa, na, Ia), ca in x.terms.items():
        pa = mode_parity(alg, sa, Ia)
        for (sb, nb, Mb), cb in y.terms.items():
            part = _gen_pair_bracket(alg, sa, na, Ia, sb, nb, Mb)
            if part.is_zero():
                continue
            coeff = ca * cb
            if pa and _definite_parity(cb):
                coeff = -coeff
            total = total + part.scale(coeff)
    return total


# -- catalog -------------------------------------------------------------------


def _cparam() -> GrassmannScalar:
    return GrassmannScalar.param("c")


def _vir_table(variant="NW", n=0, sym="L"):
    L = lp_gen(variant, n, sym)
    entry = L.apply_T() + rat(2) * L.mul_lambda()
    entry = entry + (rat(1, 12) * _cparam()) * lp_vac(variant, n).mul_lambda(3)
    return entry


def _catalog_virasoro():
    table = {("L", "L"): _vir_table()}
    return LCAPresentation(
        "Virasoro", "NW", 0, [("L", 0, Fraction(2))], table, central="c", complete=True
    )


def _catalog_ns():
    v, n = "NW", 0
    L = lp_gen(v, n, "L")
    G = lp_gen(v, n, "G")
    table = {
        ("L", "L"): _vir_table(),
        ("L", "G"): G.apply_T() + rat(3, 2) * G.mul_lambda(),
        ("G", "G"): rat(2) * L
        + (rat(1, 3) * _cparam()) * lp_vac(v, n).mul_lambda(2),
    }
    gens = [("L", 0, Fraction(2)), ("G", 1, Fraction(3, 2))]
    return LCAPresentation("NS", v, n, gens, table, central="c", complete=True)


def _catalog_n2():
    v, n = "NW", 0
    L = lp_gen(v, n, "L")
    J = lp_gen(v, n, "J")
    Gp = lp_gen(v, n, "G+")
    Gm = lp_gen(v, n, "G-")
    vac = lp_vac(v, n)
    c = _cparam()
    table = {
        ("L", "L"): _vir_table(),
        ("L", "J"): J.apply_T() + J.mul_lambda(),
        ("L", "G+"): Gp.apply_T() + rat(3, 2) * Gp.mul_lambda(),
        ("L", "G-"): Gm.apply_T() + rat(3, 2) * Gm.mul_lambda(),
        ("J", "J"): (rat(1, 3) * c) * vac.mul_lambda(),
        ("J", "G+"): Gp,
        ("J", "G-"): -Gm,
        ("G+", "G+"): lp_zero(v, n),
        ("G-", "G-"): lp_zero(v, n),
        ("G+", "G-"): L
        + rat(1, 2) * J.apply_T()
        + J.mul_lambda()
        + (rat(1, 6) * c) * vac.mul_lambda(2),
    }
    gens = [
        ("L", 0, Fraction(2)),
        ("J", 0, Fraction(1)),
        ("G+", 1, Fraction(3, 2)),
        ("G-", 1, Fraction(3, 2)),
    ]
    return LCAPresentation("N2", v, n, gens, table, central="c", complete=True)


def _catalog_n2tilde():
    v, n = "NW", 0
    T = lp_gen(v, n, "T")
    J = lp_gen(v, n, "J")
    Q = lp_gen(v, n, "Q")
    H = lp_gen(v, n, "H")
    vac = lp_vac(v, n)
    c = _cparam()
    table = {
        ("T", "T"): T.apply_T() + rat(2) * T.mul_lambda(),
        ("T", "J"): J.apply_T() + J.mul_lambda()
        + (rat(1, 6) * c) * vac.mul_lambda(2),
        ("T", "Q"): Q.apply_T() + rat(2) * Q.mul_lambda(),
        ("T", "H"): H.apply_T() + H.mul_lambda(),
        ("H", "Q"): T - J.mul_lambda() + (rat(1, 6) * c) * vac.mul_lambda(2),
        ("J", "J"): (rat(1, 3) * c) * vac.mul_lambda(),
        ("J", "Q"): Q,
        ("J", "H"): -H,
        ("Q", "Q"): lp_zero(v, n),
        ("H", "H"): lp_zero(v, n),
    }
    gens = [
        ("T", 0, Fraction(2)),
        ("J", 0, Fraction(1)),
        ("Q", 1, Fraction(2)),
        ("H", 1, Fraction(1)),
    ]
    return LCAPresentation("N2tilde", v, n, gens, table, central="c", complete=True)


def _catalog_w(nn: int):
    if nn < 0:
        raise UnsupportedN("W(N) needs N >= 0")
    v = "NW"
    if nn == 0:
        return LCAPresentation(
            "W(0)", v, 0, [("L", 0, Fraction(2))],
            {("L", "L"): _vir_table()}, central="c", complete=True,
        )
    c = _cparam()
    vac = lp_vac(v, nn)
    pL = nn & 1
    pQ = (nn + 1) & 1
    gens = [("L", pL, Fraction(2))]
    qsyms = []
    for i in range(1, nn + 1):
        sym = "Q" if nn == 1 else "Q%d" % i
        qsyms.append(sym)
        gens.append((sym, pQ, Fraction(1)))
    L = lp_gen(v, nn, "L")
    table = {("L", "L"): L.apply_T() + rat(2) * L.mul_lambda()}
    for i, qi in enumerate(qsyms, start=1):
        Qi = lp_gen(v, nn, qi)
        entry = Qi.apply_T() + Qi.mul_lambda()
        sgn = (-1) ** nn
        entry = entry + (rat(sgn) * L).mul_chi(i)
        if nn == 1:
            entry = entry + (rat(1, 6) * c) * vac.mul_lambda(2)
        table[("L", qi)] = entry
    for i, qi in enumerate(qsyms, start=1):
        for j, qj in enumerate(qsyms, start=1):
            if j < i:
                continue
            Qj = lp_gen(v, nn, qj)
            Qi = lp_gen(v, nn, qi)
            entry = Qj.apply_S(i) + Qj.mul_chi(i) - Qi.mul_chi(j)
            if nn == 1:
                entry = entry + (rat(1, 3) * c) * vac.mul_lambda().mul_chi(1)
            if nn == 2 and (i, j) == (1, 2):
                entry = entry + (rat(1, 6) * c) * vac.mul_lambda()
            table[(qi, qj)] = entry
    return LCAPresentation(
        "W(%d)" % nn, v, nn, gens, table, central="c", complete=True
    )


def _catalog_k(nn: int, k4_sign: int = -1):
    if not 0 <= nn <= 4:
        raise UnsupportedN("K(N) is defined for N <= 4")
    v = "NK"
    c = _cparam()
    vac = lp_vac(v, nn)
    G = lp_gen(v, nn, "G")
    entry = rat(2) * G.apply_T()
    if nn <= 3:
        entry = entry + rat(4 - nn) * G.mul_lambda()
        for i in range(1, nn + 1):
            entry = entry + G.apply_S(i).mul_chi(i)
        central = (rat(1, 3) * c) * vac.mul_lambda(3 - nn)
        for i in reversed(range(1, nn + 1)):
            central = central.mul_chi(i)
        entry = entry + central
    else:
        for i in range(1, nn + 1):
            entry = entry + rat(k4_sign) * G.apply_S(i).mul_chi(i)
        entry = entry + c * vac.mul_lambda()
    gens = [("G", nn & 1, Fraction(3, 2))]
    return LCAPresentation(
        "K(%d)" % nn, v, nn, gens, {("G", "G"): entry}, central="c", complete=True
    )


def _catalog_b1():
    v, n = "NK", 1
    entry = lp_vac(v, n).mul_chi(1)
    gens = [("Psi", 1, Fraction(1, 2))]
    return LCAPresentation(
        "B1", v, n, gens, {("Psi", "Psi"): entry}, central=None, complete=True
    )


def _catalog_b2():
    v, n = "NW", 0
    vac = lp_vac(v, n)
    table = {
        ("alpha+", "alpha-"): vac.mul_lambda(),
        ("phi+", "phi-"): vac,
    }
    gens = [
        ("alpha+", 0, Fraction(1)),
        ("alpha-", 0, Fraction(1)),
        ("phi+", 0, Fraction(1, 2)),
        ("phi-", 0, Fraction(1, 2)),
    ]
    return LCAPresentation("B2", v, n, gens, table, central=None, complete=True)


_CATALOG_FIXED = {
    "virasoro": _catalog_virasoro,
    "vir": _catalog_virasoro,
    "ns": _catalog_ns,
    "n2": _catalog_n2,
    "n2tilde": _catalog_n2tilde,
    "tilde": _catalog_n2tilde,
    "b1": _catalog_b1,
    "b2": _catalog_b2,
}


def catalog_names():
    return ["Virasoro", "NS", "N2", "N2tilde", "W(N)", "K(N), N <= 4", "B1", "B2"]


def catalog(name: str) -> LCAPresentation:
    """Catalog algebra by name: Virasoro, NS, N2, N2tilde, W(N), K(N), B1, B2.

    Family names accept both `K(2)` and `k2` spellings.
    """
    key = name.strip().lower().replace(" ", "")
    if key in _CATALOG_FIXED:
        return _CATALOG_FIXED[key]()
    for fam, builder in (("w", _catalog_w), ("k", _catalog_k)):
        if key.startswith(fam):
            digits = key[len(fam):].strip("()")
            if digits.isdigit():
                return builder(int(digits))
    raise UnsupportedN("unknown catalog name %r" % name)


# -- physics relabelings --------------------------------------------------------


def _weights_rules(alg: LCAPresentation):
    """Universal N=0 rule: X_n = X_(n + h - 1) for a weight-h generator."""
    if alg.n != 0:
        raise NoWeightData("weight relabeling applies to ordinary algebras")
    info = []
    for sym, (parity, weight) in alg.gens.items():
        if weight is None:
            raise NoWeightData("generator %s declares no weight" % sym)
        info.append((sym, weight))
    half = {sym: (w.denominator == 2) for sym, w in info}
    shift = {sym: w - 1 for sym, w in info}

    def phys_to_internal(label, idx):
        return [(label, idx + shift[label], 0, rat(1))]

    def internal_to_phys(sym, k, imask):
        return [(sym, k - shift[sym], rat(1))]

    labels = [(sym, half[sym]) for sym, _ in info]
    return labels, phys_to_internal, internal_to_phys


def _k1_rules(alg):
    def phys_to_internal(label, idx):
        if label == "L":
            return [("G", idx + 1, 0, rat(1, 2))]
        return [("G", idx + Fraction(1, 2), 1, rat(1))]

    def internal_to_phys(sym, k, imask):
        if imask == 0:
            return [("L", k - 1, rat(2))]
        return [("G", k - Fraction(1, 2), rat(1))]

    return [("L", False), ("G", True)], phys_to_internal, internal_to_phys


def _k2_rules(alg, pm: bool):
    i_s = GrassmannScalar.from_qi(_I)

    def phys_to_internal(label, idx):
        if label == "L":
            return [("G", idx + 1, 0, rat(1, 2))]
        if label == "J":
            return [("G", idx, 3, i_s)]
        r = idx + Fraction(1, 2)
        if not pm:
            if label == "G1":
                return [("G", r, 1, rat(-1))]
            return [("G", r, 2, rat(1))]
        if label == "G+":
            return [("G", r, 1, rat(-1, 2)), ("G", r, 2, rat(-1, 2) * i_s)]
        return [("G", r, 1, rat(-1, 2)), ("G", r, 2, rat(1, 2) * i_s)]

    def internal_to_phys(sym, k, imask):
        if imask == 0:
            return [("L", k - 1, rat(2))]
        if imask == 3:
            return [("J", k, -i_s)]
        r = k - Fraction(1, 2)
        if not pm:
            if imask == 1:
                return [("G1", r, rat(-1))]
            return [("G2", r, rat(1))]
        if imask == 1:
            return [("G+", r, rat(-1)), ("G-", r, rat(-1))]
        return [("G+", r, i_s), ("G-", r, -i_s)]

    if pm:
        labels = [("L", False), ("J", False), ("G+", True), ("G-", True)]
    else:
        labels = [("L", False), ("J", False), ("G1", True), ("G2", True)]
    return labels, phys_to_internal, internal_to_phys


def _w1_components_rules(alg):
    def phys_to_internal(label, idx):
        if label == "L":
            return [
                ("L", idx + 1, 0, rat(1)),
                ("Q", idx, 1, rat(-(idx + 1), 2)),
            ]
        if label == "J":
            return [("Q", idx, 1, rat(-1))]
        if label == "G+":
            return [("Q", idx + Fraction(1, 2), 0, rat(1))]
        return [("L", idx + Fraction(1, 2), 1, rat(1))]

    def internal_to_phys(sym, k, imask):
        if sym == "Q":
            if imask:
                return [("J", k, rat(-1))]
            return [("G+", k - Fraction(1, 2), rat(1))]
        if imask:
            return [("G-", k - Fraction(1, 2), rat(1))]
        return [("L", k - 1, rat(1)), ("J", k - 1, rat(-k, 2))]

    labels = [("L", False), ("J", False), ("G+", True), ("G-", True)]
    return labels, phys_to_internal, internal_to_phys


def _w1_tilde_rules(alg):
    def phys_to_internal(label, idx):
        if label == "T":
            return [("L", idx + 1, 0, rat(1)), ("Q", idx, 1, rat(-(idx + 1)))]
        if label == "Q":
            return [("Q", idx + 1, 0, rat(1))]
        if label == "H":
            return [("L", idx, 1, rat(1))]
        return [("Q", idx, 1, rat(-1))]

    def internal_to_phys(sym, k, imask):
        if sym == "Q":
            if imask:
                return [("J", k, rat(-1))]
            return [("Q", k - 1, rat(1))]
        if imask:
            return [("H", k, rat(1))]
        return [("T", k - 1, rat(1)), ("J", k - 1, rat(-k))]

    labels = [("T", False), ("J", False), ("Q", False), ("H", False)]
    return labels, phys_to_internal, internal_to_phys


def _b1_rules(alg):
    def phys_to_internal(label, idx):
        if label == "phi":
            return [("Psi", idx - Fraction(1, 2), 1, rat(1))]
        return [("Psi", idx, 0, rat(1))]

    def internal_to_phys(sym, k, imask):
        if imask:
            return [("phi", k + Fraction(1, 2), rat(1))]
        return [("alpha", k, rat(1))]

    return [("phi", True), ("alpha", False)], phys_to_internal, internal_to_phys


def _n2_gi_rules(alg):
    i_s = GrassmannScalar.from_qi(_I)
    base, p2i_w, i2p_w = _weights_rules(alg)

    def phys_to_internal(label, idx):
        if label == "G1":
            return [("G+", idx + Fraction(1, 2), 0, rat(1)),
                    ("G-", idx + Fraction(1, 2), 0, rat(1))]
        if label == "G2":
            return [("G+", idx + Fraction(1, 2), 0, i_s),
                    ("G-", idx + Fraction(1, 2), 0, -i_s)]
        return p2i_w(label, idx)

    def internal_to_phys(sym, k, imask):
        if sym == "G+":
            return [("G1", k - Fraction(1, 2), rat(1, 2)),
                    ("G2", k - Fraction(1, 2), rat(-1, 2) * i_s)]
        if sym == "G-":
            return [("G1", k - Fraction(1, 2), rat(1, 2)),
                    ("G2", k - Fraction(1, 2), rat(1, 2) * i_s)]
        return i2p_w(sym, k, imask)

    labels = [("L", False), ("J", False), ("G1", True), ("G2", True)]
    return labels, phys_to_internal, internal_to_phys


def _relabel_rules(alg: LCAPresentation, basis):
    name = alg.name
    if name == "K(1)" and basis in (None, "components"):
        return _k1_rules(alg)
    if name == "K(2)" and basis in (None, "components"):
        return _k2_rules(alg, pm=False)
    if name == "K(2)" and basis == "pm":
        return _k2_rules(alg, pm=True)
    if name == "W(1)" and basis in (None, "components"):
        return _w1_components_rules(alg)
    if name == "W(1)" and basis == "tilde":
        return _w1_tilde_rules(alg)
    if name == "B1" and basis in (None, "components"):
        return _b1_rules(alg)
    if name == "N2" and basis == "Gi":
        return _n2_gi_rules(alg)
    if basis in (None, "weights"):
        return _weights_rules(alg)
    raise NoWeightData("no %r basis for %s" % (basis, name))


def physics_mode(alg: LCAPresentation, label: str, idx, basis=None) -> ModeElement:
    """The mode behind a physics label, e.g. L_2 or G_{-1/2}."""
    _, p2i, _ = _relabel_rules(alg, basis)
    idx = Fraction(idx)
    terms = {}
    for sym, k, imask, coeff in p2i(label, idx):
        if Fraction(k).denominator != 1:
            raise NoWeightData(
                "index %s is not admissible for label %s" % (idx, label)
            )
        key = (sym, int(k), imask)
        prev = terms.get(key)
        terms[key] = coeff if prev is None else prev + coeff
    return ModeElement(alg.n, terms)


def relabel_modes(alg: LCAPresentation, basis=None, window: int = 4):
    """Dictionary (label, index) -> ModeElement over the index window.

    Integer-moded labels get indices -window..window; half-integer labels
    get the half-integers of absolute value below window.
    """
    labels, p2i, _ = _relabel_rules(alg, basis)
    out = {}
    for label, half in labels:
        if half:
            num = -2 * window + 1
            while num <= 2 * window - 1:
                idx = Fraction(num, 2)
                out[(label, idx)] = physics_mode(alg, label, idx, basis)
                num += 2
        else:
            for k in range(-window, window + 1):
                out[(label, Fraction(k))] = physics_mode(alg, label, k, basis)
    return out


def express_physics(alg: LCAPresentation, x: ModeElement, basis=None):
    """Rewrite a mode sum in a physics basis: (coeff dict, central scalar)."""
    _, _, i2p = _relabel_rules(alg, basis)
    out = {}
    for (sym, k, imask), c in x.terms.items():
        for label, idx, w in i2p(sym, k, imask):
            key = (label, Fraction(idx))
            add = c * w
            prev = out.get(key)
            tot = add if prev is None else prev + add
            if tot.is_zero():
                out.pop(key, None)
            else:
                out[key] = tot
    return out, x.central


# -- consistency and OPE windows --------------------------------------------------


def check_mode_consistency(alg: LCAPresentation, window: int = 3,
                           jacobi_samples: int = 200, seed: int = 1):
    """Super-antisymmetry over all generator-mode pairs in the window, plus
    graded Jacobi on a deterministic sample of triples.

    Returns {"antisymmetry": [...], "jacobi": [...]} with human-readable
    descriptions of any failures; both lists empty means the window passed.
    """
    n = alg.n
    full = (1 << n) - 1
    modes = []
    for sym in alg.gens:
        for k in range(-window, window + 1):
            for imask in range(full + 1):
                modes.append((sym, k, imask))
    anti = []
    for pos, a in enumerate(modes):
        xa = gen_mode(alg, *a)
        pa = mode_parity(alg, a[0], a[2])
        for b in modes[pos:]:
            xb = gen_mode(alg, *b)
            pb = mode_parity(alg, b[0], b[2])
            lhs = mode_bracket(xa, xb, alg)
            rhs = mode_bracket(xb, xa, alg)
            flip = rhs if (pa and pb) else -rhs
            if not (lhs - flip).is_zero():
                anti.append("[%s,%s] vs [%s,%s]" % (a, b, b, a))
    jac = []
    rng = random.Random(seed)
    for _ in range(jacobi_samples):
        a = rng.choice(modes)
        b = rng.choice(modes)
        c = rng.choice(modes)
        xa, xb, xc = (gen_mode(alg, *m) for m in (a, b, c))
        pa = mode_parity(alg, a[0], a[2])
        pb = mode_parity(alg, b[0], b[2])
        lhs = mode_bracket(xa, mode_bracket(xb, xc, alg), alg)
        rhs = mode_bracket(mode_bracket(xa, xb, alg), xc, alg)
        inner = mode_bracket(xb, mode_bracket(xa, xc, alg), alg)
        rhs = rhs - inner if (pa and pb) else rhs + inner
        if not (lhs - rhs).is_zero():
            jac.append("jacobi(%s,%s,%s)" % (a, b, c))
    return {"antisymmetry": anti, "jacobi": jac}


def ope_distribution(a: str, b: str, alg: LCAPresentation, window: int = 6):
    """Singular part of the product of two generator fields, two ways.

    Route one applies the divided derivative to the delta table; route two
    expands the shifted negative power directly.  Both are multiplied into
    the structure elements and accumulated per monomial, so agreement checks
    the derivative lemma through the actual OPE coefficients.
    """
    if a != VAC and a not in alg.gens:
        raise MissingStructureConstant("unknown generator %r" % a)
    if b != VAC and b not in alg.gens:
        raise MissingStructureConstant("unknown generator %r" % b)
    structure = {} if VAC in (a, b) else _struct(alg, a, b)
    direct = {}
    closed = {}
    for (j, J), elem in structure.items():
        rep = delta_expand(j, indices_of(J), alg.n, alg.variant, window)
        sg = rat(sign_sigma_full(J, alg.n))
        for route, acc in (("direct", direct), ("closed", closed)):
            for key, c in rep[route].coeffs.items():
                add = elem.scale(sg * c)
                prev = acc.get(key)
                tot = add if prev is None else prev + add
                if tot.is_zero():
                    acc.pop(key, None)
                else:
                    acc[key] = tot
    mism = []
    for key in sorted(set(direct) | set(closed)):
        lhs = direct.get(key)
        rhs = closed.get(key)
        if lhs is None or rhs is None or not lhs.equals(rhs):
            mism.append(key)
    return {
        "distribution": direct,
        "agree": not mism,
        "mismatches": mism,
        "regular": not structure,
    }
