"""Algorithms for definite lattices and genus classification.

Short-vector enumeration runs on an exact rational LDL^T decomposition, so
the search boxes are sharp and nothing is floating point.  Isometry testing
and automorphism groups use backtracking over short-vector candidates.
Canonical forms exist for rank <= 3 (exhaustive search over bases realising
the successive minima).

Genus comparison uses two independent descriptions:

* `genus_symbol` packages the classical local data: one Jordan symbol
  (scale, dim, sign) per odd prime, the raw 2-adic Jordan constituents for
  display, and, as the canonical 2-adic invariant, the Gauss-sum
  certificate of the 2-part of the discriminant form of L(2) (rescaling by
  2 makes any lattice even without changing p-adic equivalence).
* `same_genus` decides equality directly: equal rank and signature plus an
  explicit witness isometry between the discriminant forms of L(2).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from . import matrices as mx
from .arith import jacobi, prime_factors
from .errors import DefinitenessError
from .fqm import (discriminant_form, discriminant_action, is_isometric,
                  torsion_certificate, _primary_parts)
from .lattices import Lattice

RANK_BOUND_SHORT_VECTORS = 8
RANK_BOUND_AUTOMORPHISMS = 4


def _ldl(gram):
    """G = R^T D R with R unit upper triangular; raises unless G > 0."""
    n = len(gram)
    a = [[Fraction(x) for x in row] for row in gram]
    r = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    d = []
    for k in range(n):
        piv = a[k][k]
        if piv <= 0:
            raise DefinitenessError("lattice is not positive definite")
        d.append(piv)
        for i in range(k + 1, n):
            f = a[k][i] / piv
            r[k][i] = f
            if f:
                for j in range(i, n):
                    a[i][j] -= f * a[k][j]
                    if j != i:
                        a[j][i] = a[i][j]
    return d, r


def _coordinate_range(center, allowance, scale):
    """Integers x with scale*(x + center)^2 <= allowance (scale > 0)."""
    bound = allowance / scale
    if bound < 0:
        return []
    approx = isqrt(bound.numerator // bound.denominator) + 2
    lo = -(-center).__ceil__() if False else None
    mid = int(-center)
    out = []
    for x in range(mid - approx - 2, mid + approx + 3):
        if scale * (x + center) ** 2 <= allowance:
            out.append(x)
    return out


def _enumerate_up_to(lattice, bound):
    """All v != 0 with v.v <= bound, one per +-pair, with their norms.

    Deterministic: results sorted lexicographically.  The representative of
    each pair has positive first nonzero coordinate.
    """
    n = lattice.rank
    if n == 0:
        return []
    if lattice.signature != (n, 0):
        raise DefinitenessError("short vectors need a positive definite lattice")
    if n > RANK_BOUND_SHORT_VECTORS:
        raise DefinitenessError("rank %d exceeds the short-vector bound %d"
                                % (n, RANK_BOUND_SHORT_VECTORS))
    d, r = _ldl(lattice.gram)
    out = []
    x = [0] * n

    def rec(i, rem):
        if i < 0:
            v = tuple(x)
            if any(v):
                lead = next(c for c in v if c)
                if lead > 0:
                    out.append((v, bound - rem))
            return
        center = sum(r[i][j] * x[j] for j in range(i + 1, n))
        for xi in _coordinate_range(center, rem, d[i]):
            x[i] = xi
            rec(i - 1, rem - d[i] * (xi + center) ** 2)
        x[i] = 0

    rec(n - 1, Fraction(bound))
    return sorted((v, int(nrm)) for v, nrm in out)


def short_vectors(lattice, m):
    """All v with v.v = m up to sign, sorted; exact enumeration."""
    if m <= 0:
        raise ValueError("norm must be positive")
    return [v for v, nrm in _enumerate_up_to(lattice, m) if nrm == m]


def vectors_of_square_and_divisibility(lattice, m, d):
    """Vectors v with v.v = m and div(v) = d, up to sign."""
    return [v for v in short_vectors(lattice, m) if lattice.divisibility(v) == d]


def successive_minima(lattice):
    """The successive minima (lambda_1 <= ... <= lambda_n)."""
    n = lattice.rank
    if n == 0:
        return ()
    cap = max(lattice.gram[i][i] for i in range(n))
    pool = sorted(_enumerate_up_to(lattice, cap), key=lambda t: (t[1], t[0]))
    minima = []
    chosen = []
    for v, nrm in pool:
        if mx.rational_rank(tuple(chosen) + (v,)) == len(chosen) + 1:
            chosen.append(v)
            minima.append(nrm)
            if len(chosen) == n:
                break
    if len(minima) != n:
        raise DefinitenessError("failed to realise the successive minima")
    return tuple(sorted(minima))


def minkowski_canonical(lattice):
    """Lexicographically minimal reduced Gram matrix; rank <= 3 only.

    Two positive definite lattices of rank <= 3 are isometric iff their
    canonical Gram matrices are equal.  Diagonal entries come out as the
    successive minima; off-diagonal entries are minimised in absolute value
    with non-negative entries preferred.
    """
    n = lattice.rank
    if n == 0:
        return ()
    if n > 3:
        raise DefinitenessError("canonical form implemented for rank <= 3 only;"
                                " use is_isometric_definite")
    if lattice.signature != (n, 0):
        raise DefinitenessError("canonical form needs a positive definite lattice")
    minima = successive_minima(lattice)
    pool = _enumerate_up_to(lattice, minima[-1])
    by_norm = {}
    for v, nrm in pool:
        by_norm.setdefault(nrm, []).extend([v, tuple(-c for c in v)])
    best = [None]
    chosen = []

    def key_of(gram):
        diag = tuple(gram[i][i] for i in range(n))
        off = tuple(gram[i][j] for i in range(n) for j in range(i + 1, n))
        return (diag, tuple(abs(o) for o in off), tuple(o < 0 for o in off), off)

    def rec(i):
        if i == n:
            coords = tuple(chosen)
            if abs(mx.determinant(coords)) != 1:
                return
            g = mx.integer_matrix(mx.mul(mx.mul(coords, lattice.gram),
                                         mx.transpose(coords)))
            k = key_of(g)
            if best[0] is None or k < best[0][0]:
                best[0] = (k, g)
            return
        for v in by_norm.get(minima[i], ()):
            chosen.append(v)
            if mx.rational_rank(tuple(chosen)) == i + 1:
                rec(i + 1)
            chosen.pop()

    rec(0)
    if best[0] is None:
        raise DefinitenessError("no basis realises the successive minima")
    return best[0][1]


def is_isometric_definite(l1, l2):
    """A witness W with W * G2 * W^T = G1 (rows = images of l1's basis), or None."""
    sols = _definite_isometries(l1, l2, first_only=True)
    return sols[0] if sols else None


def automorphism_group(lattice):
    """The full finite isometry group O(L) of a positive definite lattice."""
    if lattice.rank > RANK_BOUND_AUTOMORPHISMS:
        raise DefinitenessError("automorphism group implemented for rank <= %d"
                                % RANK_BOUND_AUTOMORPHISMS)
    return tuple(_definite_isometries(lattice, lattice, first_only=False))


def _definite_isometries(l1, l2, first_only):
    n = l1.rank
    if (n != l2.rank or l1.det != l2.det or l1.even != l2.even):
        return []
    if n == 0:
        return [()]
    if l1.signature != (n, 0) or l2.signature != (n, 0):
        raise DefinitenessError("isometry search needs positive definite lattices")
    cap = max(l1.gram[i][i] for i in range(n))
    by_norm = {}
    for v, nrm in _enumerate_up_to(l2, cap):
        by_norm.setdefault(nrm, []).extend([v, tuple(-c for c in v)])
    for lst in by_norm.values():
        lst.sort()
    out = []
    chosen = []

    def rec(i):
        if i == n:
            out.append(tuple(chosen))
            return not first_only
        for w in by_norm.get(l1.gram[i][i], ()):
            ok = True
            for j in range(i):
                if l2.inner(w, chosen[j]) != l1.gram[i][j]:
                    ok = False
                    break
            if ok:
                chosen.append(w)
                if not rec(i + 1):
                    return False
                chosen.pop()
        return True

    rec(0)
    return sorted(out)


def h_filter(lattices):
    """Drop lattices with a square-2 vector or a (square 6, div 3) vector.

    This encodes the image restriction of the period map; idempotent and
    order preserving.
    """
    out = []
    for latt in lattices:
        if short_vectors(latt, 2):
            continue
        if vectors_of_square_and_divisibility(latt, 6, 3):
            continue
        out.append(latt)
    return out


def disc_isometry_image(lattice):
    """Image of O(L) -> O(A_L) for an even definite lattice, as sorted matrices."""
    if not lattice.even:
        raise DefinitenessError("discriminant image needs an even lattice")
    images = {discriminant_action(lattice, w) for w in automorphism_group(lattice)}
    return tuple(sorted(images))


# ---------------------------------------------------------------------------
# Genus symbols.

def _val2(x):
    x = Fraction(x)
    num = abs(x.numerator)
    den = x.denominator
    v = 0
    while num % 2 == 0:
        num //= 2
        v += 1
    while den % 2 == 0:
        den //= 2
        v -= 1
    return v


def _valp(x, p):
    x = Fraction(x)
    num = abs(x.numerator)
    den = x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _unit_symbol(x, p):
    """Jacobi symbol (u|p) of the p-adic unit x (sign matters)."""
    num = x.numerator
    den = x.denominator
    return jacobi(num * den % p, p)


def _odd_jordan(gram, p):
    """Jordan symbol over Z_p, p odd: tuple of (scale, dim, eps)."""
    n = len(gram)
    a = [[Fraction(x) for x in row] for row in gram]
    active = list(range(n))
    units = {}
    while active:
        minval = None
        where = None
        for i in active:
            for j in active:
                if a[i][j] and (minval is None or _valp(a[i][j], p) < minval):
                    minval = _valp(a[i][j], p)
                    where = (i, j)
        k = next((i for i in active if a[i][i] and _valp(a[i][i], p) == minval), None)
        if k is None:
            i, j = where
            for l in active:
                a[j][l] += a[i][l]
            for l in active:
                a[l][j] += a[l][i]
            k = j
        piv = a[k][k]
        units.setdefault(minval, []).append(piv / Fraction(p) ** minval)
        active.remove(k)
        for i in active:
            if a[i][k]:
                f = a[i][k] / piv
                for j in active:
                    a[i][j] -= f * a[k][j]
        for i in active:
            a[i][k] = a[k][i] = Fraction(0)
    symbol = []
    for scale in sorted(units):
        us = units[scale]
        eps = 1
        for u in us:
            eps *= _unit_symbol(u, p)
        symbol.append((scale, len(us), eps))
    return tuple(symbol)


def _unit_mod8(x):
    """Odd Fraction unit reduced mod 8 (num*den works since den^2 = 1 mod 8)."""
    return (x.numerator * x.denominator) % 8


def _two_jordan(gram):
    """2-adic Jordan constituents: tuple of (scale, dim, det mod 8, type, oddity)."""
    n = len(gram)
    a = [[Fraction(x) for x in row] for row in gram]
    active = list(range(n))
    blocks = []
    while active:
        minval = None
        for i in active:
            for j in active:
                if a[i][j]:
                    v = _val2(a[i][j])
                    if minval is None or v < minval:
                        minval = v
        k = next((i for i in active if a[i][i] and _val2(a[i][i]) == minval), None)
        if k is not None:
            piv = a[k][k]
            u = piv / Fraction(2) ** minval
            blocks.append((minval, 1, _unit_mod8(u), "I", _unit_mod8(u)))
            active.remove(k)
            for i in active:
                if a[i][k]:
                    f = a[i][k] / piv
                    for j in active:
                        a[i][j] -= f * a[k][j]
            for i in active:
                a[i][k] = a[k][i] = Fraction(0)
        else:
            pair = next((i, j) for i in active for j in active
                        if i < j and a[i][j] and _val2(a[i][j]) == minval)
            i, j = pair
            p2 = Fraction(2) ** minval
            det_unit = (a[i][i] * a[j][j] - a[i][j] ** 2) / p2 ** 2
            blocks.append((minval, 2, _unit_mod8(det_unit), "II", 0))
            det = a[i][i] * a[j][j] - a[i][j] ** 2
            rest = [l for l in active if l not in (i, j)]
            for l in rest:
                ci = (a[l][i] * a[j][j] - a[l][j] * a[i][j]) / det
                cj = (a[l][j] * a[i][i] - a[l][i] * a[i][j]) / det
                if ci or cj:
                    for t in rest:
                        a[l][t] -= ci * a[i][t] + cj * a[j][t]
            for l in rest:
                a[l][i] = a[i][l] = a[l][j] = a[j][l] = Fraction(0)
            active.remove(i)
            active.remove(j)
    merged = {}
    for scale, dim, det8, kind, odd in blocks:
        cur = merged.setdefault(scale, [0, 1, "II", 0])
        cur[0] += dim
        cur[1] = (cur[1] * det8) % 8
        if kind == "I":
            cur[2] = "I"
            cur[3] = (cur[3] + odd) % 8
    return tuple((scale,) + tuple(merged[scale]) for scale in sorted(merged))


@dataclass(frozen=True, eq=False)
class GenusSymbol:
    """Local genus data; equality decides same-genus.

    odd_symbols holds the classical Jordan symbols for odd primes; the
    two_adic entry is the canonical Gauss-sum certificate of the 2-part of
    the discriminant form of L(2), which is a complete 2-adic invariant.
    two_jordan is display-only (raw 2-adic constituents are not unique).
    """
    rank: int
    signature: tuple
    det: int
    even: bool
    odd_symbols: tuple
    two_adic: tuple
    two_jordan: tuple = field(default=())

    def _key(self):
        return (self.rank, self.signature, self.det, self.even,
                self.odd_symbols, self.two_adic)

    def __eq__(self, other):
        return isinstance(other, GenusSymbol) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __str__(self):
        parts = ["rank=%d" % self.rank,
                 "sgn=(%d,%d)" % self.signature,
                 "det=%d" % self.det,
                 "even" if self.even else "odd"]
        for p, sym in self.odd_symbols:
            parts.append("%d:%s" % (p, ",".join("%d^%d%s" % (p ** s, d, "+" if e > 0 else "-")
                                                for s, d, e in sym)))
        parts.append("2:%s" % (repr(self.two_adic),))
        return "[" + " ".join(parts) + "]"


def genus_symbol(lattice):
    odd = []
    for p in prime_factors(lattice.det):
        if p != 2:
            odd.append((p, _odd_jordan(lattice.gram, p)))
    doubled = discriminant_form(lattice.rescale(2))
    two_cert = ()
    for p, part, _ in _primary_parts(doubled):
        if p == 2:
            two_cert = torsion_certificate(part, 2)
    return GenusSymbol(
        rank=lattice.rank,
        signature=lattice.signature,
        det=lattice.det,
        even=lattice.even,
        odd_symbols=tuple(odd),
        two_adic=two_cert,
        two_jordan=_two_jordan(lattice.gram) if lattice.rank else (),
    )


def same_genus(l1, l2, bound=None):
    """Rigorous same-genus decision via the rescaled discriminant forms.

    L and M lie in the same genus iff rank and signature agree and the
    (automatically even) rescalings L(2), M(2) have isometric discriminant
    forms; the isometry is found as an explicit witness.
    """
    if l1.rank != l2.rank or l1.signature != l2.signature or l1.det != l2.det:
        return False
    d1 = discriminant_form(l1.rescale(2))
    d2 = discriminant_form(l2.rescale(2))
    return is_isometric(d1, d2, bound=bound) is not None


def genus_representatives(lattice):
    """One positive definite representative per isometry class in the genus.

    Exhaustive search over reduced Gram matrices with the target
    determinant, filtered by genus-symbol equality and deduplicated by
    canonical form.  Rank 1, 2 or 3 only.
    """
    n = lattice.rank
    if lattice.signature != (n, 0):
        raise DefinitenessError("genus enumeration needs a positive definite lattice")
    if n not in (1, 2, 3):
        raise DefinitenessError("genus enumeration implemented for ranks 1-3")
    det = lattice.det
    target = genus_symbol(lattice)
    seen = {}
    for gram in _reduced_grams(n, det):
        cand = Lattice(gram)
        if cand.even != lattice.even:
            continue
        if genus_symbol(cand) != target:
            continue
        canon = minkowski_canonical(cand)
        seen.setdefault(canon, Lattice(canon))
    own = minkowski_canonical(lattice)
    assert own in seen, "input lattice missing from its own genus enumeration"
    return [seen[k] for k in sorted(seen)]


def _reduced_grams(n, det):
    if n == 1:
        yield ((det,),)
        return
    if n == 2:
        b = 0
        while 3 * b * b <= det:
            val = det + b * b
            a = max(2 * b, 1)
            while a * a <= val:
                if val % a == 0:
                    yield ((a, b), (b, val // a))
                a += 1
            b += 1
        return
    cap = 2 * det
    a = 1
    while a * a * a <= cap:
        b = a
        while a * b * b <= cap:
            c = b
            while a * b * c <= cap:
                for d in range(-(a // 2), a // 2 + 1):
                    for e in range(-(a // 2), a // 2 + 1):
                        for f in range(-(b // 2), b // 2 + 1):
                            g = ((a, d, e), (d, b, f), (e, f, c))
                            if a * b - d * d <= 0:
                                continue
                            if mx.determinant(g) == det:
                                yield g
                c += 1
            b += 1
        a += 1
