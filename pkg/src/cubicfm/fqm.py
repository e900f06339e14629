"""Finite quadratic modules: discriminant forms of even lattices.

A finite quadratic module is a finite abelian group A in invariant-factor
form together with a quadratic form q: A -> Q/2Z whose polarisation
b(x, y) = (q(x+y) - q(x) - q(y))/2 is a nondegenerate symmetric pairing
A x A -> Q/Z.  Elements are exponent tuples over the invariant factors.

Isometries and injective metric maps are integer matrices whose row i is
the exponent tuple of the image of the i-th generator.  All enumeration is
deterministic; anything that would iterate over more than ``bound``
elements raises EnumerationBoundError instead of grinding.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, lcm

from . import matrices as mx
from .arith import crt_idempotent, factorization, jacobi, least_nonresidue, valuation
from .errors import EnumerationBoundError, PreconditionError

DEFAULT_ENUM_BOUND = 10_000


def _mod1(x):
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


def _mod2(x):
    x = Fraction(x)
    half = x / 2
    return x - 2 * (half.numerator // half.denominator)


def _frac_order(x):
    """Order of x in Q/Z."""
    return _mod1(x).denominator


class FiniteQuadraticModule:
    """Invariant factors d1 | d2 | ... with q on generators and b on pairs."""

    __slots__ = ("orders", "qvals", "bmat")

    def __init__(self, orders, qvals, bmat, validate=True):
        orders = tuple(int(d) for d in orders)
        qvals = tuple(_mod2(v) for v in qvals)
        bmat = tuple(tuple(_mod1(v) for v in row) for row in bmat)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "qvals", qvals)
        object.__setattr__(self, "bmat", bmat)
        if validate:
            self._validate()

    def _validate(self):
        k = len(self.orders)
        if any(d < 2 for d in self.orders):
            raise ValueError("invariant factors must be > 1")
        if any(self.orders[i + 1] % self.orders[i] for i in range(k - 1)):
            raise ValueError("invariant factors must form a divisibility chain")
        if len(self.qvals) != k or len(self.bmat) != k or any(len(r) != k for r in self.bmat):
            raise ValueError("shape mismatch between orders, q and b")
        for i in range(k):
            if self.bmat[i][i] != _mod1(self.qvals[i]):
                raise ValueError("b(x,x) must equal q(x) mod 1")
            if _mod2(self.qvals[i] * self.orders[i] ** 2) != 0:
                raise ValueError("q is not defined modulo the generator orders")
            if _mod1(self.qvals[i] * self.orders[i]) != 0:
                raise ValueError("q is not defined modulo the generator orders")
            for j in range(k):
                if self.bmat[i][j] != self.bmat[j][i]:
                    raise ValueError("b must be symmetric")
                if _mod1(self.bmat[i][j] * self.orders[i]) != 0:
                    raise ValueError("b is not defined modulo the generator orders")
        if not self._is_nondegenerate():
            raise ValueError("the bilinear form is degenerate")

    def _is_nondegenerate(self):
        k = self.ngens
        if k == 0:
            return True
        radical = _kernel_gens(self, [tuple(1 if j == i else 0 for j in range(k))
                                      for i in range(k)])
        return _subgroup_order(self, radical) == 1

    def __setattr__(self, name, value):
        raise AttributeError("FiniteQuadraticModule is immutable")

    def __eq__(self, other):
        return (isinstance(other, FiniteQuadraticModule)
                and self.orders == other.orders
                and self.qvals == other.qvals
                and self.bmat == other.bmat)

    def __hash__(self):
        return hash((self.orders, self.qvals, self.bmat))

    def __repr__(self):
        return "FiniteQuadraticModule(orders=%s, q=%s)" % (
            list(self.orders), [str(v) for v in self.qvals])

    @property
    def ngens(self):
        return len(self.orders)

    @property
    def order(self):
        n = 1
        for d in self.orders:
            n *= d
        return n

    @property
    def exponent(self):
        out = 1
        for d in self.orders:
            out = lcm(out, d)
        return out

    @property
    def is_trivial(self):
        return not self.orders

    def reduce(self, x):
        return tuple(int(a) % d for a, d in zip(x, self.orders))

    def zero(self):
        return (0,) * self.ngens

    def add(self, x, y):
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def neg(self, x):
        return tuple((-a) % d for a, d in zip(x, self.orders))

    def smul(self, n, x):
        return tuple((n * a) % d for a, d in zip(x, self.orders))

    def element_order(self, x):
        n = 1
        for a, d in zip(x, self.orders):
            n = lcm(n, d // gcd(d, a))
        return n

    def q(self, x):
        total = Fraction(0)
        for i, a in enumerate(x):
            if a:
                total += a * a * self.qvals[i]
                for j in range(i + 1, len(x)):
                    if x[j]:
                        total += 2 * a * x[j] * self.bmat[i][j]
        return _mod2(total)

    def b(self, x, y):
        total = Fraction(0)
        for i, a in enumerate(x):
            if a:
                for j, c in enumerate(y):
                    if c:
                        total += a * c * self.bmat[i][j]
        return _mod1(total)

    def elements(self, bound=None):
        bound = DEFAULT_ENUM_BOUND if bound is None else bound
        if self.order > bound:
            raise EnumerationBoundError(
                "module of order %d exceeds the enumeration bound %d" % (self.order, bound))
        return list(product(*[range(d) for d in self.orders]))

    def rescale(self, s=-1):
        s = int(s)
        if gcd(s, self.order) != 1:
            raise ValueError("rescaling unit must be coprime to the order")
        return FiniteQuadraticModule(
            self.orders,
            [s * v for v in self.qvals],
            [[s * v for v in row] for row in self.bmat])

    def to_json_dict(self):
        return {"invariant_factors": list(self.orders),
                "q": [str(v) for v in self.qvals],
                "b": [[str(v) for v in row] for row in self.bmat]}


def trivial_module():
    return FiniteQuadraticModule((), (), ())


def fqm_from_json_dict(data):
    return FiniteQuadraticModule(
        data["invariant_factors"],
        [Fraction(v) for v in data["q"]],
        [[Fraction(v) for v in row] for row in data["b"]])


def _concat_module(a, b):
    orders = a.orders + b.orders
    qvals = a.qvals + b.qvals
    k, l = a.ngens, b.ngens
    bm = [[Fraction(0)] * (k + l) for _ in range(k + l)]
    for i in range(k):
        for j in range(k):
            bm[i][j] = a.bmat[i][j]
    for i in range(l):
        for j in range(l):
            bm[k + i][k + j] = b.bmat[i][j]
    # concatenated orders need not form a divisibility chain; skip validation
    return FiniteQuadraticModule(orders, qvals, bm, validate=False)


def fqm_direct_sum_with_maps(a, b):
    """Orthogonal sum in invariant-factor form plus generator embeddings.

    Returns (sum, rows_a, rows_b): rows_a[i] is the exponent tuple, in the
    sum module, of the image of a's i-th generator (same for rows_b).
    """
    raw = _concat_module(a, b)
    k, l = a.ngens, b.ngens
    std = [tuple(1 if j == i else 0 for j in range(k + l)) for i in range(k + l)]
    out, new_rows = submodule(raw, std)
    maps = []
    for e in std:
        coords = _express(raw, list(new_rows), e)
        if coords is None:
            raise ValueError("direct-sum generator tracking failed")
        maps.append(out.reduce(coords))
    return out, tuple(maps[:k]), tuple(maps[k:])


def fqm_direct_sum(a, b):
    return fqm_direct_sum_with_maps(a, b)[0]


def cyclic_module(n, qval):
    """Cyclic module Z/n with q(generator) = qval."""
    q = _mod2(Fraction(qval))
    return FiniteQuadraticModule((n,), (q,), ((_mod1(q),),))


# ---------------------------------------------------------------------------
# Discriminant groups and forms of lattices.

@dataclass(frozen=True)
class DiscriminantData:
    """Generators of L^dual / L in ambient rational coordinates."""
    orders: tuple
    lift_rows: tuple   # rational rows of length rank(L)
    conv: tuple        # integer matrix: exponent coordinates = x * conv
    kept: tuple        # positions of the nontrivial invariant factors

    def exponents_of(self, x):
        y = mx.row_times(tuple(Fraction(v) for v in x), self.conv)
        out = []
        for pos, d in zip(self.kept, self.orders):
            v = Fraction(y[pos])
            if v.denominator != 1:
                raise ValueError("vector is not in the dual lattice")
            out.append(v.numerator % d)
        for i, v in enumerate(y):
            if i not in self.kept and Fraction(v).denominator != 1:
                raise ValueError("vector is not in the dual lattice")
        return tuple(out)


def discriminant_data(lattice):
    g = lattice.gram
    s, u, v = mx.smith_normal_form(g)
    n = lattice.rank
    kept = tuple(i for i in range(n) if s[i][i] > 1)
    orders = tuple(s[i][i] for i in kept)
    lifts = tuple(tuple(Fraction(x, s[i][i]) for x in u[i]) for i in kept)
    conv = mx.mul(g, v)
    return DiscriminantData(orders, lifts, conv, kept)


def discriminant_group_order(lattice):
    return lattice.disc


def discriminant_form(lattice):
    """The finite quadratic module A_L of an even lattice L."""
    if not lattice.even:
        raise PreconditionError("discriminant form needs an even lattice")
    dd = discriminant_data(lattice)
    g = lattice.gram
    k = len(dd.orders)
    qvals = []
    bm = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        gi = mx.row_times(dd.lift_rows[i], tuple(tuple(Fraction(x) for x in row) for row in g))
        qvals.append(_mod2(sum(a * b for a, b in zip(gi, dd.lift_rows[i]))))
        for j in range(k):
            bm[i][j] = _mod1(sum(a * b for a, b in zip(gi, dd.lift_rows[j])))
    return FiniteQuadraticModule(dd.orders, qvals, bm)


def discriminant_action(lattice, iso_rows):
    """Isometry of A_L induced by a lattice isometry (rows act on the right)."""
    w = mx.mat(iso_rows)
    if mx.mul(mx.mul(w, lattice.gram), mx.transpose(w)) != lattice.gram:
        raise ValueError("matrix is not an isometry of the lattice")
    dd = discriminant_data(lattice)
    rows = []
    for lift in dd.lift_rows:
        image = mx.row_times(lift, tuple(tuple(Fraction(x) for x in row) for row in w))
        rows.append(dd.exponents_of(image))
    return tuple(rows)


# ---------------------------------------------------------------------------
# Subgroups, quotients and related presentations.

def _diag(values):
    n = len(values)
    return tuple(tuple(values[i] if i == j else 0 for j in range(n)) for i in range(n))


def _scaled_gen_matrix(mod, gen_rows):
    """Columns rescaled so that x*C = 0 mod exp(A) encodes vanishing in A."""
    d = mod.exponent
    return (tuple(tuple(row[j] * (d // mod.orders[j]) for j in range(mod.ngens))
                  for row in gen_rows), d)


def _express(mod, gen_rows, target):
    """Integer combination of gen_rows equal to target in mod, or None."""
    gen_rows = list(gen_rows)
    if not gen_rows:
        return () if not any(target) else None
    c, d = _scaled_gen_matrix(mod, gen_rows)
    t = tuple(int(x) * (d // mod.orders[j]) for j, x in enumerate(target))
    return mx.solve_mod(c, t, d)


def _subgroup_order(mod, gen_rows):
    rows = [r for r in (mod.reduce(t) for t in gen_rows) if any(r)]
    if not rows:
        return 1
    c, d = _scaled_gen_matrix(mod, rows)
    return mx.image_order_mod(c, d)


def _kernel_gens(mod, targets):
    """Generators of {x : b(x, t) = 0 in Q/Z for all t in targets}."""
    k = mod.ngens
    if k == 0 or not targets:
        return tuple(tuple(1 if j == i else 0 for j in range(k)) for i in range(k))
    cols = []
    for i in range(k):
        gi = tuple(1 if j == i else 0 for j in range(k))
        cols.append([mod.b(gi, t) for t in targets])
    m = 1
    for row in cols:
        for v in row:
            m = lcm(m, v.denominator)
    cm = tuple(tuple(int(v * m) for v in row) for row in cols)
    rows = [mod.reduce(r) for r in mx.kernel_mod(cm, m)]
    rows = mx.row_hnf([r for r in rows if any(r)])
    return tuple(r for r in rows if any(mod.reduce(r)))


def submodule(mod, gen_rows, extra_relations=(), scale=1):
    """Module presented by <gen_rows> / <extra_relations>, with form scale*q.

    Returns (module, new_gen_rows) where new_gen_rows expresses the new
    generators as elements of ``mod``.  extra_relations must be contained in
    the span of gen_rows; the caller guarantees the form descends (e.g. the
    relations span an isotropic subgroup inside the radical of scale*b).
    """
    gen_rows = [mod.reduce(r) for r in gen_rows]
    gen_rows = [r for r in gen_rows if any(r)]
    if not gen_rows:
        return trivial_module(), ()
    s = len(gen_rows)
    d = mod.exponent
    c, _ = _scaled_gen_matrix(mod, gen_rows)
    rel = list(mx.kernel_mod(c, d))
    for r in extra_relations:
        x = _express(mod, gen_rows, mod.reduce(r))
        if x is None:
            raise ValueError("relation outside the subgroup")
        rel.append(tuple(x))
    # relation lattice contains d*Z^s, so quotient data is computable mod d
    diag, _, v2 = mx.diagonalize_mod(rel, d)
    cyc = [gcd(diag[j], d) if j < len(diag) else d for j in range(s)]
    # rechain the cyclic orders into invariant factors (tiny exact SNF)
    snf, _, v3 = mx.smith_normal_form(_diag(cyc))
    vinv = mx.integer_matrix(mx.rational_inverse(mx.mul(v2, v3)))
    new_rows = mx.mul(vinv, tuple(gen_rows))
    keep = [i for i in range(s) if snf[i][i] > 1]
    orders = [snf[i][i] for i in keep]
    gens = [mod.reduce(new_rows[i]) for i in keep]
    qvals = [_mod2(scale * mod.q(g)) for g in gens]
    bm = [[_mod1(scale * mod.b(g, h)) for h in gens] for g in gens]
    return FiniteQuadraticModule(orders, qvals, bm), tuple(gens)


def orthogonal_complement_gens(mod, sub_gens):
    return _kernel_gens(mod, [mod.reduce(g) for g in sub_gens])


def perp_quotient(mod, sub_gens, bound=None):
    """H^perp / H for an isotropic subgroup H given by generators."""
    sub_gens = [mod.reduce(g) for g in sub_gens]
    for i, g in enumerate(sub_gens):
        if mod.q(g) != 0:
            raise PreconditionError("subgroup is not isotropic")
        for h in sub_gens[i:]:
            if mod.b(g, h) != 0:
                raise PreconditionError("subgroup is not isotropic")
    perp = orthogonal_complement_gens(mod, sub_gens)
    out, _ = submodule(mod, perp, extra_relations=sub_gens)
    return out


# ---------------------------------------------------------------------------
# Primary decomposition.

def _primary_parts(mod):
    """List of (p, part_module, gen_rows_in_mod)."""
    out = []
    for p in sorted(factorization(mod.order)):
        gens = []
        for i, d in enumerate(mod.orders):
            e = valuation(d, p)
            if e:
                cof = d // p ** e
                gens.append(mod.reduce(tuple(cof if j == i else 0
                                             for j in range(mod.ngens))))
        part, rows = submodule(mod, gens)
        out.append((p, part, rows))
    return out


def primary_decomposition(mod):
    """Orthogonal splitting into p-primary parts as (prime, module) pairs."""
    return [(p, part) for p, part, _ in _primary_parts(mod)]


def split_off_3_with_rows(mod):
    """((coprime part, rows), (order-3 part, rows)); 3-part must have order 3.

    The rows express each part's generators as elements of mod.
    """
    three = 1
    for d in mod.orders:
        three *= 3 ** valuation(d, 3)
    if three != 3:
        raise PreconditionError(
            "3-primary part has order %d, expected exactly 3" % three)
    coprime_gens = []
    three_gens = []
    for i, d in enumerate(mod.orders):
        e = valuation(d, 3)
        row = tuple(3 ** e if j == i else 0 for j in range(mod.ngens))
        coprime_gens.append(mod.reduce(row))
        if e:
            cof = d // 3 ** e
            three_gens.append(mod.reduce(tuple(cof if j == i else 0
                                               for j in range(mod.ngens))))
    coprime, crows = submodule(mod, coprime_gens)
    three_part, trows = submodule(mod, three_gens)
    return (coprime, crows), (three_part, trows)


def split_off_3(mod):
    """(coprime-to-3 part, order-3 part); requires the 3-part to have order 3."""
    (coprime, _), (three_part, _) = split_off_3_with_rows(mod)
    return coprime, three_part


# ---------------------------------------------------------------------------
# Signature mod 8 (Milgram), via an orthogonal Jordan splitting.

def _sig_odd_rank_one(qval, pe):
    c = qval * pe
    if c.denominator != 1:
        raise ValueError("inconsistent scale")
    c = c.numerator % (2 * pe)
    a = (c // 2) % pe  # c is even: pe^2*q = pe*c must vanish mod 2 with pe odd
    jac = jacobi(a, pe)
    if pe % 4 == 1:
        return 0 if jac == 1 else 4
    return 2 if jac == 1 else 6


def _sig_two_rank_one(qval, k):
    a = (qval * 2 ** k).numerator % 2 ** (k + 1)
    s = 1
    if a % 4 == 3:
        s -= 2
    if k % 2 == 0 and a % 8 in (3, 5):
        s += 4
    return s % 8


def _sig_two_rank_two(qi, qj, bij, k):
    two_a = (qi * 2 ** k).numerator % 2 ** (k + 1)
    two_b = (qj * 2 ** k).numerator % 2 ** (k + 1)
    c = (bij * 2 ** k).numerator % 2 ** k
    d = (two_a * two_b - c * c) % 8
    if d == 7:
        return 0
    if d == 3:
        return (4 * k) % 8
    raise ValueError("impossible 2-adic block determinant %d" % d)


def _sig_primary(part, p):
    if part.is_trivial:
        return 0
    pe = part.exponent
    k = valuation(pe, p)
    gens = [tuple(1 if j == i else 0 for j in range(part.ngens))
            for i in range(part.ngens)]
    diag_idx = next((i for i, g in enumerate(gens)
                     if _frac_order(part.b(g, g)) == pe), None)
    if diag_idx is None and p != 2:
        for i in range(part.ngens):
            for j in range(i + 1, part.ngens):
                if _frac_order(part.bmat[i][j]) == pe:
                    x = part.add(gens[i], gens[j])
                    if _frac_order(part.b(x, x)) == pe:
                        gens.append(x)
                        diag_idx = len(gens) - 1
                    break
            if diag_idx is not None:
                break
    if diag_idx is not None:
        x = gens[diag_idx]
        sig = (_sig_two_rank_one(part.q(x), k) if p == 2
               else _sig_odd_rank_one(part.q(x), pe))
        rest, _ = submodule(part, _kernel_gens(part, [x]))
        return (sig + _sig_primary(rest, p)) % 8
    # p = 2 and every diagonal value has order < 2^k: split an even 2x2 block
    for i in range(part.ngens):
        for j in range(i + 1, part.ngens):
            if _frac_order(part.bmat[i][j]) == pe:
                sig = _sig_two_rank_two(part.qvals[i], part.qvals[j],
                                        part.bmat[i][j], k)
                rest, _ = submodule(part, _kernel_gens(part, [gens[i], gens[j]]))
                return (sig + _sig_primary(rest, p)) % 8
    raise ValueError("nondegenerate module has no block at its top scale")


def signature_mod8(mod):
    """Milgram signature: the mod-8 signature of any even lattice with this form."""
    total = 0
    for p, part, _ in _primary_parts(mod):
        total += _sig_primary(part, p)
    return total % 8


# ---------------------------------------------------------------------------
# Gauss-sum certificates (complete isometry invariants of the rescalings).

def gauss_invariant(mod, m):
    """Invariant of the rescaled form m*q: (radical order, trivial?, sigma).

    K is the radical of m*b.  When exp(pi*i*m*q) is a nontrivial character
    on K the full Gauss sum vanishes and sigma is None; otherwise sigma is
    the mod-8 argument of the Gauss sum of the induced nondegenerate form
    on A/K.
    """
    k = mod.ngens
    if k == 0:
        return (1, True, 0)
    std = [tuple(1 if j == i else 0 for j in range(k)) for i in range(k)]
    cols = []
    for i in range(k):
        cols.append([_mod1(m * mod.bmat[i][j]) for j in range(k)])
    den = 1
    for row in cols:
        for v in row:
            den = lcm(den, v.denominator)
    cm = tuple(tuple(int(v * den) for v in row) for row in cols)
    rows = [mod.reduce(r) for r in mx.kernel_mod(cm, den)]
    rad = tuple(r for r in mx.row_hnf([r for r in rows if any(r)])
                if any(mod.reduce(r)))
    rad_order = _subgroup_order(mod, rad)
    for r in rad:
        if _mod2(m * mod.q(r)) != 0:
            return (rad_order, False, None)
    quotient, _ = submodule(mod, std, extra_relations=rad, scale=m)
    return (rad_order, True, signature_mod8(quotient))


def torsion_certificate(part, p):
    """Canonical isometry certificate of a p-primary module.

    Group invariants plus the Gauss invariants of all inequivalent
    rescalings m*q; by Kawauchi-Kojima these determine the isometry class.
    """
    e = valuation(part.exponent, p) if not part.is_trivial else 0
    if p == 2:
        ms = list(range(1, 2 ** (e + 1) + 1))
    else:
        units = (1, least_nonresidue(p)) if p > 2 else (1,)
        ms = sorted(u * p ** j for j in range(e + 1) for u in units)
    return (part.orders, tuple((m,) + gauss_invariant(part, m) for m in ms))


# ---------------------------------------------------------------------------
# Isometries: enumeration, testing, embeddings.

def identity_isometry(mod):
    return tuple(tuple(1 if j == i else 0 for j in range(mod.ngens))
                 for i in range(mod.ngens))


def apply_hom(rows, x, target):
    """Image of element x under the hom given by generator-image rows."""
    if not rows:
        return target.zero()
    out = [0] * target.ngens
    for a, row in zip(x, rows):
        if a:
            for j, c in enumerate(row):
                out[j] += a * c
    return target.reduce(out)


def compose_homs(first, second, target):
    """first then second, as generator-image rows into target."""
    return tuple(apply_hom(second, row, target) for row in first)


def hom_is_identity(rows, mod):
    return all(mod.reduce(row) == tuple(1 if j == i else 0 for j in range(mod.ngens))
               for i, row in enumerate(rows))


def invert_isometry(rows, mod):
    power = rows
    while not hom_is_identity(compose_homs(power, rows, mod), mod):
        power = compose_homs(power, rows, mod)
    return tuple(mod.reduce(r) for r in power)


def invert_hom(rows, source, target):
    """Inverse of a bijective hom source -> target, as rows target -> source."""
    out = []
    for i in range(target.ngens):
        e = tuple(1 if j == i else 0 for j in range(target.ngens))
        coords = _express(target, list(rows), e)
        if coords is None:
            raise ValueError("hom is not surjective")
        out.append(source.reduce(coords))
    return tuple(out)


def isometric_embeddings(source, target, bound=None, first_only=False):
    """All q-preserving injective homomorphisms source -> target.

    Returned as sorted generator-image matrices.  The search places one
    generator at a time, pruning by annihilator, q-value and pairwise
    b-values; injectivity is checked on the completed image subgroup.
    """
    if source.order == 1:
        return [()]
    if source.order > target.order:
        return []
    elements = target.elements(bound)
    by_q = {}
    for x in elements:
        by_q.setdefault(target.q(x), []).append(x)
    cands = []
    for i in range(source.ngens):
        d = source.orders[i]
        pool = [y for y in by_q.get(source.qvals[i], ())
                if all((d * c) % dd == 0 for c, dd in zip(y, target.orders))]
        if not pool:
            return []
        cands.append(pool)
    out = []
    chosen = []

    def place(i):
        if i == source.ngens:
            if _subgroup_order(target, chosen) == source.order:
                out.append(tuple(chosen))
                return not first_only
            return True
        for y in cands[i]:
            ok = True
            for j in range(i):
                if target.b(y, chosen[j]) != source.bmat[i][j]:
                    ok = False
                    break
            if ok:
                chosen.append(y)
                if not place(i + 1):
                    return False
                chosen.pop()
        return True

    place(0)
    return sorted(out)


def _assemble_from_parts(source, target, pieces):
    """Glue per-primary-part homs into one hom source -> target.

    pieces: list of (p, src_part, src_rows, tgt_part, tgt_rows, hom_rows).
    """
    n = source.exponent
    rows = []
    for i in range(source.ngens):
        gi = tuple(1 if j == i else 0 for j in range(source.ngens))
        image = target.zero()
        for p, spart, srows, tpart, trows, hom in pieces:
            pa = p ** valuation(n, p)
            e = crt_idempotent(pa, n // pa)
            proj = source.smul(e, gi)
            coords = _express(source, srows, proj)
            if coords is None:
                raise ValueError("projection failed to land in the primary part")
            part_img = apply_hom(hom, tuple(c % o for c, o in zip(coords, spart.orders)),
                                 tpart)
            for c, row in zip(part_img, trows):
                if c:
                    image = target.add(image, target.smul(c, row))
        rows.append(image)
    return tuple(rows)


def is_isometric(a, b, bound=None):
    """A witness isometry a -> b, or None.

    Decides prime by prime and glues the per-part witnesses together.
    """
    if a.orders != b.orders:
        return None
    if a.ngens == 0:
        return ()
    if signature_mod8(a) != signature_mod8(b):
        return None
    parts_a = _primary_parts(a)
    parts_b = _primary_parts(b)
    pieces = []
    for (p, pa, ra), (p2, pb, rb) in zip(parts_a, parts_b):
        if pa.orders != pb.orders:
            return None
        found = isometric_embeddings(pa, pb, bound=bound, first_only=True)
        if not found:
            return None
        pieces.append((p, pa, ra, pb, rb, found[0]))
    witness = _assemble_from_parts(a, b, pieces)
    assert _is_isometry_matrix(a, b, witness)
    return witness


def _is_isometry_matrix(a, b, rows):
    if len(rows) != a.ngens:
        return False
    for i in range(a.ngens):
        if b.q(rows[i]) != a.qvals[i]:
            return False
        if any((a.orders[i] * c) % d for c, d in zip(rows[i], b.orders)):
            return False
        for j in range(i + 1, a.ngens):
            if b.b(rows[i], rows[j]) != a.bmat[i][j]:
                return False
    return _subgroup_order(b, rows) == a.order


def isometry_group(mod, bound=None):
    """All isometries of mod, one matrix per element, deterministically sorted.

    Computed per primary part (automorphisms preserve the splitting) and
    recombined, which keeps the search spaces small.
    """
    if mod.ngens == 0:
        return ((),)
    parts = _primary_parts(mod)
    per_part = []
    for p, part, rows in parts:
        autos = isometric_embeddings(part, part, bound=bound)
        if not autos:
            raise ValueError("found no automorphisms of a primary part")
        per_part.append((p, part, rows, autos))
    out = []
    for combo in product(*[autos for _, _, _, autos in per_part]):
        pieces = [(p, part, rows, part, rows, hom)
                  for (p, part, rows, _), hom in zip(per_part, combo)]
        out.append(_assemble_from_parts(mod, mod, pieces))
    return tuple(sorted(set(out)))


# ---------------------------------------------------------------------------
# Isotropic subgroups.

@dataclass(frozen=True)
class FqmSubgroup:
    gens: tuple
    elements: tuple
    order: int
    isotropic: bool


def subgroup_from_gens(mod, gens, bound=None):
    gens = tuple(mod.reduce(g) for g in gens)
    elems = {mod.zero()}
    frontier = [mod.zero()]
    bound = DEFAULT_ENUM_BOUND if bound is None else bound
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = mod.add(x, g)
            if y not in elems:
                if len(elems) >= bound:
                    raise EnumerationBoundError("subgroup exceeds enumeration bound")
                elems.add(y)
                frontier.append(y)
    elements = tuple(sorted(elems))
    iso = all(mod.q(x) == 0 for x in elements)
    return FqmSubgroup(gens, elements, len(elements), iso)


def isotropic_subgroups(mod, bound=None):
    """All isotropic subgroups, sorted by (order, element list)."""
    elements = mod.elements(bound)
    iso_elements = [x for x in elements if mod.q(x) == 0]
    zero = mod.zero()
    seen = {frozenset((zero,))}
    queue = [frozenset((zero,))]
    while queue:
        current = queue.pop()
        for x in iso_elements:
            if x in current:
                continue
            if any(mod.b(x, h) != 0 for h in current):
                continue
            new = set(current)
            step = x
            while step != zero:
                new.update(mod.add(h, step) for h in current)
                step = mod.add(step, x)
            fz = frozenset(new)
            if fz not in seen:
                seen.add(fz)
                queue.append(fz)
    out = []
    for fz in seen:
        elems = tuple(sorted(fz))
        gens = tuple(e for e in elems if any(e))
        out.append(FqmSubgroup(gens, elems, len(elems), True))
    return sorted(out, key=lambda h: (h.order, h.elements))
