"""Integral lattices presented by Gram matrices.

A lattice here is a free Z-module with a nondegenerate symmetric integral
bilinear form, always given by the Gram matrix of some basis.  Vectors are
integer coordinate tuples in that basis; the pairing of rows x, y is
x * G * y^T.  Basis-free identity is decided elsewhere (canonical forms for
definite lattices, genus machinery otherwise).
"""

import json

from . import matrices as mx
from .errors import DegenerateLatticeError, InvalidGramError


class Lattice:
    """Immutable lattice with cached metric invariants.

    >>> Lattice(((0, 1), (1, 0))).det
    -1
    """

    __slots__ = ("gram", "rank", "det", "disc", "signature", "even")

    def __init__(self, gram):
        try:
            g = mx.mat(gram)
        except (TypeError, ValueError) as exc:
            raise InvalidGramError(str(exc)) from exc
        r, c = mx.dims(g)
        if r != c:
            raise InvalidGramError("Gram matrix must be square")
        if not mx.is_symmetric(g):
            raise InvalidGramError("Gram matrix must be symmetric")
        det = mx.determinant(g)
        if det == 0:
            raise DegenerateLatticeError("Gram matrix is degenerate")
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "rank", r)
        object.__setattr__(self, "det", det)
        object.__setattr__(self, "disc", abs(det))
        object.__setattr__(self, "signature", mx.symmetric_signature(g) if r else (0, 0))
        object.__setattr__(self, "even", all(g[i][i] % 2 == 0 for i in range(r)))

    def __setattr__(self, name, value):
        raise AttributeError("Lattice is immutable")

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        return "Lattice(%s)" % (list(map(list, self.gram)),)

    @property
    def is_positive_definite(self):
        return self.signature == (self.rank, 0)

    @property
    def is_unimodular(self):
        return self.disc == 1

    def inner(self, v, w):
        """Pairing v.w of two coordinate tuples."""
        if len(v) != self.rank or len(w) != self.rank:
            raise ValueError("vector length does not match the rank")
        gv = mx.row_times(tuple(v), self.gram)
        return sum(x * y for x, y in zip(gv, w))

    def norm(self, v):
        return self.inner(v, v)

    def divisibility(self, v):
        """div(v): gcd of all pairings of v with lattice vectors."""
        if not any(v):
            raise ValueError("divisibility of the zero vector is undefined")
        from math import gcd
        g = 0
        for x in mx.row_times(tuple(v), self.gram):
            g = gcd(g, x)
        return g

    def rescale(self, s):
        """Same Z-module with the form multiplied by the integer s != 0."""
        s = int(s)
        if s == 0:
            raise ValueError("rescaling by zero degenerates the form")
        return Lattice(mx.scale(self.gram, s))

    def dual_basis(self):
        """Rows spanning the dual lattice inside L (x) Q, in L-coordinates."""
        return mx.rational_inverse(self.gram)

    def sublattice(self, basis_rows):
        return Sublattice(self, basis_rows)

    def to_json(self):
        return json.dumps({"gram": [list(r) for r in self.gram]})


def make_lattice(gram):
    """Spec-facing constructor alias."""
    return Lattice(gram)


def direct_sum(*lattices):
    g = ()
    for latt in lattices:
        g = mx.block_diag(g, latt.gram) if g else latt.gram
    if not g:
        raise ValueError("empty direct sum")
    return Lattice(g)


class Sublattice:
    """A finite-rank sublattice given by basis rows in the parent's basis."""

    __slots__ = ("parent", "basis")

    def __init__(self, parent, basis_rows):
        basis = mx.mat(basis_rows)
        if basis and len(basis[0]) != parent.rank:
            raise ValueError("basis rows must have the parent's rank")
        if mx.rational_rank(basis) != len(basis):
            raise ValueError("basis rows are linearly dependent")
        self.parent = parent
        self.basis = basis

    def __repr__(self):
        return "Sublattice(%s, %s)" % (self.parent, list(map(list, self.basis)))

    @property
    def rank(self):
        return len(self.basis)

    def gram(self):
        b = self.basis
        return mx.integer_matrix(mx.mul(mx.mul(b, self.parent.gram), mx.transpose(b)))

    def lattice(self):
        """The abstract lattice with the induced form (must be nondegenerate)."""
        return Lattice(self.gram())

    def saturation(self):
        """Smallest primitive sublattice containing this one."""
        if not self.basis:
            return self
        _, _, v = mx.smith_normal_form(self.basis)
        vinv = mx.integer_matrix(mx.rational_inverse(v))
        sat = mx.row_hnf(vinv[: self.rank])
        return Sublattice(self.parent, sat)

    def is_primitive(self):
        sat = self.saturation()
        return mx.row_hnf(self.basis) == sat.basis

    def orthogonal_complement(self):
        """All parent vectors orthogonal to this sublattice (primitive)."""
        pairing = mx.mul(self.parent.gram, mx.transpose(self.basis))
        kernel = mx.integer_kernel(pairing)
        return Sublattice(self.parent, mx.row_hnf(kernel))


# ---------------------------------------------------------------------------
# Catalog of named lattices.

_E8_EDGES = ((0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7))


def hyperbolic_plane():
    return Lattice(((0, 1), (1, 0)))


def root_a2():
    return Lattice(((2, -1), (-1, 2)))


def root_e8():
    """The even unimodular positive-definite rank-8 lattice (Cartan matrix)."""
    g = [[0] * 8 for _ in range(8)]
    for i in range(8):
        g[i][i] = 2
    for i, j in _E8_EDGES:
        g[i][j] = g[j][i] = -1
    return Lattice(g)


def rank_one(n):
    if n == 0:
        raise ValueError("<0> is degenerate")
    return Lattice(((int(n),),))


def cubic_lattice():
    """Middle cohomology lattice of a cubic fourfold: E8^2 + U^2 + <1>^3."""
    e8, u, one = root_e8(), hyperbolic_plane(), rank_one(1)
    return direct_sum(e8, e8, u, u, one, one, one)


def primitive_cubic_lattice():
    """The primitive lattice (square-of-hyperplane complement): E8^2 + U^2 + A2."""
    e8, u = root_e8(), hyperbolic_plane()
    return direct_sum(e8, e8, u, u, root_a2())


def mukai_lattice():
    """The even unimodular lattice of signature (20, 4): U^4 + E8^2."""
    e8, u = root_e8(), hyperbolic_plane()
    return direct_sum(u, u, u, u, e8, e8)


def k3_lattice():
    """The K3 lattice U^3 + E8(-1)^2, even unimodular of signature (3, 19)."""
    u = hyperbolic_plane()
    e8m = root_e8().rescale(-1)
    return direct_sum(u, u, u, e8m, e8m)


def family_l_n(n):
    """The rank-3 family ((3,1,1),(1,3,0),(1,0,n)); n = 3 is the two-planes case."""
    latt = Lattice(((3, 1, 1), (1, 3, 0), (1, 0, int(n))))
    return latt


def family_l_ab(a, b):
    """The rank-2 family ((14,a),(a,2b)), required positive definite."""
    latt = Lattice(((14, int(a)), (int(a), 2 * int(b))))
    if not latt.is_positive_definite:
        raise ValueError("family parameters (%s, %s) are not positive definite" % (a, b))
    return latt


def two_planes_lattice():
    return family_l_n(3)


def k14_lattice():
    """Rank-2 discriminant-14 algebraic lattice of a very general Pfaffian cubic."""
    return Lattice(((3, 1), (1, 5)))


def hyperplane_square_index(n):
    """Index of the square-3 basis vector acting as h^2 in family_l_n(n).

    The complement of that vector must be even: this holds for the first
    basis vector when n is odd and for the second when n is even.
    """
    return 0 if n % 2 else 1


def primitive_part_of_l_n(n):
    """Orthogonal complement of the hyperplane square inside family_l_n(n)."""
    latt = family_l_n(n)
    i = hyperplane_square_index(n)
    v = tuple(1 if j == i else 0 for j in range(3))
    comp = latt.sublattice((v,)).orthogonal_complement().lattice()
    if not comp.even:
        raise ValueError("expected an even complement for n=%s" % n)
    return comp


CATALOG = {
    "U": (hyperbolic_plane, 0),
    "A2": (root_a2, 0),
    "E8": (root_e8, 0),
    "diag": (lambda *ns: Lattice(tuple(tuple((ns[i] if i == j else 0)
                                             for j in range(len(ns)))
                                       for i in range(len(ns)))), -1),
    "rank_one": (rank_one, 1),
    "Lcub": (cubic_lattice, 0),
    "Lcub0": (primitive_cubic_lattice, 0),
    "mukai": (mukai_lattice, 0),
    "K3": (k3_lattice, 0),
    "L_n": (family_l_n, 1),
    "L_ab": (family_l_ab, 2),
    "two_planes": (two_planes_lattice, 0),
    "K14": (k14_lattice, 0),
    "L_n_prim": (primitive_part_of_l_n, 1),
}


def catalog(name, params=()):
    """Build a named lattice; params is the tuple of integer parameters."""
    if name not in CATALOG:
        raise KeyError("unknown catalog lattice %r" % name)
    builder, arity = CATALOG[name]
    params = tuple(int(p) for p in params)
    if arity >= 0 and len(params) != arity:
        raise ValueError("%s expects %d parameter(s)" % (name, arity))
    return builder(*params)


def lattice_from_json(text):
    """Parse {"gram": [[...]]} or {"name": ..., "params": [...]} JSON."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidGramError("invalid JSON: %s" % exc) from exc
    if not isinstance(data, dict):
        raise InvalidGramError("expected a JSON object")
    if "gram" in data:
        return Lattice(data["gram"])
    if "name" in data:
        try:
            return catalog(data["name"], data.get("params", ()))
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidGramError(str(exc)) from exc
    raise InvalidGramError("JSON object needs a 'gram' or 'name' key")
