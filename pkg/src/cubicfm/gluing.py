"""Overlattice and primitive-embedding calculus (gluing data).

A primitive sublattice N of L with orthogonal complement T determines the
glue group G = L/(N + T), which embeds into A_N + A_T as the graph of an
injective map gamma; the graph is isotropic and its perp-quotient recovers
A_L.  Conversely any such pair (G, gamma) glues N + T back into an
overlattice.  Everything here runs on discriminant-form data; explicit
Gram matrices only appear in the small round-trip constructions.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import matrices as mx
from .definite import disc_isometry_image, same_genus
from .errors import PreconditionError
from .fqm import (FiniteQuadraticModule, apply_hom, compose_homs,
                  discriminant_action, discriminant_data, discriminant_form,
                  fqm_direct_sum_with_maps, is_isometric, isometric_embeddings,
                  perp_quotient, split_off_3_with_rows, subgroup_from_gens,
                  submodule, _express)
from .lattices import Lattice


def check_gluing_identity(disc_t, disc_n, disc_l, glue_order):
    """disc(T) * disc(N) = |G|^2 * disc(L), evaluated exactly."""
    return disc_t * disc_n == glue_order ** 2 * disc_l


@dataclass(frozen=True)
class GluingData:
    """Glue group of a primitive embedding, in discriminant coordinates.

    graph_pairs[i] = (exponents in A_N, exponents in A_T) of one generator
    of the glue group; glue_rows are the same generators as rational rows
    in the basis of the block lattice N + T (for overlattice round-trips).
    """
    order: int
    sub_orders: tuple
    comp_orders: tuple
    graph_pairs: tuple
    glue_rows: tuple

    @property
    def subgroup_exponents(self):
        return tuple(p[0] for p in self.graph_pairs)

    @property
    def gamma_images(self):
        return tuple(p[1] for p in self.graph_pairs)


def _group_subgroup_order(orders, rows):
    rows = [tuple(a % d for a, d in zip(r, orders)) for r in rows]
    rows = [r for r in rows if any(r)]
    if not rows:
        return 1
    d = 1
    for o in orders:
        d = lcm(d, o)
    scaled = tuple(tuple(row[j] * (d // orders[j]) for j in range(len(orders)))
                   for row in rows)
    return mx.image_order_mod(scaled, d)


def gluing_data_of(parent, sub):
    """Glue data of a primitive sublattice of `parent` (a Sublattice).

    Works at group level for any nondegenerate parent; when the parent is
    even, the graph is additionally checked to be isotropic for q.
    """
    if not sub.is_primitive():
        raise PreconditionError("sublattice is not primitive in its parent")
    comp = sub.orthogonal_complement()
    n_latt = sub.lattice()
    t_latt = comp.lattice()
    stacked = mx.vstack(sub.basis, comp.basis)
    glue_order = abs(mx.determinant(stacked))
    inv = mx.rational_inverse(stacked)
    dd_n = discriminant_data(n_latt)
    dd_t = discriminant_data(t_latt)
    k = sub.rank
    pairs = []
    rows = []
    n = parent.rank
    for i in range(n):
        coords = inv[i]  # e_i = coords * stacked
        n_part = coords[:k]
        t_part = coords[k:]
        pairs.append((dd_n.exponents_of(n_part), dd_t.exponents_of(t_part)))
        rows.append(tuple(n_part) + tuple(t_part))
    concat = [p[0] + p[1] for p in pairs]
    orders = dd_n.orders + dd_t.orders
    if _group_subgroup_order(orders, concat) != glue_order:
        raise AssertionError("glue group order mismatch")
    if not check_gluing_identity(t_latt.disc, n_latt.disc, parent.disc, glue_order):
        raise AssertionError("gluing identity failed on computed data")
    if parent.even:
        big, rows_n, rows_t = fqm_direct_sum_with_maps(
            discriminant_form(n_latt), discriminant_form(t_latt))
        gens = []
        for en, et in pairs:
            g = big.zero()
            for c, r in zip(en, rows_n):
                g = big.add(g, big.smul(c, r))
            for c, r in zip(et, rows_t):
                g = big.add(g, big.smul(c, r))
            gens.append(g)
        if not subgroup_from_gens(big, gens).isotropic:
            raise AssertionError("glue graph of an even parent must be isotropic")
    keep = [i for i, p in enumerate(pairs) if any(p[0]) or any(p[1])]
    return GluingData(
        order=glue_order,
        sub_orders=dd_n.orders,
        comp_orders=dd_t.orders,
        graph_pairs=tuple(pairs[i] for i in keep),
        glue_rows=tuple(rows[i] for i in keep),
    )


def overlattice_from_isotropic(lattice, subgroup_exponents):
    """Even overlattice classified by an isotropic subgroup of A_L.

    The subgroup is given by exponent rows over the generators of A_L.
    Returns the overlattice as an abstract Lattice; its discriminant is
    disc(L) / |H|^2 and it is checked to be even and integral.
    """
    if not lattice.even:
        raise PreconditionError("overlattice construction needs an even lattice")
    mod = discriminant_form(lattice)
    rows = [mod.reduce(r) for r in subgroup_exponents]
    sub = subgroup_from_gens(mod, rows)
    if not sub.isotropic:
        raise PreconditionError("subgroup is not isotropic")
    dd = discriminant_data(lattice)
    n = lattice.rank
    lifts = []
    for r in rows:
        lift = [Fraction(0)] * n
        for c, gen in zip(r, dd.lift_rows):
            for j in range(n):
                lift[j] += c * gen[j]
        lifts.append(tuple(lift))
    den = 1
    for lift in lifts:
        for x in lift:
            den = lcm(den, Fraction(x).denominator)
    scaled = [tuple(int(x * den) for x in lift) for lift in lifts]
    scaled += [tuple(den if j == i else 0 for j in range(n)) for i in range(n)]
    basis = mx.row_hnf(scaled)
    rational = tuple(tuple(Fraction(x, den) for x in row) for row in basis)
    gram_q = mx.mul(mx.mul(rational, lattice.gram), mx.transpose(rational))
    gram = mx.integer_matrix(gram_q)
    out = Lattice(gram)
    if not out.even:
        raise AssertionError("overlattice of an even lattice along isotropic"
                             " glue must be even")
    if out.disc * sub.order ** 2 != lattice.disc:
        raise AssertionError("overlattice discriminant drop mismatch")
    return out


@dataclass(frozen=True)
class EmbeddingClass:
    """One orbit of primitive-embedding data with a fixed complement class."""
    complement: Lattice
    gamma: tuple
    orbit_size: int


def embedding_classes(a_t, sig_t, ambient_rank, ambient_sig, ambient_disc,
                      complement, hodge=None, bound=None):
    """Orbits of gluing data (G, gamma) for embeddings of a lattice with
    discriminant form a_t and signature sig_t into an ambient genus, with
    the prescribed complement.

    G is forced to be all of A_T (the paper's situations have
    |G|^2 = disc(T) * disc(N) / disc(ambient) = |A_T|^2); gamma runs over
    anti-isometric injections A_T -> A_N whose graph has perp-quotient
    isometric to the ambient discriminant form.  Orbits are taken under
    the image of O(complement) acting on A_N and the given right action
    on A_T (default: identity only).
    """
    t_rank = sig_t[0] + sig_t[1]
    if t_rank + complement.rank != ambient_rank:
        raise PreconditionError("ranks do not add up to the ambient rank")
    if (sig_t[0] + complement.signature[0] != ambient_sig[0]
            or sig_t[1] + complement.signature[1] != ambient_sig[1]):
        raise PreconditionError("signatures do not add up")
    a_n = discriminant_form(complement)
    glue_sq, rem = divmod(a_t.order * a_n.order, ambient_disc.order)
    if rem:
        raise PreconditionError("discriminants violate the gluing identity")
    if glue_sq != a_t.order ** 2:
        raise PreconditionError(
            "glue group would be a proper subgroup of A_T; only the full"
            " A_T case is implemented")
    gammas = isometric_embeddings(a_t.rescale(-1), a_n, bound=bound)
    big, rows_n, rows_t = fqm_direct_sum_with_maps(a_n, a_t)

    def graph_ok(gamma):
        gens = []
        for i in range(a_t.ngens):
            g = big.zero()
            for c, r in zip(gamma[i], rows_n):
                g = big.add(g, big.smul(c, r))
            gens.append(big.add(g, rows_t[i]))
        quotient = perp_quotient(big, gens)
        return is_isometric(quotient, ambient_disc, bound=bound) is not None

    valid = [g for g in gammas if graph_ok(g)]
    left = disc_isometry_image(complement)
    right = tuple(hodge) if hodge else (tuple(
        tuple(1 if j == i else 0 for j in range(a_t.ngens))
        for i in range(a_t.ngens)),)
    classes = []
    remaining = set(valid)
    for gamma in sorted(valid):
        if gamma not in remaining:
            continue
        orbit = {gamma}
        frontier = [gamma]
        while frontier:
            g = frontier.pop()
            for sig in left:
                for psi in right:
                    h = compose_homs(compose_homs(psi, g, a_n), sig, a_n)
                    if h not in orbit:
                        orbit.add(h)
                        frontier.append(h)
        remaining -= orbit
        classes.append(EmbeddingClass(complement=complement, gamma=gamma,
                                      orbit_size=len(orbit)))
    return classes


def split_action(iso_rows, lattice):
    """Coprime-to-3 component of the discriminant action of a lattice isometry.

    lattice must be even with 3-primary discriminant part of order exactly
    3; the induced isometry of A_N splits as (sigma, tau) on
    A_T(-1) + C3 and sigma is returned, as a matrix over the generators of
    the coprime part.
    """
    a_n = discriminant_form(lattice)
    (coprime, crows), _ = split_off_3_with_rows(a_n)
    fbar = discriminant_action(lattice, iso_rows)
    out = []
    for row in crows:
        image = apply_hom(fbar, row, a_n)
        coords = _express(a_n, list(crows), image)
        if coords is None:
            raise AssertionError("discriminant action does not preserve the"
                                 " coprime part")
        out.append(coprime.reduce(coords))
    return tuple(out)
