"""Counting Fourier-Mukai partners of cubic fourfolds from lattice data.

The counting formula: for a cubic fourfold with primitive algebraic
lattice N (even, positive definite, rank <= 3) whose transcendental
lattice T has discriminant prime to 3,

    #FM(X) = sum over N' in H(N) of  |O(N') \\ O(A_T) / O_Hodge(T)| ,

where H(N) is the genus of N pruned by the period-map filter, A_T is the
coprime-to-3 part of A_N rescaled by -1, O(N') acts through its
discriminant action split as (sigma, tau) on A_T(-1) + C3, and O_Hodge is
a Hodge-theoretic input (generically {+-1}).  A fixed-complement variant
counts partners with a prescribed primitive algebraic lattice when
disc(N) itself is prime to 3, and a general orbit enumeration over gluing
data covers 3-divisible transcendental discriminants.

All counts are double cosets of explicitly enumerated finite groups; the
Hodge group and the derived-equivalence criterion behind the formula are
assumptions, recorded in every report.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

from .arith import is_square
from .definite import (automorphism_group, disc_isometry_image, genus_symbol,
                       genus_representatives, h_filter, minkowski_canonical,
                       short_vectors, vectors_of_square_and_divisibility)
from .errors import DefinitenessError, PreconditionError
from .fqm import (FiniteQuadraticModule, compose_homs, discriminant_form,
                  identity_isometry, invert_hom, is_isometric,
                  isometric_embeddings, isometry_group, split_off_3_with_rows,
                  fqm_direct_sum_with_maps, perp_quotient, subgroup_from_gens,
                  apply_hom, _express)
from .gluing import split_action
from .lattices import Lattice, root_a2

ASSUMPTION_BANNER = ("counts assume the derived Torelli criterion for"
                     " Kuznetsov components and the stated Hodge isometry"
                     " group of the transcendental lattice")


@dataclass(frozen=True)
class HodgeSpec:
    """The image of O_Hodge(T) in the relevant discriminant isometry group.

    mode 'pm_id' is the paper's generic assumption {+-id}; 'full' uses the
    whole isometry group (an upper quotient, useful for sanity bounds);
    'explicit' takes matrices over the generators of the module acted on.
    """
    mode: str = "pm_id"
    isometries: tuple = ()

    def subgroup(self, module, group):
        if self.mode == "pm_id":
            ident = identity_isometry(module)
            minus = tuple(module.neg(row) for row in ident)
            return (ident,) if minus == ident else tuple(sorted({ident, minus}))
        if self.mode == "full":
            return group
        if self.mode == "explicit":
            isos = tuple(tuple(module.reduce(r) for r in m) for m in self.isometries)
            ident = identity_isometry(module)
            if ident not in isos:
                raise PreconditionError("explicit Hodge group must contain the identity")
            for a in isos:
                for b in isos:
                    if compose_homs(a, b, module) not in isos:
                        raise PreconditionError("explicit Hodge isometries do not"
                                                " form a subgroup")
            return tuple(sorted(set(isos)))
        raise PreconditionError("unknown Hodge mode %r" % self.mode)


HODGE_PM_ID = HodgeSpec("pm_id")
HODGE_FULL = HodgeSpec("full")


@dataclass(frozen=True)
class FmCountReport:
    input_gram: tuple
    path: str
    hodge_mode: str
    transcendental_form: FiniteQuadraticModule
    representatives: tuple   # ((canonical gram, count), ...)
    total: int
    warnings: tuple = ()
    notes: tuple = ()

    def to_json_dict(self):
        return {
            "input": [list(r) for r in self.input_gram],
            "assumption": ASSUMPTION_BANNER + " (hodge=%s)" % self.hodge_mode,
            "path": self.path,
            "transcendental_form": self.transcendental_form.to_json_dict(),
            "representatives": [{"gram": [list(r) for r in g], "count": c}
                                for g, c in self.representatives],
            "total": self.total,
            "warnings": list(self.warnings),
            "notes": list(self.notes),
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True,
                          separators=(",", ": "), indent=1)


def _require_counting_input(lattice):
    if not lattice.even:
        raise PreconditionError("primitive algebraic lattice must be even")
    if lattice.signature != (lattice.rank, 0):
        raise DefinitenessError("primitive algebraic lattice must be positive"
                                " definite")
    if lattice.rank > 3:
        raise DefinitenessError("counting implemented for rank <= 3")


def derive_transcendental_fqm(lattice):
    """A_T from A_N: the coprime-to-3 part with the form negated.

    Valid when the 3-primary part of A_N has order exactly 3, i.e. when
    disc(T) = disc(N)/3 is prime to 3; otherwise the general path applies.
    """
    _require_counting_input(lattice)
    a_n = discriminant_form(lattice)
    (coprime, _), _ = split_off_3_with_rows(a_n)
    return coprime.rescale(-1)


def _double_coset_count(group, left, right, module):
    """Number of orbits of left x right acting by g -> l * g * r."""
    remaining = set(group)
    count = 0
    while remaining:
        seed = min(remaining)
        orbit = {seed}
        frontier = [seed]
        while frontier:
            g = frontier.pop()
            for l in left:
                for r in right:
                    h = compose_homs(compose_homs(l, g, module), r, module)
                    if h not in orbit:
                        orbit.add(h)
                        frontier.append(h)
        remaining -= orbit
        count += 1
    return count


def _transport(iso, source, target, witness):
    """Conjugate an isometry of `source` to one of `target` along witness."""
    winv = invert_hom(witness, source, target)
    return compose_homs(compose_homs(winv, iso, source), witness, target)


def count_fm(lattice, hodge=HODGE_PM_ID, bound=None):
    """Total Fourier-Mukai partner count via the double-coset formula.

    Requires 3 to be prime to disc(T), i.e. the 3-part of A_N has order 3.
    One double coset |O(N') \\ O(A_T) / O_Hodge| is computed per class N'
    in the pruned genus H(N), with the O(N') action through the
    (sigma, tau) splitting.
    """
    _require_counting_input(lattice)
    a_t = derive_transcendental_fqm(lattice)
    group = isometry_group(a_t, bound=bound)
    reps = h_filter(genus_representatives(lattice))
    right = hodge.subgroup(a_t, group)
    rows = []
    total = 0
    for rep in reps:
        a_rep = discriminant_form(rep)
        (cop_rep, _), _ = split_off_3_with_rows(a_rep)
        here = cop_rep.rescale(-1)
        witness = is_isometric(here, a_t, bound=bound)
        if witness is None:
            raise AssertionError("genus member with non-isometric A_T part")
        left = set()
        for w in automorphism_group(rep):
            sigma = split_action(w, rep)
            left.add(_transport(sigma, here, a_t, witness))
        count = _double_coset_count(group, tuple(sorted(left)), right, a_t)
        rows.append((rep.gram, count))
        total += count
    return FmCountReport(
        input_gram=lattice.gram,
        path="counting-formula",
        hodge_mode=hodge.mode,
        transcendental_form=a_t,
        representatives=tuple(rows),
        total=total,
    )


def count_fm_fixed_complement(lattice, complement, hodge=HODGE_PM_ID, bound=None):
    """Partner count with prescribed primitive algebraic lattice.

    Requires disc(N) prime to 3; returns |O(N') \\ O(A_N) / O_Hodge| where
    N' = complement must lie in H(genus of N).
    """
    _require_counting_input(lattice)
    if lattice.disc % 3 == 0:
        raise PreconditionError("fixed-complement count needs disc(N) prime to 3;"
                                " use the full counting formula instead")
    if genus_symbol(complement) != genus_symbol(lattice):
        raise PreconditionError("complement is not in the genus of the input")
    if not h_filter([complement]):
        raise PreconditionError("complement fails the period-map filter"
                                " (square-2 or square-6/div-3 vector)")
    a_n = discriminant_form(lattice)
    group = isometry_group(a_n, bound=bound)
    right = hodge.subgroup(a_n, group)
    a_comp = discriminant_form(complement)
    witness = is_isometric(a_comp, a_n, bound=bound)
    if witness is None:
        raise AssertionError("same genus but non-isometric discriminant forms")
    left = set()
    for w in automorphism_group(complement):
        fbar = _disc_action_rows(complement, w)
        left.add(_transport(fbar, a_comp, a_n, witness))
    return _double_coset_count(group, tuple(sorted(left)), right, a_n)


def _disc_action_rows(lattice, iso_rows):
    from .fqm import discriminant_action
    return discriminant_action(lattice, iso_rows)


def _find_c3_split(a_n):
    """Deterministic z of order 3 with A_N = <z> orthogonal <z>^perp.

    Returns (coprime-like module H = <z>^perp with rows, c3 = <z>).
    Raises PreconditionError when A_N has no such orthogonal order-3
    summand (then the embedding is outside this tool's scope).
    """
    from .fqm import _kernel_gens, submodule
    if a_n.order % 3:
        raise PreconditionError("disc(N) must be divisible by 3 for an ambient"
                                " of discriminant 3")
    for z in a_n.elements():
        if a_n.element_order(z) != 3:
            continue
        if a_n.b(z, z).denominator != 3:
            continue
        perp = _kernel_gens(a_n, [z])
        h_mod, rows = submodule(a_n, perp)
        if h_mod.order * 3 == a_n.order:
            c3, _ = submodule(a_n, [z])
            return h_mod, rows, c3
    raise PreconditionError("discriminant form admits no orthogonal order-3"
                            " splitting; general embedding data out of scope")


def count_fm_general(lattice, hodge=HODGE_PM_ID, bound=None):
    """Partner count by direct orbit enumeration of gluing data.

    Works whether or not 3 divides disc(T): for each square-2-free N' in
    the genus of N it enumerates anti-isometric injections gamma of A_T
    into A_{N'} whose graph glues to the ambient discriminant form (order
    3, the form of the rank-2 root lattice), discards data whose square-6
    vectors would acquire ambient divisibility 3 (the period-map
    obstruction, which depends on the glue when 3 divides disc(T)), and
    counts orbits under the image of O(N') and the Hodge action.  Agrees
    with count_fm whenever both apply.
    """
    _require_counting_input(lattice)
    a_n = discriminant_form(lattice)
    h_mod, _, _ = _find_c3_split(a_n)
    a_t = h_mod.rescale(-1)
    ambient = discriminant_form(root_a2())
    group = isometry_group(a_t, bound=bound)
    right = hodge.subgroup(a_t, group)
    reps = [r for r in genus_representatives(lattice) if not short_vectors(r, 2)]
    rows = []
    total = 0
    for rep in reps:
        a_rep = discriminant_form(rep)
        gammas = isometric_embeddings(a_t.rescale(-1), a_rep, bound=bound)
        big, rows_n, rows_t = fqm_direct_sum_with_maps(a_rep, a_t)
        watch = _third_classes(rep, a_rep)

        def embed_graph(gamma):
            gens = []
            for i in range(a_t.ngens):
                g = big.zero()
                for c, r in zip(gamma[i], rows_n):
                    g = big.add(g, big.smul(c, r))
                gens.append(big.add(g, rows_t[i]))
            return gens

        def period_allowed(gamma):
            # v/3 orthogonal to the glue image means div(v) = 3 upstairs
            for third in watch:
                if all(a_rep.b(third, row) == 0 for row in gamma):
                    return False
            return True

        valid = []
        for gamma in gammas:
            gens = embed_graph(gamma)
            if not subgroup_from_gens(big, gens).isotropic:
                continue
            if is_isometric(perp_quotient(big, gens), ambient, bound=bound) is None:
                continue
            if period_allowed(gamma):
                valid.append(gamma)
        left = disc_isometry_image(rep)
        count = 0
        remaining = set(valid)
        while remaining:
            seed = min(remaining)
            orbit = {seed}
            frontier = [seed]
            while frontier:
                g = frontier.pop()
                for sig in left:
                    for psi in right:
                        h = compose_homs(compose_homs(psi, g, a_rep), sig, a_rep)
                        if h not in orbit:
                            orbit.add(h)
                            frontier.append(h)
            remaining -= orbit
            count += 1
        if count:
            rows.append((rep.gram, count))
            total += count
    return FmCountReport(
        input_gram=lattice.gram,
        path="general-embedding-data",
        hodge_mode=hodge.mode,
        transcendental_form=a_t,
        representatives=tuple(rows),
        total=total,
    )


def _third_classes(rep, a_rep):
    """Classes v/3 in A_N' for the square-6, div-divisible-by-3 vectors."""
    from .fqm import discriminant_data
    dd = discriminant_data(rep)
    out = []
    for v in short_vectors(rep, 6):
        if rep.divisibility(v) % 3 == 0:
            third = tuple(Fraction(c, 3) for c in v)
            out.append(a_rep.reduce(dd.exponents_of(third)))
    return out


def self_class_count(report, lattice):
    """The per-representative count attached to the input's own class."""
    own = minkowski_canonical(lattice)
    for gram, count in report.representatives:
        if minkowski_canonical(Lattice(gram)) == own:
            return count
    return None
