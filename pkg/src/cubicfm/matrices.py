"""Exact integer and rational matrix algebra.

Matrices are immutable tuples of row tuples; integer matrices hold Python
ints (arbitrary precision), rational ones hold ``fractions.Fraction``.
Vectors are plain tuples and act on the left, so ``x @ M`` is spelled
``row_times(x, M)`` and lattices of row vectors are "row spaces".

There is deliberately no floating point in this module (or anywhere in the
package): discriminants, glue orders and signatures must be bit-exact.
"""

from fractions import Fraction
from itertools import combinations
from math import gcd


def mat(rows):
    """Normalise an iterable of iterables into an immutable integer matrix."""
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if m and any(len(row) != len(m[0]) for row in m):
        raise ValueError("ragged matrix")
    return m


def dims(m):
    return (len(m), len(m[0]) if m else 0)


def identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zero_matrix(r, c):
    return tuple((0,) * c for _ in range(r))


def transpose(m):
    return tuple(zip(*m)) if m else ()


def is_symmetric(m):
    r, c = dims(m)
    return r == c and all(m[i][j] == m[j][i] for i in range(r) for j in range(i))


def mul(a, b):
    """Matrix product; works for int and Fraction entries alike."""
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def row_times(v, m):
    """Row vector times matrix."""
    return tuple(sum(x * m[i][j] for i, x in enumerate(v)) for j in range(len(m[0])))


def scale(m, s):
    return tuple(tuple(x * s for x in row) for row in m)


def block_diag(a, b):
    ra, ca = dims(a)
    rb, cb = dims(b)
    top = tuple(row + (0,) * cb for row in a)
    bot = tuple((0,) * ca + row for row in b)
    return top + bot


def vstack(a, b):
    return tuple(a) + tuple(b)


def determinant(m):
    """Exact signed determinant via fraction-free Bareiss elimination."""
    n, c = dims(m)
    if n != c:
        raise ValueError("determinant of non-square matrix")
    if n == 0:
        return 1
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rational_inverse(m):
    """Exact inverse with Fraction entries; raises on a singular matrix."""
    n, c = dims(m)
    if n != c:
        raise ValueError("inverse of non-square matrix")
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[k], a[piv] = a[piv], a[k]
        f = a[k][k]
        a[k] = [x / f for x in a[k]]
        for i in range(n):
            if i != k and a[i][k]:
                g = a[i][k]
                a[i] = [x - g * y for x, y in zip(a[i], a[k])]
    return tuple(tuple(row[n:]) for row in a)


def integer_matrix(m):
    """Cast a rational matrix with integral entries back to ints."""
    out = []
    for row in m:
        new = []
        for x in row:
            f = Fraction(x)
            if f.denominator != 1:
                raise ValueError("matrix entry %s is not an integer" % (x,))
            new.append(f.numerator)
        out.append(tuple(new))
    return tuple(out)


def smith_normal_form(m):
    """Smith normal form with transforms: returns (s, u, v) with u*m*v = s.

    s is diagonal with nonnegative entries d1 | d2 | ...; u and v are
    unimodular.  Pivoting picks the smallest nonzero |entry|, ties broken
    by lowest row then column index, so the output is reproducible.
    """
    r, c = dims(m)
    a = [list(row) for row in m]
    u = [list(row) for row in identity(r)]
    v = [list(row) for row in identity(c)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + f * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, f):
        for row in a:
            row[dst] += f * row[src]
        for row in v:
            row[dst] += f * row[src]

    t = 0
    while True:
        pivot = None
        best = None
        for i in range(t, r):
            for j in range(t, c):
                x = abs(a[i][j])
                if x and (best is None or x < best):
                    best = x
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            dirty = False
            for i in range(t + 1, r):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(i, t, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, c):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(j, t, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        # enforce the divisibility chain d_t | remaining block
        culprit = None
        for i in range(t + 1, r):
            for j in range(t + 1, c):
                if a[i][j] % a[t][t]:
                    culprit = i
                    break
            if culprit is not None:
                break
        if culprit is not None:
            add_row(t, culprit, 1)
            continue
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return (tuple(map(tuple, a)), tuple(map(tuple, u)), tuple(map(tuple, v)))


def snf_diagonal(m):
    s, _, _ = smith_normal_form(m)
    r, c = dims(m)
    return tuple(s[i][i] for i in range(min(r, c)))


def minors_gcd(m, k):
    """gcd of all k x k minors; independent oracle for the SNF invariants."""
    r, c = dims(m)
    g = 0
    for rows in combinations(range(r), k):
        for cols in combinations(range(c), k):
            sub = tuple(tuple(m[i][j] for j in cols) for i in rows)
            g = gcd(g, determinant(sub))
            if g == 1:
                return 1
    return g


def rational_rank(m):
    if not m or not m[0]:
        return 0
    return sum(1 for d in snf_diagonal(m) if d)


def integer_kernel(m):
    """Basis (tuple of rows) of the left kernel {x in Z^r : x*m = 0}."""
    r, c = dims(m)
    s, u, _ = smith_normal_form(m)
    rows = []
    for i in range(r):
        if i >= c or s[i][i] == 0:
            rows.append(u[i])
    return tuple(rows)


def solve_left(m, target):
    """One integer solution x of x*m = target, or None."""
    r, c = dims(m)
    s, u, v = smith_normal_form(m)
    rhs = row_times(tuple(target), v)
    y = [0] * r
    for j in range(c):
        d = s[j][j] if j < r else 0
        if d == 0:
            if rhs[j] != 0:
                return None
        else:
            if rhs[j] % d:
                return None
            y[j] = rhs[j] // d
    return row_times(tuple(y), u)


def row_hnf(m):
    """Row-style Hermite normal form basis of the row lattice of m.

    Returns only the nonzero rows; pivots are positive and entries above a
    pivot are reduced into [0, pivot), so the result is canonical.
    """
    rows = [list(r) for r in m if any(r)]
    c = len(m[0]) if m else 0
    done = []
    col = 0
    while rows and col < c:
        live = [r for r in rows if r[col]]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            r0 = live[0]
            for r in live[1:]:
                q = r[col] // r0[col]
                for j in range(c):
                    r[j] -= q * r0[j]
            live = [r for r in rows if r[col]]
        if live:
            piv = live[0]
            if piv[col] < 0:
                piv[:] = [-x for x in piv]
            rows.remove(piv)
            done.append(piv)
        col += 1
    # reduce entries above each pivot
    for i in reversed(range(len(done))):
        pcol = next(j for j in range(c) if done[i][j])
        for k in range(i):
            q = done[k][pcol] // done[i][pcol]
            if q:
                for j in range(c):
                    done[k][j] -= q * done[i][j]
    return tuple(tuple(r) for r in done)


def _balanced_mod(x, m):
    r = x % m
    return r - m if 2 * r > m else r


def diagonalize_mod(mat_in, modulus):
    """Diagonalise an integer matrix modulo m: returns (diag, u, v).

    u (rows) and v (cols) are exact integer unimodular transforms with
    u*mat*v = diag(d_1..d_k) modulo m entrywise (no divisibility chain).
    All working entries stay balanced mod m, so large moduli cannot cause
    coefficient explosion.  Only for problems that are insensitive to
    changing the matrix mod m: kernels, images and quotients of groups
    whose exponent divides m.
    """
    r = len(mat_in)
    c = len(mat_in[0]) if r else 0
    m = int(modulus)
    a = [[_balanced_mod(int(x), m) for x in row] for row in mat_in]
    u = [list(row) for row in identity(r)]
    v = [list(row) for row in identity(c)]

    def add_row(dst, src, f):
        a[dst] = [_balanced_mod(x + f * y, m) for x, y in zip(a[dst], a[src])]
        u[dst] = [x + f * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, f):
        for row in a:
            row[dst] = _balanced_mod(row[dst] + f * row[src], m)
        for row in v:
            row[dst] += f * row[src]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    k = min(r, c)
    for t in range(k):
        while True:
            best = None
            pivot = None
            for i in range(t, r):
                for j in range(t, c):
                    x = abs(a[i][j])
                    if x and (best is None or x < best):
                        best, pivot = x, (i, j)
            if pivot is None:
                break
            swap_rows(t, pivot[0])
            swap_cols(t, pivot[1])
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
                u[t] = [-x for x in u[t]]
            d = a[t][t]
            clean = True
            for i in range(t + 1, r):
                if a[i][t]:
                    q = (a[i][t] + d // 2) // d
                    add_row(i, t, -q)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, c):
                if a[t][j]:
                    q = (a[t][j] + d // 2) // d
                    add_col(j, t, -q)
                    if a[t][j]:
                        clean = False
            if clean:
                break
    diag = [a[i][i] % m for i in range(k)]
    return tuple(diag), tuple(map(tuple, u)), tuple(map(tuple, v))


def kernel_mod(mat_in, modulus):
    """Basis rows of {x in Z^r : x * mat = 0 mod m}; contains m*Z^r."""
    r = len(mat_in)
    c = len(mat_in[0]) if r else 0
    m = int(modulus)
    diag, u, _ = diagonalize_mod(mat_in, m)
    rows = []
    for j in range(r):
        d = gcd(diag[j], m) if j < len(diag) else m
        coeff = m // d
        rows.append(tuple(coeff * x for x in u[j]))
    return tuple(rows)


def image_order_mod(mat_in, modulus):
    """Order of the image of Z^r -> (Z/m)^c given by x -> x*mat."""
    r = len(mat_in)
    m = int(modulus)
    diag, _, _ = diagonalize_mod(mat_in, m)
    total = 1
    for j in range(r):
        d = gcd(diag[j], m) if j < len(diag) else m
        total *= m // d
    return total


def solve_mod(mat_in, target, modulus):
    """One x with x * mat = target mod m, or None."""
    r = len(mat_in)
    c = len(mat_in[0]) if r else 0
    m = int(modulus)
    diag, u, v = diagonalize_mod(mat_in, m)
    rhs = row_times(tuple(int(x) for x in target), v)
    y = [0] * r
    for j in range(c):
        d = diag[j] % m if j < len(diag) else 0
        cj = rhs[j] % m
        g = gcd(d, m)
        if cj % g:
            return None
        if j < len(diag) and g != m:
            y[j] = ((cj // g) * pow(d // g, -1, m // g)) % (m // g)
    return row_times(tuple(y), u)


def symmetric_signature(m):
    """(positives, negatives) of a symmetric nondegenerate matrix.

    Exact congruence diagonalisation over Q; when every remaining diagonal
    entry vanishes, an off-diagonal hyperbolic 2x2 block is split off and
    contributes (1, 1).  Raises on degenerate input.
    """
    n, c = dims(m)
    if n != c or not is_symmetric(m):
        raise ValueError("signature needs a symmetric square matrix")
    a = {(i, j): Fraction(m[i][j]) for i in range(n) for j in range(n)}
    active = list(range(n))
    pos = neg = 0
    while active:
        k = next((i for i in active if a[(i, i)] != 0), None)
        if k is not None:
            piv = a[(k, k)]
            if piv > 0:
                pos += 1
            else:
                neg += 1
            active.remove(k)
            for i in active:
                if a[(i, k)]:
                    f = a[(i, k)] / piv
                    for j in active:
                        a[(i, j)] -= f * a[(k, j)]
            for i in active:
                a[(i, k)] = a[(k, i)] = Fraction(0)
        else:
            pair = next(((i, j) for i in active for j in active
                         if i < j and a[(i, j)] != 0), None)
            if pair is None:
                raise ValueError("degenerate symmetric matrix")
            i, j = pair
            b = a[(i, j)]
            pos += 1
            neg += 1
            active.remove(i)
            active.remove(j)
            for l in active:
                fi, fj = a[(l, i)], a[(l, j)]
                if fi or fj:
                    for t in active:
                        a[(l, t)] -= (fi * a[(j, t)] + fj * a[(i, t)]) / b
            for l in active:
                a[(l, i)] = a[(i, l)] = a[(l, j)] = a[(j, l)] = Fraction(0)
    return (pos, neg)
