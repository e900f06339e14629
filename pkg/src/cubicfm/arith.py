"""Small exact number-theory helpers (trial division scale)."""

from math import gcd


def prime_factors(n):
    """Sorted primes dividing |n|."""
    n = abs(int(n))
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def factorization(n):
    """dict prime -> exponent for |n| >= 1."""
    n = abs(int(n))
    out = {}
    for p in prime_factors(n):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out[p] = e
    return out


def valuation(n, p):
    n = abs(int(n))
    if n == 0:
        raise ValueError("valuation of zero")
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def jacobi(a, n):
    """Jacobi symbol (a|n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs odd positive n")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def least_nonresidue(p):
    """Smallest positive quadratic non-residue mod an odd prime p."""
    for r in range(2, p):
        if jacobi(r, p) == -1:
            return r
    raise ValueError("no non-residue found; %s is not an odd prime" % p)


def is_square(n):
    from math import isqrt
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n


def crt_idempotent(p_power, cofactor):
    """e with e = 1 mod p_power, e = 0 mod cofactor (coprime moduli)."""
    if gcd(p_power, cofactor) != 1:
        raise ValueError("moduli must be coprime")
    if cofactor == 1:
        return 1
    return (cofactor * pow(cofactor, -1, p_power)) % (p_power * cofactor)
