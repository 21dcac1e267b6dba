"""Independent oracle for quintic instanton numbers.

Builds the hypergeometric periods directly from (5n)!/(n!)^5 and harmonic
numbers, forms the mirror map and the Yukawa coupling in exact rationals, and
prints n_d for d = 1..D, one per line.

    python3 quintic_instantons.py 12 > ../tests/fixtures/quintic_instantons.txt
"""

import sys
from fractions import Fraction
from math import factorial


def mul(a, b, n):
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def inv(a, n):
    out = [Fraction(0)] * n
    out[0] = 1 / a[0]
    for k in range(1, n):
        s = sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        out[k] = -s / a[0]
    return out


def exp0(a, n):
    # exp of a series with a[0] = 0, via f' = a' f
    out = [Fraction(0)] * n
    out[0] = Fraction(1)
    for k in range(1, n):
        out[k] = sum(j * a[j] * out[k - j] for j in range(1, k + 1)) / k
    return out


def theta(a):
    return [k * x for k, x in enumerate(a)]


def compose(f, g, n):
    # f(g(x)) with g[0] = 0
    out = [Fraction(0)] * n
    power = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for k in range(n):
        if k < len(f):
            for i in range(n):
                out[i] += f[k] * power[i]
        power = mul(power, g, n)
    return out


def revert(f, n):
    # g with f(g(q)) = q, f = z + O(z^2)
    g = [Fraction(0), Fraction(1)] + [Fraction(0)] * (n - 2)
    for k in range(2, n):
        g[k] -= compose(f, g, n)[k]
    return g


def harmonic(m):
    return sum(Fraction(1, j) for j in range(1, m + 1))


def main():
    d_max = int(sys.argv[1]) if len(sys.argv) > 1 else 10
    n = d_max + 1
    a = [Fraction(factorial(5 * k), factorial(k) ** 5) for k in range(n)]
    w0 = a
    w1 = [a[k] * 5 * (harmonic(5 * k) - harmonic(k)) for k in range(n)]
    ratio = mul(w1, inv(w0, n), n)
    # q = z exp(ratio)
    e = exp0(ratio, n)
    q_of_z = [Fraction(0)] + e[: n - 1]
    z_of_q = revert(q_of_z, n)
    # θ_z t = 1 + θ ratio
    dt = theta(ratio)
    dt[0] += 1
    disc = [Fraction(1), Fraction(-3125)] + [Fraction(0)] * (n - 2)
    denom = mul(mul(disc, mul(w0, w0, n), n), mul(dt, mul(dt, dt, n), n), n)
    k_z = [5 * x for x in inv(denom, n)]
    k_q = compose(k_z, z_of_q, n)
    assert k_q[0] == 5
    ns = {}
    for m in range(1, n):
        c = k_q[m] - sum(ns[d] * d**3 for d in range(1, m) if m % d == 0)
        nm = c / m**3
        assert nm.denominator == 1, (m, nm)
        ns[m] = nm.numerator
        print(ns[m])


if __name__ == "__main__":
    main()
