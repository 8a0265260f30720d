"""Independent brute-force oracle for small instances.

Enumerates truth x every oracle's report with exact rational arithmetic,
applies majority vote with uniform tie splitting and the power reward
factor. Values printed here are frozen into the C++ tests.
"""
from fractions import Fraction
from itertools import product


def payoff(conf, stakes_alloc, focal, d, K):
    """stakes_alloc: per user list of per-oracle stakes (mirrored reports)."""
    N = len(stakes_alloc)
    total = 0.0
    err = 0.0
    for truth in range(K):
        for reports in product(range(K), repeat=N):
            p = 1.0 / K
            for r in reports:
                p *= conf[truth][r]
            if p == 0:
                continue
            counts = [0] * K
            for n, r in enumerate(reports):
                counts[r] += len(stakes_alloc[n])
            top = max(counts)
            winners = [k for k in range(K) if counts[k] == top]
            for w in winners:
                share = p / len(winners)
                factors = []
                for n, r in enumerate(reports):
                    for s in stakes_alloc[n]:
                        factors.append((n, s ** d if r == w else 0.0))
                den = sum(f for _, f in factors)
                mine = sum(f for n, f in factors if n == focal)
                total += share * mine / den
                if w != truth:
                    err += share
    return total, err


def sym(p):
    return [[p, 1 - p], [1 - p, p]]


if __name__ == "__main__":
    conf = sym(0.8)
    v, e = payoff(conf, [[1], [1], [1]], 0, 1.0, 2)
    print("N3K2 p0.8 single stake1 d1 payoff_u1 = %.17g err = %.17g" % (v, e))
    # d_opt sweep: stakes (2,1,1), eps 0.05
    stakes = [2, 1, 1]
    i = 0
    while True:
        d = 1.0 + i * 0.05
        ok = True
        for n, s in enumerate(stakes):
            base = [[x] for x in stakes]
            single, _ = payoff(conf, base, n, d, 2)
            for c in range(2, s + 1):
                alloc = [list(a) for a in base]
                alloc[n] = [s - c + 1] + [1] * (c - 1)
                mirror, _ = payoff(conf, alloc, n, d, 2)
                if mirror > single + 1e-12:
                    ok = False
        if ok:
            print("N3K2 stakes(2,1,1) eps0.05 d_opt = %.17g (i=%d)" % (d, i))
            break
        i += 1
    for c, d in [(1, 1.0), (2, 1.0), (1, 2.0), (2, 2.0)]:
        base = [[2], [1], [1]]
        if c == 2:
            base[0] = [1, 1]
        v, e = payoff(conf, base, 0, d, 2)
        print("stakes(2,1,1) c=%d d=%g payoff=%.17g err=%.17g" % (c, d, v, e))
    # Both sides of the inequality for user 1, c = 2 around the answer.
    for d in (1.55, 1.6):
        s, _ = payoff(conf, [[2], [1], [1]], 0, d, 2)
        m, _ = payoff(conf, [[1, 1], [1], [1]], 0, d, 2)
        print("stakes(2,1,1) d=%g single=%.17g mirror=%.17g" % (d, s, m))
