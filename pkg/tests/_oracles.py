"""Independent reference implementations used by the tests."""
import itertools
import math


def brute_matching(x, y, p):
    """Optimal matching cost by enumerating every partial injection x -> y.

    ``x`` and ``y`` are lists of finite (birth, death) pairs; unmatched points
    go to the diagonal at L-infinity cost (death - birth) / 2.
    """
    diag = lambda pt: (pt[1] - pt[0]) / 2.0
    best = math.inf
    n, m = len(x), len(y)
    for k in range(min(n, m) + 1):
        for xs in itertools.combinations(range(n), k):
            for ys in itertools.permutations(range(m), k):
                costs = [max(abs(x[i][0] - y[j][0]), abs(x[i][1] - y[j][1])) for i, j in zip(xs, ys)]
                costs += [diag(x[i]) for i in range(n) if i not in xs]
                costs += [diag(y[j]) for j in range(m) if j not in ys]
                if not costs:
                    val = 0.0
                elif math.isinf(p):
                    val = max(costs)
                else:
                    val = sum(c ** p for c in costs) ** (1 / p)
                best = min(best, val)
    return best
