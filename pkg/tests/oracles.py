"""Independent reference implementations kept deliberately naive.

These run before and beside the package code: plain-python breadth-first
reachability for connectivity, and high-precision curve evaluation through
mpmath for the fragility formulas. They share no code with the package.
"""

from collections import deque

import mpmath as mp

mp.mp.dps = 40


def bfs_powered(components, edges, plants, conducting):
    """Set of component ids reachable from a conducting plant.

    ``conducting`` maps id -> bool; blocked nodes do not relay. Adjacency is
    rebuilt from the raw edge list on every call.
    """
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = set()
    queue = deque(p for p in plants if conducting.get(p, False))
    seen.update(queue)
    while queue:
        u = queue.popleft()
        for v in adj.get(u, []):
            if v not in seen and conducting.get(v, False):
                seen.add(v)
                queue.append(v)
    return seen


def mp_tower(x):
    return min(mp.mpf("2e-7") * mp.e ** (mp.mpf("0.0834") * x), mp.mpf(1))


def mp_pole(x):
    return min(mp.mpf("1e-4") * mp.e ** (mp.mpf("0.0421") * x), mp.mpf(1))


def mp_conductor(x):
    if x == 0:
        return mp.mpf(0)
    return min(mp.mpf("8e-12") * mp.mpf(x) ** mp.mpf("5.1731"), mp.mpf(1))


def mp_line(x, w_critical, w_collapse):
    x, wc, wo = mp.mpf(x), mp.mpf(w_critical), mp.mpf(w_collapse)
    if x < wc:
        return mp.mpf("0.01")
    if x > wo:
        return mp.mpf(1)
    return mp.mpf("0.01") + (1 - mp.mpf("0.01")) * (x - wc) / (wo - wc)


def mp_lognormal_cdf(x, median, sigma):
    if x <= 0:
        return mp.mpf(0)
    return mp.ncdf((mp.log(x) - mp.log(median)) / mp.mpf(sigma))
