"""Reference implementations used only by the test-suite.

Each one follows a different route from the code it checks: quadrature for
the t distribution, direct loops from the definitions for DBCV and Mean Shift.
"""

from __future__ import annotations

import math

import mpmath

mpmath.mp.dps = 40


def t_cdf_quad(t: float, df: float) -> float:
    """Student t CDF by high-precision quadrature of the density."""
    nu = mpmath.mpf(df)
    t = mpmath.mpf(t)
    logc = mpmath.loggamma((nu + 1) / 2) - mpmath.loggamma(nu / 2) - mpmath.log(nu * mpmath.pi) / 2

    def pdf(u):
        return mpmath.exp(logc - (nu + 1) / 2 * mpmath.log1p(u * u / nu))

    a = abs(t)
    if a == 0:
        return 0.5
    if a < 2:
        half = mpmath.quad(pdf, [0, a])
        upper = mpmath.mpf(0.5) - half
    else:
        upper = mpmath.quad(pdf, [a, 2 * a, 8 * a, mpmath.inf])
    return float(1 - upper if t > 0 else upper)


def mean_shift_bruteforce(values, bandwidth, tol=1e-9, max_iter=10_000):
    """Flat-kernel mode seeking with explicit loops; returns groups of indices, highest first."""
    xs = [float(v) for v in values]
    span = max(xs) - min(xs)
    ends = []
    for x in xs:
        m = x
        for _ in range(max_iter):
            win = [v for v in xs if abs(v - m) <= bandwidth]
            new = sum(win) / len(win)
            if abs(new - m) <= tol * span:
                m = new
                break
            m = new
        ends.append(m)
    # converged positions within half a bandwidth of each other form one mode
    order = sorted(set(ends), reverse=True)
    groups, cur = [], [order[0]]
    for v in order[1:]:
        if cur[-1] - v < bandwidth / 2:
            cur.append(v)
        else:
            groups.append(cur)
            cur = [v]
    groups.append(cur)
    modes = [sum(g) / len(g) for g in groups]
    members = [[] for _ in modes]
    for i, x in enumerate(xs):
        best = 0
        for k in range(1, len(modes)):
            if abs(x - modes[k]) < abs(x - modes[best]):
                best = k
        members[best].append(i)
    return [m for m in members if m]


def dbcv_bruteforce(points, labels, floor=1e-12):
    """DBCV straight from its definition, pure Python, O(n^2) loops and Prim's MST."""
    pts = [list(map(float, p)) for p in points]
    d = len(pts[0])
    n_total = len(pts)

    def dist(i, j):
        return max(math.sqrt(sum((a - b) ** 2 for a, b in zip(pts[i], pts[j]))), floor)

    clusters = {}
    for i, lab in enumerate(labels):
        if lab != -1:
            clusters.setdefault(lab, []).append(i)
    core = {}
    for members in clusters.values():
        for i in members:
            s = sum((1.0 / dist(i, j)) ** d for j in members if j != i)
            core[i] = (s / (len(members) - 1)) ** (-1.0 / d)

    def mreach(i, j):
        return max(core[i], core[j], dist(i, j))

    sparseness = {}
    for lab, members in clusters.items():
        in_tree = {members[0]}
        best = {j: mreach(members[0], j) for j in members[1:]}
        longest = 0.0
        while best:
            j = min(best, key=best.get)
            longest = max(longest, best.pop(j))
            in_tree.add(j)
            for k in best:
                best[k] = min(best[k], mreach(j, k))
        sparseness[lab] = longest
    score = 0.0
    per = {}
    for lab, members in clusters.items():
        others = [j for l2, m2 in clusters.items() if l2 != lab for j in m2]
        if not others:
            v = 0.0
        else:
            sep = min(mreach(i, j) for i in members for j in others)
            v = (sep - sparseness[lab]) / max(sep, sparseness[lab])
        per[lab] = v
        score += len(members) / n_total * v
    return score, per
