"""Compiled inner loops for move proposals, fiber walks and the Gibbs sweep.

Chain state is a tuple of flat arrays so it can cross the numba boundary:

    x       uint8[D]   packed dyad vector (mutated in place)
    du, dv  int64[D]   dyad endpoints
    didx    int64[n,n] dyad id of {a, b}; -1 on the diagonal
    dcls    int64[D]   block-pair class of each dyad
    corder, cpos, cstart, csplit
            dyads grouped by class; inside class c the slice
            corder[cstart[c]:csplit[c]] holds present dyads and
            corder[csplit[c]:cstart[c+1]] absent ones; cpos inverts corder
    gorder, gpos, gsplit
            the same split over all dyads (gsplit[0] = edge count)

Randomness comes from numba's own generator, seeded once per call from the
caller's numpy Generator.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MODEL_CODES = {"er": 0, "add": 1, "beta": 2}


def build_state(dyads: np.ndarray, z: np.ndarray, k: int):
    """Assemble the chain-state arrays for a packed graph and assignment."""
    x = np.array(dyads, dtype=np.uint8)
    n = z.shape[0]
    du, dv = np.triu_indices(n, k=1)
    du = du.astype(np.int64)
    dv = dv.astype(np.int64)
    didx = np.full((n, n), -1, dtype=np.int64)
    ids = np.arange(du.shape[0], dtype=np.int64)
    didx[du, dv] = ids
    didx[dv, du] = ids
    a = np.minimum(z[du], z[dv])
    b = np.maximum(z[du], z[dv])
    dcls = (a * k - a * (a - 1) // 2 + (b - a)).astype(np.int64)
    nc = k * (k + 1) // 2

    # present dyads first within each class
    corder = np.lexsort((1 - x, dcls)).astype(np.int64)
    cpos = np.empty_like(corder)
    cpos[corder] = np.arange(corder.shape[0])
    counts = np.bincount(dcls, minlength=nc)
    cstart = np.zeros(nc + 1, dtype=np.int64)
    cstart[1:] = np.cumsum(counts)
    present = np.bincount(dcls, weights=x, minlength=nc).astype(np.int64)
    csplit = cstart[:-1] + present

    gorder = np.argsort(1 - x, kind="stable").astype(np.int64)
    gpos = np.empty_like(gorder)
    gpos[gorder] = np.arange(gorder.shape[0])
    gsplit = np.array([int(x.sum())], dtype=np.int64)
    return x, du, dv, didx, dcls, corder, cpos, cstart, csplit, gorder, gpos, gsplit


@njit(cache=True)
def _swap(order, pos, i, j):
    a = order[i]
    b = order[j]
    order[i] = b
    order[j] = a
    pos[b] = i
    pos[a] = j


@njit(cache=True)
def _set(d, val, x, dcls, corder, cpos, csplit, gorder, gpos, gsplit):
    if x[d] == val:
        return
    c = dcls[d]
    if val == 1:
        _swap(corder, cpos, cpos[d], csplit[c])
        csplit[c] += 1
        _swap(gorder, gpos, gpos[d], gsplit[0])
        gsplit[0] += 1
    else:
        csplit[c] -= 1
        _swap(corder, cpos, cpos[d], csplit[c])
        gsplit[0] -= 1
        _swap(gorder, gpos, gpos[d], gsplit[0])
    x[d] = val


@njit(cache=True)
def _propose_linear(corder, cstart, csplit, rem, add):
    nc = csplit.shape[0]
    c = np.random.randint(0, nc)
    lo = cstart[c]
    sp = csplit[c]
    hi = cstart[c + 1]
    if sp == lo or sp == hi:
        return 0
    rem[0] = corder[lo + np.random.randint(0, sp - lo)]
    add[0] = corder[sp + np.random.randint(0, hi - sp)]
    return 1


@njit(cache=True)
def _oriented_edge(du, dv, gorder, ne):
    e = gorder[np.random.randint(0, ne)]
    if np.random.random() < 0.5:
        return e, du[e], dv[e]
    return e, dv[e], du[e]


@njit(cache=True)
def _propose_quadratic(x, du, dv, didx, dcls, gorder, gsplit, labels, rem, add):
    ne = gsplit[0]
    if ne < 2:
        return 0
    e1, v0, v1 = _oriented_edge(du, dv, gorder, ne)
    e2, v2, v3 = _oriented_edge(du, dv, gorder, ne)
    if v0 == v2 or v0 == v3 or v1 == v2 or v1 == v3:
        return 0
    a1 = didx[v1, v2]
    a2 = didx[v3, v0]
    if x[a1] == 1 or x[a2] == 1:
        return 0
    if labels:
        r1 = dcls[e1]
        r2 = dcls[e2]
        s1 = dcls[a1]
        s2 = dcls[a2]
        if not ((r1 == s1 and r2 == s2) or (r1 == s2 and r2 == s1)):
            return 0
    rem[0] = e1
    rem[1] = e2
    add[0] = a1
    add[1] = a2
    return 2


@njit(cache=True)
def _sorted3(a, b, c):
    if a > b:
        a, b = b, a
    if b > c:
        b, c = c, b
    if a > b:
        a, b = b, a
    return a, b, c


@njit(cache=True)
def _propose_cubic(x, du, dv, didx, dcls, gorder, gsplit, rem, add):
    ne = gsplit[0]
    if ne < 3:
        return 0
    e1, v0, v1 = _oriented_edge(du, dv, gorder, ne)
    e2, v2, v3 = _oriented_edge(du, dv, gorder, ne)
    e3, v4, v5 = _oriented_edge(du, dv, gorder, ne)
    if e1 == e2 or e2 == e3 or e1 == e3:
        return 0
    if v1 == v2 or v3 == v4 or v5 == v0:
        return 0
    a1 = didx[v1, v2]
    a2 = didx[v3, v4]
    a3 = didx[v5, v0]
    if a1 == a2 or a2 == a3 or a1 == a3:
        return 0
    if x[a1] == 1 or x[a2] == 1 or x[a3] == 1:
        return 0
    r = _sorted3(dcls[e1], dcls[e2], dcls[e3])
    s = _sorted3(dcls[a1], dcls[a2], dcls[a3])
    if r[0] != s[0] or r[1] != s[1] or r[2] != s[2]:
        return 0
    rem[0] = e1
    rem[1] = e2
    rem[2] = e3
    add[0] = a1
    add[1] = a2
    add[2] = a3
    return 3


@njit(cache=True)
def _propose(model, x, du, dv, didx, dcls, corder, cstart, csplit, gorder, gsplit, rem, add):
    if model == 0:
        return _propose_linear(corder, cstart, csplit, rem, add)
    if model == 1:
        if np.random.random() < 0.5:
            return _propose_linear(corder, cstart, csplit, rem, add)
        return _propose_quadratic(x, du, dv, didx, dcls, gorder, gsplit, False, rem, add)
    if np.random.random() < 0.5:
        return _propose_quadratic(x, du, dv, didx, dcls, gorder, gsplit, True, rem, add)
    return _propose_cubic(x, du, dv, didx, dcls, gorder, gsplit, rem, add)


@njit(cache=True)
def propose_many(model, count, seed, x, du, dv, didx, dcls, corder, cpos, cstart, csplit,
                 gorder, gpos, gsplit):
    """Draw ``count`` proposals from the same state without applying them.

    Returns (sizes[count], rem[count, 3], add[count, 3]); size 0 means no move.
    """
    np.random.seed(seed)
    sizes = np.zeros(count, dtype=np.int64)
    rems = np.full((count, 3), -1, dtype=np.int64)
    adds = np.full((count, 3), -1, dtype=np.int64)
    rem = np.empty(3, dtype=np.int64)
    add = np.empty(3, dtype=np.int64)
    for t in range(count):
        r = _propose(model, x, du, dv, didx, dcls, corder, cstart, csplit, gorder, gsplit, rem, add)
        sizes[t] = r
        for i in range(r):
            rems[t, i] = rem[i]
            adds[t, i] = add[i]
    return sizes, rems, adds


@njit(cache=True)
def _recount(x, du, dv, dcls, z, er, deg):
    er[:] = 0
    deg[:] = 0
    for d in range(x.shape[0]):
        if x[d] == 1:
            er[dcls[d]] += 1
            deg[du[d]] += 1
            deg[dv[d]] += 1


@njit(cache=True)
def walk_kernel(model, num_graphs, burn_in, thin, seed, check_every, audit,
                x, du, dv, didx, dcls, corder, cpos, cstart, csplit, gorder, gpos, gsplit, z):
    """Lazy random walk on the fiber through ``x``.

    Emits the state after ``burn_in`` steps and then every ``thin`` steps.
    Block-pair counts and degrees are tracked incrementally and compared with
    a full recount every ``check_every`` steps and at the end.

    Returns (states, accepted, steps, checks, drift, audit_step, audit_rem, audit_add).
    """
    np.random.seed(seed)
    nd = x.shape[0]
    n = z.shape[0]
    nc = csplit.shape[0]
    total = burn_in + (num_graphs - 1) * thin
    states = np.empty((num_graphs, nd), dtype=np.uint8)

    er = np.zeros(nc, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    _recount(x, du, dv, dcls, z, er, deg)
    ref_er = er.copy()
    ref_deg = deg.copy()
    chk_er = np.zeros(nc, dtype=np.int64)
    chk_deg = np.zeros(n, dtype=np.int64)

    cap = total if audit else 0
    audit_step = np.empty(cap, dtype=np.int64)
    audit_rem = np.full((cap, 3), -1, dtype=np.int64)
    audit_add = np.full((cap, 3), -1, dtype=np.int64)
    logged = 0

    rem = np.empty(3, dtype=np.int64)
    add = np.empty(3, dtype=np.int64)
    accepted = 0
    checks = 0
    drift = 0
    emitted = 0
    next_emit = burn_in
    step = 0
    while True:
        if step == next_emit:
            states[emitted, :] = x
            emitted += 1
            next_emit += thin
            if emitted == num_graphs:
                break
        r = _propose(model, x, du, dv, didx, dcls, corder, cstart, csplit, gorder, gsplit, rem, add)
        if r > 0:
            accepted += 1
            for i in range(r):
                d = rem[i]
                _set(d, 0, x, dcls, corder, cpos, csplit, gorder, gpos, gsplit)
                er[dcls[d]] -= 1
                deg[du[d]] -= 1
                deg[dv[d]] -= 1
            for i in range(r):
                d = add[i]
                _set(d, 1, x, dcls, corder, cpos, csplit, gorder, gpos, gsplit)
                er[dcls[d]] += 1
                deg[du[d]] += 1
                deg[dv[d]] += 1
            if audit:
                audit_step[logged] = step
                for i in range(r):
                    audit_rem[logged, i] = rem[i]
                    audit_add[logged, i] = add[i]
                logged += 1
        step += 1
        if check_every > 0 and (step % check_every == 0 or step == total):
            _recount(x, du, dv, dcls, z, chk_er, chk_deg)
            checks += 1
            bad = False
            for c in range(nc):
                if chk_er[c] != er[c]:
                    bad = True
            for u in range(n):
                if chk_deg[u] != deg[u]:
                    bad = True
            if bad:
                drift += 1
    return (states, accepted, step, checks, drift, ref_er, ref_deg, er, deg,
            audit_step[:logged], audit_rem[:logged], audit_add[:logged])


@njit(cache=True)
def _lbeta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@njit(cache=True)
def gibbs_kernel(adj, z, k, sweeps, burn_in, seed, alpha0):
    """Collapsed Gibbs sampler for the ER-SBM block assignment.

    Edge probabilities carry Beta(1, 1) priors and block proportions a
    symmetric Dirichlet(alpha0) prior, both integrated out. One draw is kept
    per full sweep after ``burn_in`` sweeps.
    """
    np.random.seed(seed)
    n = z.shape[0]
    sizes = np.zeros(k, dtype=np.int64)
    for u in range(n):
        sizes[z[u]] += 1
    # e[a, b]: edges between blocks a and b (diagonal counts each within-block edge once)
    e = np.zeros((k, k), dtype=np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            if adj[u, v]:
                a = z[u]
                b = z[v]
                e[a, b] += 1
                if a != b:
                    e[b, a] += 1
    draws = np.empty((sweeps, n), dtype=np.int64)
    m = np.zeros(k, dtype=np.int64)
    logp = np.zeros(k)
    for s in range(burn_in + sweeps):
        for u in range(n):
            old = z[u]
            m[:] = 0
            for v in range(n):
                if v != u and adj[u, v]:
                    m[z[v]] += 1
            # take u out
            sizes[old] -= 1
            for b in range(k):
                if b == old:
                    e[old, old] -= m[old]
                else:
                    e[old, b] -= m[b]
                    e[b, old] -= m[b]
            for c in range(k):
                lp = math.log(sizes[c] + alpha0)
                for b in range(k):
                    if b == c:
                        n0 = sizes[c] * (sizes[c] - 1) // 2
                        n1 = (sizes[c] + 1) * sizes[c] // 2
                        e0 = e[c, c]
                        e1 = e0 + m[c]
                    else:
                        n0 = sizes[c] * sizes[b]
                        n1 = (sizes[c] + 1) * sizes[b]
                        e0 = e[c, b]
                        e1 = e0 + m[b]
                    lp += _lbeta(e1 + 1.0, n1 - e1 + 1.0) - _lbeta(e0 + 1.0, n0 - e0 + 1.0)
                logp[c] = lp
            top = logp.max()
            total = 0.0
            for c in range(k):
                logp[c] = math.exp(logp[c] - top)
                total += logp[c]
            r = np.random.random() * total
            new = k - 1
            acc = 0.0
            for c in range(k):
                acc += logp[c]
                if r < acc:
                    new = c
                    break
            z[u] = new
            sizes[new] += 1
            for b in range(k):
                if b == new:
                    e[new, new] += m[new]
                else:
                    e[new, b] += m[b]
                    e[b, new] += m[b]
        if s >= burn_in:
            draws[s - burn_in, :] = z
    return draws
