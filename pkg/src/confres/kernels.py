"""Hot inner loops for energy evaluation and local moving.

All kernels operate on flat CSR arrays so they can be compiled with numba.
Set CONFRES_DISABLE_NUMBA=1 to run the pure-Python/numpy fallback instead
(same functions, uncompiled).  Both backends are exercised by the test
suite and by benchmarks/bench_kernels.py.
"""

import os

import numpy as np

# Repulsion modes understood by the kernels.
REP_PRODUCT = 0   # w-_ij = rho_i * rho_j / rep_denom (configuration-null, uniform)
REP_EXPLICIT = 1  # w-_ij given as a sparse CSR map


def _energy_components(indptr, indices, weights, labels,
                       rep_mode, rep_strength, rep_denom,
                       rep_indptr, rep_indices, rep_weights):
    """Return (h_a, h_r) for a labelling over CSR attraction edges.

    h_a = -sum of within-cluster attraction, h_r = sum of within-cluster
    repulsion.  Attraction CSR stores both edge directions; pairs are
    counted once via j > i.
    """
    n = labels.shape[0]
    h_a = 0.0
    for i in range(n):
        ci = labels[i]
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if j > i and labels[j] == ci:
                h_a -= weights[e]
    h_r = 0.0
    if rep_mode == REP_PRODUCT:
        k = 0
        for i in range(n):
            if labels[i] > k:
                k = labels[i]
        sums = np.zeros(k + 1)
        sq = 0.0
        for i in range(n):
            rho = rep_strength[i]
            sums[labels[i]] += rho
            sq += rho * rho
        tot = 0.0
        for c in range(k + 1):
            tot += sums[c] * sums[c]
        h_r = (tot - sq) / (2.0 * rep_denom)
    else:
        for i in range(n):
            ci = labels[i]
            for e in range(rep_indptr[i], rep_indptr[i + 1]):
                j = rep_indices[e]
                if j > i and labels[j] == ci:
                    h_r += rep_weights[e]
    return h_a, h_r


def _sweep(indptr, indices, weights,
           rep_mode, rep_strength, rep_denom,
           rep_indptr, rep_indices, rep_weights,
           gamma, labels, constraint, order, eps):
    """One local-moving pass; mutates `labels` in place.

    Visits items in `order`; each item is moved to the cluster (among
    clusters of its attraction/repulsion neighbours with matching
    `constraint`, plus a fresh singleton cluster) that minimises the energy
    delta.  Moves are accepted only when delta < -eps.  Ties go to the
    lowest existing cluster id, then to the new cluster.  Returns the
    number of accepted moves.
    """
    n = labels.shape[0]
    rs = np.zeros(n)               # per-cluster sum of rep_strength
    cnt = np.zeros(n, np.int64)    # per-cluster member count
    for i in range(n):
        c = labels[i]
        rs[c] += rep_strength[i]
        cnt[c] += 1
    empty = np.empty(n, np.int64)  # stack of reusable cluster ids
    top = 0
    for c in range(n):
        if cnt[c] == 0:
            empty[top] = c
            top += 1
    wsum = np.zeros(n)             # attraction from item to each touched cluster
    rsum = np.zeros(n)             # explicit repulsion likewise
    seen = np.zeros(n, np.bool_)
    touched = np.empty(n, np.int64)
    moves = 0
    for oi in range(n):
        i = order[oi]
        ci = labels[i]
        ki = constraint[i]
        ntouch = 0
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if j == i or constraint[j] != ki:
                continue
            cj = labels[j]
            if not seen[cj]:
                seen[cj] = True
                touched[ntouch] = cj
                ntouch += 1
            wsum[cj] += weights[e]
        if rep_mode == REP_EXPLICIT:
            for e in range(rep_indptr[i], rep_indptr[i + 1]):
                j = rep_indices[e]
                if j == i or constraint[j] != ki:
                    continue
                cj = labels[j]
                if not seen[cj]:
                    seen[cj] = True
                    touched[ntouch] = cj
                    ntouch += 1
                rsum[cj] += rep_weights[e]
        rho_i = rep_strength[i]
        # g(c): energy contributed by i's membership in cluster c (i excluded)
        if rep_mode == REP_PRODUCT:
            g_cur = -wsum[ci] + gamma * rho_i * (rs[ci] - rho_i) / rep_denom
        else:
            g_cur = -wsum[ci] + gamma * rsum[ci]
        best_c = -1      # -1 means a fresh singleton cluster
        best_g = 0.0     # g of the fresh cluster
        for t in range(ntouch):
            c = touched[t]
            if rep_mode == REP_PRODUCT:
                scl = rs[c]
                if c == ci:
                    scl -= rho_i
                g = -wsum[c] + gamma * rho_i * scl / rep_denom
            else:
                g = -wsum[c] + gamma * rsum[c]
            if g < best_g or (g == best_g and (best_c == -1 or c < best_c)):
                best_g = g
                best_c = c
        if best_c != ci and best_g - g_cur < -eps:
            if best_c == -1:
                top -= 1
                best_c = empty[top]
            labels[i] = best_c
            rs[ci] -= rho_i
            cnt[ci] -= 1
            if cnt[ci] == 0:
                empty[top] = ci
                top += 1
            rs[best_c] += rho_i
            cnt[best_c] += 1
            moves += 1
        for t in range(ntouch):
            c = touched[t]
            seen[c] = False
            wsum[c] = 0.0
            rsum[c] = 0.0
    return moves


def _move_delta(indptr, indices, weights,
                rep_mode, rep_strength, rep_denom,
                rep_indptr, rep_indices, rep_weights,
                gamma, labels, cluster_rho, item, target):
    """Energy change of moving one item to `target` (degree-local).

    `cluster_rho[c]` holds the per-cluster sum of rep_strength (the one
    strength lookup needed for product-form repulsion).  `target` may be
    an existing cluster id or K (one past the maximum label) to open a
    new cluster.
    """
    ci = labels[item]
    w_cur = 0.0
    w_tgt = 0.0
    for e in range(indptr[item], indptr[item + 1]):
        j = indices[e]
        if j == item:
            continue
        cj = labels[j]
        if cj == ci:
            w_cur += weights[e]
        if cj == target:
            w_tgt += weights[e]
    rho = rep_strength[item]
    if rep_mode == REP_PRODUCT:
        rs_cur = cluster_rho[ci] - rho
        rs_tgt = 0.0
        if target < cluster_rho.shape[0]:
            rs_tgt = cluster_rho[target]
            if target == ci:
                rs_tgt -= rho
        r_cur = rho * rs_cur / rep_denom
        r_tgt = rho * rs_tgt / rep_denom
    else:
        r_cur = 0.0
        r_tgt = 0.0
        for e in range(rep_indptr[item], rep_indptr[item + 1]):
            j = rep_indices[e]
            if j == item:
                continue
            cj = labels[j]
            if cj == ci:
                r_cur += rep_weights[e]
            if cj == target:
                r_tgt += rep_weights[e]
    g_cur = -w_cur + gamma * r_cur
    g_tgt = -w_tgt + gamma * r_tgt
    if target == ci:
        return 0.0
    return g_tgt - g_cur


def _use_numba() -> bool:
    flag = os.environ.get("CONFRES_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes")


# Uncompiled references kept for the fallback path and for benchmarking.
energy_components_py = _energy_components
sweep_py = _sweep
move_delta_py = _move_delta

NUMBA_ENABLED = False
if _use_numba():
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:
        _energy_components = njit(cache=True)(_energy_components)
        _sweep = njit(cache=True)(_sweep)
        _move_delta = njit(cache=True)(_move_delta)
        NUMBA_ENABLED = True

energy_components = _energy_components
sweep = _sweep
move_delta = _move_delta
