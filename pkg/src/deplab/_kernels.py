"""Hot loops: maximum spanning arborescence and non-projectivity degrees.

Every kernel exists twice, a numba loop version (``*_nb``) and a vectorized
numpy version (``*_np``). Both break ties identically, so they return the same
heads. The public names dispatch on :data:`deplab._accel.USE_NUMBA`.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

NEG_INF = -np.inf


# -- Chu-Liu-Edmonds -----------------------------------------------------------
#
# scores[h, d] is the weight of arc h -> d over nodes 0..n; node 0 is the root.
# Contractions reuse the smallest cycle member as the new node id. For every
# current arc we remember the original arc it stands for (orig_h, orig_d).
# Unwinding walks the contractions backwards: the single recorded arc that
# enters a contracted cycle decides which cycle arc is dropped.


@njit(cache=True)
def _find_cycle_nb(par, active, n_nodes):
    color = np.zeros(n_nodes, dtype=np.int64)  # 0 new, 1 on path, 2 done
    color[0] = 2
    out = np.empty(0, dtype=np.int64)
    for s in range(1, n_nodes):
        if not active[s] or color[s] != 0:
            continue
        path = np.empty(n_nodes, dtype=np.int64)
        plen = 0
        v = s
        while color[v] == 0:
            color[v] = 1
            path[plen] = v
            plen += 1
            v = par[v]
        if color[v] == 1:
            start = 0
            while path[start] != v:
                start += 1
            out = np.sort(path[start:plen].copy())
        for i in range(plen):
            color[path[i]] = 2
        if out.shape[0] > 0:
            return out
    return out


@njit(cache=True)
def chu_liu_edmonds_nb(scores):
    n_nodes = scores.shape[0]
    S = scores.copy()
    for i in range(n_nodes):
        S[i, i] = NEG_INF
        S[i, 0] = NEG_INF
    orig_h = np.empty((n_nodes, n_nodes), dtype=np.int64)
    orig_d = np.empty((n_nodes, n_nodes), dtype=np.int64)
    for i in range(n_nodes):
        for j in range(n_nodes):
            orig_h[i, j] = i
            orig_d[i, j] = j
    active = np.ones(n_nodes, dtype=np.bool_)
    rep = np.arange(n_nodes)

    max_k = n_nodes
    k_members = np.zeros((max_k, n_nodes), dtype=np.bool_)
    k_rep = np.zeros((max_k, n_nodes), dtype=np.int64)
    k_h0 = np.zeros((max_k, n_nodes), dtype=np.int64)
    k_d0 = np.zeros((max_k, n_nodes), dtype=np.int64)
    n_k = 0
    par = np.zeros(n_nodes, dtype=np.int64)

    while True:
        for d in range(1, n_nodes):
            if not active[d]:
                continue
            best = NEG_INF
            arg = -1
            for h in range(n_nodes):
                if active[h] and h != d and (arg == -1 or S[h, d] > best):
                    best = S[h, d]
                    arg = h
            par[d] = arg
        cyc = _find_cycle_nb(par, active, n_nodes)
        if cyc.shape[0] == 0:
            break

        c = cyc[0]
        in_cyc = np.zeros(n_nodes, dtype=np.bool_)
        for v in cyc:
            in_cyc[v] = True
            k_members[n_k, v] = True
            k_h0[n_k, v] = orig_h[par[v], v]
            k_d0[n_k, v] = orig_d[par[v], v]
        k_rep[n_k, :] = rep
        n_k += 1

        new_in = np.full(n_nodes, NEG_INF)
        new_in_v = np.full(n_nodes, -1, dtype=np.int64)
        new_out = np.full(n_nodes, NEG_INF)
        new_out_v = np.full(n_nodes, -1, dtype=np.int64)
        for u in range(n_nodes):
            if not active[u] or in_cyc[u]:
                continue
            for v in cyc:
                val = S[u, v] - S[par[v], v]
                if new_in_v[u] == -1 or val > new_in[u]:
                    new_in[u] = val
                    new_in_v[u] = v
                if new_out_v[u] == -1 or S[v, u] > new_out[u]:
                    new_out[u] = S[v, u]
                    new_out_v[u] = v
        for u in range(n_nodes):
            if not active[u] or in_cyc[u]:
                continue
            v = new_in_v[u]
            oh = orig_h[u, v]
            od = orig_d[u, v]
            S[u, c] = new_in[u]
            orig_h[u, c] = oh
            orig_d[u, c] = od
            v = new_out_v[u]
            oh = orig_h[v, u]
            od = orig_d[v, u]
            S[c, u] = new_out[u]
            orig_h[c, u] = oh
            orig_d[c, u] = od
        S[c, 0] = NEG_INF
        S[c, c] = NEG_INF
        for v in cyc:
            if v != c:
                active[v] = False
                for u in range(n_nodes):
                    S[v, u] = NEG_INF
                    S[u, v] = NEG_INF
        for i in range(n_nodes):
            if in_cyc[rep[i]]:
                rep[i] = c

    heads = np.full(n_nodes, -1, dtype=np.int64)
    for d in range(1, n_nodes):
        if active[d]:
            heads[orig_d[par[d], d]] = orig_h[par[d], d]
    for k in range(n_k - 1, -1, -1):
        entered = -1
        for d0 in range(1, n_nodes):
            if heads[d0] != -1 and k_members[k, k_rep[k, d0]] and not k_members[k, k_rep[k, heads[d0]]]:
                entered = k_rep[k, d0]
                break
        for w in range(n_nodes):
            if k_members[k, w] and w != entered:
                heads[k_d0[k, w]] = k_h0[k, w]
    return heads


def _find_cycle_np(par, active):
    n_nodes = len(par)
    color = np.zeros(n_nodes, dtype=np.int8)
    color[0] = 2
    for s in np.flatnonzero(active):
        if s == 0 or color[s]:
            continue
        path = []
        v = s
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = par[v]
        if color[v] == 1:
            return np.sort(np.array(path[path.index(v):], dtype=np.int64))
        color[path] = 2
    return None


def chu_liu_edmonds_np(scores):
    S = np.array(scores, dtype=np.float64, copy=True)
    n_nodes = S.shape[0]
    np.fill_diagonal(S, NEG_INF)
    S[:, 0] = NEG_INF
    orig_h, orig_d = np.indices((n_nodes, n_nodes))
    active = np.ones(n_nodes, dtype=bool)
    rep = np.arange(n_nodes)
    history = []  # (members mask, rep snapshot, cycle arc h0, cycle arc d0)

    while True:
        # inactive rows/cols are -inf, so argmax over the column is over active heads;
        # first maximal index wins ties, same as the loop version
        par = np.argmax(S, axis=0)
        par[0] = 0
        par[~active] = 0
        cyc = _find_cycle_np(par, active)
        if cyc is None:
            break
        c = cyc[0]
        members = np.zeros(n_nodes, dtype=bool)
        members[cyc] = True
        history.append((members, rep.copy(), orig_h[par, np.arange(n_nodes)].copy(),
                        orig_d[par, np.arange(n_nodes)].copy()))

        outside = active & ~members
        cyc_score = S[par[cyc], cyc]
        inc = S[:, cyc] - cyc_score[None, :]          # (nodes, |C|)
        inc_arg = cyc[np.argmax(inc, axis=1)]
        inc_val = inc[np.arange(n_nodes), np.argmax(inc, axis=1)]
        out = S[cyc, :]
        out_arg = cyc[np.argmax(out, axis=0)]
        out_val = out[np.argmax(out, axis=0), np.arange(n_nodes)]
        u = np.flatnonzero(outside)
        oh_in, od_in = orig_h[u, inc_arg[u]], orig_d[u, inc_arg[u]]
        oh_out, od_out = orig_h[out_arg[u], u], orig_d[out_arg[u], u]
        S[u, c] = inc_val[u]
        orig_h[u, c], orig_d[u, c] = oh_in, od_in
        S[c, u] = out_val[u]
        orig_h[c, u], orig_d[c, u] = oh_out, od_out
        S[c, 0] = NEG_INF
        S[c, c] = NEG_INF
        gone = cyc[cyc != c]
        active[gone] = False
        S[gone, :] = NEG_INF
        S[:, gone] = NEG_INF
        rep[members[rep]] = c

    heads = np.full(n_nodes, -1, dtype=np.int64)
    d = np.flatnonzero(active)
    d = d[d != 0]
    heads[orig_d[par[d], d]] = orig_h[par[d], d]
    for members, rep_k, h0, d0 in reversed(history):
        attached = np.flatnonzero(heads != -1)
        inside = members[rep_k[attached]] & ~members[rep_k[heads[attached]]]
        entered = rep_k[attached[np.argmax(inside)]] if inside.any() else -1
        keep = members.copy()
        if entered >= 0:
            keep[entered] = False
        w = np.flatnonzero(keep)
        heads[d0[w]] = h0[w]
    return heads


# -- non-projectivity degree ---------------------------------------------------


@njit(cache=True)
def arc_degrees_nb(heads):
    """Degree of the arc entering each node; ``heads[0]`` is ignored."""
    n_nodes = heads.shape[0]
    deg = np.zeros(n_nodes, dtype=np.int64)
    for u in range(1, n_nodes):
        w = heads[u]
        lo = min(w, u)
        hi = max(w, u)
        cnt = 0
        for k in range(lo + 1, hi):
            # k is a descendant of w iff w lies on k's head chain
            v = k
            desc = False
            steps = 0
            while v > 0 and steps < n_nodes:
                if v == w:
                    desc = True
                    break
                v = heads[v]
                steps += 1
            if v == w:
                desc = True
            if not desc:
                hk = heads[k]
                if hk <= lo or hk >= hi:
                    cnt += 1
        deg[u] = cnt
    return deg


def ancestor_matrix(heads):
    """``A[k, w]`` is True iff ``w`` is ``k`` or one of its ancestors (including 0)."""
    n_nodes = len(heads)
    h = np.asarray(heads, dtype=np.int64).copy()
    h[0] = 0
    A = np.zeros((n_nodes, n_nodes), dtype=bool)
    cur = np.arange(n_nodes)
    A[np.arange(n_nodes), cur] = True
    for _ in range(n_nodes):
        cur = h[cur]
        A[np.arange(n_nodes), cur] = True
    return A


def arc_degrees_np(heads):
    heads = np.asarray(heads, dtype=np.int64)
    n_nodes = len(heads)
    A = ancestor_matrix(heads)
    u = np.arange(n_nodes)
    w = heads.copy()
    w[0] = 0
    lo = np.minimum(w, u)[:, None]
    hi = np.maximum(w, u)[:, None]
    k = np.arange(n_nodes)[None, :]
    hk = heads.copy()
    hk[0] = 0
    between = (k > lo) & (k < hi)
    nondesc = ~A[:, w].T                      # [u, k]: k not below w = heads[u]
    outside = (hk[None, :] <= lo) | (hk[None, :] >= hi)
    deg = (between & nondesc & outside).sum(axis=1).astype(np.int64)
    deg[0] = 0
    return deg


if USE_NUMBA:
    chu_liu_edmonds = chu_liu_edmonds_nb
    arc_degrees = arc_degrees_nb
else:
    chu_liu_edmonds = chu_liu_edmonds_np
    arc_degrees = arc_degrees_np
