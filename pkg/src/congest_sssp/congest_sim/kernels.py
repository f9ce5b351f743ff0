"""Compiled round loops for the broadcast-style protocols.

Each kernel simulates one protocol on the CSR arrays of a topology, rounds
numbered from 1. Rounds in which nobody sends are skipped in the loop but
still charged, since every protocol here has a round budget fixed in advance.
With ``record`` = 1 every message is logged as (round, channel); the
kernels that also run on virtual graphs accept ``record`` = 2 and then log
one (round, node) pair per broadcast instead.
"""
import heapq

import numpy as np
from numba import njit

INF = np.int64(1) << np.int64(62)


@njit(cache=True)
def _grow(a):
    b = np.empty(max(64, 2 * a.size), np.int64)
    b[:a.size] = a
    return b


@njit(cache=True)
def _log(ev_t, ev_c, ne, t, c):
    if ne == ev_t.size:
        ev_t = _grow(ev_t)
        ev_c = _grow(ev_c)
    ev_t[ne] = t
    ev_c[ne] = c
    return ev_t, ev_c, ne + 1


@njit(cache=True)
def bounded_distance(indptr, indices, w, s, K, record):
    """Time-keyed flooding: a node whose value is x broadcasts in round x+1.

    Needs positive weights so that every value is known before its slot.
    """
    n = indptr.size - 1
    dist = np.full(n, INF, np.int64)
    msgs = np.zeros(indices.size, np.int64)
    bc = np.zeros(n, np.int64)
    ev_t = np.empty(0, np.int64)
    ev_c = np.empty(0, np.int64)
    ne = 0
    if K < 0:
        return dist, 0, msgs, bc, ev_t[:0], ev_c[:0]
    dist[s] = 0
    heap = [(np.int64(0), np.int64(s))]
    while heap:
        x, u = heapq.heappop(heap)
        if x != dist[u]:
            continue
        bc[u] += 1
        if record == 2:
            ev_t, ev_c, ne = _log(ev_t, ev_c, ne, x + 1, u)
        for c in range(indptr[u], indptr[u + 1]):
            v = indices[c]
            msgs[c] += 1
            if record == 1:
                ev_t, ev_c, ne = _log(ev_t, ev_c, ne, x + 1, c)
            cand = x + w[c]
            if cand <= K and cand < dist[v]:
                dist[v] = cand
                heapq.heappush(heap, (cand, v))
    return dist, K + 1, msgs, bc, ev_t[:ne], ev_c[:ne]


@njit(cache=True)
def short_range(indptr, indices, w, s, h, ell, q, record):
    """Granular BFS followed by capped Bellman-Ford.

    BFS phase: scaled weights W = q*w (zero edges become 1); a node with
    scaled value i <= ell*q + h broadcasts in round i+1. Receivers keep both
    the scaled value and the rounded candidate floor(i/q) + w.
    B-F phase: h rounds; a node re-broadcasts only when its value dropped
    below the last value it conveyed, at most floor(h/q) times.
    """
    n = indptr.size - 1
    limit = ell * q + h
    D = np.full(n, INF, np.int64)
    d = np.full(n, INF, np.int64)
    conveyed = np.full(n, INF, np.int64)
    msgs = np.zeros(indices.size, np.int64)
    bc = np.zeros(n, np.int64)
    ev_t = np.empty(0, np.int64)
    ev_c = np.empty(0, np.int64)
    ne = 0
    D[s] = 0
    d[s] = 0
    heap = [(np.int64(0), np.int64(s))]
    while heap:
        i, u = heapq.heappop(heap)
        if i != D[u]:
            continue
        if i > limit:
            break
        bc[u] += 1
        base = i // q
        conveyed[u] = base
        if record == 2:
            ev_t, ev_c, ne = _log(ev_t, ev_c, ne, i + 1, u)
        for c in range(indptr[u], indptr[u + 1]):
            v = indices[c]
            msgs[c] += 1
            if record == 1:
                ev_t, ev_c, ne = _log(ev_t, ev_c, ne, i + 1, c)
            wc = w[c]
            step = q * wc if wc > 0 else 1
            if i + step < D[v]:
                D[v] = i + step
                heapq.heappush(heap, (i + step, v))
            if base + wc < d[v]:
                d[v] = base + wc
    bfs_rounds = limit + 1
    budget = h // q
    used = np.zeros(n, np.int64)
    send = np.empty(n, np.int64)
    vals = np.empty(n, np.int64)
    flag = np.zeros(n, np.bool_)
    cand = np.empty(n, np.int64)
    nc = 0
    for u in range(n):
        cand[nc] = u
        nc += 1
    for r in range(1, h + 1):
        ns = 0
        for j in range(nc):
            u = cand[j]
            flag[u] = False
            if d[u] < conveyed[u] and used[u] < budget:
                send[ns] = u
                vals[ns] = d[u]
                ns += 1
        if ns == 0:
            break
        nc = 0
        for j in range(ns):
            u = send[j]
            x = vals[j]
            used[u] += 1
            bc[u] += 1
            conveyed[u] = x
            if record == 2:
                ev_t, ev_c, ne = _log(ev_t, ev_c, ne, bfs_rounds + r, u)
            for c in range(indptr[u], indptr[u + 1]):
                v = indices[c]
                msgs[c] += 1
                if record == 1:
                    ev_t, ev_c, ne = _log(ev_t, ev_c, ne, bfs_rounds + r, c)
                if x + w[c] < d[v]:
                    d[v] = x + w[c]
                    if not flag[v]:
                        flag[v] = True
                        cand[nc] = v
                        nc += 1
    return d, bfs_rounds + h, msgs, bc, ev_t[:ne], ev_c[:ne]


@njit(cache=True)
def extend(indptr, indices, w, d_in, h, lo, hi, record):
    """h rounds of window-restricted relaxation.

    In round 1 every node with a finite value sends d(u) along the channels
    where d(u) + w lands in [lo, hi); afterwards only nodes whose value
    dropped in the previous round send again.
    """
    n = indptr.size - 1
    d = d_in.copy()
    msgs = np.zeros(indices.size, np.int64)
    bc = np.zeros(n, np.int64)
    ev_t = np.empty(0, np.int64)
    ev_c = np.empty(0, np.int64)
    ne = 0
    send = np.empty(n, np.int64)
    vals = np.empty(n, np.int64)
    flag = np.zeros(n, np.bool_)
    cand = np.empty(n, np.int64)
    nc = 0
    for u in range(n):
        if d[u] < INF:
            cand[nc] = u
            nc += 1
    for r in range(1, h + 1):
        ns = 0
        for j in range(nc):
            u = cand[j]
            flag[u] = False
            send[ns] = u
            vals[ns] = d[u]
            ns += 1
        if ns == 0:
            break
        nc = 0
        for j in range(ns):
            u = send[j]
            x = vals[j]
            sent = False
            for c in range(indptr[u], indptr[u + 1]):
                y = x + w[c]
                if y < lo or y >= hi:
                    continue
                sent = True
                msgs[c] += 1
                if record:
                    ev_t, ev_c, ne = _log(ev_t, ev_c, ne, r, c)
                v = indices[c]
                if y < d[v]:
                    d[v] = y
                    if not flag[v]:
                        flag[v] = True
                        cand[nc] = v
                        nc += 1
            if sent:
                bc[u] += 1
    return d, h, msgs, bc, ev_t[:ne], ev_c[:ne]


@njit(cache=True)
def bellman_ford(indptr, indices, w, s, rounds, record):
    """Synchronous Bellman-Ford: a node broadcasts whenever its value changed."""
    n = indptr.size - 1
    d = np.full(n, INF, np.int64)
    d[s] = 0
    msgs = np.zeros(indices.size, np.int64)
    bc = np.zeros(n, np.int64)
    ev_t = np.empty(0, np.int64)
    ev_c = np.empty(0, np.int64)
    ne = 0
    send = np.empty(n, np.int64)
    vals = np.empty(n, np.int64)
    flag = np.zeros(n, np.bool_)
    cand = np.empty(n, np.int64)
    cand[0] = s
    nc = 1
    for r in range(1, rounds + 1):
        ns = 0
        for j in range(nc):
            u = cand[j]
            flag[u] = False
            send[ns] = u
            vals[ns] = d[u]
            ns += 1
        if ns == 0:
            break
        nc = 0
        for j in range(ns):
            u = send[j]
            x = vals[j]
            bc[u] += 1
            for c in range(indptr[u], indptr[u + 1]):
                msgs[c] += 1
                if record:
                    ev_t, ev_c, ne = _log(ev_t, ev_c, ne, r, c)
                v = indices[c]
                if x + w[c] < d[v]:
                    d[v] = x + w[c]
                    if not flag[v]:
                        flag[v] = True
                        cand[nc] = v
                        nc += 1
    return d, rounds, msgs, bc, ev_t[:ne], ev_c[:ne]


@njit(cache=True)
def upcast(parent, root, counts, record):
    """FIFO convergecast of ``counts[u]`` items per node towards ``root``.

    Every non-root node forwards one queued item to its parent per round.
    Returns the rounds at which items reach the root (sorted) and, when
    recording, the (round, sender) pairs of every hop.
    """
    n = parent.size
    q = counts.copy()
    total = 0
    for u in range(n):
        if u != root:
            total += q[u]
    arrivals = np.empty(total, np.int64)
    ev_t = np.empty(0, np.int64)
    ev_u = np.empty(0, np.int64)
    ne = 0
    na = 0
    active = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    mark = np.zeros(n, np.bool_)
    nact = 0
    for u in range(n):
        if u != root and q[u] > 0:
            active[nact] = u
            nact += 1
            mark[u] = True
    r = 0
    while na < total:
        r += 1
        for j in range(nact):
            q[active[j]] -= 1
        nn = 0
        for j in range(nact):
            u = active[j]
            p = parent[u]
            if record:
                ev_t, ev_u, ne = _log(ev_t, ev_u, ne, r, u)
            if p == root:
                arrivals[na] = r
                na += 1
            else:
                q[p] += 1
                if not mark[p]:
                    mark[p] = True
                    nxt[nn] = p
                    nn += 1
        for j in range(nact):
            u = active[j]
            if q[u] > 0:
                nxt[nn] = u
                nn += 1
            else:
                mark[u] = False
        for j in range(nn):
            active[j] = nxt[j]
        nact = nn
    return arrivals, ev_t[:ne], ev_u[:ne]


@njit(cache=True)
def phase_loads(phase, chan, horizon, n_ch):
    """Per-phase maximum channel load and each event's FIFO slot in its (phase, channel).

    Counting sort by phase, then one scratch counter per channel that is
    reset after each phase.
    """
    ne = phase.size
    start = np.zeros(horizon + 2, np.int64)
    for j in range(ne):
        start[phase[j] + 1] += 1
    for p in range(horizon + 1):
        start[p + 1] += start[p]
    fill = start.copy()
    order = np.empty(ne, np.int64)
    for j in range(ne):
        p = phase[j]
        order[fill[p]] = j
        fill[p] += 1
    length = np.zeros(horizon + 1, np.int64)
    pos = np.empty(ne, np.int64)
    cnt = np.zeros(max(n_ch, 1), np.int64)
    for p in range(horizon + 1):
        best = 0
        for a in range(start[p], start[p + 1]):
            j = order[a]
            c = chan[j]
            pos[j] = cnt[c]
            cnt[c] += 1
            if cnt[c] > best:
                best = cnt[c]
        for a in range(start[p], start[p + 1]):
            cnt[chan[order[a]]] = 0
        length[p] = best
    return length, pos


def expand_broadcasts(indptr: np.ndarray, ev_t: np.ndarray, ev_u: np.ndarray):
    """Turn (round, node) broadcast events into (round, channel) message events.

    Cheaper than logging every message inside the kernels.
    """
    deg = indptr[ev_u + 1] - indptr[ev_u]
    total = int(deg.sum())
    t = np.repeat(ev_t, deg)
    offs = np.repeat(indptr[ev_u] - (np.cumsum(deg) - deg), deg)
    return t, offs + np.arange(total, dtype=np.int64)
