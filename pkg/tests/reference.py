"""Independent reference computations for the tests (no package code involved).

Min-plus matrix powers give hop-bounded distances; Floyd-Warshall gives
all-pairs distances. Both are dense and only meant for small graphs.
"""
import numpy as np

BIG = np.iinfo(np.int64).max // 4


def weight_matrix(n, tails, heads, weights):
    W = np.full((n, n), BIG, np.int64)
    np.fill_diagonal(W, 0)
    for u, v, w in zip(np.asarray(tails).tolist(), np.asarray(heads).tolist(),
                       np.asarray(weights).tolist()):
        W[u, v] = min(W[u, v], w)
    return W


def instance_matrix(inst):
    topo = inst.topology
    return weight_matrix(inst.n, topo.tails, topo.indices, inst.weights)


def floyd_warshall(W):
    D = W.copy()
    for k in range(D.shape[0]):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return np.minimum(D, BIG)


def hop_limited(W, s, h):
    """Row s of the h-th min-plus power (paths with at most h edges)."""
    n = W.shape[0]
    row = np.full(n, BIG, np.int64)
    row[s] = 0
    for _ in range(h):
        row = np.minimum(row, (row[:, None] + W).min(axis=0))
        row = np.minimum(row, BIG)
    return row


def fewest_hops_within(W, s, t, limit):
    """Smallest hop count of a path s->t of total weight at most ``limit``."""
    n = W.shape[0]
    prev = None
    for h in range(n):
        row = hop_limited(W, s, h)
        if row[t] <= limit:
            return h
        if prev is not None and np.array_equal(prev, row):
            break
        prev = row
    return None


def to_inf(a, inf):
    a = np.asarray(a, np.int64).copy()
    a[a >= BIG] = inf
    return a
