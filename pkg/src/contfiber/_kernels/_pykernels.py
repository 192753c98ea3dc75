"""Pure-Python reference kernels.

These are the slow twins of ``_ckernels.pyx``. The compiled versions must
match them output for output, so all traversal orders are pinned down: CSR
``indices`` arrive sorted ascending within each row, queues are FIFO, and
edge lists are walked in reverse insertion order (the head-linked layout both
implementations share).
"""

from __future__ import annotations

import numpy as np

__all__ = ["label_components", "reach_mask", "sides_linked", "vertex_cut"]


def label_components(n: int, indptr, indices):
    """Label connected components of an undirected CSR graph.

    Components are numbered 0, 1, 2, ... by their smallest node id.
    Returns an int32 array of length ``n``.
    """
    labels = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    cur = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = cur
        queue[0] = start
        head, tail = 0, 1
        while head < tail:
            u = int(queue[head])
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                v = int(indices[k])
                if labels[v] < 0:
                    labels[v] = cur
                    queue[tail] = v
                    tail += 1
        cur += 1
    return labels


def reach_mask(n: int, indptr, indices, blocked, sources):
    """Breadth-first reachability from ``sources``, never entering ``blocked``.

    Blocked sources are skipped. Returns a uint8 mask over the ``n`` nodes.
    """
    mask = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    tail = 0
    for s in sources:
        s = int(s)
        if not blocked[s] and not mask[s]:
            mask[s] = 1
            queue[tail] = s
            tail += 1
    head = 0
    while head < tail:
        u = int(queue[head])
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = int(indices[k])
            if not mask[v] and not blocked[v]:
                mask[v] = 1
                queue[tail] = v
                tail += 1
    return mask


def sides_linked(n: int, indptr, indices, order, s_m: int, factor: int,
                 s_star: int, side_of, dst_label: int, widx, d2w,
                 rho2: int, seeds, dst_seeds) -> int:
    """Does one camp reach the other when a blocking ball is in force?

    The graph is the level-m view of a cell set: node v sits at flat id
    ``order[v]`` on an ``s_m`` grid, and its camp is read off ``side_of``
    (a coarse ``s_star`` grid of component labels) through the ancestor
    cell, ``factor`` being the fine-per-coarse ratio. A node is blocked
    when it appears in ``widx`` (sorted node ids) with squared distance
    ``d2w`` at most ``rho2``; nodes outside the window are never blocked.

    The flood starts from ``seeds`` (all nodes of one camp, expected to
    be the smaller), skipping blocked ones, and stops at the first
    unblocked node whose camp is ``dst_label``. Returns 1 on contact, 0
    when the flood exhausts while the other camp still has an unblocked
    node in ``dst_seeds``, 2 when every seed is blocked, and 3 when the
    other camp is entirely blocked. Early exit keeps the usual cost at
    the size of the pocket the ball pinches off, not the graph.
    """

    def blocked(v: int) -> bool:
        p = int(np.searchsorted(widx, v))
        return bool(p < len(widx) and widx[p] == v and d2w[p] <= rho2)

    def camp(v: int) -> int:
        f = int(order[v])
        return int(side_of[(f // s_m // factor) * s_star
                           + (f % s_m) // factor])

    mask = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    tail = 0
    for s in seeds:
        s = int(s)
        if mask[s] or blocked(s):
            continue
        mask[s] = 1
        queue[tail] = s
        tail += 1
    if tail == 0:
        return 2
    head = 0
    while head < tail:
        u = int(queue[head])
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = int(indices[k])
            if mask[v] or blocked(v):
                continue
            if camp(v) == dst_label:
                return 1
            mask[v] = 1
            queue[tail] = v
            tail += 1
    for s in dst_seeds:
        if not blocked(int(s)):
            return 0
    return 3


def vertex_cut(n: int, indptr, indices, removable, src: int, dst: int, limit: int):
    """Minimum vertex cut between two nodes via BFS max-flow.

    Every node v is split into an entry copy 2v and an exit copy 2v+1. The
    internal arc carries capacity 1 when ``removable[v]`` and is effectively
    infinite otherwise; adjacency arcs are infinite. Augmentation runs along
    shortest residual paths until no path remains or the flow exceeds
    ``limit``.

    Returns ``(value, cut, paths, hit_limit)`` where

    * ``value`` is the flow found, capped at ``limit + 1``,
    * ``cut`` is a sorted int64 array of removable nodes whose internal arc
      crosses the source-side residual cut (empty when ``hit_limit``),
    * ``paths`` is a list of ``value`` node-id paths from ``src`` to ``dst``,
      internally disjoint wherever capacities are 1,
    * ``hit_limit`` reports that the search stopped on the flow bound.
    """
    nn = 2 * n
    m = len(indices) + n
    eto = np.empty(2 * m, dtype=np.int64)
    ecap = np.empty(2 * m, dtype=np.int64)
    enext = np.empty(2 * m, dtype=np.int64)
    ehead = np.full(nn, -1, dtype=np.int64)
    inf = limit + 16

    ecnt = 0
    for v in range(n):
        c = 1 if removable[v] else inf
        eto[ecnt] = 2 * v + 1
        ecap[ecnt] = c
        enext[ecnt] = ehead[2 * v]
        ehead[2 * v] = ecnt
        ecnt += 1
        eto[ecnt] = 2 * v
        ecap[ecnt] = 0
        enext[ecnt] = ehead[2 * v + 1]
        ehead[2 * v + 1] = ecnt
        ecnt += 1
    for u in range(n):
        for k in range(indptr[u], indptr[u + 1]):
            v = int(indices[k])
            eto[ecnt] = 2 * v
            ecap[ecnt] = inf
            enext[ecnt] = ehead[2 * u + 1]
            ehead[2 * u + 1] = ecnt
            ecnt += 1
            eto[ecnt] = 2 * u + 1
            ecap[ecnt] = 0
            enext[ecnt] = ehead[2 * v]
            ehead[2 * v] = ecnt
            ecnt += 1
    ocap = ecap.copy()

    s = 2 * src + 1
    t = 2 * dst
    flow = 0
    hit = False
    pe = np.empty(nn, dtype=np.int64)
    visited = np.empty(nn, dtype=np.uint8)
    queue = np.empty(nn, dtype=np.int64)

    while True:
        if flow > limit:
            hit = True
            break
        visited[:] = 0
        visited[s] = 1
        queue[0] = s
        headq, tailq = 0, 1
        found = False
        while headq < tailq and not found:
            u = int(queue[headq])
            headq += 1
            e = int(ehead[u])
            while e >= 0:
                if ecap[e] > 0:
                    v = int(eto[e])
                    if not visited[v]:
                        visited[v] = 1
                        pe[v] = e
                        if v == t:
                            found = True
                            break
                        queue[tailq] = v
                        tailq += 1
                e = int(enext[e])
        if not found:
            break
        b = -1
        v = t
        while v != s:
            e = int(pe[v])
            if b < 0 or ecap[e] < b:
                b = int(ecap[e])
            v = int(eto[e ^ 1])
        v = t
        while v != s:
            e = int(pe[v])
            ecap[e] -= b
            ecap[e ^ 1] += b
            v = int(eto[e ^ 1])
        flow += b

    value = flow if flow <= limit else limit + 1

    if hit:
        cut = np.empty(0, dtype=np.int64)
    else:
        reach = np.zeros(nn, dtype=np.uint8)
        reach[s] = 1
        queue[0] = s
        headq, tailq = 0, 1
        while headq < tailq:
            u = int(queue[headq])
            headq += 1
            e = int(ehead[u])
            while e >= 0:
                if ecap[e] > 0:
                    v = int(eto[e])
                    if not reach[v]:
                        reach[v] = 1
                        queue[tailq] = v
                        tailq += 1
                e = int(enext[e])
        cut_list = [
            v
            for v in range(n)
            if removable[v] and reach[2 * v] and not reach[2 * v + 1]
        ]
        cut = np.asarray(cut_list, dtype=np.int64)

    # Flow decomposition. Walk residual flow units from the source; entering
    # an entry copy records the original node. Conservation keeps each walk
    # finite and ending at t.
    flows = ocap - ecap
    paths = []
    for _ in range(value):
        path = [src]
        u = s
        while u != t:
            e = int(ehead[u])
            while e >= 0:
                if flows[e] > 0:
                    break
                e = int(enext[e])
            flows[e] -= 1
            u = int(eto[e])
            if u % 2 == 0:
                path.append(u // 2)
        paths.append(path)

    return value, cut, paths, hit
