import itertools

import numpy as np
import pytest

from contfiber._kernels import _pykernels

try:
    from contfiber._kernels import _ckernels
except ImportError:
    _ckernels = None

IMPLS = [_pykernels] if _ckernels is None else [_pykernels, _ckernels]


def csr_from_edges(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    indptr = np.zeros(n + 1, dtype=np.int64)
    idx = []
    for u in range(n):
        nbrs = sorted(set(adj[u]))
        indptr[u + 1] = indptr[u] + len(nbrs)
        idx.extend(nbrs)
    return indptr, np.asarray(idx, dtype=np.int32)


def path_graph(n):
    return csr_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def grid_graph(w, h):
    edges = []
    for y in range(h):
        for x in range(w):
            u = y * w + x
            if x + 1 < w:
                edges.append((u, u + 1))
            if y + 1 < h:
                edges.append((u, u + w))
    return csr_from_edges(w * h, edges)


def naive_components(n, indptr, indices):
    labels = [-1] * n
    cur = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        stack = [s]
        labels[s] = cur
        while stack:
            u = stack.pop()
            for k in range(indptr[u], indptr[u + 1]):
                v = int(indices[k])
                if labels[v] < 0:
                    labels[v] = cur
                    stack.append(v)
        cur += 1
    return labels


def naive_min_vertex_cut(n, indptr, indices, removable, src, dst):
    """Exhaustive smallest removable separator; None if adjacent."""
    nbrs = set(indices[indptr[src]:indptr[src + 1]])
    if dst in nbrs:
        return None
    cand = [v for v in range(n) if removable[v] and v not in (src, dst)]
    for k in range(len(cand) + 1):
        for sub in itertools.combinations(cand, k):
            blocked = np.zeros(n, dtype=np.uint8)
            for v in sub:
                blocked[v] = 1
            mask = _pykernels.reach_mask(n, indptr, indices, blocked, np.asarray([src], dtype=np.int64))
            if not mask[dst]:
                return k
    return None


@pytest.mark.parametrize("impl", IMPLS)
def test_label_components_matches_naive(impl):
    rng = np.random.default_rng(7)
    for _ in range(25):
        n = int(rng.integers(1, 14))
        m = int(rng.integers(0, 2 * n))
        edges = [tuple(sorted(rng.integers(0, n, 2))) for _ in range(m)]
        edges = [(u, v) for u, v in edges if u != v]
        indptr, indices = csr_from_edges(n, edges)
        got = impl.label_components(n, indptr, indices)
        assert list(got) == naive_components(n, indptr, indices)


@pytest.mark.parametrize("impl", IMPLS)
def test_reach_mask_blocks(impl):
    indptr, indices = path_graph(5)
    blocked = np.zeros(5, dtype=np.uint8)
    blocked[2] = 1
    mask = impl.reach_mask(5, indptr, indices, blocked, np.asarray([0], dtype=np.int64))
    assert list(mask) == [1, 1, 0, 0, 0]
    # blocked source reaches nothing
    mask = impl.reach_mask(5, indptr, indices, blocked, np.asarray([2], dtype=np.int64))
    assert list(mask) == [0, 0, 0, 0, 0]


@pytest.mark.parametrize("impl", IMPLS)
def test_vertex_cut_path(impl):
    indptr, indices = path_graph(5)
    removable = np.ones(5, dtype=np.uint8)
    value, cut, paths, hit = impl.vertex_cut(5, indptr, indices, removable, 0, 4, 10)
    assert value == 1 and not hit
    assert list(cut) == [1]  # source-side canonical cut
    assert paths == [[0, 1, 2, 3, 4]]


@pytest.mark.parametrize("impl", IMPLS)
def test_vertex_cut_adjacent_hits_limit(impl):
    indptr, indices = path_graph(2)
    removable = np.ones(2, dtype=np.uint8)
    value, cut, paths, hit = impl.vertex_cut(2, indptr, indices, removable, 0, 1, 3)
    assert hit and value == 4
    assert len(cut) == 0
    assert len(paths) == 4 and all(p[0] == 0 and p[-1] == 1 for p in paths)


@pytest.mark.parametrize("impl", IMPLS)
def test_vertex_cut_grid_menger(impl):
    w, h = 4, 3
    indptr, indices = grid_graph(w, h)
    n = w * h
    removable = np.ones(n, dtype=np.uint8)
    value, cut, paths, hit = impl.vertex_cut(n, indptr, indices, removable, 0, n - 1, 10)
    assert not hit
    # opposite corners of a 4x3 grid: connectivity 2
    assert value == 2 and len(cut) == 2
    # the paths are internally disjoint
    interiors = [set(p[1:-1]) for p in paths]
    assert not (interiors[0] & interiors[1])
    # removing the cut really disconnects
    blocked = np.zeros(n, dtype=np.uint8)
    for v in cut:
        blocked[v] = 1
    mask = impl.reach_mask(n, indptr, indices, blocked, np.asarray([0], dtype=np.int64))
    assert not mask[n - 1]


@pytest.mark.parametrize("impl", IMPLS)
def test_vertex_cut_unremovable_branch_hits_limit(impl):
    # diamond 0-1-3 / 0-2-3 with node 1 locked: no removable separator
    indptr, indices = csr_from_edges(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
    removable = np.array([1, 0, 1, 1], dtype=np.uint8)
    value, cut, paths, hit = impl.vertex_cut(4, indptr, indices, removable, 0, 3, 5)
    assert hit and value == 6 and len(cut) == 0


@pytest.mark.parametrize("impl", IMPLS)
def test_vertex_cut_locked_nodes_stay_out_of_cut(impl):
    # 0-1-2-3-4 with node 2 locked: cut must pick 1 or 3, never 2
    indptr, indices = path_graph(5)
    removable = np.array([1, 1, 0, 1, 1], dtype=np.uint8)
    value, cut, paths, hit = impl.vertex_cut(5, indptr, indices, removable, 0, 4, 5)
    assert not hit and value == 1
    assert list(cut) == [1]


@pytest.mark.parametrize("impl", IMPLS)
def test_vertex_cut_matches_exhaustive(impl):
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(4, 9))
        all_edges = list(itertools.combinations(range(n), 2))
        take = rng.random(len(all_edges)) < 0.45
        edges = [e for e, t in zip(all_edges, take) if t]
        indptr, indices = csr_from_edges(n, edges)
        removable = np.ones(n, dtype=np.uint8)
        src, dst = 0, n - 1
        expect = naive_min_vertex_cut(n, indptr, indices, removable, src, dst)
        value, cut, paths, hit = impl.vertex_cut(
            n, indptr, indices, removable, src, dst, n + 2
        )
        if expect is None:
            # adjacent or inseparable below the limit
            continue
        assert not hit
        assert value == expect
        assert len(cut) == value
        blocked = np.zeros(n, dtype=np.uint8)
        for v in cut:
            blocked[v] = 1
        mask = _pykernels.reach_mask(n, indptr, indices, blocked, np.asarray([src], dtype=np.int64))
        assert not mask[dst]


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
def test_pure_and_compiled_agree():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 12))
        all_edges = list(itertools.combinations(range(n), 2))
        take = rng.random(len(all_edges)) < 0.4
        edges = [e for e, t in zip(all_edges, take) if t]
        indptr, indices = csr_from_edges(n, edges)
        removable = (rng.random(n) < 0.8).astype(np.uint8)
        labels_p = _pykernels.label_components(n, indptr, indices)
        labels_c = _ckernels.label_components(n, indptr, indices)
        assert list(labels_p) == list(labels_c)
        src, dst = 0, n - 1
        if src == dst:
            continue
        rp = _pykernels.vertex_cut(n, indptr, indices, removable, src, dst, 6)
        rc = _ckernels.vertex_cut(n, indptr, indices, removable, src, dst, 6)
        assert rp[0] == rc[0] and rp[3] == rc[3]
        assert list(rp[1]) == list(rc[1])
        assert rp[2] == rc[2]
