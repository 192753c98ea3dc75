# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics are documented on the pure twins in
``_pykernels.py``; the two implementations must agree output for output."""

import numpy as np


def label_components(Py_ssize_t n, long long[::1] indptr, int[::1] indices):
    labels_arr = np.full(n, -1, dtype=np.int32)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef int[::1] labels = labels_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t start, head, tail, u, k, v
    cdef int cur = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = cur
        queue[0] = start
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if labels[v] < 0:
                    labels[v] = cur
                    queue[tail] = v
                    tail += 1
        cur += 1
    return labels_arr


def reach_mask(Py_ssize_t n, long long[::1] indptr, int[::1] indices,
               unsigned char[::1] blocked, long long[::1] sources):
    mask_arr = np.zeros(n, dtype=np.uint8)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef unsigned char[::1] mask = mask_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t i, head, tail, u, k, v
    tail = 0
    for i in range(sources.shape[0]):
        u = sources[i]
        if not blocked[u] and not mask[u]:
            mask[u] = 1
            queue[tail] = u
            tail += 1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if not mask[v] and not blocked[v]:
                mask[v] = 1
                queue[tail] = v
                tail += 1
    return mask_arr


cdef inline bint _blocked(Py_ssize_t v, long long[::1] widx,
                          long long[::1] d2w, long long rho2) noexcept:
    cdef Py_ssize_t lo = 0, hi = widx.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if widx[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    if lo < widx.shape[0] and widx[lo] == v:
        return d2w[lo] <= rho2
    return False


def sides_linked(Py_ssize_t n, long long[::1] indptr, int[::1] indices,
                 long long[::1] order, long long s_m, long long factor,
                 long long s_star, int[::1] side_of, int dst_label,
                 long long[::1] widx, long long[::1] d2w, long long rho2,
                 long long[::1] seeds, long long[::1] dst_seeds):
    mask_arr = np.zeros(n, dtype=np.uint8)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef unsigned char[::1] mask = mask_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t i, head, tail, u, k, v
    cdef long long f
    tail = 0
    for i in range(seeds.shape[0]):
        u = seeds[i]
        if mask[u] or _blocked(u, widx, d2w, rho2):
            continue
        mask[u] = 1
        queue[tail] = u
        tail += 1
    if tail == 0:
        return 2
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if mask[v] or _blocked(v, widx, d2w, rho2):
                continue
            f = order[v]
            if side_of[(f / s_m / factor) * s_star + (f % s_m) / factor] \
                    == dst_label:
                return 1
            mask[v] = 1
            queue[tail] = v
            tail += 1
    for i in range(dst_seeds.shape[0]):
        if not _blocked(dst_seeds[i], widx, d2w, rho2):
            return 0
    return 3


def vertex_cut(Py_ssize_t n, long long[::1] indptr, int[::1] indices,
               unsigned char[::1] removable, Py_ssize_t src, Py_ssize_t dst,
               long long limit):
    cdef Py_ssize_t nn = 2 * n
    cdef Py_ssize_t m = indices.shape[0] + n
    eto_arr = np.empty(2 * m, dtype=np.int64)
    ecap_arr = np.empty(2 * m, dtype=np.int64)
    enext_arr = np.empty(2 * m, dtype=np.int64)
    ehead_arr = np.full(nn, -1, dtype=np.int64)
    cdef long long[::1] eto = eto_arr
    cdef long long[::1] ecap = ecap_arr
    cdef long long[::1] enext = enext_arr
    cdef long long[::1] ehead = ehead_arr
    cdef long long inf = limit + 16

    cdef Py_ssize_t ecnt = 0
    cdef Py_ssize_t u, v, k
    for v in range(n):
        eto[ecnt] = 2 * v + 1
        ecap[ecnt] = 1 if removable[v] else inf
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
            v = indices[k]
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
    ocap_arr = ecap_arr.copy()

    cdef Py_ssize_t s = 2 * src + 1
    cdef Py_ssize_t t = 2 * dst
    cdef long long flow = 0
    cdef bint hit = False
    pe_arr = np.empty(nn, dtype=np.int64)
    visited_arr = np.empty(nn, dtype=np.uint8)
    queue_arr = np.empty(nn, dtype=np.int64)
    cdef long long[::1] pe = pe_arr
    cdef unsigned char[::1] visited = visited_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t headq, tailq, e
    cdef long long b
    cdef bint found

    while True:
        if flow > limit:
            hit = True
            break
        visited[:] = 0
        visited[s] = 1
        queue[0] = s
        headq = 0
        tailq = 1
        found = False
        while headq < tailq and not found:
            u = queue[headq]
            headq += 1
            e = ehead[u]
            while e >= 0:
                if ecap[e] > 0:
                    v = eto[e]
                    if not visited[v]:
                        visited[v] = 1
                        pe[v] = e
                        if v == t:
                            found = True
                            break
                        queue[tailq] = v
                        tailq += 1
                e = enext[e]
        if not found:
            break
        b = -1
        v = t
        while v != s:
            e = pe[v]
            if b < 0 or ecap[e] < b:
                b = ecap[e]
            v = eto[e ^ 1]
        v = t
        while v != s:
            e = pe[v]
            ecap[e] -= b
            ecap[e ^ 1] += b
            v = eto[e ^ 1]
        flow += b

    cdef long long value = flow if flow <= limit else limit + 1

    cdef unsigned char[::1] reach
    if hit:
        cut = np.empty(0, dtype=np.int64)
    else:
        reach_arr = np.zeros(nn, dtype=np.uint8)
        reach = reach_arr
        reach[s] = 1
        queue[0] = s
        headq = 0
        tailq = 1
        while headq < tailq:
            u = queue[headq]
            headq += 1
            e = ehead[u]
            while e >= 0:
                if ecap[e] > 0:
                    v = eto[e]
                    if not reach[v]:
                        reach[v] = 1
                        queue[tailq] = v
                        tailq += 1
                e = enext[e]
        cut_list = []
        for v in range(n):
            if removable[v] and reach[2 * v] and not reach[2 * v + 1]:
                cut_list.append(v)
        cut = np.asarray(cut_list, dtype=np.int64)

    flows_arr = ocap_arr - ecap_arr
    cdef long long[::1] flows = flows_arr
    paths = []
    cdef long long unit
    for unit in range(value):
        path = [src]
        u = s
        while u != t:
            e = ehead[u]
            while e >= 0:
                if flows[e] > 0:
                    break
                e = enext[e]
            flows[e] -= 1
            u = eto[e]
            if u % 2 == 0:
                path.append(u // 2)
        paths.append(path)

    return value, cut, paths, hit
