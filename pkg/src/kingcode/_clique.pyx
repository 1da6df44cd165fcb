# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled clique search over a dense 0/1 adjacency matrix."""

from libc.stdlib cimport malloc, free
import numpy as np

cdef struct Search:
    const unsigned char* adj
    Py_ssize_t n
    int* current
    int depth
    int* best
    int best_size


cdef void color_sort(Search* s, int* order, int m, int* verts, int* colors) noexcept nogil:
    # smallest color not used by an earlier neighbor; O(m^2) per call
    cdef int* member_of = <int*>malloc(m * sizeof(int))
    cdef int* seen = <int*>malloc((m + 1) * sizeof(int))
    cdef int ncls = 0, a, b, c, v, pos
    for c in range(m + 1):
        seen[c] = -1
    for a in range(m):
        v = order[a]
        for b in range(a):
            if s.adj[v * s.n + order[b]]:
                seen[member_of[b]] = a
        c = 0
        while seen[c] == a:
            c += 1
        member_of[a] = c
        if c == ncls:
            ncls += 1
    pos = 0
    for c in range(ncls):
        for a in range(m):
            if member_of[a] == c:
                verts[pos] = order[a]
                colors[pos] = c + 1
                pos += 1
    free(member_of)
    free(seen)


cdef void expand(Search* s, int* order, int m) noexcept nogil:
    cdef int* verts = <int*>malloc(m * sizeof(int))
    cdef int* colors = <int*>malloc(m * sizeof(int))
    cdef int* sub = <int*>malloc(m * sizeof(int))
    cdef int idx, j, v, w, nsub
    color_sort(s, order, m, verts, colors)
    idx = m - 1
    while idx >= 0:
        if s.depth + colors[idx] <= s.best_size:
            break
        v = verts[idx]
        s.current[s.depth] = v
        s.depth += 1
        nsub = 0
        for j in range(idx):
            w = verts[j]
            if s.adj[v * s.n + w]:
                sub[nsub] = w
                nsub += 1
        if nsub > 0:
            expand(s, sub, nsub)
        elif s.depth > s.best_size:
            s.best_size = s.depth
            for j in range(s.depth):
                s.best[j] = s.current[j]
        s.depth -= 1
        idx -= 1
    free(verts)
    free(colors)
    free(sub)


def max_clique(adj):
    """Maximum clique by branch and bound with a greedy-coloring bound."""
    cdef unsigned char[:, ::1] a = np.ascontiguousarray(np.asarray(adj, dtype=bool), dtype=np.uint8)
    cdef Py_ssize_t n = a.shape[0]
    if n == 0:
        return []
    a_copy = np.array(a, dtype=np.uint8)
    np.fill_diagonal(a_copy, 0)
    cdef unsigned char[:, ::1] clean = a_copy
    degree = a_copy.sum(axis=1)
    start_order = sorted(range(n), key=lambda v: (-int(degree[v]), v))
    cdef int[::1] order = np.asarray(start_order, dtype=np.intc)
    cdef int[::1] current = np.zeros(n, dtype=np.intc)
    cdef int[::1] best = np.zeros(n, dtype=np.intc)
    cdef Search s
    s.adj = &clean[0, 0]
    s.n = n
    s.current = &current[0]
    s.depth = 0
    s.best = &best[0]
    s.best[0] = order[0]
    s.best_size = 1
    with nogil:
        expand(&s, &order[0], <int>n)
    return sorted(int(best[j]) for j in range(s.best_size))


def greedy_clique(adj, order=None):
    """Scan vertices in ``order`` and keep each one adjacent to all kept so far."""
    cdef unsigned char[:, ::1] a = np.ascontiguousarray(np.asarray(adj, dtype=bool), dtype=np.uint8)
    cdef Py_ssize_t n = a.shape[0]
    cdef int[::1] seq = np.asarray(range(n) if order is None else list(order), dtype=np.intc)
    cdef int[::1] chosen = np.zeros(max(n, 1), dtype=np.intc)
    cdef int nchosen = 0, v, j, ok
    cdef Py_ssize_t t
    for t in range(seq.shape[0]):
        v = seq[t]
        ok = 1
        for j in range(nchosen):
            if not a[v, chosen[j]]:
                ok = 0
                break
        if ok:
            chosen[nchosen] = v
            nchosen += 1
    return [int(chosen[j]) for j in range(nchosen)]
