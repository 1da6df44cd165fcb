"""Pure-Python clique search; reference for the compiled ``_clique`` module."""

from __future__ import annotations

import numpy as np


def _neighbor_masks(adj) -> list[int]:
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    masks = []
    for v in range(n):
        row = adj[v].copy()
        row[v] = False
        masks.append(sum(1 << int(w) for w in np.flatnonzero(row)))
    return masks


def _color_sort(order: list[int], nbr: list[int]) -> tuple[list[int], list[int]]:
    """Greedy coloring; returns vertices grouped by color and their color numbers."""
    classes: list[list[int]] = []
    class_masks: list[int] = []
    for v in order:
        for c, cm in enumerate(class_masks):
            if not nbr[v] & cm:
                classes[c].append(v)
                class_masks[c] |= 1 << v
                break
        else:
            classes.append([v])
            class_masks.append(1 << v)
    verts, colors = [], []
    for c, members in enumerate(classes, start=1):
        verts.extend(members)
        colors.extend([c] * len(members))
    return verts, colors


def max_clique(adj) -> list[int]:
    """Maximum clique by branch and bound with a greedy-coloring bound."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    if n == 0:
        return []
    nbr = _neighbor_masks(adj)
    degree = [bin(m).count("1") for m in nbr]
    start = sorted(range(n), key=lambda v: (-degree[v], v))
    best: list[int] = [start[0]]
    current: list[int] = []

    def expand(order: list[int]):
        nonlocal best
        verts, colors = _color_sort(order, nbr)
        for idx in range(len(verts) - 1, -1, -1):
            if len(current) + colors[idx] <= len(best):
                return
            v = verts[idx]
            current.append(v)
            sub = [w for w in verts[:idx] if nbr[v] >> w & 1]
            if sub:
                expand(sub)
            elif len(current) > len(best):
                best = current.copy()
            current.pop()

    expand(start)
    return sorted(best)


def greedy_clique(adj, order=None) -> list[int]:
    """Scan vertices in ``order`` and keep each one adjacent to all kept so far."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    chosen: list[int] = []
    for v in range(n) if order is None else order:
        if all(adj[v, u] for u in chosen):
            chosen.append(int(v))
    return chosen
