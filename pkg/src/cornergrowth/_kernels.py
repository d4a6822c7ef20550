"""Compiled dynamic-programming kernels on weight arrays.

All kernels take arrays indexed ``w[i, j]`` = weight at ``lo + (i, j)`` and
know nothing about lattice coordinates.  Forward kernels run from ``[0, 0]``
to the far corner, reversed kernels from the far corner back to ``[0, 0]``.
Ties always go to the predecessor one step along e2.
"""

from __future__ import annotations

import numpy as np
from numba import njit

E1 = 1
E2 = 2


@njit(cache=True)
def lpp_last_column(w):
    """G from w[0, 0] to every w[n1-1, j], rolling a single buffer."""
    n1, n2 = w.shape
    g = np.empty(n2)
    acc = 0.0
    for j in range(n2):
        acc += w[0, j]
        g[j] = acc
    for i in range(1, n1):
        g[0] += w[i, 0]
        for j in range(1, n2):
            left = g[j]
            below = g[j - 1]
            g[j] = (below if below >= left else left) + w[i, j]
    return g


@njit(cache=True)
def lpp_value(w):
    return lpp_last_column(w)[w.shape[1] - 1]


@njit(cache=True)
def lpp_last_row(w):
    """G from w[0, 0] to every w[i, n2-1]."""
    n1, n2 = w.shape
    g = np.empty(n2)
    out = np.empty(n1)
    acc = 0.0
    for j in range(n2):
        acc += w[0, j]
        g[j] = acc
    out[0] = g[n2 - 1]
    for i in range(1, n1):
        g[0] += w[i, 0]
        for j in range(1, n2):
            left = g[j]
            below = g[j - 1]
            g[j] = (below if below >= left else left) + w[i, j]
        out[i] = g[n2 - 1]
    return out


@njit(cache=True)
def lpp_table(w):
    n1, n2 = w.shape
    g = np.empty((n1, n2))
    g[0, 0] = w[0, 0]
    for j in range(1, n2):
        g[0, j] = g[0, j - 1] + w[0, j]
    for i in range(1, n1):
        g[i, 0] = g[i - 1, 0] + w[i, 0]
        for j in range(1, n2):
            left = g[i - 1, j]
            below = g[i, j - 1]
            g[i, j] = (below if below >= left else left) + w[i, j]
    return g


@njit(cache=True)
def backtrack(g, i, j):
    """Forward step codes of the path from [0, 0] to [i, j] through table g."""
    steps = np.empty(i + j, dtype=np.uint8)
    k = i + j
    while k > 0:
        k -= 1
        if i == 0:
            steps[k] = E2
            j -= 1
        elif j == 0:
            steps[k] = E1
            i -= 1
        elif g[i, j - 1] >= g[i - 1, j]:
            steps[k] = E2
            j -= 1
        else:
            steps[k] = E1
            i -= 1
    return steps


@njit(cache=True)
def reversed_first_column(w):
    """Reversed G from w[n1-1, n2-1] down to every w[0, j]."""
    n1, n2 = w.shape
    g = np.empty(n2)
    acc = 0.0
    for j in range(n2 - 1, -1, -1):
        acc += w[n1 - 1, j]
        g[j] = acc
    for i in range(n1 - 2, -1, -1):
        g[n2 - 1] += w[i, n2 - 1]
        for j in range(n2 - 2, -1, -1):
            right = g[j]
            above = g[j + 1]
            g[j] = (above if above >= right else right) + w[i, j]
    return g


@njit(cache=True)
def reversed_value(w):
    return reversed_first_column(w)[0]


@njit(cache=True)
def reversed_table(w):
    n1, n2 = w.shape
    g = np.empty((n1, n2))
    g[n1 - 1, n2 - 1] = w[n1 - 1, n2 - 1]
    for j in range(n2 - 2, -1, -1):
        g[n1 - 1, j] = g[n1 - 1, j + 1] + w[n1 - 1, j]
    for i in range(n1 - 2, -1, -1):
        g[i, n2 - 1] = g[i + 1, n2 - 1] + w[i, n2 - 1]
        for j in range(n2 - 2, -1, -1):
            right = g[i + 1, j]
            above = g[i, j + 1]
            g[i, j] = (above if above >= right else right) + w[i, j]
    return g


@njit(cache=True)
def corner_value_label(w):
    """LPP value and exit label at the far corner of w.

    Row 0 and column 0 of ``w`` are the two boundary axes.  The label of
    a cell is +i if its maximizing path leaves the e1-axis at w[i, 0],
    -j if it leaves the e2-axis at w[0, j], and 0 at the corner itself.
    """
    n1, n2 = w.shape
    g = np.empty(n2)
    lab = np.empty(n2, dtype=np.int64)
    acc = 0.0
    for j in range(n2):
        acc += w[0, j]
        g[j] = acc
        lab[j] = -j
    for i in range(1, n1):
        g[0] += w[i, 0]
        lab[0] = i
        for j in range(1, n2):
            left = g[j]
            below = g[j - 1]
            if below >= left:
                g[j] = below + w[i, j]
                lab[j] = lab[j - 1]
            else:
                g[j] = left + w[i, j]
    return g[n2 - 1], lab[n2 - 1]


@njit(cache=True)
def corner_table_labels(w):
    n1, n2 = w.shape
    g = lpp_table(w)
    lab = np.zeros((n1, n2), dtype=np.int64)
    for i in range(1, n1):
        lab[i, 0] = i
    for j in range(1, n2):
        lab[0, j] = -j
    for i in range(1, n1):
        for j in range(1, n2):
            if g[i, j - 1] >= g[i - 1, j]:
                lab[i, j] = lab[i, j - 1]
            else:
                lab[i, j] = lab[i - 1, j]
    return g, lab


@njit(cache=True)
def reversed_corner_value_label(w):
    """Mirror of :func:`corner_value_label` with the corner at w[n1-1, n2-1].

    Row n2-1 (the north axis) gives labels +i at w[n1-1-i, n2-1]; column
    n1-1 (the east axis) gives -j at w[n1-1, n2-1-j].
    """
    n1, n2 = w.shape
    g = np.empty(n2)
    lab = np.empty(n2, dtype=np.int64)
    acc = 0.0
    for j in range(n2 - 1, -1, -1):
        acc += w[n1 - 1, j]
        g[j] = acc
        lab[j] = -(n2 - 1 - j)
    for i in range(n1 - 2, -1, -1):
        g[n2 - 1] += w[i, n2 - 1]
        lab[n2 - 1] = n1 - 1 - i
        for j in range(n2 - 2, -1, -1):
            right = g[j]
            above = g[j + 1]
            if above >= right:
                g[j] = above + w[i, j]
                lab[j] = lab[j + 1]
            else:
                g[j] = right + w[i, j]
    return g[0], lab[0]
