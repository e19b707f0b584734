"""Discrete Green's energy of an erosion state."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SolveError
from .state import ErosionState


def killed_walk_operator(state: ErosionState, d: int):
    """Sparse ``I - P`` for the walk on droplet ``d`` killed at its interface.

    Returns ``(A, cells)`` where ``cells`` is the ``(n, 2)`` array of
    raster indices ordering the unknowns.
    """
    mask = state.owner == d
    a, b = np.nonzero(mask)
    n = len(a)
    if n == 0:
        raise SolveError(f"droplet {d} has no cells")
    index = -np.ones(mask.shape, dtype=np.int64)
    index[a, b] = np.arange(n)
    vc, hc = state.vcnt[d], state.hcnt[d]
    W, H, per = state.W, state.H, state.periodic
    rows, cols = [], []
    # East, west, north, south; the crossed edge must not lie on the interface.
    steps = [
        ((a + 1) % W if per else a + 1, b, vc[(a + 1) % W if per else a + 1, b]),
        ((a - 1) % W if per else a - 1, b, vc[a, b]),
        (a, (b + 1) % H if per else b + 1, hc[a, (b + 1) % H if per else b + 1]),
        (a, (b - 1) % H if per else b - 1, hc[a, b]),
    ]
    for na, nb, cnt in steps:
        free = cnt == 0
        src = np.nonzero(free)[0]
        dst = index[na[free], nb[free]]
        if np.any(dst < 0):
            raise SolveError("interface does not enclose the droplet cells")
        rows.append(src)
        cols.append(dst)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    P = sp.csr_matrix((np.full(len(rows), 0.25), (rows, cols)), shape=(n, n))
    A = (sp.identity(n, format="csr") - P).tocsc()
    return A, np.stack([a, b], axis=1)


def green_matrix(state: ErosionState, d: int):
    """Killed-walk Green's function between the source cells of droplet ``d``.

    ``G[j, k]`` is the expected number of visits to source ``k`` of a walk
    started at source ``j``. Also returns the rates of those sources.
    """
    srcs = [s for s in state.sources if s.droplet == d]
    A, cells = killed_walk_operator(state, d)
    n = A.shape[0]
    lookup = {(int(x), int(y)): i for i, (x, y) in enumerate(cells)}
    idx = [lookup[state.index(s.cell)] for s in srcs]
    rhs = np.zeros((n, len(idx)))
    rhs[idx, np.arange(len(idx))] = 1.0
    try:
        X = spla.splu(A).solve(rhs)
    except RuntimeError as exc:
        raise SolveError(f"singular killed-walk system for droplet {d}") from exc
    if not np.all(np.isfinite(X)):
        raise SolveError(f"singular killed-walk system for droplet {d}")
    G = X[idx, :]
    return G, np.array([s.rate for s in srcs])


def discrete_energy(state: ErosionState) -> float:
    """Sum over droplets of ``sum_{j,k} a_j a_k G_N(z_j, z_k)``.

    The diagonal terms ``G_N(z_j, z_j)`` stand in for the reduced modulus
    up to a mesh-dependent constant.
    """
    total = 0.0
    for d in range(state.n):
        G, a = green_matrix(state, d)
        total += float(a @ G @ a)
    return total
