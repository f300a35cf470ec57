"""Nelder-Mead descent run on many starting points in lockstep.

Every iteration evaluates the objective once for all reflections and once
for all expansion/contraction candidates, so a vectorised objective pays
its per-call overhead a couple of times per iteration instead of once per
start.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

BatchFn = Callable[[np.ndarray], np.ndarray]


class SimplexResult(NamedTuple):
    x: np.ndarray          # (S, d) best vertex per start
    fun: np.ndarray        # (S,)
    converged: np.ndarray  # (S,) bool
    n_iter: np.ndarray     # (S,)


def nelder_mead_batch(
    fun: BatchFn,
    x0: np.ndarray,
    step: np.ndarray | float,
    *,
    xatol: float = 1e-7,
    fatol: float = 1e-7,
    maxiter: int = 2000,
) -> SimplexResult:
    """Minimise ``fun`` from each row of ``x0``.

    Args:
        fun: maps an (M, d) array of points to M objective values.
        x0: (S, d) starting points.
        step: initial simplex edge along each axis.
        xatol, fatol: a start stops once every vertex lies within ``xatol``
            of the best vertex and their values within ``fatol``.
        maxiter: iteration cap; starts still moving then are reported as
            not converged.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    S, d = x0.shape
    offsets = np.vstack([np.zeros(d), np.diag(np.broadcast_to(step, (d,)).astype(float))])
    sim = x0[:, None, :] + offsets[None]
    fs = np.asarray(fun(sim.reshape(-1, d)), dtype=float).reshape(S, d + 1)
    active = np.ones(S, dtype=bool)
    converged = np.zeros(S, dtype=bool)
    n_iter = np.zeros(S, dtype=int)

    for _ in range(maxiter):
        order = np.argsort(fs, axis=1, kind="stable")
        sim = np.take_along_axis(sim, order[:, :, None], axis=1)
        fs = np.take_along_axis(fs, order, axis=1)
        done = (np.abs(sim[:, 1:] - sim[:, :1]).max(axis=(1, 2)) <= xatol) & (
            np.abs(fs[:, 1:] - fs[:, :1]).max(axis=1) <= fatol)
        converged |= done & active
        active &= ~done
        if not active.any():
            break
        a = np.flatnonzero(active)
        n_iter[a] += 1
        xs, fa = sim[a], fs[a]
        worst = xs[:, -1]
        cen = xs[:, :-1].mean(axis=1)
        xr = 2 * cen - worst
        fr = np.asarray(fun(xr), dtype=float)

        f_best, f_second, f_worst = fa[:, 0], fa[:, -2], fa[:, -1]
        expand = fr < f_best
        outside = ~expand & (fr >= f_second) & (fr < f_worst)
        inside = fr >= f_worst
        cand = np.where(expand[:, None], 3 * cen - 2 * worst,
                        np.where(outside[:, None], 0.5 * (cen + xr), 0.5 * (cen + worst)))
        need = expand | outside | inside
        fc = np.full(len(a), np.inf)
        if need.any():
            fc[need] = fun(cand[need])

        new_x, new_f = xr.copy(), fr.copy()
        take = (expand & (fc < fr)) | (outside & (fc <= fr)) | (inside & (fc < f_worst))
        new_x[take], new_f[take] = cand[take], fc[take]
        shrink = (outside | inside) & ~take
        keep = ~shrink
        xs[keep, -1], fa[keep, -1] = new_x[keep], new_f[keep]
        if shrink.any():
            s = np.flatnonzero(shrink)
            pts = xs[s, :1] + 0.5 * (xs[s, 1:] - xs[s, :1])
            xs[s, 1:] = pts
            fa[s, 1:] = np.asarray(fun(pts.reshape(-1, d)), dtype=float).reshape(len(s), d)
        sim[a], fs[a] = xs, fa

    best = np.argmin(fs, axis=1)
    idx = np.arange(S)
    return SimplexResult(sim[idx, best], fs[idx, best], converged, n_iter)
