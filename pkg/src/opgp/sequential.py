"""Sequential assimilation of observation batches.

A :class:`PosteriorState` stores the Cholesky factor ``L`` of the Gram matrix
of every functional seen so far together with the whitened innovations
``z = L^{-1} (y - Gm)``. Absorbing a batch extends ``L`` blockwise,

    [[L, 0], [W^T, chol(S)]],   W = L^{-1} C,   S = B - W^T W,

where ``B`` is the prior Gram of the new batch and ``C`` the old-by-new cross
Gram. ``S`` is the new batch's Gram under the current posterior kernel, so the
step reproduces the two-stage kriging update without refactorizing.
"""
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, RedundantBatch
from .functionals import apply, gram_matrix, section_matrix
from .gram import inverse_sqrt, jittered_cholesky
from .posterior import PosteriorMean, condition


@dataclass(frozen=True)
class PosteriorState:
    kernel: object
    mean: object
    functionals: tuple = ()
    values: np.ndarray = None
    gm: np.ndarray = None
    chol: np.ndarray = None
    white: np.ndarray = None
    batch_boundaries: tuple = ()
    jitters: tuple = ()

    @classmethod
    def prior(cls, kernel, mean):
        return cls(kernel, mean, (), np.zeros(0), np.zeros(0), np.zeros((0, 0)), np.zeros(0))

    @property
    def p(self):
        return len(self.functionals)

    @property
    def alpha(self):
        """``K_GG^{-1} (y - Gm)``."""
        if self.p == 0:
            return np.zeros(0)
        return solve_triangular(self.chol, self.white, lower=True, trans="T")

    def mean_function(self):
        return PosteriorMean(self.kernel, self.mean, self.functionals, self.alpha)


def assimilate(state, fs_new, y_new):
    """Return a new state conditioned additionally on ``fs_new = y_new``.

    ``state`` is not modified.
    """
    fs_new = tuple(fs_new)
    y_new = np.asarray(y_new, dtype=float).reshape(-1)
    if y_new.size != len(fs_new):
        raise DimensionMismatch(f"{len(fs_new)} functionals but {y_new.size} values")
    boundaries = state.batch_boundaries + (state.p,)
    if not fs_new:
        return _replace(state, batch_boundaries=boundaries, jitters=state.jitters + (0.0,))

    k = state.kernel
    gm_new = np.array([apply(f, state.mean) for f in fs_new])
    b = gram_matrix(fs_new, fs_new, k)
    b = 0.5 * (b + b.T)
    b[np.diag_indices_from(b)] += [f.noise for f in fs_new]
    if state.p:
        c = gram_matrix(state.functionals, fs_new, k)
        w = solve_triangular(state.chol, c, lower=True)
        schur = b - w.T @ w
        schur = 0.5 * (schur + schur.T)
    else:
        w = np.zeros((0, len(fs_new)))
        schur = b
    ls, jitter = jittered_cholesky(schur, error=RedundantBatch)
    z_new = solve_triangular(ls, y_new - gm_new - w.T @ state.white, lower=True)

    p_old, p_add = state.p, len(fs_new)
    chol = np.zeros((p_old + p_add, p_old + p_add))
    chol[:p_old, :p_old] = state.chol
    chol[p_old:, :p_old] = w.T
    chol[p_old:, p_old:] = ls
    return PosteriorState(
        kernel=k,
        mean=state.mean,
        functionals=state.functionals + fs_new,
        values=np.concatenate([state.values, y_new]),
        gm=np.concatenate([state.gm, gm_new]),
        chol=chol,
        white=np.concatenate([state.white, z_new]),
        batch_boundaries=boundaries,
        jitters=state.jitters + (jitter,),
    )


def _replace(state, **kw):
    fields = dict(state.__dict__)
    fields.update(kw)
    return PosteriorState(**fields)


def _whitened(state, s):
    ksg = section_matrix(state.functionals, state.kernel, np.atleast_1d(s))
    if state.p == 0:
        return ksg
    return solve_triangular(state.chol, ksg, lower=True)


def seq_mean(state, s):
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = state.mean(s_arr) + _whitened(state, s_arr).T @ state.white
    return float(out[0]) if np.ndim(s) == 0 else out


def seq_cov(state, s1, s2):
    v1, v2 = _whitened(state, s1), _whitened(state, s2)
    out = state.kernel.matrix(np.atleast_1d(s1), np.atleast_1d(s2)) - v1.T @ v2
    if np.ndim(s1) == 0 and np.ndim(s2) == 0:
        return float(out[0, 0])
    return out


def seq_var(state, s):
    v = _whitened(state, s)
    out = state.kernel.diag(np.atleast_1d(s)) - np.sum(v * v, axis=0)
    return float(out[0]) if np.ndim(s) == 0 else out


def expanded_two_stage_moments(k, m, fs1, y1, fs2, y2, s, s2=None):
    """Two-stage posterior moments from the fully expanded representing sums.

    Independent oracle for :func:`assimilate`: no Cholesky factor is used.
    With ``b_i = C G1* y1_i``, ``a_j = C G2* y2_j`` (``y1_i`` representing
    for ``G1 C G1*``, ``y2_j`` for the first-stage conditional Gram of G2)
    and ``c_ij = <b_i, G2* y2_j>``, the mean is

        m + sum_i d_i b_i + sum_j (e_j - g_j) a_j - sum_ij (e_j - g_j) c_ij b_i
          - sum_ij c_ij d_i a_j + sum_ijk c_ij d_i c_kj b_k

    with ``d_i = <y1 - G1 m, y1_i>``, ``e_j = <y2, y2_j>``,
    ``g_j = <G2 m, y2_j>``; the covariance is

        k - sum_i b_i b_i - sum_j a_j a_j + sum_ij c_ij (a_j b_i + b_i a_j)
          - sum_ijk c_ij c_kj b_i b_k.

    Returns the mean at ``s`` if ``s2 is None``, else the covariance.
    """
    fs1, fs2 = tuple(fs1), tuple(fs2)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    p1, p2 = len(fs1), len(fs2)

    k11 = gram_matrix(fs1, fs1, k)
    k21 = gram_matrix(fs2, fs1, k)
    k22 = gram_matrix(fs2, fs2, k)
    k11 = 0.5 * (k11 + k11.T)
    k11[np.diag_indices_from(k11)] += [f.noise for f in fs1]
    k22[np.diag_indices_from(k22)] += [f.noise for f in fs2]
    rep1 = inverse_sqrt(k11) if p1 else np.zeros((0, 0))
    # first-stage conditional Gram of G2: k22 - sum_i (k21 y1_i)(k21 y1_i)^T
    proj = k21 @ rep1.T
    cond22 = k22 - sum(np.outer(proj[:, i], proj[:, i]) for i in range(p1)) if p1 else k22
    cond22 = 0.5 * (cond22 + cond22.T)
    rep2 = inverse_sqrt(cond22) if p2 else np.zeros((0, 0))
    c = np.array([[rep2[j] @ k21 @ rep1[i] for j in range(p2)] for i in range(p1)])
    c = c.reshape(p1, p2)

    def sections(pts):
        pts = np.atleast_1d(np.asarray(pts, dtype=float))
        b = section_matrix(fs1, k, pts).T @ rep1.T if p1 else np.zeros((pts.size, 0))
        a = section_matrix(fs2, k, pts).T @ rep2.T if p2 else np.zeros((pts.size, 0))
        return pts, b, a

    if s2 is None:
        pts, b, a = sections(s)
        g1m = np.array([apply(f, m) for f in fs1])
        g2m = np.array([apply(f, m) for f in fs2])
        d = [(y1 - g1m) @ rep1[i] for i in range(p1)]
        e = [y2 @ rep2[j] for j in range(p2)]
        g = [g2m @ rep2[j] for j in range(p2)]
        out = np.array(m(pts), dtype=float)
        for i in range(p1):
            out += d[i] * b[:, i]
        for j in range(p2):
            out += e[j] * a[:, j]
            out -= g[j] * a[:, j]
            for i in range(p1):
                out -= e[j] * c[i, j] * b[:, i]
                out -= c[i, j] * d[i] * a[:, j]
                out += g[j] * c[i, j] * b[:, i]
                for kk in range(p1):
                    out += c[i, j] * d[i] * c[kk, j] * b[:, kk]
        return float(out[0]) if np.ndim(s) == 0 else out

    pts1, b1, a1 = sections(s)
    pts2, b2, a2 = sections(s2)
    out = k.matrix(pts1, pts2)
    for i in range(p1):
        out -= np.outer(b1[:, i], b2[:, i])
    for j in range(p2):
        out -= np.outer(a1[:, j], a2[:, j])
        for i in range(p1):
            out += c[i, j] * (np.outer(a1[:, j], b2[:, i]) + np.outer(b1[:, i], a2[:, j]))
            for kk in range(p1):
                out -= c[i, j] * c[kk, j] * np.outer(b1[:, i], b2[:, kk])
    if np.ndim(s) == 0 and np.ndim(s2) == 0:
        return float(out[0, 0])
    return out


@dataclass
class TimingTable:
    rows: list
    incremental_total: float
    full_total: float
    total_p: int

    @property
    def incremental_faster(self):
        """``None`` below 256 accumulated observations, else the comparison."""
        if self.total_p < 256:
            return None
        return self.incremental_total <= self.full_total


def timing_report(state_builder, schedule):
    """Wall-clock comparison of incremental assimilation vs full reconditioning.

    ``state_builder(n)`` must return ``(kernel, mean, functionals, values)``
    with at least ``n`` observations; ``schedule`` lists batch sizes.
    """
    schedule = list(schedule)
    total = sum(schedule)
    if not schedule:
        return TimingTable([], 0.0, 0.0, 0)
    k, m, fs, ys = state_builder(total)
    fs, ys = tuple(fs), np.asarray(ys, dtype=float)
    state = PosteriorState.prior(k, m)
    rows, start = [], 0
    for step, size in enumerate(schedule, 1):
        stop = start + size
        t0 = time.perf_counter()
        state = assimilate(state, fs[start:stop], ys[start:stop])
        t1 = time.perf_counter()
        condition(k, m, fs[:stop], ys[:stop])
        t2 = time.perf_counter()
        rows.append({"step": step, "batch_size": size, "total_p": stop,
                     "incremental_s": t1 - t0, "full_s": t2 - t1})
        start = stop
    return TimingTable(rows, sum(r["incremental_s"] for r in rows),
                       sum(r["full_s"] for r in rows), total)
