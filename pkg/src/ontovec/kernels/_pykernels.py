"""Pure-numpy kernel backend.

Twin of the compiled backend in ``_ckernels.pyx``: identical function
names and array contracts, so either can serve as ``kernels.active``.

Conventions shared by both backends:

* parameter tables are C-contiguous float64, index arrays int64;
* ``*_scores`` return a fresh ``(B,)`` array;
* ``*_grads`` write per-triple entity gradients into caller-provided
  ``(B, d)`` output arrays (overwritten) and accumulate relation-side
  gradients into caller-zeroed dense buffers, each contribution scaled
  by ``coeff[i]``;
* subgradients at kinks are deterministic: ``sign(0) == 0`` and box
  boundaries use the inside branch.
"""

from __future__ import annotations

import math

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    # log sigma(x) = min(x, 0) - log1p(exp(-|x|))
    return np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _unit_rows(delta: np.ndarray) -> np.ndarray:
    """Rows delta/||delta||, with the zero row mapped to zero."""
    norms = np.sqrt((delta * delta).sum(axis=1))
    safe = np.where(norms > 0.0, norms, 1.0)
    return delta / safe[:, None]


# -- TransE ------------------------------------------------------------

def transe_scores(ent, rel, h, r, t, p_norm):
    delta = ent[h] + rel[r] - ent[t]
    if p_norm == 1:
        return -np.abs(delta).sum(axis=1)
    return -np.sqrt((delta * delta).sum(axis=1))


def transe_grads(ent, rel, h, r, t, coeff, p_norm, g_h, g_t, g_rel):
    delta = ent[h] + rel[r] - ent[t]
    if p_norm == 1:
        u = np.sign(delta)
    else:
        u = _unit_rows(delta)
    scaled = coeff[:, None] * u
    g_h[:] = -scaled
    g_t[:] = scaled
    np.add.at(g_rel, r, -scaled)


# -- TransR ------------------------------------------------------------

def transr_scores(ent, rel_v, rel_m, h, r, t):
    diff = ent[h] - ent[t]
    # per-triple M_r (h - t): batched matvec
    proj = np.einsum("bij,bj->bi", rel_m[r], diff)
    delta = proj + rel_v[r]
    return -np.sqrt((delta * delta).sum(axis=1))


def transr_grads(ent, rel_v, rel_m, h, r, t, coeff, g_h, g_t, g_rel_v, g_rel_m):
    diff = ent[h] - ent[t]
    proj = np.einsum("bij,bj->bi", rel_m[r], diff)
    delta = proj + rel_v[r]
    u = _unit_rows(delta)
    scaled = coeff[:, None] * u
    mt_u = np.einsum("bji,bj->bi", rel_m[r], scaled)  # M_r^T (coeff * u)
    g_h[:] = -mt_u
    g_t[:] = mt_u
    np.add.at(g_rel_v, r, -scaled)
    np.add.at(g_rel_m, r, -np.einsum("bi,bj->bij", scaled, diff))


# -- DistMult ----------------------------------------------------------

def distmult_scores(ent, rel, h, r, t):
    return (ent[h] * rel[r] * ent[t]).sum(axis=1)


def distmult_grads(ent, rel, h, r, t, coeff, g_h, g_t, g_rel):
    eh, rr, et = ent[h], rel[r], ent[t]
    g_h[:] = coeff[:, None] * rr * et
    g_t[:] = coeff[:, None] * rr * eh
    np.add.at(g_rel, r, coeff[:, None] * eh * et)


# -- HolE --------------------------------------------------------------
# Batched circular correlation/convolution go through rfft; the direct
# O(d^2) definition lives in ontovec.models and the test oracles.

def _corr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    return np.fft.irfft(np.conj(np.fft.rfft(a, axis=-1)) * np.fft.rfft(b, axis=-1), n=d, axis=-1)


def _conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    return np.fft.irfft(np.fft.rfft(a, axis=-1) * np.fft.rfft(b, axis=-1), n=d, axis=-1)


def hole_scores(ent, rel, h, r, t):
    return (_corr(ent[h], ent[t]) * rel[r]).sum(axis=1)


def hole_grads(ent, rel, h, r, t, coeff, g_h, g_t, g_rel):
    eh, rr, et = ent[h], rel[r], ent[t]
    g_h[:] = coeff[:, None] * _corr(rr, et)
    g_t[:] = coeff[:, None] * _conv(eh, rr)
    np.add.at(g_rel, r, coeff[:, None] * _corr(eh, et))


# -- BoxE --------------------------------------------------------------

def _box_pieces(center, raw, r):
    hw = _softplus(raw[r])
    wp = 2.0 * hw + 1.0
    c = center[r]
    return c, hw, wp


def _box_dim_dist(p, c, hw, wp):
    absd = np.abs(p - c)
    inside = (p >= c - hw) & (p <= c + hw)
    kappa = 0.5 * (wp - 1.0) * (wp - 1.0 / wp)
    return np.where(inside, absd / wp, absd * wp - kappa), inside, absd


def boxe_scores(pts, bumps, h_c, h_raw, t_c, t_raw, h, r, t):
    ph = pts[h] + bumps[t]
    pt = pts[t] + bumps[h]
    out = np.zeros(len(h))
    for point, center, raw in ((ph, h_c, h_raw), (pt, t_c, t_raw)):
        c, hw, wp = _box_pieces(center, raw, r)
        dist, _, _ = _box_dim_dist(point, c, hw, wp)
        out -= np.sqrt((dist * dist).sum(axis=1))
    return out


def boxe_grads(pts, bumps, h_c, h_raw, t_c, t_raw, h, r, t, coeff,
               g_ph, g_pt, g_hc, g_hraw, g_tc, g_traw):
    ph = pts[h] + bumps[t]
    pt = pts[t] + bumps[h]
    sides = (
        (ph, h_c, h_raw, g_ph, g_hc, g_hraw),
        (pt, t_c, t_raw, g_pt, g_tc, g_traw),
    )
    for point, center, raw, g_point, g_center, g_raw in sides:
        c, hw, wp = _box_pieces(center, raw, r)
        dist, inside, absd = _box_dim_dist(point, c, hw, wp)
        norms = np.sqrt((dist * dist).sum(axis=1))
        safe = np.where(norms > 0.0, norms, 1.0)
        # d score / d dist_j, including the pair coefficient
        a = -(coeff / safe)[:, None] * dist
        a[norms == 0.0] = 0.0
        sgn = np.sign(point - c)
        d_dp = np.where(inside, sgn / wp, sgn * wp)
        dkappa = 0.5 * ((wp - 1.0 / wp) + (wp - 1.0) * (1.0 + 1.0 / (wp * wp)))
        d_dwp = np.where(inside, -absd / (wp * wp), absd - dkappa)
        sig = _sigmoid(raw[r])
        g_point[:] = a * d_dp
        np.add.at(g_center, r, -a * d_dp)
        np.add.at(g_raw, r, a * d_dwp * 2.0 * sig)


# -- skip-gram with negative sampling ----------------------------------

def sg_train_pairs(w_in, w_out, centers, contexts, negatives, lrs):
    """Sequential SGD over (center, context) pairs; returns summed loss.

    Updates both tables in place.  A negative equal to the positive
    context token is skipped.  Output rows are updated with the input
    row as it was at the start of the pair; the input row update is
    applied last, from output rows as they were before their update.
    """
    total = 0.0
    n_neg = negatives.shape[1]
    for i in range(len(centers)):
        c = int(centers[i])
        o = int(contexts[i])
        lr = lrs[i]
        w = w_in[c].copy()
        neu = np.zeros_like(w)
        x = float(w_out[o] @ w)
        g = _sigmoid_scalar(x) - 1.0
        total -= _log_sigmoid_scalar(x)
        neu += g * w_out[o]
        w_out[o] -= lr * g * w
        for j in range(n_neg):
            nidx = int(negatives[i, j])
            if nidx == o:
                continue
            x = float(w_out[nidx] @ w)
            g = _sigmoid_scalar(x)
            total -= _log_sigmoid_scalar(-x)
            neu += g * w_out[nidx]
            w_out[nidx] -= lr * g * w
        w_in[c] -= lr * neu
    return total


def _sigmoid_scalar(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def _log_sigmoid_scalar(x: float) -> float:
    return min(x, 0.0) - math.log1p(math.exp(-abs(x)))
