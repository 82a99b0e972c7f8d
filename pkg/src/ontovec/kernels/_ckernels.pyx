# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Same function names and array contracts as ``_pykernels``; that module's
docstring is the authoritative description.  Loops here are plain C:
sequential accumulation, no SIMD reassociation surprises, deterministic.
"""

from libc.math cimport exp, fabs, log1p, sqrt

import numpy as np

cimport numpy as cnp

ctypedef cnp.int64_t i64


cdef inline double _sigmoid(double x) noexcept:
    cdef double ex
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    ex = exp(x)
    return ex / (1.0 + ex)


cdef inline double _log_sigmoid(double x) noexcept:
    cdef double m = x if x < 0.0 else 0.0
    return m - log1p(exp(-fabs(x)))


cdef inline double _softplus(double x) noexcept:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef inline double _sign(double x) noexcept:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


# -- TransE ------------------------------------------------------------

def transe_scores(double[:, ::1] ent, double[:, ::1] rel,
                  i64[::1] h, i64[::1] r, i64[::1] t, int p_norm):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j
    cdef double acc, v
    out_arr = np.empty(b, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(b):
        acc = 0.0
        for j in range(d):
            v = ent[h[i], j] + rel[r[i], j] - ent[t[i], j]
            if p_norm == 1:
                acc += fabs(v)
            else:
                acc += v * v
        out[i] = -acc if p_norm == 1 else -sqrt(acc)
    return out_arr


def transe_grads(double[:, ::1] ent, double[:, ::1] rel,
                 i64[::1] h, i64[::1] r, i64[::1] t,
                 double[::1] coeff, int p_norm,
                 double[:, ::1] g_h, double[:, ::1] g_t, double[:, ::1] g_rel):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j
    cdef double norm, u, v
    scratch_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] delta = scratch_arr
    for i in range(b):
        norm = 0.0
        for j in range(d):
            v = ent[h[i], j] + rel[r[i], j] - ent[t[i], j]
            delta[j] = v
            norm += v * v
        norm = sqrt(norm)
        for j in range(d):
            if p_norm == 1:
                u = _sign(delta[j])
            else:
                u = delta[j] / norm if norm > 0.0 else 0.0
            u *= coeff[i]
            g_h[i, j] = -u
            g_t[i, j] = u
            g_rel[r[i], j] -= u


# -- TransR ------------------------------------------------------------

def transr_scores(double[:, ::1] ent, double[:, ::1] rel_v, double[:, :, ::1] rel_m,
                  i64[::1] h, i64[::1] r, i64[::1] t):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j, k
    cdef double acc, v
    out_arr = np.empty(b, dtype=np.float64)
    cdef double[::1] out = out_arr
    diff_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] diff = diff_arr
    for i in range(b):
        for j in range(d):
            diff[j] = ent[h[i], j] - ent[t[i], j]
        acc = 0.0
        for j in range(d):
            v = rel_v[r[i], j]
            for k in range(d):
                v += rel_m[r[i], j, k] * diff[k]
            acc += v * v
        out[i] = -sqrt(acc)
    return out_arr


def transr_grads(double[:, ::1] ent, double[:, ::1] rel_v, double[:, :, ::1] rel_m,
                 i64[::1] h, i64[::1] r, i64[::1] t, double[::1] coeff,
                 double[:, ::1] g_h, double[:, ::1] g_t,
                 double[:, ::1] g_rel_v, double[:, :, ::1] g_rel_m):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j, k
    cdef double norm, v, s
    diff_arr = np.empty(d, dtype=np.float64)
    delta_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] diff = diff_arr
    cdef double[::1] delta = delta_arr
    for i in range(b):
        for j in range(d):
            diff[j] = ent[h[i], j] - ent[t[i], j]
        norm = 0.0
        for j in range(d):
            v = rel_v[r[i], j]
            for k in range(d):
                v += rel_m[r[i], j, k] * diff[k]
            delta[j] = v
            norm += v * v
        norm = sqrt(norm)
        for j in range(d):
            delta[j] = coeff[i] * (delta[j] / norm) if norm > 0.0 else 0.0
        for j in range(d):
            s = 0.0
            for k in range(d):
                s += rel_m[r[i], k, j] * delta[k]
            g_h[i, j] = -s
            g_t[i, j] = s
            g_rel_v[r[i], j] -= delta[j]
        for j in range(d):
            for k in range(d):
                g_rel_m[r[i], j, k] -= delta[j] * diff[k]


# -- DistMult ----------------------------------------------------------

def distmult_scores(double[:, ::1] ent, double[:, ::1] rel,
                    i64[::1] h, i64[::1] r, i64[::1] t):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j
    cdef double acc
    out_arr = np.empty(b, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(b):
        acc = 0.0
        for j in range(d):
            acc += ent[h[i], j] * rel[r[i], j] * ent[t[i], j]
        out[i] = acc
    return out_arr


def distmult_grads(double[:, ::1] ent, double[:, ::1] rel,
                   i64[::1] h, i64[::1] r, i64[::1] t, double[::1] coeff,
                   double[:, ::1] g_h, double[:, ::1] g_t, double[:, ::1] g_rel):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j
    for i in range(b):
        for j in range(d):
            g_h[i, j] = coeff[i] * rel[r[i], j] * ent[t[i], j]
            g_t[i, j] = coeff[i] * rel[r[i], j] * ent[h[i], j]
            g_rel[r[i], j] += coeff[i] * ent[h[i], j] * ent[t[i], j]


# -- HolE --------------------------------------------------------------
# Direct O(d^2) circular correlation; no transform fast path needed in C.

def hole_scores(double[:, ::1] ent, double[:, ::1] rel,
                i64[::1] h, i64[::1] r, i64[::1] t):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j, k, idx
    cdef double acc, ck
    out_arr = np.empty(b, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(b):
        acc = 0.0
        for k in range(d):
            ck = 0.0
            for j in range(d):
                idx = j + k
                if idx >= d:
                    idx -= d
                ck += ent[h[i], j] * ent[t[i], idx]
            acc += rel[r[i], k] * ck
        out[i] = acc
    return out_arr


def hole_grads(double[:, ::1] ent, double[:, ::1] rel,
               i64[::1] h, i64[::1] r, i64[::1] t, double[::1] coeff,
               double[:, ::1] g_h, double[:, ::1] g_t, double[:, ::1] g_rel):
    cdef Py_ssize_t b = h.shape[0], d = ent.shape[1], i, j, k, idx
    cdef double acc
    for i in range(b):
        for j in range(d):
            # d score / d h_j = sum_k r_k t_{(k+j) mod d}
            acc = 0.0
            for k in range(d):
                idx = k + j
                if idx >= d:
                    idx -= d
                acc += rel[r[i], k] * ent[t[i], idx]
            g_h[i, j] = coeff[i] * acc
        for j in range(d):
            # d score / d t_j = sum_k h_k r_{(j-k) mod d}
            acc = 0.0
            for k in range(d):
                idx = j - k
                if idx < 0:
                    idx += d
                acc += ent[h[i], k] * rel[r[i], idx]
            g_t[i, j] = coeff[i] * acc
        for k in range(d):
            # d score / d r_k = (h corr t)_k
            acc = 0.0
            for j in range(d):
                idx = j + k
                if idx >= d:
                    idx -= d
                acc += ent[h[i], j] * ent[t[i], idx]
            g_rel[r[i], k] += coeff[i] * acc


# -- BoxE --------------------------------------------------------------

def boxe_scores(double[:, ::1] pts, double[:, ::1] bumps,
                double[:, ::1] h_c, double[:, ::1] h_raw,
                double[:, ::1] t_c, double[:, ::1] t_raw,
                i64[::1] h, i64[::1] r, i64[::1] t):
    cdef Py_ssize_t b = h.shape[0], d = pts.shape[1], i, j, side
    cdef double acc, p, c, hw, wp, absd, kappa, dist
    cdef double[:, ::1] centers
    cdef double[:, ::1] raws
    out_arr = np.empty(b, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(b):
        out[i] = 0.0
        for side in range(2):
            if side == 0:
                centers = h_c
                raws = h_raw
            else:
                centers = t_c
                raws = t_raw
            acc = 0.0
            for j in range(d):
                if side == 0:
                    p = pts[h[i], j] + bumps[t[i], j]
                else:
                    p = pts[t[i], j] + bumps[h[i], j]
                c = centers[r[i], j]
                hw = _softplus(raws[r[i], j])
                wp = 2.0 * hw + 1.0
                absd = fabs(p - c)
                if c - hw <= p <= c + hw:
                    dist = absd / wp
                else:
                    kappa = 0.5 * (wp - 1.0) * (wp - 1.0 / wp)
                    dist = absd * wp - kappa
                acc += dist * dist
            out[i] -= sqrt(acc)
    return out_arr


def boxe_grads(double[:, ::1] pts, double[:, ::1] bumps,
               double[:, ::1] h_c, double[:, ::1] h_raw,
               double[:, ::1] t_c, double[:, ::1] t_raw,
               i64[::1] h, i64[::1] r, i64[::1] t, double[::1] coeff,
               double[:, ::1] g_ph, double[:, ::1] g_pt,
               double[:, ::1] g_hc, double[:, ::1] g_hraw,
               double[:, ::1] g_tc, double[:, ::1] g_traw):
    cdef Py_ssize_t b = h.shape[0], d = pts.shape[1], i, j, side
    cdef double norm, p, c, hw, wp, absd, kappa, dist, a
    cdef double sgn, d_dp, d_dwp, dkappa, sig, raw
    cdef double[:, ::1] centers
    cdef double[:, ::1] raws
    cdef double[:, ::1] g_point
    cdef double[:, ::1] g_center
    cdef double[:, ::1] g_rawbuf
    dist_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] dists = dist_arr
    for i in range(b):
        for side in range(2):
            if side == 0:
                centers = h_c
                raws = h_raw
                g_point = g_ph
                g_center = g_hc
                g_rawbuf = g_hraw
            else:
                centers = t_c
                raws = t_raw
                g_point = g_pt
                g_center = g_tc
                g_rawbuf = g_traw
            norm = 0.0
            for j in range(d):
                if side == 0:
                    p = pts[h[i], j] + bumps[t[i], j]
                else:
                    p = pts[t[i], j] + bumps[h[i], j]
                c = centers[r[i], j]
                hw = _softplus(raws[r[i], j])
                wp = 2.0 * hw + 1.0
                absd = fabs(p - c)
                if c - hw <= p <= c + hw:
                    dist = absd / wp
                else:
                    kappa = 0.5 * (wp - 1.0) * (wp - 1.0 / wp)
                    dist = absd * wp - kappa
                dists[j] = dist
                norm += dist * dist
            norm = sqrt(norm)
            for j in range(d):
                if side == 0:
                    p = pts[h[i], j] + bumps[t[i], j]
                else:
                    p = pts[t[i], j] + bumps[h[i], j]
                raw = raws[r[i], j]
                c = centers[r[i], j]
                hw = _softplus(raw)
                wp = 2.0 * hw + 1.0
                absd = fabs(p - c)
                sgn = _sign(p - c)
                if c - hw <= p <= c + hw:
                    d_dp = sgn / wp
                    d_dwp = -absd / (wp * wp)
                else:
                    d_dp = sgn * wp
                    dkappa = 0.5 * ((wp - 1.0 / wp) + (wp - 1.0) * (1.0 + 1.0 / (wp * wp)))
                    d_dwp = absd - dkappa
                a = -(coeff[i] / norm) * dists[j] if norm > 0.0 else 0.0
                sig = _sigmoid(raw)
                g_point[i, j] = a * d_dp
                g_center[r[i], j] -= a * d_dp
                g_rawbuf[r[i], j] += a * d_dwp * 2.0 * sig
    return None


# -- skip-gram with negative sampling ----------------------------------

def sg_train_pairs(double[:, ::1] w_in, double[:, ::1] w_out,
                   i64[::1] centers, i64[::1] contexts,
                   i64[:, ::1] negatives, double[::1] lrs):
    cdef Py_ssize_t n = centers.shape[0], d = w_in.shape[1]
    cdef Py_ssize_t k = negatives.shape[1], i, j, m
    cdef i64 c, o, tgt
    cdef double total = 0.0, lr, x, g
    w_arr = np.empty(d, dtype=np.float64)
    neu_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] neu = neu_arr
    for i in range(n):
        c = centers[i]
        o = contexts[i]
        lr = lrs[i]
        for j in range(d):
            w[j] = w_in[c, j]
            neu[j] = 0.0
        x = 0.0
        for j in range(d):
            x += w_out[o, j] * w[j]
        g = _sigmoid(x) - 1.0
        total -= _log_sigmoid(x)
        for j in range(d):
            neu[j] += g * w_out[o, j]
            w_out[o, j] -= lr * g * w[j]
        for m in range(k):
            tgt = negatives[i, m]
            if tgt == o:
                continue
            x = 0.0
            for j in range(d):
                x += w_out[tgt, j] * w[j]
            g = _sigmoid(x)
            total -= _log_sigmoid(-x)
            for j in range(d):
                neu[j] += g * w_out[tgt, j]
                w_out[tgt, j] -= lr * g * w[j]
        for j in range(d):
            w_in[c, j] -= lr * neu[j]
    return total
