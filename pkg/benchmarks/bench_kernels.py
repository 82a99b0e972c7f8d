"""Compare the compiled kernel backend against the pure-Python one.

Runs the batched score and gradient kernels for every model, plus the
in-place skip-gram trainer, on identical inputs, and reports wall time
per call and the speedup.  Both backends are also checked to agree so a
speedup never comes from computing something else.

Expect the HolE rows to favour the python backend at larger dimensions:
it computes circular correlation through rfft (O(d log d)) while the
compiled kernel uses the direct O(d^2) sum.  They agree to float
precision; the parity tests exercise exactly this pair.

Usage:
    python3 benchmarks/bench_kernels.py [--batch 4096] [--dim 200] [--repeat 5]
"""

import argparse
import time

import numpy as np

from ontovec.kernels import c_backend, py_backend


def _timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def _inputs(batch, dim, n_entities=2000, n_relations=12, seed=0):
    rng = np.random.default_rng(seed)
    ent = rng.normal(size=(n_entities, dim))
    rel = rng.normal(size=(n_relations, dim))
    h = rng.integers(0, n_entities, size=batch)
    r = rng.integers(0, n_relations, size=batch)
    t = rng.integers(0, n_entities, size=batch)
    coeff = rng.normal(size=batch)
    return rng, ent, rel, h, r, t, coeff


def bench_model_kernels(backend, batch, dim, repeat):
    rng, ent, rel, h, r, t, coeff = _inputs(batch, dim)
    rel_m = rng.normal(size=(rel.shape[0], dim, dim))
    bumps = rng.normal(size=ent.shape)
    h_c = rng.normal(size=rel.shape)
    t_c = rng.normal(size=rel.shape)
    h_raw = rng.normal(size=rel.shape)
    t_raw = rng.normal(size=rel.shape)
    g_h = np.zeros((batch, dim))
    g_t = np.zeros((batch, dim))
    g_rel = np.zeros_like(rel)
    g_rel_m = np.zeros_like(rel_m)
    g_hc = np.zeros_like(rel)
    g_traw = np.zeros_like(rel)

    def reset():
        for arr in (g_h, g_t, g_rel, g_rel_m, g_hc, g_traw):
            arr[:] = 0.0

    cases = {
        "transe_scores": lambda: backend.transe_scores(ent, rel, h, r, t, 2),
        "transe_grads": lambda: backend.transe_grads(
            ent, rel, h, r, t, coeff, 2, g_h, g_t, g_rel
        ),
        "transr_scores": lambda: backend.transr_scores(ent, rel, rel_m, h, r, t),
        "transr_grads": lambda: backend.transr_grads(
            ent, rel, rel_m, h, r, t, coeff, g_h, g_t, g_rel, g_rel_m
        ),
        "distmult_scores": lambda: backend.distmult_scores(ent, rel, h, r, t),
        "distmult_grads": lambda: backend.distmult_grads(
            ent, rel, h, r, t, coeff, g_h, g_t, g_rel
        ),
        "hole_scores": lambda: backend.hole_scores(ent, rel, h, r, t),
        "hole_grads": lambda: backend.hole_grads(
            ent, rel, h, r, t, coeff, g_h, g_t, g_rel
        ),
        "boxe_scores": lambda: backend.boxe_scores(
            ent, bumps, h_c, h_raw, t_c, t_raw, h, r, t
        ),
        "boxe_grads": lambda: backend.boxe_grads(
            ent, bumps, h_c, h_raw, t_c, t_raw, h, r, t, coeff,
            g_h, g_t, g_hc, np.zeros_like(rel), t_c * 0.0, g_traw,
        ),
    }
    results = {}
    for name, fn in cases.items():
        reset()
        results[name] = _timeit(fn, repeat)
    return results


def bench_skipgram(backend, batch, dim, repeat, vocab=5000, negatives=5, seed=1):
    rng = np.random.default_rng(seed)
    centers = rng.integers(0, vocab, size=batch)
    contexts = rng.integers(0, vocab, size=batch)
    negs = rng.integers(0, vocab, size=(batch, negatives))
    lrs = np.full(batch, 0.025)

    def run():
        w_in = rng.normal(size=(vocab, dim)) * 0.01
        w_out = np.zeros((vocab, dim))
        return backend.sg_train_pairs(w_in, w_out, centers, contexts, negs, lrs)

    return _timeit(run, repeat)


def check_agreement(batch=256, dim=64):
    """Sanity: the two backends produce the same scores on shared inputs."""
    _, ent, rel, h, r, t, _ = _inputs(batch, dim, seed=3)
    for name in ("transe", "distmult", "hole"):
        py = getattr(py_backend, f"{name}_scores")
        cy = getattr(c_backend, f"{name}_scores")
        args = (ent, rel, h, r, t) + ((2,) if name == "transe" else ())
        if not np.allclose(py(*args), cy(*args), atol=1e-10):
            raise SystemExit(f"backend disagreement in {name}_scores")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=4096)
    parser.add_argument("--dim", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if c_backend is None:
        raise SystemExit(
            "compiled backend not built; run `pip install -e . --no-build-isolation`"
        )
    check_agreement()

    py = bench_model_kernels(py_backend, args.batch, args.dim, args.repeat)
    cy = bench_model_kernels(c_backend, args.batch, args.dim, args.repeat)
    sg_py = bench_skipgram(py_backend, args.batch, args.dim, args.repeat)
    sg_cy = bench_skipgram(c_backend, args.batch, args.dim, args.repeat)

    print(f"batch={args.batch} dim={args.dim} best of {args.repeat}")
    print(f"{'kernel':<18} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name in py:
        ratio = py[name] / cy[name] if cy[name] > 0 else float("inf")
        print(f"{name:<18} {py[name]*1e3:>8.2f}ms {cy[name]*1e3:>8.2f}ms {ratio:>7.1f}x")
    ratio = sg_py / sg_cy if sg_cy > 0 else float("inf")
    print(f"{'sg_train_pairs':<18} {sg_py*1e3:>8.2f}ms {sg_cy*1e3:>8.2f}ms {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
