"""Mini-batch negative-sampling trainer for the five triple-scoring models.

One margin-ranking loss and one optimizer serve every model kind; only
the score/gradient kernels differ.  Training is single-threaded and
fully deterministic for a fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import EmptyGraph, NonFiniteLoss, SingleEntityGraph
from .graph import KnowledgeGraph, triples_as_sets
from .kernels import active as K
from .models import ModelArtifact, ModelConfig, ModelKind, _dispatch_scores


class Optimizer(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    dimension: int = 200
    batch_size: int = 128
    negatives_per_positive: int = 1
    margin: float = 1.0
    learning_rate: float = 1e-3
    optimizer: Optimizer = Optimizer.ADAM
    seed: int = 0
    #: None = kind default (on for TransE/TransR/HolE, off otherwise)
    norm_constraint: Optional[bool] = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")
        if self.margin <= 0:
            raise ValueError("margin must be > 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")

    def resolve_norm_constraint(self, kind: ModelKind) -> bool:
        if self.norm_constraint is not None:
            return self.norm_constraint
        return kind in (ModelKind.TRANSE, ModelKind.TRANSR, ModelKind.HOLE)


@dataclass
class TrainReport:
    epoch_losses: list[float] = field(default_factory=list)
    wall_time: float = 0.0
    triples_seen: int = 0

    def to_dict(self) -> dict:
        return {
            "epoch_losses": self.epoch_losses,
            "wall_time": self.wall_time,
            "triples_seen": self.triples_seen,
        }


def init_params(
    graph: KnowledgeGraph, config: ModelConfig, rng: np.random.Generator
) -> ModelArtifact:
    """Freshly initialized parameters: vectors uniform on [-6/sqrt(d), 6/sqrt(d)],
    TransR matrices identity, BoxE raw half-widths zero."""
    if graph.num_entities == 0 or graph.num_triples == 0:
        raise EmptyGraph("cannot initialize parameters on an empty graph")
    n, big_r, d = graph.num_entities, graph.num_relations, config.dimension
    bound = 6.0 / np.sqrt(d)

    def uni(shape):
        return rng.uniform(-bound, bound, size=shape)

    art = ModelArtifact(config=config, entity_vecs=uni((n, d)))
    kind = config.kind
    if kind in (ModelKind.TRANSE, ModelKind.DISTMULT, ModelKind.HOLE):
        art.rel_vecs = uni((big_r, d))
    elif kind is ModelKind.TRANSR:
        art.rel_vecs = uni((big_r, d))
        art.rel_mats = np.broadcast_to(np.eye(d), (big_r, d, d)).copy()
    elif kind is ModelKind.BOXE:
        art.entity_bumps = uni((n, d))
        art.head_centers = uni((big_r, d))
        art.tail_centers = uni((big_r, d))
        art.head_widths_raw = np.zeros((big_r, d))
        art.tail_widths_raw = np.zeros((big_r, d))
    else:
        raise ValueError(f"{kind} is not trained by this loop")
    return art


def negative_sample(
    triple: tuple[int, int, int], graph: KnowledgeGraph, rng: np.random.Generator
) -> tuple[int, int, int]:
    """Corrupt head or tail (fair coin) with a uniform entity until the
    result differs from the input triple."""
    n = graph.num_entities
    if n < 2:
        raise SingleEntityGraph("need at least two entities to corrupt a triple")
    h, r, t = (int(x) for x in triple)
    while True:
        replacement = int(rng.integers(n))
        if rng.random() < 0.5:
            candidate = (replacement, r, t)
        else:
            candidate = (h, r, replacement)
        if candidate != (h, r, t):
            return candidate


def margin_loss(score_pos: float, score_neg: float, margin: float) -> float:
    return max(0.0, margin - score_pos + score_neg)


def _corrupt_batch(pos: np.ndarray, n_entities: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized head-or-tail corruption with redraw on collisions."""
    if n_entities < 2:
        raise SingleEntityGraph("need at least two entities to corrupt a triple")
    out = pos.copy()
    todo = np.arange(len(pos))
    while len(todo):
        coin = rng.random(len(todo)) < 0.5
        repl = rng.integers(0, n_entities, len(todo))
        out[todo, 0] = np.where(coin, repl, pos[todo, 0])
        out[todo, 2] = np.where(coin, pos[todo, 2], repl)
        still_same = (out[todo] == pos[todo]).all(axis=1)
        todo = todo[still_same]
    return out


class _RowOptimizer:
    """Lazy per-row optimizer state over one parameter array.

    Adam keeps first/second moments and a per-row step count, so rows
    untouched by a batch pay nothing; each touched row is bias-corrected
    by its own step count.
    """

    def __init__(self, shape: tuple, config: TrainConfig):
        self.lr = config.learning_rate
        self.kind = config.optimizer
        if self.kind is Optimizer.ADAM:
            self.b1, self.b2, self.eps = 0.9, 0.999, 1e-8
            self.m = np.zeros(shape)
            self.v = np.zeros(shape)
            self.t = np.zeros(shape[0], dtype=np.int64)

    def step(self, param: np.ndarray, rows: np.ndarray, grads: np.ndarray) -> None:
        if self.kind is Optimizer.SGD:
            param[rows] -= self.lr * grads
            return
        self.t[rows] += 1
        tr = self.t[rows].astype(np.float64).reshape((-1,) + (1,) * (param.ndim - 1))
        m = self.m[rows] = self.b1 * self.m[rows] + (1.0 - self.b1) * grads
        v = self.v[rows] = self.b2 * self.v[rows] + (1.0 - self.b2) * grads * grads
        m_hat = m / (1.0 - self.b1**tr)
        v_hat = v / (1.0 - self.b2**tr)
        param[rows] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _aggregate_rows(rows: np.ndarray, grads: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum duplicate-row gradient contributions; returns (unique_rows, sums)."""
    uniq, inv = np.unique(rows, return_inverse=True)
    acc = np.zeros((len(uniq),) + grads.shape[1:])
    np.add.at(acc, inv, grads)
    return uniq, acc


class _BatchStepper:
    """Applies one margin-loss gradient step for a stacked pos+neg batch."""

    def __init__(self, artifact: ModelArtifact, config: TrainConfig):
        self.art = artifact
        self.opts = {
            name: _RowOptimizer(arr.shape, config)
            for name, arr in artifact.param_arrays().items()
        }

    def step(self, stacked: np.ndarray, coeff: np.ndarray) -> np.ndarray:
        """stacked: (M,3) triples, coeff: (M,) d(loss)/d(score) weights.
        Returns the unique entity rows touched (for norm rescaling)."""
        art = self.art
        kind = art.kind
        h = np.ascontiguousarray(stacked[:, 0])
        r = np.ascontiguousarray(stacked[:, 1])
        t = np.ascontiguousarray(stacked[:, 2])
        m, d = len(stacked), art.config.dimension
        g_h = np.zeros((m, d))
        g_t = np.zeros((m, d))

        if kind is ModelKind.TRANSE:
            g_rel = np.zeros_like(art.rel_vecs)
            K.transe_grads(
                art.entity_vecs, art.rel_vecs, h, r, t, coeff,
                int(art.config.transe_norm), g_h, g_t, g_rel,
            )
            rel_updates = {"rel_vecs": g_rel}
        elif kind is ModelKind.TRANSR:
            g_rel = np.zeros_like(art.rel_vecs)
            g_mat = np.zeros_like(art.rel_mats)
            K.transr_grads(
                art.entity_vecs, art.rel_vecs, art.rel_mats, h, r, t, coeff,
                g_h, g_t, g_rel, g_mat,
            )
            rel_updates = {"rel_vecs": g_rel, "rel_mats": g_mat}
        elif kind is ModelKind.DISTMULT:
            g_rel = np.zeros_like(art.rel_vecs)
            K.distmult_grads(art.entity_vecs, art.rel_vecs, h, r, t, coeff, g_h, g_t, g_rel)
            rel_updates = {"rel_vecs": g_rel}
        elif kind is ModelKind.HOLE:
            g_rel = np.zeros_like(art.rel_vecs)
            K.hole_grads(art.entity_vecs, art.rel_vecs, h, r, t, coeff, g_h, g_t, g_rel)
            rel_updates = {"rel_vecs": g_rel}
        elif kind is ModelKind.BOXE:
            g_bufs = {
                name: np.zeros_like(getattr(art, name))
                for name in ("head_centers", "head_widths_raw", "tail_centers", "tail_widths_raw")
            }
            K.boxe_grads(
                art.entity_vecs, art.entity_bumps,
                art.head_centers, art.head_widths_raw,
                art.tail_centers, art.tail_widths_raw,
                h, r, t, coeff, g_h, g_t,
                g_bufs["head_centers"], g_bufs["head_widths_raw"],
                g_bufs["tail_centers"], g_bufs["tail_widths_raw"],
            )
            rel_updates = g_bufs
        else:
            raise ValueError(f"{kind} is not trained by this loop")

        # entity-side scatter; for BoxE g_h/g_t are point gradients that
        # also drive the crossing bumps (head point carries tail bump)
        rows = np.concatenate([h, t])
        ent_rows, ent_grads = _aggregate_rows(rows, np.concatenate([g_h, g_t]))
        self.opts["entity_vecs"].step(art.entity_vecs, ent_rows, ent_grads)
        if kind is ModelKind.BOXE:
            bump_rows, bump_grads = _aggregate_rows(
                np.concatenate([t, h]), np.concatenate([g_h, g_t])
            )
            self.opts["entity_bumps"].step(art.entity_bumps, bump_rows, bump_grads)

        rel_rows = np.unique(r)
        for name, buf in rel_updates.items():
            self.opts[name].step(getattr(art, name), rel_rows, buf[rel_rows])
        return ent_rows


def _project_rows(ent: np.ndarray, rows: Optional[np.ndarray] = None) -> None:
    sub = ent if rows is None else ent[rows]
    norms = np.sqrt((sub * sub).sum(axis=1))
    over = norms > 1.0
    if over.any():
        sub[over] /= norms[over, None]
        if rows is not None:
            ent[rows] = sub


def train(
    graph: KnowledgeGraph,
    model: Union[ModelKind, ModelConfig],
    config: TrainConfig = TrainConfig(),
) -> tuple[ModelArtifact, TrainReport]:
    """Train one scoring model on the graph; deterministic for a fixed seed."""
    if isinstance(model, ModelKind):
        model_config = ModelConfig(kind=model, dimension=config.dimension)
    else:
        model_config = model
        if model_config.dimension != config.dimension:
            raise ValueError(
                f"model dimension {model_config.dimension} != "
                f"train dimension {config.dimension}"
            )
    if model_config.kind not in (
        ModelKind.TRANSE, ModelKind.TRANSR, ModelKind.DISTMULT, ModelKind.HOLE, ModelKind.BOXE,
    ):
        raise ValueError(f"{model_config.kind} is not trained by this loop")

    started = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    artifact = init_params(graph, model_config, rng)
    constrain = config.resolve_norm_constraint(model_config.kind)
    if constrain:
        _project_rows(artifact.entity_vecs)

    stepper = _BatchStepper(artifact, config)
    triples = graph.triples
    n_pos = len(triples)
    reps = config.negatives_per_positive
    report = TrainReport()

    for epoch in range(config.epochs):
        perm = rng.permutation(n_pos)
        loss_sum = 0.0
        pair_count = 0
        for start in range(0, n_pos, config.batch_size):
            pos = triples[perm[start:start + config.batch_size]]
            pos_rep = np.repeat(pos, reps, axis=0)
            neg = _corrupt_batch(pos_rep, graph.num_entities, rng)
            s_pos = _dispatch_scores(artifact, *(np.ascontiguousarray(pos_rep[:, i]) for i in range(3)))
            s_neg = _dispatch_scores(artifact, *(np.ascontiguousarray(neg[:, i]) for i in range(3)))
            losses = np.maximum(0.0, config.margin - s_pos + s_neg)
            if not np.isfinite(losses).all():
                raise NonFiniteLoss(
                    f"non-finite loss at epoch {epoch}, batch offset {start} "
                    f"({model_config.kind})"
                )
            loss_sum += float(losses.sum())
            pair_count += len(losses)

            active = (losses > 0.0).astype(np.float64) / len(losses)
            stacked = np.concatenate([pos_rep, neg])
            coeff = np.concatenate([-active, active])
            touched = stepper.step(stacked, coeff)
            if constrain:
                _project_rows(artifact.entity_vecs, touched)
        report.epoch_losses.append(loss_sum / max(pair_count, 1))

    report.wall_time = time.perf_counter() - started
    report.triples_seen = config.epochs * n_pos
    return artifact, report


def evaluate_link_prediction(
    artifact: ModelArtifact,
    graph: KnowledgeGraph,
    sample_size: int,
    rng: np.random.Generator,
) -> dict[str, float]:
    """Filtered MRR / Hits@10 under head and tail corruption.

    For each sampled triple, the true entity is ranked against every
    substitution, excluding other known-true triples; ties break by
    entity index ascending.
    """
    n_triples = graph.num_triples
    if n_triples == 0:
        raise EmptyGraph("nothing to evaluate")
    take = min(sample_size, n_triples)
    picks = rng.choice(n_triples, size=take, replace=False)
    heads_by_rt, tails_by_hr = triples_as_sets(graph)
    n = graph.num_entities
    all_e = np.arange(n, dtype=np.int64)

    rr_sum = 0.0
    hits = 0
    queries = 0
    for h, r, t in graph.triples[picks]:
        h, r, t = int(h), int(r), int(t)
        for side in ("head", "tail"):
            if side == "head":
                scores = _dispatch_scores(
                    artifact, all_e, np.full(n, r, dtype=np.int64), np.full(n, t, dtype=np.int64)
                )
                known = heads_by_rt[(r, t)]
                true = h
            else:
                scores = _dispatch_scores(
                    artifact, np.full(n, h, dtype=np.int64), np.full(n, r, dtype=np.int64), all_e
                )
                known = tails_by_hr[(h, r)]
                true = t
            alive = np.ones(n, dtype=bool)
            for e in known:
                if e != true:
                    alive[e] = False
            s_true = scores[true]
            better = alive & ((scores > s_true) | ((scores == s_true) & (all_e < true)))
            rank = 1 + int(better.sum())
            rr_sum += 1.0 / rank
            hits += rank <= 10
            queries += 1
    return {"mrr": rr_sum / queries, "hits_at_10": hits / queries}
