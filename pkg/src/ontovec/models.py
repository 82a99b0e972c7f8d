"""Triple-scoring model definitions: configs, parameter containers, and
single-triple score/gradient operations.

All five scoring functions follow one sign convention: higher score means
a more plausible triple, so distance-based models return negated
distances.  Batch work is delegated to :mod:`ontovec.kernels`; the
functions here are the single-triple surface plus reference math used by
the test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional

import numpy as np

from .kernels import active as K


class ModelKind(str, Enum):
    TRANSE = "TransE"
    TRANSR = "TransR"
    DISTMULT = "DistMult"
    HOLE = "HolE"
    BOXE = "BoxE"
    RDF2VEC = "RDF2Vec"

    def __str__(self) -> str:  # noqa: D105
        return self.value


#: kinds trained by the margin-ranking trainer (RDF2Vec has its own pipeline)
SCORING_KINDS = (
    ModelKind.TRANSE,
    ModelKind.TRANSR,
    ModelKind.DISTMULT,
    ModelKind.HOLE,
    ModelKind.BOXE,
)

ALL_KINDS = SCORING_KINDS + (ModelKind.RDF2VEC,)


class Norm(IntEnum):
    L1 = 1
    L2 = 2


@dataclass(frozen=True)
class ModelConfig:
    kind: ModelKind
    dimension: int = 200
    transe_norm: Norm = Norm.L2

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")


@dataclass(eq=False)
class ModelArtifact:
    """Learned parameters for one model over one graph.

    ``entity_vecs`` holds the per-entity points for every kind (the only
    parameters RDF2Vec keeps).  The remaining fields are populated per
    kind: ``rel_vecs`` for TransE/DistMult/HolE/TransR, ``rel_mats`` for
    TransR, and bump/box arrays for BoxE.
    """

    config: ModelConfig
    entity_vecs: np.ndarray
    rel_vecs: Optional[np.ndarray] = None
    rel_mats: Optional[np.ndarray] = None
    entity_bumps: Optional[np.ndarray] = None
    head_centers: Optional[np.ndarray] = None
    head_widths_raw: Optional[np.ndarray] = None
    tail_centers: Optional[np.ndarray] = None
    tail_widths_raw: Optional[np.ndarray] = None

    @property
    def kind(self) -> ModelKind:
        return self.config.kind

    @property
    def num_entities(self) -> int:
        return int(self.entity_vecs.shape[0])

    def param_arrays(self) -> dict[str, np.ndarray]:
        """Name -> array for every parameter the kind actually uses."""
        out = {"entity_vecs": self.entity_vecs}
        kind = self.kind
        if kind in (ModelKind.TRANSE, ModelKind.DISTMULT, ModelKind.HOLE):
            out["rel_vecs"] = self.rel_vecs
        elif kind is ModelKind.TRANSR:
            out["rel_vecs"] = self.rel_vecs
            out["rel_mats"] = self.rel_mats
        elif kind is ModelKind.BOXE:
            out["entity_bumps"] = self.entity_bumps
            out["head_centers"] = self.head_centers
            out["head_widths_raw"] = self.head_widths_raw
            out["tail_centers"] = self.tail_centers
            out["tail_widths_raw"] = self.tail_widths_raw
        return out

    def validate(self) -> None:
        d = self.config.dimension
        for name, arr in self.param_arrays().items():
            if arr is None:
                raise ValueError(f"{self.kind}: missing parameter array {name}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{self.kind}: non-finite values in {name}")
            if name == "rel_mats":
                if arr.ndim != 3 or arr.shape[1:] != (d, d):
                    raise ValueError(f"rel_mats shape {arr.shape} != (R, {d}, {d})")
            elif arr.ndim != 2 or arr.shape[1] != d:
                raise ValueError(f"{name} shape {arr.shape} != (*, {d})")


def _idx(i: int) -> np.ndarray:
    return np.array([i], dtype=np.int64)


def _dispatch_scores(artifact: ModelArtifact, h, r, t) -> np.ndarray:
    """Batch scores for int64 index arrays; used by trainer and evaluator."""
    kind = artifact.kind
    if kind is ModelKind.TRANSE:
        return K.transe_scores(
            artifact.entity_vecs, artifact.rel_vecs, h, r, t, int(artifact.config.transe_norm)
        )
    if kind is ModelKind.TRANSR:
        return K.transr_scores(artifact.entity_vecs, artifact.rel_vecs, artifact.rel_mats, h, r, t)
    if kind is ModelKind.DISTMULT:
        return K.distmult_scores(artifact.entity_vecs, artifact.rel_vecs, h, r, t)
    if kind is ModelKind.HOLE:
        return K.hole_scores(artifact.entity_vecs, artifact.rel_vecs, h, r, t)
    if kind is ModelKind.BOXE:
        return K.boxe_scores(
            artifact.entity_vecs, artifact.entity_bumps,
            artifact.head_centers, artifact.head_widths_raw,
            artifact.tail_centers, artifact.tail_widths_raw,
            h, r, t,
        )
    raise ValueError(f"{kind} is not a triple-scoring model")


def score(artifact: ModelArtifact, head: int, relation: int, tail: int) -> float:
    """Score one triple under the artifact's model; higher is better."""
    return float(_dispatch_scores(artifact, _idx(head), _idx(relation), _idx(tail))[0])


def score_transe(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.TRANSE
    return score(artifact, head, relation, tail)


def score_transr(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.TRANSR
    return score(artifact, head, relation, tail)


def score_distmult(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.DISTMULT
    return score(artifact, head, relation, tail)


def score_hole(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.HOLE
    return score(artifact, head, relation, tail)


def score_boxe(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.BOXE
    return score(artifact, head, relation, tail)


def gradients(artifact: ModelArtifact, head: int, relation: int, tail: int) -> dict[str, np.ndarray]:
    """Dense gradient of ``score`` w.r.t. every parameter array.

    Returns arrays shaped like :meth:`ModelArtifact.param_arrays`, zero
    everywhere the triple does not touch.  Meant for gradient checks and
    small-scale use; the trainer uses the sparse batch path instead.
    """
    kind = artifact.kind
    h, r, t = _idx(head), _idx(relation), _idx(tail)
    one = np.ones(1, dtype=np.float64)
    d = artifact.config.dimension
    g = {name: np.zeros_like(arr) for name, arr in artifact.param_arrays().items()}
    g_h = np.zeros((1, d))
    g_t = np.zeros((1, d))

    if kind is ModelKind.TRANSE:
        K.transe_grads(
            artifact.entity_vecs, artifact.rel_vecs, h, r, t, one,
            int(artifact.config.transe_norm), g_h, g_t, g["rel_vecs"],
        )
    elif kind is ModelKind.TRANSR:
        K.transr_grads(
            artifact.entity_vecs, artifact.rel_vecs, artifact.rel_mats,
            h, r, t, one, g_h, g_t, g["rel_vecs"], g["rel_mats"],
        )
    elif kind is ModelKind.DISTMULT:
        K.distmult_grads(artifact.entity_vecs, artifact.rel_vecs, h, r, t, one, g_h, g_t, g["rel_vecs"])
    elif kind is ModelKind.HOLE:
        K.hole_grads(artifact.entity_vecs, artifact.rel_vecs, h, r, t, one, g_h, g_t, g["rel_vecs"])
    elif kind is ModelKind.BOXE:
        g_ph = np.zeros((1, d))
        g_pt = np.zeros((1, d))
        K.boxe_grads(
            artifact.entity_vecs, artifact.entity_bumps,
            artifact.head_centers, artifact.head_widths_raw,
            artifact.tail_centers, artifact.tail_widths_raw,
            h, r, t, one, g_ph, g_pt,
            g["head_centers"], g["head_widths_raw"],
            g["tail_centers"], g["tail_widths_raw"],
        )
        g["entity_vecs"][head] += g_ph[0]
        g["entity_vecs"][tail] += g_pt[0]
        g["entity_bumps"][tail] += g_ph[0]
        g["entity_bumps"][head] += g_pt[0]
        return g
    else:
        raise ValueError(f"{kind} is not a triple-scoring model")

    g["entity_vecs"][head] += g_h[0]
    g["entity_vecs"][tail] += g_t[0]
    return g


def grad_transe(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.TRANSE
    return gradients(artifact, head, relation, tail)


def grad_transr(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.TRANSR
    return gradients(artifact, head, relation, tail)


def grad_distmult(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.DISTMULT
    return gradients(artifact, head, relation, tail)


def grad_hole(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.HOLE
    return gradients(artifact, head, relation, tail)


def grad_boxe(artifact, head, relation, tail):
    assert artifact.kind is ModelKind.BOXE
    return gradients(artifact, head, relation, tail)


# -- reference math ------------------------------------------------------

def circular_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct-definition circular correlation: out_k = sum_i a_i b_{(i+k) mod d}.

    This O(d^2) form is the reference; any accelerated path must agree
    with it to 1e-9.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = a.shape[0]
    return np.array([np.dot(a, np.roll(b, -k)) for k in range(d)])


def softplus(x):
    return np.logaddexp(0.0, x)


def box_dim_distance(p, center, width_raw, branch: str = "auto"):
    """Per-dimension point-to-box distance used by the BoxE score.

    Box geometry from ``(center, width_raw)``: half-width softplus(raw),
    effective width w+ = 2*halfwidth + 1.  Inside the box the distance is
    |p-c|/w+; outside it is |p-c|*w+ - kappa with kappa chosen so both
    branches agree at the boundary.  ``branch`` can force either formula
    (used by the continuity check).
    """
    p = np.asarray(p, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    hw = softplus(np.asarray(width_raw, dtype=np.float64))
    wp = 2.0 * hw + 1.0
    absd = np.abs(p - center)
    inside_val = absd / wp
    kappa = 0.5 * (wp - 1.0) * (wp - 1.0 / wp)
    outside_val = absd * wp - kappa
    if branch == "inside":
        return inside_val
    if branch == "outside":
        return outside_val
    return np.where((p >= center - hw) & (p <= center + hw), inside_val, outside_val)
