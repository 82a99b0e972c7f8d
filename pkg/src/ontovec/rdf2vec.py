"""Random-walk embeddings: walk corpus over the graph, then skip-gram
with negative sampling over the walk sentences.

Walks follow edge direction and interleave relation tokens, so a
sentence reads ``[e0, r1, e1, r2, e2, ...]``.  Each start entity gets
its own derived RNG stream, which keeps the corpus deterministic even
if generation is ever parallelized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCorpus
from .graph import KnowledgeGraph
from .kernels import active as K
from .models import ModelArtifact, ModelConfig, ModelKind


@dataclass(frozen=True)
class WalkConfig:
    walks_per_entity: int = 10
    depth: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_entity < 1:
            raise ValueError("walks_per_entity must be >= 1")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")


@dataclass(frozen=True)
class SkipGramConfig:
    dimension: int = 200
    window: int = 5
    negatives: int = 5
    epochs: int = 100
    initial_lr: float = 0.025
    final_lr: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")


def generate_walks(graph: KnowledgeGraph, config: WalkConfig) -> list[list[str]]:
    """Uniform random walks from every non-obsolete entity.

    Up to ``walks_per_entity`` walks per start (duplicates removed,
    first-seen order kept), each at most ``depth`` hops; a walk stops
    early at a sink.  An isolated entity yields its singleton sentence.
    """
    corpus: list[list[str]] = []
    for idx, record in enumerate(graph.entities):
        if record.obsolete:
            continue
        # derived stream per start entity: order-independent determinism
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=config.seed, spawn_key=(idx,))
        )
        seen: set[tuple[str, ...]] = set()
        for _ in range(config.walks_per_entity):
            tokens = [record.iri]
            cur = idx
            for _hop in range(config.depth):
                edges = graph.out_adjacency[cur]
                if len(edges) == 0:
                    break
                rel, nxt = edges[int(rng.integers(len(edges)))]
                tokens.append(graph.relations[int(rel)].iri)
                tokens.append(graph.entities[int(nxt)].iri)
                cur = int(nxt)
            key = tuple(tokens)
            if key not in seen:
                seen.add(key)
                corpus.append(tokens)
    return corpus


def dump_corpus(corpus: list[list[str]]) -> str:
    """One walk per line, tokens space-separated."""
    return "\n".join(" ".join(walk) for walk in corpus) + ("\n" if corpus else "")


def skipgram_pair_loss_and_grads(
    w_center: np.ndarray,
    v_context: np.ndarray,
    v_negatives: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and gradients for one (center, context, negatives) step.

    Reference math for the in-place kernel update: loss is
    ``-log sigma(w.v_ctx) - sum_j log sigma(-w.v_neg_j)``.  Returns
    ``(loss, d/dw, d/dv_context, d/dv_negatives)``.
    """
    x_pos = float(v_context @ w_center)
    x_neg = v_negatives @ w_center
    s_pos = _sigmoid(x_pos)
    s_neg = np.array([_sigmoid(float(x)) for x in x_neg])
    loss = -_log_sigmoid(x_pos) - sum(_log_sigmoid(-float(x)) for x in x_neg)
    g_w = (s_pos - 1.0) * v_context + s_neg @ v_negatives
    g_ctx = (s_pos - 1.0) * w_center
    g_negs = s_neg[:, None] * w_center[None, :]
    return loss, g_w, g_ctx, g_negs


def _sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def _log_sigmoid(x: float) -> float:
    return min(x, 0.0) - math.log1p(math.exp(-abs(x)))


class SkipGramVectors:
    """Input-side vectors keyed by token."""

    def __init__(self, tokens: list[str], vectors: np.ndarray):
        self.tokens = tokens
        self.vectors = vectors
        self._index = {tok: i for i, tok in enumerate(tokens)}

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __getitem__(self, token: str) -> np.ndarray:
        return self.vectors[self._index[token]]

    def __len__(self) -> int:
        return len(self.tokens)


def train_skipgram(corpus: list[list[str]], config: SkipGramConfig) -> SkipGramVectors:
    """Skip-gram with negative sampling over walk sentences.

    Vocabulary covers every token in first-appearance order; the noise
    distribution is unigram^0.75; per center position the window radius
    is drawn uniformly from [1, window].  Linear learning-rate decay from
    ``initial_lr`` to ``final_lr`` over all center positions of all epochs.
    """
    if not corpus or all(len(s) == 0 for s in corpus):
        raise EmptyCorpus("no walk sentences to train on")

    vocab: dict[str, int] = {}
    counts: list[int] = []
    encoded: list[np.ndarray] = []
    for sentence in corpus:
        ids = np.empty(len(sentence), dtype=np.int64)
        for i, tok in enumerate(sentence):
            if tok not in vocab:
                vocab[tok] = len(vocab)
                counts.append(0)
            ids[i] = vocab[tok]
            counts[vocab[tok]] += 1
        encoded.append(ids)

    n_vocab = len(vocab)
    d = config.dimension
    rng = np.random.default_rng(config.seed)
    w_in = (rng.random((n_vocab, d)) - 0.5) / d
    w_out = np.zeros((n_vocab, d))

    noise = np.asarray(counts, dtype=np.float64) ** 0.75
    cum_noise = np.cumsum(noise / noise.sum())

    total_positions = config.epochs * sum(len(s) for s in encoded)
    lr_span = config.final_lr - config.initial_lr
    position = 0
    for _epoch in range(config.epochs):
        for ids in encoded:
            length = len(ids)
            if length == 0:
                continue
            radii = rng.integers(1, config.window + 1, size=length)
            centers: list[int] = []
            contexts: list[int] = []
            lrs: list[float] = []
            for i in range(length):
                lr = config.initial_lr + lr_span * (position / max(total_positions - 1, 1))
                position += 1
                lo = max(0, i - int(radii[i]))
                hi = min(length - 1, i + int(radii[i]))
                for j in range(lo, hi + 1):
                    if j == i:
                        continue
                    centers.append(int(ids[i]))
                    contexts.append(int(ids[j]))
                    lrs.append(max(lr, config.final_lr))
            if not centers:
                continue
            draws = rng.random((len(centers), config.negatives))
            negatives = np.searchsorted(cum_noise, draws).astype(np.int64)
            np.clip(negatives, 0, n_vocab - 1, out=negatives)
            K.sg_train_pairs(
                w_in, w_out,
                np.asarray(centers, dtype=np.int64),
                np.asarray(contexts, dtype=np.int64),
                negatives,
                np.asarray(lrs, dtype=np.float64),
            )
    return SkipGramVectors(list(vocab), w_in)


def rdf2vec_embed(
    graph: KnowledgeGraph,
    walk_config: WalkConfig = WalkConfig(),
    sg_config: SkipGramConfig = SkipGramConfig(),
) -> ModelArtifact:
    """Walks then skip-gram; exports entity-token vectors only."""
    corpus = generate_walks(graph, walk_config)
    vectors = train_skipgram(corpus, sg_config)
    keep = [i for i, rec in enumerate(graph.entities) if not rec.obsolete]
    out = np.empty((len(keep), sg_config.dimension))
    for row, ent_idx in enumerate(keep):
        out[row] = vectors[graph.entities[ent_idx].iri]
    config = ModelConfig(kind=ModelKind.RDF2VEC, dimension=sg_config.dimension)
    return ModelArtifact(config=config, entity_vecs=out)
