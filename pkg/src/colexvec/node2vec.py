"""Node2Vec embedding: biased random-walk corpus plus a full-softmax skip-gram.

The trainer optimizes the exact softmax cross-entropy over the whole
vocabulary (no negative sampling, no hierarchical softmax), which is
affordable at colexification-network scale (~1,300 nodes). Training is
single-threaded mini-batch SGD for determinism; walk sampling derives an
independent RNG per start node so corpus generation is order-independent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSet
from .errors import ValidationError
from .graph import ColexGraph
from .runtime import config_digest

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 5
    walk_length: int = 10
    p: float = 1.0
    q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_node < 1 or self.walk_length < 1:
            raise ValidationError("walk counts must be >= 1")
        if self.p <= 0 or self.q <= 0:
            raise ValidationError("p and q must be positive")


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 128
    window: int = 2
    learning_rate: float = 0.001
    epochs: int = 1500
    validation_split: float = 0.2
    batch_size: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")
        if self.window < 1:
            raise ValidationError("window must be >= 1")
        if not (0.0 <= self.validation_split < 1.0):
            raise ValidationError("validation_split must be in [0, 1)")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValidationError("batch_size and epochs must be >= 1")


def sample_walks(g: ColexGraph, cfg: WalkConfig) -> list:
    """Weighted second-order random walks, `walks_per_node` per non-isolated node.

    With p = q = 1 the next step is plain weight-proportional; otherwise the
    previous node reweights candidates by 1/p (return), 1 (common neighbor),
    or 1/q (outward). Identical seeds give an identical corpus.
    """
    if g.directed:
        raise ValidationError("sample_walks needs an undirected graph")
    if g.weight_semantics != "family_count":
        raise ValidationError("sample_walks needs family_count weights")

    order = g.sorted_nodes()
    neighbors = {node: [] for node in order}
    for src, dst, w in g.edges:
        neighbors[src].append((dst, w))
        neighbors[dst].append((src, w))
    for node in neighbors:
        neighbors[node].sort()
    neighbor_sets = {node: {nbr for nbr, _ in nbrs} for node, nbrs in neighbors.items()}
    first_order = cfg.p == 1.0 and cfg.q == 1.0

    probs = {}
    for node, nbrs in neighbors.items():
        if nbrs:
            w = np.array([weight for _, weight in nbrs])
            probs[node] = w / w.sum()

    walks = []
    for index, start in enumerate(order):
        if not neighbors[start]:
            continue
        rng = np.random.default_rng([cfg.seed, index])
        for _ in range(cfg.walks_per_node):
            walk = [start]
            while len(walk) < cfg.walk_length:
                cur = walk[-1]
                nbrs = neighbors[cur]
                if not nbrs:
                    break
                if first_order or len(walk) == 1:
                    step_probs = probs[cur]
                else:
                    prev = walk[-2]
                    prev_nbrs = neighbor_sets[prev]
                    biased = np.array(
                        [
                            w / cfg.p if nbr == prev
                            else (w if nbr in prev_nbrs else w / cfg.q)
                            for nbr, w in nbrs
                        ]
                    )
                    step_probs = biased / biased.sum()
                choice = rng.choice(len(nbrs), p=step_probs)
                walk.append(nbrs[choice][0])
            walks.append(walk)
    return walks


def extract_pairs(walks, window: int) -> list:
    """Skip-gram (center, context) pairs within the given window."""
    if window < 1:
        raise ValidationError("window must be >= 1")
    pairs = []
    for walk in walks:
        for i, center in enumerate(walk):
            lo = max(0, i - window)
            hi = min(len(walk), i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    pairs.append((center, walk[j]))
    return pairs


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def batch_loss_and_grads(w_in, w_out, centers, contexts):
    """Mean softmax cross-entropy over a pair batch and its parameter gradients.

    Returns (loss, grad_w_in, grad_w_out); grad_w_in is dense over the
    vocabulary (zero rows for absent centers).
    """
    batch = len(centers)
    h = w_in[centers]
    proba = softmax_rows(h @ w_out.T)
    loss = float(-np.mean(np.log(proba[np.arange(batch), contexts])))
    dlogits = proba
    dlogits[np.arange(batch), contexts] -= 1.0
    dlogits /= batch
    grad_w_out = dlogits.T @ h
    grad_h = dlogits @ w_out
    grad_w_in = np.zeros_like(w_in)
    np.add.at(grad_w_in, centers, grad_h)
    return loss, grad_w_in, grad_w_out


def _mean_loss(w_in, w_out, centers, contexts, chunk: int = 4096) -> float:
    total = 0.0
    for start in range(0, len(centers), chunk):
        c = centers[start: start + chunk]
        t = contexts[start: start + chunk]
        proba = softmax_rows(w_in[c] @ w_out.T)
        total += float(-np.sum(np.log(proba[np.arange(len(c)), t])))
    return total / len(centers)


def train_skipgram(pairs, vocab, cfg: SkipGramConfig) -> EmbeddingSet:
    """Train input-side vectors with full-softmax SGD over shuffled mini-batches.

    A validation_split fraction of the pairs is held out purely for loss
    monitoring; it never gates training. Per-epoch losses end up in the
    result's provenance.
    """
    if not pairs:
        raise ValidationError("empty pair list")
    vocab = list(vocab)
    index = {concept: i for i, concept in enumerate(vocab)}
    if len(index) != len(vocab):
        raise ValidationError("vocab contains duplicates")
    try:
        centers = np.array([index[c] for c, _ in pairs], dtype=np.int64)
        contexts = np.array([index[t] for _, t in pairs], dtype=np.int64)
    except KeyError as exc:
        raise ValidationError(f"pair member missing from vocab: {exc}") from None

    rng = np.random.default_rng(cfg.seed)
    n_vocab = len(vocab)
    w_in = (rng.random((n_vocab, cfg.dim)) - 0.5) / cfg.dim
    w_out = (rng.random((n_vocab, cfg.dim)) - 0.5) / cfg.dim

    n_pairs = len(pairs)
    perm = rng.permutation(n_pairs)
    n_val = int(round(cfg.validation_split * n_pairs))
    if cfg.validation_split > 0 and (n_val == 0 or n_val == n_pairs):
        raise ValidationError(
            f"validation split {cfg.validation_split} leaves an empty part "
            f"for {n_pairs} pairs"
        )
    val_idx = perm[:n_val]
    train_idx = perm[n_val:]

    train_losses = []
    val_losses = []
    for epoch in range(cfg.epochs):
        shuffled = train_idx[rng.permutation(len(train_idx))]
        total = 0.0
        for start in range(0, len(shuffled), cfg.batch_size):
            sel = shuffled[start: start + cfg.batch_size]
            loss, grad_in, grad_out = batch_loss_and_grads(
                w_in, w_out, centers[sel], contexts[sel]
            )
            total += loss * len(sel)
            w_in -= cfg.learning_rate * grad_in
            w_out -= cfg.learning_rate * grad_out
        train_losses.append(total / len(shuffled))
        if n_val:
            val_losses.append(_mean_loss(w_in, w_out, centers[val_idx], contexts[val_idx]))
            logger.debug(
                "epoch %d: train loss %.6f, validation loss %.6f",
                epoch, train_losses[-1], val_losses[-1],
            )
        else:
            logger.debug("epoch %d: train loss %.6f", epoch, train_losses[-1])

    provenance = {
        "method": "skipgram",
        "seed": cfg.seed,
        "config_digest": config_digest(vars(cfg) | {"__config__": "skipgram"}),
        "train_loss": tuple(train_losses),
        "validation_loss": tuple(val_losses),
    }
    vectors = {concept: w_in[i] for concept, i in index.items()}
    return EmbeddingSet(dim=cfg.dim, vectors=vectors, provenance=provenance)


def node2vec_embed(
    g: ColexGraph, walk_cfg: WalkConfig, sg_cfg: SkipGramConfig
) -> EmbeddingSet:
    """Full Node2Vec pipeline: sample walks, extract pairs, train skip-gram."""
    walks = sample_walks(g, walk_cfg)
    pairs = extract_pairs(walks, sg_cfg.window)
    vocab = sorted(g.nodes - g.isolated_nodes())
    trained = train_skipgram(pairs, vocab, sg_cfg)
    provenance = dict(trained.provenance)
    provenance.update(
        {
            "method": "node2vec",
            "colex_types": (g.colex_type,),
            "seed": (walk_cfg.seed, sg_cfg.seed),
            "config_digest": config_digest(
                {"walks": vars(walk_cfg), "skipgram": vars(sg_cfg)}
            ),
            "uncovered": tuple(sorted(g.isolated_nodes())),
        }
    )
    return EmbeddingSet(dim=trained.dim, vectors=trained.vectors, provenance=provenance)
