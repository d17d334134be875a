"""Similarity scores computed directly from graph topology.

Four metrics: shortest-path distance on inverted weights, cosine between
adjacency rows, pairwise PPMI, and truncated random-walk profile
similarity. Each comes as a standalone query function plus a provider
factory that precomputes what repeated queries need.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .embeddings import EmbeddingSet
from .errors import ValidationError
from .graph import ColexGraph, DenseMatrix, adjacency_matrix, invert_weights
from .numerics import cosine_similarity
from .runtime import worker_count

PROVIDER_SOURCES = frozenset(
    {"shortest_path", "cosine_adjacency", "ppmi", "random_walk", "embedding"}
)

DISCONNECTED = math.inf


@dataclass(frozen=True)
class SimilarityProvider:
    """A scoring function over concept pairs plus its orientation.

    `higher_is_more_similar` is False only for shortest-path distances.
    `covered` is the set of concepts the provider can score.
    """

    source: str
    score: Callable
    higher_is_more_similar: bool
    covered: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.source not in PROVIDER_SOURCES:
            raise ValidationError(f"unknown provider source {self.source!r}")
        expected = self.source != "shortest_path"
        if self.higher_is_more_similar != expected:
            raise ValidationError(
                f"{self.source} provider must have higher_is_more_similar={expected}"
            )


def _check_nodes(g: ColexGraph, *nodes):
    for node in nodes:
        if node not in g.nodes:
            raise KeyError(f"concept {node!r} not in graph")


def _neighbor_map(g: ColexGraph) -> dict:
    adj = {node: [] for node in g.nodes}
    for src, dst, w in g.edges:
        adj[src].append((dst, w))
        if not g.directed:
            adj[dst].append((src, w))
    return adj


def _dijkstra(adj: dict, source) -> dict:
    dist = {source: 0.0}
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        for nbr, w in adj[node]:
            nd = d + w
            if nd < dist.get(nbr, math.inf):
                dist[nbr] = nd
                heapq.heappush(heap, (nd, nbr))
    return dist


def shortest_path_distance(g: ColexGraph, a, b) -> float:
    """Dijkstra distance on an inverse-distance graph; inf marks disconnection."""
    if g.weight_semantics != "inverse_distance":
        raise ValidationError(
            "shortest_path_distance needs inverse_distance weights; apply invert_weights"
        )
    _check_nodes(g, a, b)
    if a == b:
        return 0.0
    dist = _dijkstra(_neighbor_map(g), a)
    return dist.get(b, DISCONNECTED)


def cosine_adjacency_similarity(g: ColexGraph, a, b) -> float:
    """Cosine of the two concepts' adjacency-matrix rows; isolated rows give 0."""
    _check_nodes(g, a, b)
    order = g.sorted_nodes()
    mat = adjacency_matrix(g, order).values
    idx = {node: i for i, node in enumerate(order)}
    return _row_cosine(mat[idx[a]], mat[idx[b]])


def _row_cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def ppmi_similarity(g: ColexGraph, a, b) -> float:
    """Positive pointwise mutual information of the pair under adjacency mass."""
    if g.weight_semantics != "family_count":
        raise ValidationError("ppmi_similarity needs family_count weights")
    _check_nodes(g, a, b)
    order = g.sorted_nodes()
    mat = adjacency_matrix(g, order).values
    idx = {node: i for i, node in enumerate(order)}
    return float(_ppmi_matrix(mat)[idx[a], idx[b]])


def _ppmi_matrix(mat: np.ndarray) -> np.ndarray:
    total = mat.sum()
    if total == 0:
        return np.zeros_like(mat)
    p_joint = mat / total
    p_node = mat.sum(axis=1) / total
    expected = np.outer(p_node, p_node)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(p_joint / expected)
    pmi[~np.isfinite(pmi)] = 0.0
    return np.maximum(pmi, 0.0)


def random_walk_similarity(
    g: ColexGraph, a, b, alpha: float = 0.5, max_steps: int = 5
) -> float:
    """Cosine of decay-weighted visit profiles over walks of up to max_steps."""
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    if max_steps < 1:
        raise ValidationError(f"max_steps must be >= 1, got {max_steps}")
    if g.weight_semantics != "family_count":
        raise ValidationError("random_walk_similarity needs family_count weights")
    _check_nodes(g, a, b)
    order = g.sorted_nodes()
    profiles = _walk_profiles(adjacency_matrix(g, order).values, alpha, max_steps)
    idx = {node: i for i, node in enumerate(order)}
    return _row_cosine(profiles[idx[a]], profiles[idx[b]])


def _walk_profiles(mat: np.ndarray, alpha: float, max_steps: int) -> np.ndarray:
    """sum_{k=1..K} alpha^k P^k with P the row-normalized adjacency."""
    rowsum = mat.sum(axis=1, keepdims=True)
    p = np.divide(mat, rowsum, out=np.zeros_like(mat), where=rowsum > 0)
    power = np.eye(mat.shape[0])
    acc = np.zeros_like(mat)
    for k in range(1, max_steps + 1):
        power = power @ p
        acc += alpha**k * power
    return acc


# ---------------------------------------------------------------------------
# provider factories


def shortest_path_provider(g: ColexGraph) -> SimilarityProvider:
    """Distance provider; disconnected pairs get 2x the largest finite distance.

    Accepts a family-count graph and inverts the weights internally.
    Per-source distances are cached; the global default fill is computed
    the first time a disconnected pair is actually queried.
    """
    if g.weight_semantics == "family_count":
        g = invert_weights(g)
    adj = _neighbor_map(g)
    cache: dict = {}
    fill: dict = {}

    def source_dist(node) -> dict:
        if node not in cache:
            cache[node] = _dijkstra(adj, node)
        return cache[node]

    def default_fill() -> float:
        if "value" not in fill:
            finite_max = 0.0
            for node in adj:
                dist = source_dist(node)
                if dist:
                    finite_max = max(finite_max, max(dist.values()))
            fill["value"] = 2.0 * finite_max
        return fill["value"]

    def score(a, b) -> float:
        _check_nodes(g, a, b)
        if a == b:
            return 0.0
        d = source_dist(a).get(b, DISCONNECTED)
        return default_fill() if d == DISCONNECTED else d

    return SimilarityProvider(
        source="shortest_path",
        score=score,
        higher_is_more_similar=False,
        covered=frozenset(g.nodes),
    )


def _matrix_row_provider(source: str, g: ColexGraph, rows: np.ndarray, order: list):
    idx = {node: i for i, node in enumerate(order)}
    norms = np.linalg.norm(rows, axis=1)

    def score(a, b) -> float:
        _check_nodes(g, a, b)
        i, j = idx[a], idx[b]
        if norms[i] == 0.0 or norms[j] == 0.0:
            return 0.0
        return float(np.dot(rows[i], rows[j]) / (norms[i] * norms[j]))

    return SimilarityProvider(
        source=source, score=score, higher_is_more_similar=True,
        covered=frozenset(g.nodes),
    )


def cosine_adjacency_provider(g: ColexGraph) -> SimilarityProvider:
    order = g.sorted_nodes()
    mat = adjacency_matrix(g, order).values
    return _matrix_row_provider("cosine_adjacency", g, mat, order)


def ppmi_provider(g: ColexGraph, mode: str = "pairwise") -> SimilarityProvider:
    """PPMI provider; `mode` picks the pairwise value or cosine over PPMI rows."""
    if g.weight_semantics != "family_count":
        raise ValidationError("ppmi_provider needs family_count weights")
    order = g.sorted_nodes()
    mat = adjacency_matrix(g, order).values
    ppmi = _ppmi_matrix(mat)
    if mode == "cosine_rows":
        return _matrix_row_provider("ppmi", g, ppmi, order)
    if mode != "pairwise":
        raise ValidationError(f"unknown ppmi mode {mode!r}")
    idx = {node: i for i, node in enumerate(order)}

    def score(a, b) -> float:
        _check_nodes(g, a, b)
        return float(ppmi[idx[a], idx[b]])

    return SimilarityProvider(
        source="ppmi", score=score, higher_is_more_similar=True,
        covered=frozenset(g.nodes),
    )


def random_walk_provider(
    g: ColexGraph, alpha: float = 0.5, max_steps: int = 5
) -> SimilarityProvider:
    if g.weight_semantics != "family_count":
        raise ValidationError("random_walk_provider needs family_count weights")
    order = g.sorted_nodes()
    profiles = _walk_profiles(adjacency_matrix(g, order).values, alpha, max_steps)
    return _matrix_row_provider("random_walk", g, profiles, order)


def embedding_provider(es: EmbeddingSet) -> SimilarityProvider:
    def score(a, b) -> float:
        for node in (a, b):
            if node not in es.vectors:
                raise KeyError(f"concept {node!r} not in embedding set")
        return cosine_similarity(es.vectors[a], es.vectors[b])

    return SimilarityProvider(
        source="embedding", score=score, higher_is_more_similar=True,
        covered=es.coverage(),
    )


def similarity_matrix(provider: SimilarityProvider, order) -> DenseMatrix:
    """Full pairwise score matrix over `order`, computed row-parallel."""
    order = list(order)

    def one_row(a) -> np.ndarray:
        return np.array([provider.score(a, b) for b in order])

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(one_row, order))
    values = np.vstack(rows) if rows else np.zeros((0, 0))
    return DenseMatrix(values=values, row_labels=tuple(order))
