"""The three evaluation protocols: rating correlation and two binary tasks.

LSIM correlates provider scores with human similarity ratings. The binary
tasks (semantic-change and association-link prediction) share one negative
-sampling scheme: each positive pair gets one corrupted copy, a logistic
model on the score alone is fitted per sample, and in-sample accuracy is
averaged over the sampling runs. Negative sets depend only on (positives,
pool, seed), never on the scored provider, so they are shared across
models by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import SimilarityProvider
from .errors import InsufficientDataError, ParseError, SamplingError, ValidationError
from .numerics import fit_logistic_1d, spearman_rho

RATED_HEADER = "CONCEPT_A\tCONCEPT_B\tRATING"
PAIR_HEADER = "CONCEPT_A\tCONCEPT_B"

EVAL_TASKS = frozenset({"lsim", "shift", "links"})


@dataclass(frozen=True)
class RatedPair:
    a: str
    b: str
    rating: float

    def __post_init__(self):
        if self.a == self.b:
            raise ValidationError(f"rated pair with identical concepts: {self.a!r}")


@dataclass(frozen=True)
class ConceptPair:
    a: str
    b: str
    weight: Optional[int] = None

    def __post_init__(self):
        if self.a == self.b:
            raise ValidationError(f"concept pair with identical concepts: {self.a!r}")

    def unordered(self) -> tuple:
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass(frozen=True)
class EvalReport:
    task: str
    metric: float
    coverage: float
    runs: int
    seed: Optional[int] = None
    spread: Optional[float] = None

    def __post_init__(self):
        if self.task not in EVAL_TASKS:
            raise ValidationError(f"unknown task {self.task!r}")
        if not (0.0 <= self.coverage <= 1.0):
            raise ValidationError(f"coverage must be in [0, 1], got {self.coverage}")
        if (self.spread is not None) != (self.runs > 1):
            raise ValidationError("spread is present iff runs > 1")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "metric": self.metric,
            "spread": self.spread,
            "coverage": self.coverage,
            "runs": self.runs,
            "seed": self.seed,
        }

    def table(self) -> str:
        label = {"lsim": "Spearman rho", "shift": "mean accuracy", "links": "mean accuracy"}
        lines = [
            f"task      {self.task}",
            f"{label[self.task]:<9} {self.metric:.4f}"
            + (f" +- {self.spread:.4f}" if self.spread is not None else ""),
            f"coverage  {self.coverage:.4f}",
            f"runs      {self.runs}",
        ]
        if self.seed is not None:
            lines.append(f"seed      {self.seed}")
        return "\n".join(lines)


def load_rated_pairs(path) -> list:
    """Read CONCEPT_A/CONCEPT_B/RATING rows."""
    path = Path(path)
    pairs = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != RATED_HEADER:
            raise ParseError(path, 1, f"expected header {RATED_HEADER!r}, got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != 3:
                raise ParseError(path, line_no, f"expected 3 columns, got {len(cells)}")
            a, b, rating_str = cells
            try:
                rating = float(rating_str)
            except ValueError:
                raise ParseError(path, line_no, f"bad rating {rating_str!r}") from None
            try:
                pairs.append(RatedPair(a, b, rating))
            except ValidationError as exc:
                raise ParseError(path, line_no, str(exc)) from None
    return pairs


def load_concept_pairs(path) -> list:
    """Read CONCEPT_A/CONCEPT_B[/WEIGHT] rows."""
    path = Path(path)
    pairs = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header not in (PAIR_HEADER, PAIR_HEADER + "\tWEIGHT"):
            raise ParseError(path, 1, f"expected pair header, got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) not in (2, 3):
                raise ParseError(path, line_no, f"expected 2 or 3 columns, got {len(cells)}")
            weight = None
            if len(cells) == 3:
                try:
                    weight = int(cells[2])
                except ValueError:
                    raise ParseError(path, line_no, f"bad weight {cells[2]!r}") from None
            try:
                pairs.append(ConceptPair(cells[0], cells[1], weight))
            except ValidationError as exc:
                raise ParseError(path, line_no, str(exc)) from None
    return pairs


def eval_lsim(sim: SimilarityProvider, pairs) -> EvalReport:
    """Spearman correlation between ratings and provider scores.

    Pairs with a concept outside the provider's coverage are excluded and
    accounted for in the coverage figure. Distance providers are scored
    raw, so their correlation is expected to come out negative.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("no rated pairs given")
    evaluable = [p for p in pairs if p.a in sim.covered and p.b in sim.covered]
    coverage = len(evaluable) / len(pairs)
    if len(evaluable) < 3:
        raise InsufficientDataError(
            f"only {len(evaluable)} of {len(pairs)} pairs are covered "
            f"(coverage {coverage:.3f}); need at least 3"
        )
    ratings = [p.rating for p in evaluable]
    scores = [sim.score(p.a, p.b) for p in evaluable]
    rho = spearman_rho(ratings, scores)
    return EvalReport(task="lsim", metric=rho, coverage=coverage, runs=1)


def draw_negatives(positives, pool, seed: int, max_redraws: int = 1000) -> list:
    """One corrupted copy per positive: one side replaced by a pool draw.

    Redraws until the candidate is neither a self-pair nor an attested
    positive (as unordered pair). Deterministic for a given
    (positives, pool, seed); the provider plays no role here.
    """
    positives = list(positives)
    pool = list(pool)
    if len(pool) < 2:
        raise ValidationError(f"pool must have at least 2 concepts, got {len(pool)}")
    positive_keys = {p.unordered() for p in positives}
    rng = np.random.default_rng(seed)

    negatives = []
    for pair in positives:
        for _ in range(max_redraws):
            keep_a = bool(rng.integers(2))
            replacement = pool[rng.integers(len(pool))]
            cand = (pair.a, replacement) if keep_a else (replacement, pair.b)
            if cand[0] == cand[1]:
                continue
            key = (cand[0], cand[1]) if cand[0] <= cand[1] else (cand[1], cand[0])
            if key in positive_keys:
                continue
            negatives.append(ConceptPair(cand[0], cand[1]))
            break
        else:
            raise SamplingError(
                f"could not corrupt pair ({pair.a}, {pair.b}) after {max_redraws} redraws"
            )
    return negatives


def eval_binary(
    sim: SimilarityProvider,
    positives,
    pool=None,
    runs: int = 50,
    seed: int = 0,
    task: str = "shift",
) -> EvalReport:
    """Mean in-sample accuracy of a one-feature logistic fit over `runs` samples.

    Run r draws its negatives with seed + r. Positives with uncovered
    concepts are excluded up front (reported as coverage). Scores of
    distance providers are negated so that higher always means more
    similar. In-sample accuracy is reported because with a single monotone
    feature it equals best-threshold separability, the quantity of
    interest; the fit never sees held-out data.

    Features are standardized before the fit: affine changes of the score
    scale then leave the fitted predictions (and the accuracy) exactly
    unchanged instead of merely re-conditioning the gradient descent.
    """
    positives = list(positives)
    if not positives:
        raise ValidationError("no positive pairs given")
    if runs < 1:
        raise ValidationError("runs must be >= 1")
    evaluable = [p for p in positives if p.a in sim.covered and p.b in sim.covered]
    coverage = len(evaluable) / len(positives)
    if not evaluable:
        raise InsufficientDataError("no positive pair is covered by the provider")
    pool = sorted(sim.covered) if pool is None else list(pool)
    outside = [c for c in pool if c not in sim.covered]
    if outside:
        raise ValidationError(
            f"pool contains concepts the provider cannot score, e.g. {outside[:3]}"
        )

    sign = 1.0 if sim.higher_is_more_similar else -1.0
    cache = {}

    def scored(pair: ConceptPair) -> float:
        key = (pair.a, pair.b)
        if key not in cache:
            cache[key] = sign * sim.score(pair.a, pair.b)
        return cache[key]

    pos_features = [scored(p) for p in evaluable]
    accuracies = []
    for r in range(runs):
        negatives = draw_negatives(evaluable, pool, seed + r)
        features = np.array(pos_features + [scored(n) for n in negatives])
        labels = [1] * len(evaluable) + [0] * len(negatives)
        spread_f = features.std()
        if spread_f > 0:
            features = (features - features.mean()) / spread_f
        model = fit_logistic_1d(features, labels)
        accuracies.append(model.accuracy(features, labels))

    metric = float(np.mean(accuracies))
    spread = float(np.std(accuracies)) if runs > 1 else None
    return EvalReport(
        task=task, metric=metric, coverage=coverage, runs=runs, seed=seed, spread=spread
    )


def filter_association_pairs(edges, min_weight: int = 5, space=None) -> list:
    """Keep association edges at or above min_weight inside the concept space.

    Duplicate unordered pairs are merged after filtering (largest weight
    kept; the weight is unused downstream).
    """
    filtered = {}
    for pair in edges:
        if pair.weight is None:
            raise ValidationError(f"association pair ({pair.a}, {pair.b}) has no weight")
        if pair.weight < min_weight:
            continue
        if space is not None and (pair.a not in space or pair.b not in space):
            continue
        key = pair.unordered()
        prev = filtered.get(key)
        if prev is None or pair.weight > prev:
            filtered[key] = pair.weight
    return [ConceptPair(a, b, w) for (a, b), w in sorted(filtered.items())]
