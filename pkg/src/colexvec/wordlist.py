"""Infer full, affix, and overlap colexification networks from wordlists.

Forms are compared as sequences of segment tokens (space-separated in the
TSV), never as raw strings, so a match cannot start inside a multi-character
segment. Edge weights count the distinct language families attesting a
colexification at least once.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import ParseError, ValidationError
from .graph import ColexGraph, make_graph

WORDLIST_HEADER = "LANGUAGE\tFAMILY\tCONCEPT\tFORM"

MATCH_KINDS = ("none", "full", "affix", "overlap")


@dataclass(frozen=True)
class WordlistEntry:
    language: str
    family: str
    concept: str
    form: tuple

    def __post_init__(self):
        if not self.form or any(not tok for tok in self.form):
            raise ValidationError("form must be a non-empty sequence of non-empty tokens")


@dataclass(frozen=True)
class Wordlist:
    entries: tuple

    def __post_init__(self):
        families = {}
        deduped = []
        seen = set()
        for entry in self.entries:
            known = families.get(entry.language)
            if known is None:
                families[entry.language] = entry.family
            elif known != entry.family:
                raise ValidationError(
                    f"language {entry.language!r} appears under families "
                    f"{known!r} and {entry.family!r}"
                )
            key = (entry.language, entry.concept, entry.form)
            if key not in seen:
                seen.add(key)
                deduped.append(entry)
        object.__setattr__(self, "entries", tuple(deduped))
        object.__setattr__(self, "_families", families)

    @property
    def families(self) -> dict:
        """Map language -> family, derived from the entries."""
        return dict(self._families)

    def languages(self) -> list:
        return sorted(self._families)

    def concepts(self) -> list:
        return sorted({e.concept for e in self.entries})


@dataclass(frozen=True)
class ColexParams:
    """Thresholds for partial-colexification matching.

    The source inference's exact thresholds are not published, so both
    lengths are configurable; the defaults guard against one-segment noise.
    """

    min_form_len: int = 3
    min_overlap_len: int = 4
    require_proper: bool = True

    def __post_init__(self):
        if self.min_form_len < 1:
            raise ValidationError("min_form_len must be >= 1")
        if self.min_overlap_len < 1:
            raise ValidationError("min_overlap_len must be >= 1")


@dataclass(frozen=True)
class ColexMatch:
    kind: str
    direction: Optional[str] = None

    def __post_init__(self):
        if self.kind not in MATCH_KINDS:
            raise ValidationError(f"unknown match kind {self.kind!r}")
        if (self.direction is not None) != (self.kind == "affix"):
            raise ValidationError("direction is set iff kind is 'affix'")
        if self.direction not in (None, "a_derived_from_b", "b_derived_from_a"):
            raise ValidationError(f"unknown direction {self.direction!r}")


def load_wordlist(path) -> Wordlist:
    """Read a LANGUAGE/FAMILY/CONCEPT/FORM TSV, collapsing duplicate rows."""
    path = Path(path)
    entries = []
    seen = set()
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != WORDLIST_HEADER:
            raise ParseError(path, 1, f"expected header {WORDLIST_HEADER!r}, got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != 4:
                raise ParseError(path, line_no, f"expected 4 columns, got {len(cells)}")
            language, family, concept, form_str = cells
            if not language or not family:
                raise ParseError(path, line_no, "empty language or family id")
            if not concept:
                raise ParseError(path, line_no, "empty concept id")
            form = tuple(form_str.split())
            if not form:
                raise ParseError(path, line_no, "empty form")
            key = (language, concept, form)
            if key in seen:
                continue
            seen.add(key)
            entries.append(WordlistEntry(language, family, concept, form))
    try:
        return Wordlist(entries=tuple(entries))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _longest_common_block(a: Sequence, b: Sequence) -> int:
    """Length of the longest shared contiguous token run."""
    best = 0
    prev = [0] * (len(b) + 1)
    for tok_a in a:
        cur = [0] * (len(b) + 1)
        for j, tok_b in enumerate(b, start=1):
            if tok_a == tok_b:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def classify_pair(a: Sequence, b: Sequence, params: ColexParams = ColexParams()) -> ColexMatch:
    """Classify two forms as full, affix, or overlap colexification.

    Precedence is full > affix > overlap. An affix match means the shorter
    form is a token-wise prefix or suffix of the longer one; its direction
    points from the derived (longer) form to the stem.
    """
    a = tuple(a)
    b = tuple(b)
    if not a or not b:
        raise ValidationError("forms must be non-empty")
    if a == b:
        return ColexMatch(kind="full")

    shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
    length_ok = len(shorter) < len(longer) or not params.require_proper
    if length_ok and len(shorter) >= params.min_form_len:
        if longer[: len(shorter)] == shorter or longer[-len(shorter):] == shorter:
            direction = "b_derived_from_a" if len(a) < len(b) else "a_derived_from_b"
            return ColexMatch(kind="affix", direction=direction)

    if _longest_common_block(a, b) >= params.min_overlap_len:
        return ColexMatch(kind="overlap")
    return ColexMatch(kind="none")


def infer_network(
    wordlist: Wordlist, kind: str, params: ColexParams = ColexParams()
) -> ColexGraph:
    """Build the colexification network of one type from a wordlist.

    Every language contributes an attestation for each concept pair whose
    forms classify as `kind`; the edge weight is the number of distinct
    families with at least one attestation. Affix networks are directed
    (derived-form concept -> stem concept); full and overlap networks are
    undirected. All wordlist concepts stay in the node set, so concepts
    without edges remain as isolated nodes.
    """
    if kind not in ("full", "affix", "overlap"):
        raise ValidationError(f"unknown colexification type {kind!r}")

    by_language = {}
    for entry in wordlist.entries:
        by_language.setdefault(entry.language, []).append(entry)

    families = wordlist.families
    attesting = {}  # edge key -> set of families
    for language, entries in by_language.items():
        family = families[language]
        for i, ea in enumerate(entries):
            for eb in entries[i + 1:]:
                if ea.concept == eb.concept:
                    continue
                match = classify_pair(ea.form, eb.form, params)
                if match.kind != kind:
                    continue
                if kind == "affix":
                    if match.direction == "a_derived_from_b":
                        key = (ea.concept, eb.concept)
                    else:
                        key = (eb.concept, ea.concept)
                else:
                    key = (min(ea.concept, eb.concept), max(ea.concept, eb.concept))
                attesting.setdefault(key, set()).add(family)

    edges = [(src, dst, float(len(fams))) for (src, dst), fams in sorted(attesting.items())]
    concepts = {e.concept for e in wordlist.entries}
    return make_graph(
        edges,
        colex_type=kind,
        directed=(kind == "affix"),
        weight_semantics="family_count",
        extra_nodes=concepts,
    )


def infer_undirected_network(
    wordlist: Wordlist, kind: str, params: ColexParams = ColexParams()
) -> ColexGraph:
    """Undirected network with exact family counts over both edge directions.

    For affix colexifications this recounts from the raw attestations, so a
    family attesting only A->B and another attesting only B->A yield weight
    2, where max-merging the directed graph after the fact would give 1.
    For full and overlap networks it equals infer_network.
    """
    directed = infer_network(wordlist, kind, params)
    if kind != "affix":
        return directed

    families = wordlist.families
    by_language = {}
    for entry in wordlist.entries:
        by_language.setdefault(entry.language, []).append(entry)

    attesting = {}
    for language, entries in by_language.items():
        family = families[language]
        for i, ea in enumerate(entries):
            for eb in entries[i + 1:]:
                if ea.concept == eb.concept:
                    continue
                if classify_pair(ea.form, eb.form, params).kind == "affix":
                    key = (min(ea.concept, eb.concept), max(ea.concept, eb.concept))
                    attesting.setdefault(key, set()).add(family)

    edges = [(a, b, float(len(fams))) for (a, b), fams in sorted(attesting.items())]
    return make_graph(
        edges,
        colex_type="affix",
        directed=False,
        weight_semantics="family_count",
        extra_nodes=directed.nodes,
    )
