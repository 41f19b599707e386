"""Corpus data model: ingestion, segmentation, score normalization, folds,
and adversarial sample generation (sentence-permuted and cross-prompt copies).
"""

from __future__ import annotations

import csv
import re
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigurationError,
    CorpusValidationError,
    FormatError,
    NotPermutableError,
    RangeError,
)

ORIGINAL = "original"
PERMUTED = "permuted"
PROMPT_IRRELEVANT = "prompt_irrelevant"
PROVENANCES = frozenset({ORIGINAL, PERMUTED, PROMPT_IRRELEVANT})

# Published per-prompt score ranges for the eight standard essay sets.
DEFAULT_SCORE_RANGES: dict[int, tuple[int, int]] = {
    1: (2, 12),
    2: (1, 6),
    3: (0, 3),
    4: (0, 3),
    5: (0, 4),
    6: (0, 4),
    7: (0, 30),
    8: (0, 60),
}

_REQUIRED_COLUMNS = ("essay_id", "essay_set", "essay")

_ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "rev.", "sr.", "jr.", "st.",
    "etc.", "e.g.", "i.e.", "vs.", "cf.", "al.", "no.", "inc.", "dept.",
})
_SINGLE_INITIAL_RE = re.compile(r"[A-Za-z]\.")
_BOUNDARY_RE = re.compile(r"([.!?]+)([\"'”’)\]]*)(\s+)")
_SENTENCE_STARTERS = "\"'“‘(@"
_TOKEN_RE = re.compile(r"@?\w+(?:['-]\w+)*")


@dataclass
class Prompt:
    """A writing task: its id, tokenized sentences, and published score range."""

    id: int
    sentences: list[list[str]]
    score_min: int
    score_max: int

    def __post_init__(self):
        if self.score_min >= self.score_max:
            raise RangeError(
                f"prompt {self.id}: score_min {self.score_min} must be below "
                f"score_max {self.score_max}"
            )
        if not self.sentences:
            raise CorpusValidationError(f"prompt {self.id}: needs at least one sentence")


@dataclass
class Essay:
    """One essay with its tokenized sentences and scoring metadata.

    ``source_id``/``source_order`` are set on adversarial copies so that
    providers of precomputed sentence vectors can resolve the copy back to
    the record it was derived from.
    """

    id: str
    prompt_id: int
    sentences: list[list[str]]
    raw_text: str
    gold_score: int
    normalized_score: float
    provenance: str = ORIGINAL
    source_id: str | None = None
    source_order: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise CorpusValidationError(
                f"essay {self.id}: unknown provenance {self.provenance!r}"
            )


@dataclass
class Dataset:
    """A set of prompts and the essays written for them."""

    prompts: dict[int, Prompt] = field(default_factory=dict)
    essays: list[Essay] = field(default_factory=list)

    def validate(self) -> None:
        seen: set[str] = set()
        for essay in self.essays:
            if essay.id in seen:
                raise CorpusValidationError(f"duplicate essay id {essay.id!r}")
            seen.add(essay.id)
            if essay.prompt_id not in self.prompts:
                raise CorpusValidationError(
                    f"essay {essay.id!r} references unknown prompt {essay.prompt_id}"
                )

    def prompt_of(self, essay: Essay) -> Prompt:
        return self.prompts[essay.prompt_id]

    def originals(self, prompt_id: int | None = None) -> list[Essay]:
        return [
            e for e in self.essays
            if e.provenance == ORIGINAL
            and (prompt_id is None or e.prompt_id == prompt_id)
        ]

    def by_id(self) -> dict[str, Essay]:
        return {e.id: e for e in self.essays}


@dataclass
class FoldSplit:
    """Assignment of original essay ids to cross-validation folds."""

    k: int
    assignments: dict[str, int]

    def ids_in_fold(self, fold: int) -> list[str]:
        return [i for i, f in self.assignments.items() if f == fold]

    def ids_not_in_fold(self, fold: int) -> list[str]:
        return [i for i, f in self.assignments.items() if f != fold]


def segment_sentences(raw_text: str) -> list[str]:
    """Split text into sentences on terminal punctuation.

    A boundary is a run of ``.!?`` (plus closing quotes/brackets) followed by
    whitespace and an uppercase letter, digit, quote, or ``@`` marker.  A
    single period after a known abbreviation or a lone initial does not split.
    """
    text = raw_text.strip()
    if not text:
        return []
    segments: list[str] = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        nxt = m.end()
        if nxt >= len(text):
            continue
        ch = text[nxt]
        if not (ch.isupper() or ch.isdigit() or ch in _SENTENCE_STARTERS):
            continue
        if m.group(1) == ".":
            word_start = m.start()
            while word_start > 0 and not text[word_start - 1].isspace():
                word_start -= 1
            word = text[word_start:m.start() + 1]
            if word.lower() in _ABBREVIATIONS or _SINGLE_INITIAL_RE.fullmatch(word):
                continue
        piece = text[start:m.start() + len(m.group(1)) + len(m.group(2))].strip()
        if piece:
            segments.append(piece)
        start = nxt
    tail = text[start:].strip()
    if tail:
        segments.append(tail)
    return segments


def tokenize_words(sentence: str) -> list[str]:
    """Lowercased word tokens; punctuation stripped except intra-word
    apostrophes and hyphens.  ``@MARKER`` anonymization artifacts survive
    as single tokens."""
    return _TOKEN_RE.findall(sentence.lower().replace("’", "'"))


def normalize_score(score: float, prompt: Prompt) -> float:
    """Map a score on the prompt's native scale to [0, 1] by min-max."""
    if not prompt.score_min <= score <= prompt.score_max:
        raise RangeError(
            f"score {score} outside [{prompt.score_min}, {prompt.score_max}] "
            f"for prompt {prompt.id}"
        )
    return (score - prompt.score_min) / (prompt.score_max - prompt.score_min)


def rescale_score(v: float, prompt: Prompt) -> float:
    """Inverse of :func:`normalize_score`: ``score_min + v * (max - min)``.

    When ``v`` is exactly the normalization of an integer score, that integer
    is returned exactly (plain IEEE multiplication can be one ulp off, e.g.
    31/60 * 60).
    """
    if not 0.0 <= v <= 1.0:
        raise RangeError(f"normalized value {v} outside [0, 1]")
    span = prompt.score_max - prompt.score_min
    k = round(v * span)
    if 0 <= k <= span and k / span == v:
        return float(prompt.score_min + k)
    return prompt.score_min + v * span


def _tokenized_sentences(text: str) -> list[list[str]]:
    sentences = [tokenize_words(s) for s in segment_sentences(text)]
    return [s for s in sentences if s]


def _fallback_prompt_sentences(prompt_id: int) -> list[list[str]]:
    return [["prompt", str(prompt_id)]]


def load_asap_tsv(
    path,
    score_ranges: dict[int, tuple[int, int]] | None = None,
    score_column: str = "domain1_score",
    score_column_by_set: dict[int, str] | None = None,
    prompt_texts: dict[int, str] | None = None,
) -> Dataset:
    """Load a tab-separated corpus with header columns ``essay_id``,
    ``essay_set``, ``essay`` and a gold-score column (default
    ``domain1_score``; overridable per essay set)."""
    ranges = dict(DEFAULT_SCORE_RANGES)
    if score_ranges:
        ranges.update(score_ranges)
    overrides = score_column_by_set or {}

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        header = reader.fieldnames or []
        needed = list(_REQUIRED_COLUMNS) + [score_column] + list(overrides.values())
        for col in needed:
            if col not in header:
                raise FormatError(f"{path}: missing required column {col!r}")

        prompts: dict[int, Prompt] = {}
        essays: list[Essay] = []
        seen_ids: set[str] = set()
        for row_no, row in enumerate(reader, start=2):
            try:
                prompt_id = int(row["essay_set"])
            except (TypeError, ValueError):
                raise FormatError(f"{path}:{row_no}: essay_set is not an integer")
            if not 1 <= prompt_id <= 8:
                raise RangeError(f"{path}:{row_no}: essay_set {prompt_id} outside 1-8")
            if prompt_id not in prompts:
                lo, hi = ranges[prompt_id]
                text = (prompt_texts or {}).get(prompt_id)
                sentences = (
                    _tokenized_sentences(text) if text
                    else _fallback_prompt_sentences(prompt_id)
                )
                prompts[prompt_id] = Prompt(prompt_id, sentences, lo, hi)
            prompt = prompts[prompt_id]

            col = overrides.get(prompt_id, score_column)
            try:
                gold = int(float(row[col]))
            except (TypeError, ValueError):
                raise FormatError(f"{path}:{row_no}: score column {col!r} is not numeric")
            if not prompt.score_min <= gold <= prompt.score_max:
                raise CorpusValidationError(
                    f"{path}:{row_no}: score {gold} outside "
                    f"[{prompt.score_min}, {prompt.score_max}] for essay_set {prompt_id}"
                )

            essay_id = row["essay_id"]
            if essay_id in seen_ids:
                raise CorpusValidationError(f"{path}:{row_no}: duplicate essay_id {essay_id!r}")
            seen_ids.add(essay_id)

            raw = row["essay"] or ""
            essays.append(Essay(
                id=essay_id,
                prompt_id=prompt_id,
                sentences=_tokenized_sentences(raw),
                raw_text=raw,
                gold_score=gold,
                normalized_score=normalize_score(gold, prompt),
            ))

    dataset = Dataset(prompts=prompts, essays=essays)
    dataset.validate()
    return dataset


def is_permutable(essay: Essay) -> bool:
    """Permutation is meaningful only with two or more distinct sentences;
    otherwise every reordering reproduces the original."""
    distinct = {tuple(s) for s in essay.sentences}
    return len(distinct) >= 2


def make_permuted(essay: Essay, rng: np.random.Generator, id_suffix: str = ":perm") -> Essay:
    """Copy of the essay with sentences in a uniformly drawn non-identity
    order, labeled incoherent (normalized score 0)."""
    if essay.provenance != ORIGINAL:
        raise CorpusValidationError(f"essay {essay.id}: can only permute originals")
    if not is_permutable(essay):
        raise NotPermutableError(
            f"essay {essay.id}: fewer than two distinct sentences"
        )
    m = len(essay.sentences)
    while True:
        order = tuple(int(i) for i in rng.permutation(m))
        shuffled = [essay.sentences[i] for i in order]
        if shuffled != essay.sentences:
            break
    return replace(
        essay,
        id=essay.id + id_suffix,
        sentences=shuffled,
        normalized_score=0.0,
        provenance=PERMUTED,
        source_id=essay.id,
        source_order=order,
    )


def sample_prompt_irrelevant(
    dataset: Dataset,
    prompt_id: int,
    rng: np.random.Generator,
    count: int | None = None,
    pool: list[Essay] | None = None,
    id_suffix: str = ":irr",
) -> list[Essay]:
    """Draw cross-prompt negatives for ``prompt_id``: copies of essays from
    other prompts, rebound to the target prompt with normalized score 0.

    One negative per target-prompt original by default.  Drawn without
    replacement, falling back to replacement when the pool is smaller than
    the request.
    """
    if prompt_id not in dataset.prompts:
        raise ConfigurationError(f"unknown prompt {prompt_id}")
    m = count if count is not None else len(dataset.originals(prompt_id))
    candidates = pool if pool is not None else dataset.originals()
    candidates = [e for e in candidates if e.prompt_id != prompt_id]
    if not candidates:
        raise ConfigurationError(
            f"no essays from other prompts available as negatives for prompt {prompt_id}"
        )
    idx = rng.choice(len(candidates), size=m, replace=len(candidates) < m)
    negatives = []
    for i, j in enumerate(idx):
        src = candidates[int(j)]
        negatives.append(replace(
            src,
            id=f"{src.id}{id_suffix}{prompt_id}.{i}",
            prompt_id=prompt_id,
            normalized_score=0.0,
            provenance=PROMPT_IRRELEVANT,
            source_id=src.id,
            source_order=None,
        ))
    return negatives


def make_folds(dataset: Dataset, k: int, rng: np.random.Generator) -> FoldSplit:
    """Stratified fold assignment: per prompt, shuffled originals are dealt
    round-robin, so per-prompt fold sizes differ by at most one."""
    if k < 2:
        raise ConfigurationError(f"need at least 2 folds, got {k}")
    assignments: dict[str, int] = {}
    for prompt_id in sorted(dataset.prompts):
        ids = [e.id for e in dataset.originals(prompt_id)]
        if not ids:
            continue
        if len(ids) < k:
            warnings.warn(
                f"prompt {prompt_id} has only {len(ids)} essays for {k} folds",
                stacklevel=2,
            )
        order = rng.permutation(len(ids))
        for pos, j in enumerate(order):
            assignments[ids[int(j)]] = pos % k
    return FoldSplit(k=k, assignments=assignments)


def save_folds(split: FoldSplit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for essay_id in sorted(split.assignments):
            fh.write(f"{essay_id}\t{split.assignments[essay_id]}\n")


def load_folds(path) -> FoldSplit:
    assignments: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{line_no}: expected 'essay_id<TAB>fold'")
            assignments[parts[0]] = int(parts[1])
    k = max(assignments.values()) + 1 if assignments else 0
    return FoldSplit(k=k, assignments=assignments)
