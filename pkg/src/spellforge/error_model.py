"""Mining character-error statistics from parallel corpora.

A corpus of (corrupted, correct) pairs is aligned pair by pair with
:func:`spellforge.alignment.align`, reading each pair as *correct ->
corrupted*, so the mined ops describe how a writer damages clean text. Counts
are accumulated in :class:`ErrorCounts` (mergeable across workers) and
normalised into an immutable :class:`ErrorDistribution`.
"""

from __future__ import annotations

import io
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import _rng
from ._parallel import map_chunks
from .alignment import ERROR_KINDS, MAX_SENTENCE_CHARS, OpKind, align
from .errors import ParseError, SchemaVersionError, StructuralError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
POSITION_BINS = 10
SMOOTHING_ALPHA = 0.1


@dataclass(frozen=True)
class SentencePair:
    corrupted: str
    correct: str

    def __post_init__(self):
        if not isinstance(self.corrupted, str) or not isinstance(self.correct, str):
            raise StructuralError("sentence pair fields must be text")
        if not self.corrupted.strip() or not self.correct.strip():
            raise StructuralError("sentence pair has an empty side")

    @classmethod
    def coerce(cls, item) -> "SentencePair":
        if isinstance(item, cls):
            return item
        if isinstance(item, Mapping):
            return cls(item["source"], item["correction"])
        corrupted, correct = item
        return cls(corrupted, correct)


@dataclass(frozen=True)
class ErrorDistribution:
    """Normalised error model. Treat every table as read-only.

    ``confusion`` rows are unsmoothed; ``confusion_support`` keeps the number of
    observations behind each row so that additive smoothing can be applied
    at sampling time (see :class:`ConfusionTable`).
    """

    errors_per_sentence: dict[int, float]
    type_mix: dict[str, float] = field(default_factory=dict)
    positional_profile: tuple[float, ...] = (0.0,) * POSITION_BINS
    confusion: dict[str, dict[str, float]] = field(default_factory=dict)
    confusion_support: dict[str, int] = field(default_factory=dict)
    insert_chars: dict[str, float] = field(default_factory=dict)
    delete_chars: dict[str, float] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def mean_errors(self) -> float:
        return float(sum(n * p for n, p in self.errors_per_sentence.items()))

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "errors_per_sentence": {str(k): v for k, v in sorted(self.errors_per_sentence.items())},
            "type_mix": dict(sorted(self.type_mix.items())),
            "positional_profile": list(self.positional_profile),
            "confusion": {k: dict(sorted(row.items())) for k, row in sorted(self.confusion.items())},
            "confusion_support": dict(sorted(self.confusion_support.items())),
            "insert_chars": dict(sorted(self.insert_chars.items())),
            "delete_chars": dict(sorted(self.delete_chars.items())),
        }


def _normalise(counts: Mapping) -> dict:
    total = sum(counts.values())
    if not total:
        return {}
    return {k: v / total for k, v in sorted(counts.items())}


@dataclass
class ErrorCounts:
    """Raw, mergeable tallies behind an :class:`ErrorDistribution`."""

    sentences: int = 0
    errors_per_sentence: Counter = field(default_factory=Counter)
    types: Counter = field(default_factory=Counter)
    positions: list = field(default_factory=lambda: [0] * POSITION_BINS)
    confusion: dict = field(default_factory=dict)
    insert_chars: Counter = field(default_factory=Counter)
    delete_chars: Counter = field(default_factory=Counter)

    def add(self, pair: SentencePair) -> None:
        correct = pair.correct
        ops = align(correct, pair.corrupted)
        length = len(correct)
        self.sentences += 1
        self.errors_per_sentence[len(ops)] += 1
        for op in ops:
            self.types[op.kind.value] += 1
            self.positions[min(op.src_pos * POSITION_BINS // length, POSITION_BINS - 1)] += 1
            if op.kind is OpKind.SUBSTITUTION:
                self.confusion.setdefault(op.src_chars, Counter())[op.tgt_chars] += 1
            elif op.kind is OpKind.INSERTION:
                self.insert_chars[op.tgt_chars] += 1
            elif op.kind is OpKind.DELETION:
                self.delete_chars[op.src_chars] += 1

    def merge(self, other: "ErrorCounts") -> "ErrorCounts":
        self.sentences += other.sentences
        self.errors_per_sentence.update(other.errors_per_sentence)
        self.types.update(other.types)
        self.positions = [a + b for a, b in zip(self.positions, other.positions)]
        for src, row in other.confusion.items():
            self.confusion.setdefault(src, Counter()).update(row)
        self.insert_chars.update(other.insert_chars)
        self.delete_chars.update(other.delete_chars)
        return self

    def to_distribution(self) -> ErrorDistribution:
        if not self.sentences:
            raise StructuralError("no sentences were counted")
        total_pos = sum(self.positions)
        profile = tuple(p / total_pos for p in self.positions) if total_pos else (0.0,) * POSITION_BINS
        return ErrorDistribution(
            errors_per_sentence=_normalise(self.errors_per_sentence),
            type_mix=_normalise(self.types),
            positional_profile=profile,
            confusion={src: _normalise(row) for src, row in sorted(self.confusion.items())},
            confusion_support={src: sum(row.values()) for src, row in sorted(self.confusion.items())},
            insert_chars=_normalise(self.insert_chars),
            delete_chars=_normalise(self.delete_chars),
        )


@dataclass
class ScanSummary:
    pairs_read: int = 0
    pairs_used: int = 0
    skipped: int = 0
    reasons: Counter = field(default_factory=Counter)

    def skip(self, reason: str, detail: str = "") -> None:
        self.skipped += 1
        self.reasons[reason] += 1
        log.warning("skipping pair: %s %s", reason, detail)


def _count_chunk(chunk: list) -> tuple[ErrorCounts, ScanSummary]:
    counts = ErrorCounts()
    summary = ScanSummary()
    for item in chunk:
        summary.pairs_read += 1
        try:
            pair = SentencePair.coerce(item)
        except (StructuralError, TypeError, ValueError, KeyError) as exc:
            summary.skip("unreadable", str(exc))
            continue
        if len(pair.correct) > MAX_SENTENCE_CHARS or len(pair.corrupted) > MAX_SENTENCE_CHARS:
            summary.skip("too-long")
            continue
        counts.add(pair)
        summary.pairs_used += 1
    return counts, summary


def scan_corpus(
    pairs: Iterable,
    *,
    workers: int = 1,
    chunk_size: int = 512,
    summary: ScanSummary | None = None,
) -> ErrorDistribution:
    """Align every (corrupted, correct) pair and aggregate the error statistics.

    ``pairs`` may hold :class:`SentencePair` objects, 2-tuples or mappings with
    ``source``/``correction`` keys. Unusable pairs are skipped and counted in
    ``summary`` when one is passed.
    """
    total = ErrorCounts()
    merged = ScanSummary() if summary is None else summary
    for counts, part in map_chunks(_count_chunk, pairs, workers, chunk_size):
        total.merge(counts)
        merged.pairs_read += part.pairs_read
        merged.pairs_used += part.pairs_used
        merged.skipped += part.skipped
        merged.reasons.update(part.reasons)
    if not merged.pairs_read:
        raise StructuralError("cannot scan an empty corpus")
    if not total.sentences:
        raise StructuralError(f"all {merged.pairs_read} pairs were skipped")
    return total.to_distribution()


def scale_density(dist: ErrorDistribution, factor: int) -> ErrorDistribution:
    """Multiply every errors-per-sentence support value by ``factor``."""
    if isinstance(factor, bool) or not isinstance(factor, (int, np.integer)) or factor < 1:
        raise StructuralError(f"density factor must be an integer >= 1, got {factor!r}")
    factor = int(factor)
    hist = {n * factor: p for n, p in dist.errors_per_sentence.items()}
    return ErrorDistribution(
        errors_per_sentence=hist,
        type_mix=dist.type_mix,
        positional_profile=dist.positional_profile,
        confusion=dist.confusion,
        confusion_support=dist.confusion_support,
        insert_chars=dist.insert_chars,
        delete_chars=dist.delete_chars,
        schema_version=dist.schema_version,
    )


def total_variation(p: Mapping, q: Mapping) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


class ConfusionTable:
    """Additively smoothed substitution sampler.

    ``counts[c][t]`` is how often ``c`` was typed as ``t``. Sampling a
    replacement for ``c`` draws ``t != c`` from the observed alphabet with
    weight ``counts[c][t] + alpha``; a character without a row therefore
    gets a uniform draw over the alphabet.
    """

    def __init__(self, counts: Mapping[str, Mapping[str, float]], alpha: float = SMOOTHING_ALPHA, alphabet=None):
        self.counts = {src: {t: float(w) for t, w in row.items() if t != src} for src, row in counts.items()}
        if alphabet is None:
            alphabet = set(self.counts)
            for row in self.counts.values():
                alphabet.update(row)
        self.alphabet = tuple(sorted(alphabet))
        self.alpha = alpha
        self._cdfs: dict[str, tuple] = {}

    @classmethod
    def from_distribution(cls, dist: ErrorDistribution, alpha: float = SMOOTHING_ALPHA) -> "ConfusionTable":
        counts = {
            src: {t: p * dist.confusion_support.get(src, 1) for t, p in row.items()}
            for src, row in dist.confusion.items()
        }
        alphabet = set(counts) | set(dist.insert_chars) | set(dist.delete_chars)
        for row in counts.values():
            alphabet.update(row)
        return cls(counts, alpha, alphabet)

    def __contains__(self, char: str) -> bool:
        return char in self.counts

    def _row(self, char: str):
        cached = self._cdfs.get(char)
        if cached is None:
            row = self.counts.get(char, {})
            cands = [t for t in self.alphabet if t != char]
            cands.extend(sorted(t for t in row if t not in self.alphabet))
            weights = [row.get(t, 0.0) + self.alpha for t in cands]
            cached = (cands, _rng.cumulative(weights)) if cands else ((), ())
            self._cdfs[char] = cached
        return cached

    def probabilities(self, char: str) -> dict[str, float]:
        cands, cdf = self._row(char)
        if not cands:
            return {}
        weights = np.diff(np.concatenate([[0.0], cdf]))
        return dict(zip(cands, (weights / cdf[-1]).tolist()))

    def sample(self, char: str, rng) -> str | None:
        """Replacement for ``char``, or ``None`` if the alphabet has no other symbol."""
        cands, cdf = self._row(char)
        if not cands:
            return None
        return cands[_rng.draw_index(rng, cdf)]


# -- serialization -----------------------------------------------------------

def save(dist: ErrorDistribution, destination) -> None:
    """Write ``dist`` as UTF-8 JSON to a path or text stream."""
    text = json.dumps(dist.to_dict(), ensure_ascii=False, indent=2) + "\n"
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        destination.write(text)


def _expect(cond: bool, message: str, source) -> None:
    if not cond:
        raise ParseError(message, source)


def _prob_table(raw, name, source, key=str) -> dict:
    _expect(isinstance(raw, dict), f"{name} must be an object", source)
    out = {}
    for k, v in raw.items():
        _expect(isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0,
                f"{name}[{k!r}] must be a non-negative number", source)
        try:
            out[key(k)] = float(v)
        except ValueError:
            raise ParseError(f"{name} has a bad key {k!r}", source) from None
    return out


def from_dict(data, source=None) -> ErrorDistribution:
    _expect(isinstance(data, dict), "top level must be an object", source)
    _expect("schema_version" in data, "missing schema_version", source)
    version = data["schema_version"]
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(version, SCHEMA_VERSION)
    required = ("errors_per_sentence", "type_mix", "positional_profile", "confusion",
                "confusion_support", "insert_chars", "delete_chars")
    for name in required:
        _expect(name in data, f"missing field {name!r}", source)

    hist = _prob_table(data["errors_per_sentence"], "errors_per_sentence", source, key=int)
    _expect(all(k >= 0 for k in hist), "errors_per_sentence keys must be >= 0", source)
    type_mix = _prob_table(data["type_mix"], "type_mix", source)
    known = {k.value for k in ERROR_KINDS}
    _expect(set(type_mix) <= known, f"type_mix keys must be among {sorted(known)}", source)
    profile = data["positional_profile"]
    _expect(isinstance(profile, list) and len(profile) == POSITION_BINS
            and all(isinstance(x, (int, float)) and x >= 0 for x in profile),
            f"positional_profile must be {POSITION_BINS} non-negative numbers", source)
    _expect(isinstance(data["confusion"], dict), "confusion must be an object", source)
    confusion = {src: _prob_table(row, f"confusion[{src!r}]", source) for src, row in data["confusion"].items()}
    _expect(all(src not in row for src, row in confusion.items()), "confusion rows may not map a char to itself", source)
    support = data["confusion_support"]
    _expect(isinstance(support, dict) and all(isinstance(v, int) and v >= 0 for v in support.values()),
            "confusion_support must map chars to counts", source)
    return ErrorDistribution(
        errors_per_sentence=hist,
        type_mix=type_mix,
        positional_profile=tuple(float(x) for x in profile),
        confusion=confusion,
        confusion_support=dict(support),
        insert_chars=_prob_table(data["insert_chars"], "insert_chars", source),
        delete_chars=_prob_table(data["delete_chars"], "delete_chars", source),
        schema_version=version,
    )


def load(source) -> ErrorDistribution:
    """Read a distribution from a path or text stream."""
    name = None
    if isinstance(source, (str, os.PathLike)):
        name = os.fspath(source)
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError(f"cannot load from {type(source).__name__}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, name, exc.lineno, exc.colno) from None
    return from_dict(data, name)
