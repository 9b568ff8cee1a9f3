"""Corpus preparation: cleaning, balancing, pre-training pair synthesis and
fine-tune augmentation (Add / Concat).

Every stage is a generator over its input. Seeds are derived per record
ordinal, so output never depends on how many workers were used.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Iterator, Sequence

import regex

from . import _rng
from ._parallel import map_chunks
from .error_model import ErrorDistribution, SentencePair, scale_density
from .errors import StructuralError
from .sbsc import CorruptSummary, SBSCCorruptor, corrupt_corpus

log = logging.getLogger(__name__)

Corruptor = Callable[[str, int], str]


@dataclass(frozen=True)
class CleanRules:
    """Which sentences survive cleaning.

    Allowed characters: letters of ``allowed_scripts``, ASCII digits, Unicode
    punctuation and Unicode space separators. Lengths count every character,
    whitespace included.
    """

    allowed_scripts: tuple[str, ...] = ("Cyrillic", "Latin")
    min_length: int = 40
    max_length: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "allowed_scripts", tuple(self.allowed_scripts))
        problems = self.violations()
        if problems:
            raise StructuralError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not isinstance(self.min_length, int) or self.min_length < 1:
            out.append(f"min_length must be an integer >= 1, got {self.min_length!r}")
        elif not isinstance(self.max_length, int) or self.max_length < self.min_length:
            out.append(f"max_length must be an integer >= min_length, got {self.max_length!r}")
        for name in self.allowed_scripts:
            if not regex.fullmatch(r"[A-Za-z_]+", name):
                out.append(f"bad script name {name!r}")
                continue
            try:
                regex.compile(rf"\p{{Script={name}}}")
            except regex.error:
                out.append(f"unknown script {name!r}")
        return out

    def pattern(self):
        scripts = "".join(rf"\p{{Script={name}}}" for name in self.allowed_scripts)
        return regex.compile(rf"[{scripts}0-9\p{{P}}\p{{Zs}}]*")


@dataclass
class CleanReport:
    seen: int = 0
    kept: int = 0
    rejected: Counter = field(default_factory=Counter)

    @property
    def rejected_total(self) -> int:
        return sum(self.rejected.values())


def rejection_reason(sentence: str, rules: CleanRules, pattern=None) -> str | None:
    """``None`` if ``sentence`` passes, otherwise ``too-short``, ``too-long`` or ``script``."""
    if len(sentence) < rules.min_length:
        return "too-short"
    if len(sentence) > rules.max_length:
        return "too-long"
    pattern = rules.pattern() if pattern is None else pattern
    if not pattern.fullmatch(sentence):
        return "script"
    return None


def clean_corpus(sentences: Iterable[str], rules: CleanRules = CleanRules()) -> tuple[Iterator[str], CleanReport]:
    """Filter ``sentences`` lazily; the report is complete once the iterator is exhausted."""
    report = CleanReport()
    pattern = rules.pattern()

    def kept():
        for sentence in sentences:
            report.seen += 1
            reason = rejection_reason(sentence, rules, pattern)
            if reason is None:
                report.kept += 1
                yield sentence
            else:
                report.rejected[reason] += 1

    return kept(), report


def _reservoir(items: Iterable[str], k: int, rng) -> tuple[list[tuple[int, str]], int]:
    sample: list[tuple[int, str]] = []
    n = 0
    for n, item in enumerate(items, start=1):
        if len(sample) < k:
            sample.append((n - 1, item))
        else:
            j = _rng.draw_int(rng, n)
            if j < k:
                sample[j] = (n - 1, item)
    return sample, n


def balance(
    corpora: Sequence[Iterable[str]],
    target_per_corpus: int,
    seed: int = 0,
    names: Sequence[str] | None = None,
) -> Iterator[str]:
    """``target_per_corpus`` records from each corpus, sampled uniformly without replacement.

    Each corpus is read once (reservoir sampling); the chosen records keep
    their original order and corpora are emitted in the order given.
    """
    if target_per_corpus < 0:
        raise StructuralError("target_per_corpus must be >= 0")
    names = list(names) if names is not None else [f"corpus {i}" for i in range(len(corpora))]
    picked = []
    for index, corpus in enumerate(corpora):
        rng = _rng.make_rng(_rng.mix_seed(seed, index))
        sample, available = _reservoir(corpus, target_per_corpus, rng)
        if available < target_per_corpus:
            raise StructuralError(
                f"{names[index]} has {available} records, fewer than the target {target_per_corpus}"
            )
        picked.append(sorted(sample))
    for sample in picked:
        for _, item in sample:
            yield item


def build_pretrain_corpus(
    clean: Iterable[str],
    dist: ErrorDistribution,
    density_factor: int = 10,
    seed: int = 0,
    *,
    workers: int = 1,
    summary: CorruptSummary | None = None,
) -> Iterator[SentencePair]:
    """Corrupt clean sentences with a ``density_factor``-times denser error model."""
    return corrupt_corpus(clean, scale_density(dist, density_factor), seed, workers=workers, summary=summary)


@dataclass
class AugmentSummary:
    records_in: int = 0
    records_out: int = 0
    skipped: int = 0

    def merge(self, other: "AugmentSummary") -> None:
        self.records_in += other.records_in
        self.records_out += other.records_out
        self.skipped += other.skipped


def as_corruptor(corruptor) -> Corruptor:
    if isinstance(corruptor, ErrorDistribution):
        return SBSCCorruptor(corruptor)
    if not callable(corruptor):
        raise StructuralError(f"not a corruptor: {corruptor!r}")
    return corruptor


def _noise_chunk(corruptor: Corruptor, seed: int, salt: int, chunk: list) -> tuple[list, AugmentSummary]:
    summary = AugmentSummary()
    out = []
    for ordinal, corrupted, correct in chunk:
        summary.records_in += 1
        try:
            pair = SentencePair(corruptor(corrupted, _rng.mix_seed(seed, salt, ordinal)), correct)
        except StructuralError as exc:
            summary.skipped += 1
            log.warning("record %d skipped: %s", ordinal, exc)
            continue
        summary.records_out += 1
        out.append(pair)
    return out, summary


def _noised(pairs, corruptor, seed, salt, workers, summary, chunk_size=256):
    work = partial(_noise_chunk, corruptor, seed, salt)
    for out, part in map_chunks(work, pairs, workers, chunk_size):
        summary.merge(part)
        yield from out


def augment_add(
    pairs: Iterable,
    corruptor,
    seed: int = 0,
    *,
    workers: int = 1,
    summary: AugmentSummary | None = None,
) -> Iterator[SentencePair]:
    """Add noise to the corrupted side of every pair; the correct side is untouched."""
    corruptor = as_corruptor(corruptor)
    summary = AugmentSummary() if summary is None else summary
    items = (
        (i, p.corrupted, p.correct)
        for i, p in enumerate(map(SentencePair.coerce, pairs))
    )
    return _noised(items, corruptor, seed, 0, workers, summary)


def augment_concat(
    pairs: Iterable,
    corruptor,
    copies: int = 1,
    seed: int = 0,
    *,
    workers: int = 1,
    summary: AugmentSummary | None = None,
) -> Iterator[SentencePair]:
    """Originals first, then ``copies`` rounds of freshly corrupted correct sides.

    The correct sides are buffered in memory between the two phases.
    """
    if isinstance(copies, bool) or not isinstance(copies, int) or copies < 1:
        raise StructuralError(f"copies must be an integer >= 1, got {copies!r}")
    corruptor = as_corruptor(corruptor)
    summary = AugmentSummary() if summary is None else summary

    def run():
        correct_sides = []
        for pair in map(SentencePair.coerce, pairs):
            correct_sides.append(pair.correct)
            summary.records_in += 1
            summary.records_out += 1
            yield pair
        for copy in range(1, copies + 1):
            items = ((i, text, text) for i, text in enumerate(correct_sides))
            sub = AugmentSummary()
            yield from _noised(items, corruptor, seed, copy, workers, sub)
            summary.records_out += sub.records_out
            summary.skipped += sub.skipped

    return run()
