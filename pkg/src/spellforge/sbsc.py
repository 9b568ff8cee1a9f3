"""Statistic-based spelling corruption.

Draws an error count, error types, positions and replacement characters from
an :class:`~spellforge.error_model.ErrorDistribution` and splices them into a
clean sentence. All randomness comes from one PCG64 stream per sentence, so a
(sentence, distribution, seed) triple always produces the same output.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Iterator

from . import _rng
from ._parallel import map_chunks
from .alignment import EditOp, OpKind
from .error_model import POSITION_BINS, ConfusionTable, ErrorDistribution, SentencePair
from .errors import StructuralError

log = logging.getLogger(__name__)

PLACEMENT_RETRIES = 8
_KIND_ORDER = ("insertion", "deletion", "substitution", "transposition")


@dataclass(frozen=True)
class CorruptionPlan:
    seed: int
    ops: tuple[EditOp, ...]
    requested: int = 0
    clamped: bool = False
    dropped: int = 0


class _Sampler:
    """Cumulative tables precomputed from one distribution."""

    def __init__(self, dist: ErrorDistribution):
        if not dist.errors_per_sentence:
            raise StructuralError("distribution has an empty errors_per_sentence table")
        hist = sorted(dist.errors_per_sentence.items())
        self.counts = [n for n, _ in hist]
        self.count_cdf = _rng.cumulative(p for _, p in hist)
        kinds = [k for k in _KIND_ORDER if dist.type_mix.get(k, 0.0) > 0]
        self.kinds = [OpKind(k) for k in kinds]
        self.kind_cdf = _rng.cumulative(dist.type_mix[k] for k in kinds)
        profile = list(dist.positional_profile)
        if len(profile) != POSITION_BINS or sum(profile) <= 0:
            profile = [1.0] * POSITION_BINS
        self.bin_cdf = _rng.cumulative(profile)
        inserts = sorted(dist.insert_chars.items())
        self.insert_chars = [c for c, _ in inserts]
        self.insert_cdf = _rng.cumulative(p for _, p in inserts)
        self.confusion = ConfusionTable.from_distribution(dist)
        self.zero_only = all(n == 0 for n in self.counts)


_SAMPLERS: dict[int, tuple[ErrorDistribution, _Sampler]] = {}


def _sampler_for(dist: ErrorDistribution) -> _Sampler:
    hit = _SAMPLERS.get(id(dist))
    if hit is not None and hit[0] is dist:
        return hit[1]
    if len(_SAMPLERS) > 64:
        _SAMPLERS.clear()
    sampler = _Sampler(dist)
    _SAMPLERS[id(dist)] = (dist, sampler)
    return sampler


def _draw_position(sampler: _Sampler, rng, slots: int) -> int:
    b = _rng.draw_index(rng, sampler.bin_cdf)
    return min(int((b + rng.random()) * slots / POSITION_BINS), slots - 1)


@dataclass
class _Taken:
    """Source positions claimed by the ops placed so far.

    ``edited`` holds characters an op rewrites, ``blocked`` adds one char of
    halo around them, ``inner`` holds gaps inside a multi-char span (no
    insertion may split a transposition) and ``gaps`` holds insertion gaps.
    """

    edited: set = field(default_factory=set)
    blocked: set = field(default_factory=set)
    inner: set = field(default_factory=set)
    gaps: set = field(default_factory=set)

    def add(self, op: EditOp) -> None:
        if op.kind is OpKind.INSERTION:
            self.gaps.add(op.src_pos)
            self.blocked.update((op.src_pos - 1, op.src_pos))
            return
        self.edited.update(range(op.src_pos, op.src_pos + op.span))
        self.blocked.update(range(op.src_pos - 1, op.src_pos + op.span + 1))
        self.inner.update(range(op.src_pos + 1, op.src_pos + op.span))


def _free(taken: set, lo: int, hi: int) -> bool:
    return all(i not in taken for i in range(lo, hi))


def _make_op(kind: OpKind, sentence: str, taken: "_Taken", sampler: _Sampler, rng) -> EditOp | None:
    """Place one op. First try positions at least one untouched char away from
    earlier ops (adjacent edits can collapse into fewer ops on re-alignment),
    then settle for any non-overlapping position."""
    edited, blocked, inner, gaps = taken.edited, taken.blocked, taken.inner, taken.gaps
    length = len(sentence)
    if kind is OpKind.INSERTION:
        for attempt in range(2 * PLACEMENT_RETRIES):
            p = _draw_position(sampler, rng, length + 1)
            if p in inner:
                continue
            if attempt >= PLACEMENT_RETRIES or _free(edited, p - 1, p + 1):
                break
        else:
            return None
        if sampler.insert_chars:
            char = sampler.insert_chars[_rng.draw_index(rng, sampler.insert_cdf)]
        else:
            alphabet = sorted(set(sentence))
            char = alphabet[_rng.draw_int(rng, len(alphabet))]
        return EditOp(kind, p, "", char)

    span = 2 if kind is OpKind.TRANSPOSITION else 1
    for attempt in range(2 * PLACEMENT_RETRIES):
        avoid = blocked if attempt < PLACEMENT_RETRIES else edited
        p = _draw_position(sampler, rng, length)
        if p + span > length or not _free(avoid, p, p + span):
            continue
        if kind is OpKind.TRANSPOSITION:
            if sentence[p] == sentence[p + 1] or p + 1 in gaps:
                continue
            return EditOp(kind, p, sentence[p : p + 2], sentence[p + 1] + sentence[p])
        if kind is OpKind.DELETION:
            return EditOp(kind, p, sentence[p], "")
        replacement = sampler.confusion.sample(sentence[p], rng)
        if replacement is None:
            return EditOp(OpKind.DELETION, p, sentence[p], "")
        return EditOp(kind, p, sentence[p], replacement)

    if kind is OpKind.TRANSPOSITION:
        return _make_op(OpKind.SUBSTITUTION, sentence, taken, sampler, rng)
    return None


def splice(sentence: str, ops: Iterable[EditOp]) -> str:
    """Apply source-ordered ``ops`` right to left so positions never shift."""
    chars = list(sentence)
    for op in reversed(list(ops)):
        chars[op.src_pos : op.src_pos + op.span] = op.tgt_chars
    return "".join(chars)


def plan(sentence: str, dist: ErrorDistribution, seed: int) -> CorruptionPlan:
    if not isinstance(sentence, str) or not sentence:
        raise StructuralError("cannot corrupt an empty sentence")
    if not 0 <= int(seed) <= _rng.MASK64:
        raise StructuralError(f"seed must be a 64-bit unsigned integer, got {seed}")
    sampler = _sampler_for(dist)
    if sampler.zero_only:
        return CorruptionPlan(seed, ())

    rng = _rng.make_rng(seed)
    requested = sampler.counts[_rng.draw_index(rng, sampler.count_cdf)]
    limit = math.ceil(len(sentence) / 2)
    n = min(requested, limit)

    taken = _Taken()
    placed = []
    dropped = 0
    for k in range(n):
        if sampler.kinds:
            kind = sampler.kinds[_rng.draw_index(rng, sampler.kind_cdf)]
        else:
            kind = OpKind.SUBSTITUTION
        op = _make_op(kind, sentence, taken, sampler, rng)
        if op is None:
            dropped += 1
            continue
        taken.add(op)
        placed.append((op.src_pos, op.kind is not OpKind.INSERTION, k, op))
    placed.sort(key=lambda item: item[:3])
    return CorruptionPlan(
        seed=seed,
        ops=tuple(item[3] for item in placed),
        requested=requested,
        clamped=requested > limit,
        dropped=dropped,
    )


def corrupt(sentence: str, dist: ErrorDistribution, seed: int) -> tuple[str, CorruptionPlan]:
    """Corrupt ``sentence`` with errors drawn from ``dist``.

    The number of errors is capped at half the sentence length (rounded up);
    ``plan.clamped`` records when the cap bit. Ops never share a source
    position, except that several insertions may stack in one gap.
    """
    p = plan(sentence, dist, seed)
    return splice(sentence, p.ops), p


@dataclass
class CorruptSummary:
    sentences_in: int = 0
    pairs_out: int = 0
    skipped: int = 0
    clamped: int = 0
    dropped_ops: int = 0
    errors_applied: int = 0

    def merge(self, other: "CorruptSummary") -> None:
        self.sentences_in += other.sentences_in
        self.pairs_out += other.pairs_out
        self.skipped += other.skipped
        self.clamped += other.clamped
        self.dropped_ops += other.dropped_ops
        self.errors_applied += other.errors_applied


def sentence_seed(base_seed: int, ordinal: int) -> int:
    return _rng.mix_seed(base_seed, ordinal)


def _corrupt_chunk(dist: ErrorDistribution, base_seed: int, chunk: list) -> tuple[list, CorruptSummary]:
    summary = CorruptSummary()
    out = []
    for ordinal, sentence in chunk:
        summary.sentences_in += 1
        try:
            corrupted, p = corrupt(sentence, dist, sentence_seed(base_seed, ordinal))
            pair = SentencePair(corrupted, sentence)
        except StructuralError as exc:
            summary.skipped += 1
            log.warning("skipping sentence %d: %s", ordinal, exc)
            continue
        summary.pairs_out += 1
        summary.clamped += p.clamped
        summary.dropped_ops += p.dropped
        summary.errors_applied += len(p.ops)
        out.append(pair)
    return out, summary


def corrupt_corpus(
    sentences: Iterable[str],
    dist: ErrorDistribution,
    base_seed: int = 0,
    *,
    workers: int = 1,
    chunk_size: int = 256,
    summary: CorruptSummary | None = None,
) -> Iterator[SentencePair]:
    """Lazily corrupt a stream of sentences into (corrupted, correct) pairs.

    Sentence ``i`` is corrupted with ``sentence_seed(base_seed, i)``, so the
    output does not depend on ``workers`` or ``chunk_size``.
    """
    summary = CorruptSummary() if summary is None else summary
    work = partial(_corrupt_chunk, dist, base_seed)
    for pairs, part in map_chunks(work, enumerate(sentences), workers, chunk_size):
        summary.merge(part)
        yield from pairs


class SBSCCorruptor:
    """Picklable ``(text, seed) -> text`` adapter used by the augmentation stages."""

    def __init__(self, dist: ErrorDistribution):
        self.dist = dist

    def __call__(self, text: str, seed: int) -> str:
        return corrupt(text, self.dist, seed)[0]
