"""Scoring spell-checker output against expert references.

Each sentence is tokenised on whitespace. The hypothesis and the reference
are both aligned to the source at token level, and every changed region of an
alignment becomes a :class:`Correction`. A hypothesis correction counts as a
true positive only if the reference has the same span with the same
replacement. Counts are summed over the whole test set before precision,
recall and F1 are computed (micro-averaging).

Conventions where a ratio is 0/0: precision and recall are 1 (nothing was
proposed, or nothing needed fixing); F1 is 0 when P + R is 0; accuracy and
correction rate are 1.
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from ._kernels import DELETION, INSERTION, MATCH, SUBSTITUTION
from .alignment import align_sequences
from .errors import StructuralError

PUNCTUATION_MODES = ("keep", "strip")


@dataclass(frozen=True)
class EvalTriple:
    source: str
    hypothesis: str
    reference: str

    def __post_init__(self):
        for name in ("source", "hypothesis", "reference"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise StructuralError(f"evaluation triple has an empty {name}")


@dataclass(frozen=True, order=True)
class Correction:
    """Source tokens ``[start, end)`` rewritten as ``replacement``."""

    start: int
    end: int
    replacement: tuple[str, ...]

    @property
    def src_span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def weight(self) -> int:
        """Source tokens this correction repairs (insertions count once)."""
        return max(1, self.end - self.start)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_token(token: str) -> str:
    lo, hi = 0, len(token)
    while lo < hi and _is_punct(token[lo]):
        lo += 1
    while hi > lo and _is_punct(token[hi - 1]):
        hi -= 1
    return token[lo:hi]


def tokenize(text: str, punctuation_mode: str = "keep") -> list[str]:
    if punctuation_mode not in PUNCTUATION_MODES:
        raise StructuralError(f"punctuation_mode must be one of {PUNCTUATION_MODES}")
    tokens = text.split()
    if punctuation_mode == "strip":
        tokens = [t for t in map(_strip_token, tokens) if t]
    return tokens


def strip_punctuation(text: str) -> str:
    """Drop leading/trailing punctuation from every token; all-punctuation tokens vanish.

    >>> strip_punctuation("well, it's a well-known fact!")
    "well it's a well-known fact"
    """
    return " ".join(tokenize(text, "strip"))


def corrections_from_tokens(source: Sequence[str], other: Sequence[str]) -> list[Correction]:
    """Changed regions of a token alignment.

    Runs of one-for-one substitutions yield one correction per token; a run
    that contains an insertion or deletion (a split or merge of words) is kept
    as a single correction.
    """
    out: list[Correction] = []
    run: list[tuple[int, int, int]] = []

    def flush():
        if not run:
            return
        if all(code == SUBSTITUTION for code, _, _ in run):
            for _, i, j in run:
                out.append(Correction(i, i + 1, (other[j],)))
        else:
            start = run[0][1]
            end = start + sum(code != INSERTION for code, _, _ in run)
            tgt_start = run[0][2]
            tgt_end = tgt_start + sum(code != DELETION for code, _, _ in run)
            out.append(Correction(start, end, tuple(other[tgt_start:tgt_end])))
        run.clear()

    for step in align_sequences(source, other):
        if step[0] == MATCH:
            flush()
        else:
            run.append(step)
    flush()
    return out


def extract_corrections(source: str, other: str, punctuation_mode: str = "keep") -> list[Correction]:
    return corrections_from_tokens(tokenize(source, punctuation_mode), tokenize(other, punctuation_mode))


@dataclass
class SentenceScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    reference_tokens: int = 0
    matched_tokens: int = 0
    misspelled_tokens: int = 0
    corrected_tokens: int = 0
    hypothesis_corrections: list = field(default_factory=list)
    reference_corrections: list = field(default_factory=list)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 1.0


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    correction_rate: float
    tp: int
    fp: int
    fn: int
    sentences: int
    punctuation_mode: str
    per_sentence: list[SentenceScore] = field(default_factory=list)

    def to_dict(self, with_sentences: bool = True) -> dict:
        data = asdict(self)
        if with_sentences:
            for row in data["per_sentence"]:
                for key in ("hypothesis_corrections", "reference_corrections"):
                    row[key] = [
                        {"src_span": [c["start"], c["end"]], "replacement": list(c["replacement"])}
                        for c in row[key]
                    ]
        else:
            del data["per_sentence"]
        return data

    def to_json(self, with_sentences: bool = True) -> str:
        return json.dumps(self.to_dict(with_sentences), ensure_ascii=False)

    def format(self) -> str:
        lines = [
            f"sentences        {self.sentences}",
            f"punctuation      {self.punctuation_mode}",
            f"TP / FP / FN     {self.tp} / {self.fp} / {self.fn}",
            f"precision        {self.precision:.4f}",
            f"recall           {self.recall:.4f}",
            f"F1               {self.f1:.4f}",
            f"accuracy         {self.accuracy:.4f}",
            f"correction rate  {self.correction_rate:.4f}",
        ]
        return "\n".join(lines)


def score_triple(triple: EvalTriple, punctuation_mode: str = "keep") -> SentenceScore:
    src = tokenize(triple.source, punctuation_mode)
    hyp = tokenize(triple.hypothesis, punctuation_mode)
    ref = tokenize(triple.reference, punctuation_mode)
    hyp_corr = corrections_from_tokens(src, hyp)
    ref_corr = corrections_from_tokens(src, ref)

    hyp_set = Counter(hyp_corr)
    ref_set = Counter(ref_corr)
    common = hyp_set & ref_set
    tp = sum(common.values())

    matched = sum(1 for step in align_sequences(hyp, ref) if step[0] == MATCH)
    return SentenceScore(
        tp=tp,
        fp=len(hyp_corr) - tp,
        fn=len(ref_corr) - tp,
        reference_tokens=len(ref),
        matched_tokens=matched,
        misspelled_tokens=sum(c.weight for c in ref_corr),
        corrected_tokens=sum(c.weight * n for c, n in common.items()),
        hypothesis_corrections=hyp_corr,
        reference_corrections=ref_corr,
    )


def aggregate(scores: Sequence[SentenceScore], punctuation_mode: str = "keep") -> EvalReport:
    tp = sum(s.tp for s in scores)
    fp = sum(s.fp for s in scores)
    fn = sum(s.fn for s in scores)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        accuracy=_ratio(sum(s.matched_tokens for s in scores), sum(s.reference_tokens for s in scores)),
        correction_rate=_ratio(sum(s.corrected_tokens for s in scores), sum(s.misspelled_tokens for s in scores)),
        tp=tp,
        fp=fp,
        fn=fn,
        sentences=len(scores),
        punctuation_mode=punctuation_mode,
        per_sentence=list(scores),
    )


def evaluate(triples: Iterable, punctuation_mode: str = "keep") -> EvalReport:
    """Micro-averaged scores over ``triples`` (``EvalTriple`` or 3-tuples)."""
    if punctuation_mode not in PUNCTUATION_MODES:
        raise StructuralError(f"punctuation_mode must be one of {PUNCTUATION_MODES}")
    scores = []
    for item in triples:
        triple = item if isinstance(item, EvalTriple) else EvalTriple(*item)
        scores.append(score_triple(triple, punctuation_mode))
    if not scores:
        raise StructuralError("cannot evaluate an empty set of triples")
    return aggregate(scores, punctuation_mode)
