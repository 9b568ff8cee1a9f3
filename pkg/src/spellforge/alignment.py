"""Character-level alignment of sentence pairs into typed edit operations.

Distances are optimal string alignment (restricted Damerau-Levenshtein) with
unit costs. The unit of comparison is the Unicode scalar value: a letter
followed by a combining mark counts as two characters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import StructuralError

MAX_SENTENCE_CHARS = 4096


class OpKind(str, enum.Enum):
    INSERTION = "insertion"
    DELETION = "deletion"
    SUBSTITUTION = "substitution"
    TRANSPOSITION = "transposition"
    MATCH = "match"


ERROR_KINDS = (OpKind.INSERTION, OpKind.DELETION, OpKind.SUBSTITUTION, OpKind.TRANSPOSITION)

_CODE_TO_KIND = {
    _kernels.MATCH: OpKind.MATCH,
    _kernels.SUBSTITUTION: OpKind.SUBSTITUTION,
    _kernels.TRANSPOSITION: OpKind.TRANSPOSITION,
    _kernels.DELETION: OpKind.DELETION,
    _kernels.INSERTION: OpKind.INSERTION,
}

# (source chars, target chars) each kind carries
_ARITY = {
    OpKind.INSERTION: (0, 1),
    OpKind.DELETION: (1, 0),
    OpKind.SUBSTITUTION: (1, 1),
    OpKind.TRANSPOSITION: (2, 2),
    OpKind.MATCH: (1, 1),
}


@dataclass(frozen=True, slots=True)
class EditOp:
    """One character edit. ``src_pos`` indexes the source sequence; an
    insertion at ``src_pos`` goes in front of ``source[src_pos]``."""

    kind: OpKind
    src_pos: int
    src_chars: str = ""
    tgt_chars: str = ""

    def __post_init__(self):
        kind = OpKind(self.kind)
        object.__setattr__(self, "kind", kind)
        n_src, n_tgt = _ARITY[kind]
        if len(self.src_chars) != n_src or len(self.tgt_chars) != n_tgt:
            raise StructuralError(
                f"{kind.value} needs {n_src} source and {n_tgt} target chars, "
                f"got {self.src_chars!r} -> {self.tgt_chars!r}"
            )
        if self.src_pos < 0:
            raise StructuralError(f"negative src_pos {self.src_pos}")
        if kind is OpKind.SUBSTITUTION and self.src_chars == self.tgt_chars:
            raise StructuralError("substitution must change the character")
        if kind is OpKind.MATCH and self.src_chars != self.tgt_chars:
            raise StructuralError("match must keep the character")
        if kind is OpKind.TRANSPOSITION and (
            self.src_chars[::-1] != self.tgt_chars or self.src_chars[0] == self.src_chars[1]
        ):
            raise StructuralError(f"invalid transposition {self.src_chars!r} -> {self.tgt_chars!r}")

    @property
    def is_error(self) -> bool:
        return self.kind is not OpKind.MATCH

    @property
    def span(self) -> int:
        """Number of source characters the op consumes."""
        return len(self.src_chars)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "src_pos": self.src_pos,
            "src_chars": self.src_chars,
            "tgt_chars": self.tgt_chars,
        }


@dataclass(frozen=True)
class EditMatrix:
    """Full OSA cost matrix between every prefix of ``source`` and ``target``."""

    source: str
    target: str
    cells: np.ndarray

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    @property
    def distance(self) -> int:
        return int(self.cells[-1, -1])


def _check_length(text: str, label: str) -> None:
    if len(text) > MAX_SENTENCE_CHARS:
        raise StructuralError(
            f"{label} has {len(text)} characters; the limit is {MAX_SENTENCE_CHARS}"
        )


def build_matrix(source: str, target: str) -> EditMatrix:
    _check_length(source, "source")
    _check_length(target, "target")
    cells = _kernels.fill_matrix(_kernels.encode(source), _kernels.encode(target), True)
    cells.flags.writeable = False
    return EditMatrix(source, target, cells)


def _decode_trace(codes: np.ndarray, source: str, target: str, keep_matches: bool) -> list[EditOp]:
    ops = []
    for code, i, j in codes.tolist():
        kind = _CODE_TO_KIND[code]
        if kind is OpKind.MATCH and not keep_matches:
            continue
        n_src, n_tgt = _ARITY[kind]
        ops.append(EditOp(kind, i, source[i : i + n_src], target[j : j + n_tgt]))
    return ops


def traceback(matrix: EditMatrix, source: str | None = None, target: str | None = None) -> list[EditOp]:
    """Walk ``matrix`` back from the bottom-right cell and return the ops in
    source order, matches included.

    Where several predecessors give the same cost the walk prefers match,
    then substitution, transposition, deletion and insertion, which keeps it
    on the main diagonal for as long as possible.
    """
    source = matrix.source if source is None else source
    target = matrix.target if target is None else target
    if (len(source) + 1, len(target) + 1) != matrix.cells.shape:
        raise StructuralError("matrix shape does not match the given source/target")
    codes = _kernels.trace(
        matrix.cells, _kernels.encode(source), _kernels.encode(target), True
    )
    return _decode_trace(codes, source, target, keep_matches=True)


def align(source: str, target: str) -> list[EditOp]:
    """Error ops (no matches) turning ``source`` into ``target``."""
    _check_length(source, "source")
    _check_length(target, "target")
    a = _kernels.encode(source)
    b = _kernels.encode(target)
    cells = _kernels.fill_matrix(a, b, True)
    return _decode_trace(_kernels.trace(cells, a, b, True), source, target, keep_matches=False)


def distance(source: str, target: str) -> int:
    """OSA distance between two strings."""
    _check_length(source, "source")
    _check_length(target, "target")
    cells = _kernels.fill_matrix(_kernels.encode(source), _kernels.encode(target), True)
    return int(cells[-1, -1])


def apply_ops(source: str, ops: Iterable[EditOp]) -> str:
    """Rebuild the target encoded by ``ops`` (matches optional, source order).

    Raises :class:`StructuralError` naming the op index if an op points
    outside ``source``, goes backwards, or disagrees with the source text.
    """
    out = []
    cursor = 0
    for index, op in enumerate(ops):
        if op.src_pos < cursor or op.src_pos + op.span > len(source):
            raise StructuralError(
                f"op {index} ({op.kind.value} at {op.src_pos}) is out of range "
                f"for a source of length {len(source)} (cursor at {cursor})"
            )
        if source[op.src_pos : op.src_pos + op.span] != op.src_chars:
            raise StructuralError(
                f"op {index} expects {op.src_chars!r} at {op.src_pos}, "
                f"source has {source[op.src_pos : op.src_pos + op.span]!r}"
            )
        out.append(source[cursor : op.src_pos])
        out.append(op.tgt_chars)
        cursor = op.src_pos + op.span
    out.append(source[cursor:])
    return "".join(out)


def align_sequences(source: Sequence, target: Sequence) -> list[tuple[int, int, int]]:
    """Plain Levenshtein alignment of two hashable-item sequences.

    Returns ``(code, src_index, tgt_index)`` triples using the kernel op codes,
    matches included. Used for token-level alignment where transpositions of
    whole tokens are not meaningful.
    """
    vocab: dict = {}
    a = np.fromiter((vocab.setdefault(x, len(vocab)) for x in source), dtype=np.int32, count=len(source))
    b = np.fromiter((vocab.setdefault(x, len(vocab)) for x in target), dtype=np.int32, count=len(target))
    cells = _kernels.fill_matrix(a, b, False)
    return [tuple(row) for row in _kernels.trace(cells, a, b, False).tolist()]
