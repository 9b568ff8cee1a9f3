"""Readers and writers for the on-disk corpus formats.

Pair corpora are either two-column TSV (``corrupted<TAB>correct``) or JSON
lines with ``source`` (corrupted) and ``correction`` (correct) fields.
Evaluation input is three-column TSV (``source<TAB>hypothesis<TAB>reference``)
or three line-aligned plain-text files. Everything is UTF-8; ``-`` means
stdin/stdout.
"""

from __future__ import annotations

import contextlib
import json
import logging
import os
import sys
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .error_model import SentencePair
from .errors import StructuralError
from .evaluation import EvalTriple

log = logging.getLogger(__name__)

FORMATS = ("tsv", "records")


@dataclass
class ReadReport:
    lines: int = 0
    records: int = 0
    skipped: int = 0
    reasons: Counter = field(default_factory=Counter)

    def skip(self, line_no: int, reason: str) -> None:
        self.skipped += 1
        self.reasons[reason] += 1
        log.warning("line %d skipped: %s", line_no, reason)


def guess_format(path: str, default: str = "tsv") -> str:
    if path.endswith((".jsonl", ".ndjson", ".json")):
        return "records"
    if path.endswith((".tsv", ".txt")):
        return "tsv"
    return default


@contextlib.contextmanager
def open_text(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            yield fh


def iter_lines(path: str) -> Iterator[str]:
    """Lines of ``path`` without their line terminator."""
    with open_text(path) as fh:
        for line in fh:
            yield line.rstrip("\r\n")


def read_sentences(path: str) -> Iterator[str]:
    return iter_lines(path)


def read_pairs(path: str, fmt: str = "tsv", report: ReadReport | None = None) -> Iterator[SentencePair]:
    report = ReadReport() if report is None else report
    for line_no, line in enumerate(iter_lines(path), start=1):
        report.lines += 1
        if not line.strip():
            report.skip(line_no, "blank")
            continue
        try:
            if fmt == "records":
                obj = json.loads(line)
                pair = SentencePair(obj["source"], obj["correction"])
            else:
                cols = line.split("\t")
                if len(cols) != 2:
                    raise StructuralError(f"expected 2 columns, found {len(cols)}")
                pair = SentencePair(cols[0], cols[1])
        except (json.JSONDecodeError, KeyError, TypeError, StructuralError) as exc:
            report.skip(line_no, type(exc).__name__ if not isinstance(exc, StructuralError) else str(exc))
            continue
        report.records += 1
        yield pair


def read_triples(path: str, report: ReadReport | None = None) -> Iterator[EvalTriple]:
    report = ReadReport() if report is None else report
    for line_no, line in enumerate(iter_lines(path), start=1):
        report.lines += 1
        cols = line.split("\t")
        try:
            if len(cols) != 3:
                raise StructuralError(f"expected 3 columns, found {len(cols)}")
            triple = EvalTriple(*cols)
        except StructuralError as exc:
            report.skip(line_no, str(exc))
            continue
        report.records += 1
        yield triple


def read_aligned_triples(source: str, hypothesis: str, reference: str,
                         report: ReadReport | None = None) -> Iterator[EvalTriple]:
    report = ReadReport() if report is None else report
    streams = [iter_lines(source), iter_lines(hypothesis), iter_lines(reference)]
    line_no = 0
    while True:
        rows = [next(s, None) for s in streams]
        if all(r is None for r in rows):
            return
        line_no += 1
        report.lines += 1
        if any(r is None for r in rows):
            raise StructuralError(f"evaluation files differ in length at line {line_no}")
        try:
            triple = EvalTriple(*rows)
        except StructuralError as exc:
            report.skip(line_no, str(exc))
            continue
        report.records += 1
        yield triple


def format_pair(pair: SentencePair, fmt: str = "tsv") -> str:
    if fmt == "records":
        return json.dumps({"source": pair.corrupted, "correction": pair.correct}, ensure_ascii=False)
    for text in (pair.corrupted, pair.correct):
        if "\t" in text or "\n" in text or "\r" in text:
            raise StructuralError("TSV fields cannot contain tabs or line breaks; use the records format")
    return f"{pair.corrupted}\t{pair.correct}"


def _umask() -> int:
    # os.umask can only be read by setting it
    mask = os.umask(0)
    os.umask(mask)
    return mask


class AtomicWriter:
    """Text sink that only appears at ``path`` once :meth:`commit` runs.

    Output goes to a temporary file in the destination directory and is
    renamed into place on commit, so a failed run never leaves partial output.
    ``-`` writes straight to stdout.
    """

    def __init__(self, path: str):
        self.path = path
        self.count = 0
        if path == "-":
            self._fh = sys.stdout
            self._tmp = None
        else:
            directory = os.path.dirname(os.path.abspath(path))
            fd, self._tmp = tempfile.mkstemp(prefix=".spellforge-", dir=directory)
            self._fh = os.fdopen(fd, "w", encoding="utf-8", newline="\n")

    def write(self, text: str) -> None:
        self._fh.write(text)

    def write_line(self, text: str) -> None:
        self._fh.write(text)
        self._fh.write("\n")
        self.count += 1

    def write_lines(self, lines: Iterable[str]) -> int:
        for line in lines:
            self.write_line(line)
        return self.count

    def commit(self) -> None:
        if self._tmp is None:
            self._fh.flush()
            return
        self._fh.close()
        try:
            os.chmod(self._tmp, 0o666 & ~_umask())
            os.replace(self._tmp, self.path)
        except OSError:
            os.unlink(self._tmp)
            raise
        finally:
            self._tmp = None

    def abort(self) -> None:
        if self._tmp is not None:
            self._fh.close()
            os.unlink(self._tmp)
            self._tmp = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.commit()
        else:
            self.abort()
        return False
