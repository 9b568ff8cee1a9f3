"""Fixture generators shared by the test modules (stdlib ``random`` only)."""

from __future__ import annotations

import random
import string

LETTERS = string.ascii_lowercase
CYRILLIC = "абвгдеёжзийклмнопрстуфхцчшщъыьэюя"


def sentences(n: int, seed: int, min_len: int = 40, max_len: int = 100, letters: str = LETTERS) -> list[str]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        target = rng.randint(min_len, max_len)
        words = []
        length = -1
        while length < target:
            w = "".join(rng.choice(letters) for _ in range(rng.randint(2, 9)))
            words.append(w)
            length += len(w) + 1
        out.append(" ".join(words)[:target].rstrip() or "x")
    return out


KINDS = ("substitution", "deletion", "insertion", "transposition")


def plant(sentence: str, n_ops: int, rng: random.Random, weights=(5, 2, 2, 1)) -> tuple[str, list[str]]:
    """Plant ``n_ops`` well-separated, unambiguous edits into ``sentence``.

    Ops sit at least three characters apart and never create a character
    equal to a neighbour, so each one survives re-alignment as exactly one
    edit of the planted kind. Returns (corrupted, planted kinds).
    """
    text = sentence
    slots = list(range(1, len(text) - 2, 4))
    rng.shuffle(slots)
    chosen = sorted(slots[:n_ops], reverse=True)
    kinds = []
    for pos in chosen:
        kind = rng.choices(KINDS, weights)[0]
        left = text[pos - 1]
        here, after = text[pos], text[pos + 1]
        if kind == "transposition" and here == after:
            kind = "substitution"
        if kind == "deletion" and (here == left or here == after):
            kind = "substitution"
        if kind == "substitution":
            c = rng.choice([x for x in LETTERS if x not in (left, here, after)])
            text = text[:pos] + c + text[pos + 1 :]
        elif kind == "deletion":
            text = text[:pos] + text[pos + 1 :]
        elif kind == "insertion":
            c = rng.choice([x for x in LETTERS if x not in (left, here)])
            text = text[:pos] + c + text[pos:]
        else:
            text = text[:pos] + after + here + text[pos + 2 :]
        kinds.append(kind)
    return text, kinds
