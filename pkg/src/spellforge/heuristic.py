"""Rule-driven typo injection.

Word-level actions edit characters inside selected words:

``orfo``
    substitute characters using a confusion table (how often people type one
    letter in place of another);
``keyboard``
    substitute characters with a physically adjacent key;
``insert``
    insert random characters.

The sentence-level ``replace`` action swaps whole words for common
misspellings from a :class:`WrongWordTable`.

Units are selected first and then gated: a word is picked with probability
``aug_rate`` and a picked word is modified with probability ``aug_prob``.
"""

from __future__ import annotations

import json
import math
import os
import re
import string
from dataclasses import asdict, dataclass, fields
from importlib import resources
from typing import Mapping

from . import _rng
from .alignment import distance
from .error_model import ConfusionTable, ErrorDistribution
from .errors import ConfigError, ParseError, SchemaVersionError, StructuralError

ACTIONS = ("orfo", "insert", "keyboard", "replace")
WORD_ACTIONS = ("orfo", "insert", "keyboard")
LEVELS = ("word", "sentence")
RETRIES = 8

_WS_SPLIT = re.compile(r"(\s+)")


@dataclass(frozen=True)
class Violation:
    field: str
    message: str


@dataclass(frozen=True)
class HeuristicConfig:
    aug_rate: float = 0.1
    min_aug: int = 1
    max_aug: int = 3
    mult_num: int = 5
    action: str = "orfo"
    aug_prob: float = 0.7
    level: str = "word"

    @classmethod
    def word_default(cls) -> "HeuristicConfig":
        return cls(aug_rate=0.1, min_aug=1, max_aug=3, mult_num=5, action="orfo", aug_prob=0.7, level="word")

    @classmethod
    def sentence_default(cls) -> "HeuristicConfig":
        return cls(aug_rate=0.6, min_aug=1, max_aug=5, action="replace", aug_prob=0.7, level="sentence")

    @classmethod
    def from_dict(cls, data: Mapping) -> "HeuristicConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([Violation(k, "unknown field") for k in unknown])
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_count(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x >= 1


def validate_config(cfg: HeuristicConfig) -> list[Violation]:
    """Every problem with ``cfg``; an empty list means the config is usable."""
    out = []
    for name in ("aug_rate", "aug_prob"):
        value = getattr(cfg, name)
        if not _is_number(value) or not 0.0 <= value <= 1.0:
            out.append(Violation(name, f"must be a number in [0, 1], got {value!r}"))
    for name in ("min_aug", "max_aug", "mult_num"):
        value = getattr(cfg, name)
        if not _is_count(value):
            out.append(Violation(name, f"must be a positive integer, got {value!r}"))
    if _is_count(cfg.min_aug) and _is_count(cfg.max_aug) and cfg.min_aug > cfg.max_aug:
        out.append(Violation("min_aug,max_aug", f"min_aug {cfg.min_aug} exceeds max_aug {cfg.max_aug}"))
    if cfg.action not in ACTIONS:
        out.append(Violation("action", f"must be one of {ACTIONS}, got {cfg.action!r}"))
    if cfg.level not in LEVELS:
        out.append(Violation("level", f"must be one of {LEVELS}, got {cfg.level!r}"))
    elif cfg.action == "replace" and cfg.level != "sentence":
        out.append(Violation("action", "replace works on whole words and needs level=sentence"))
    elif cfg.action in WORD_ACTIONS and cfg.level != "word":
        out.append(Violation("action", f"{cfg.action} edits characters and needs level=word"))
    return out


def _check(cfg: HeuristicConfig) -> None:
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)


# -- data tables -------------------------------------------------------------

@dataclass(frozen=True)
class KeyboardLayout:
    name: str
    adjacency: Mapping[str, frozenset]

    def __post_init__(self):
        adj = {k: frozenset(v) for k, v in self.adjacency.items()}
        for key, near in adj.items():
            if key in near:
                raise StructuralError(f"layout {self.name}: {key!r} neighbours itself")
            for other in near:
                if key not in adj.get(other, ()):
                    raise StructuralError(f"layout {self.name}: {key!r}-{other!r} is not symmetric")
        object.__setattr__(self, "adjacency", adj)

    def neighbors(self, char: str) -> frozenset:
        return self.adjacency.get(char, frozenset())

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted(k for k in self.adjacency if k.isalpha()))


@dataclass(frozen=True)
class WrongWordTable:
    entries: Mapping[str, tuple]

    def __post_init__(self):
        clean = {}
        for word, variants in self.entries.items():
            rows = tuple((str(v), float(w)) for v, w in variants)
            for variant, weight in rows:
                if weight <= 0:
                    raise StructuralError(f"wrong-word weight for {word!r} -> {variant!r} must be positive")
                if variant == word:
                    raise StructuralError(f"wrong-word variant equals its key {word!r}")
            if rows:
                clean[word] = (tuple(v for v, _ in rows), _rng.cumulative(w for _, w in rows))
        object.__setattr__(self, "entries", {k: tuple(zip(v, _weights(c))) for k, (v, c) in clean.items()})
        object.__setattr__(self, "_cdfs", clean)

    def __contains__(self, word: str) -> bool:
        return word in self._cdfs

    def sample(self, word: str, rng) -> str:
        variants, cdf = self._cdfs[word]
        return variants[_rng.draw_index(rng, cdf)]


def _weights(cdf):
    prev = 0.0
    out = []
    for c in cdf:
        out.append(c - prev)
        prev = c
    return out


def _read_data(name_or_path: str, prefix: str) -> tuple[dict, str]:
    if os.path.exists(name_or_path):
        label = name_or_path
        with open(name_or_path, encoding="utf-8") as fh:
            text = fh.read()
    else:
        label = f"{prefix}_{name_or_path}.json"
        try:
            text = resources.files("spellforge.data").joinpath(label).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise StructuralError(f"no bundled {prefix} table named {name_or_path!r}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, label, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object", label)
    if data.get("schema_version") != 1:
        raise SchemaVersionError(data.get("schema_version"), 1)
    return data, label


def load_layout(name_or_path: str = "qwerty") -> KeyboardLayout:
    """Bundled ``qwerty`` / ``jcuken`` layouts, or a JSON file with an ``adjacency`` map."""
    data, label = _read_data(name_or_path, "layout")
    if not isinstance(data.get("adjacency"), dict):
        raise ParseError("missing adjacency map", label)
    return KeyboardLayout(data.get("name", label), data["adjacency"])


def load_confusion(name_or_path: str = "en") -> ConfusionTable:
    """Bundled ``en`` / ``ru`` confusion counts, a counts file, or a distribution file."""
    data, label = _read_data(name_or_path, "confusion")
    if "counts" in data:
        if not isinstance(data["counts"], dict):
            raise ParseError("counts must be an object", label)
        return ConfusionTable(data["counts"])
    from .error_model import from_dict

    return ConfusionTable.from_distribution(from_dict(data, label))


def load_wrong_words(name_or_path: str = "en") -> WrongWordTable:
    data, label = _read_data(name_or_path, "wrong_words")
    if not isinstance(data.get("entries"), dict):
        raise ParseError("missing entries map", label)
    return WrongWordTable(data["entries"])


def as_confusion(table) -> ConfusionTable | None:
    if table is None or isinstance(table, ConfusionTable):
        return table
    if isinstance(table, ErrorDistribution):
        return ConfusionTable.from_distribution(table)
    return ConfusionTable(table)


# -- word level --------------------------------------------------------------

def _match_case(template: str, char: str) -> str:
    return char.upper() if template.isupper() else char


def _fallback_alphabet(layout, confusion) -> tuple[str, ...]:
    letters = set()
    if layout is not None:
        letters.update(layout.alphabet)
    if confusion is not None:
        letters.update(c for c in confusion.alphabet if c.isalpha())
    return tuple(sorted(letters)) or tuple(string.ascii_lowercase)


def _uniform_other(char: str, alphabet, rng) -> str | None:
    pool = [c for c in alphabet if c != char]
    return pool[_rng.draw_int(rng, len(pool))] if pool else None


def _from_confusion(char: str, confusion: ConfusionTable | None, rng) -> str | None:
    if confusion is None:
        return None
    if char in confusion:
        return confusion.sample(char, rng)
    lower = char.lower()
    if lower != char and lower in confusion:
        return _match_case(char, confusion.sample(lower, rng))
    return None


def _substitute(char, action, layout, confusion, alphabet, rng) -> str | None:
    if action == "keyboard" and layout is not None:
        lower = char.lower()
        near = sorted(layout.neighbors(char) or layout.neighbors(lower))
        if near:
            return _match_case(char, near[_rng.draw_int(rng, len(near))])
    new = _from_confusion(char, confusion, rng)
    if new is None or new == char:
        new = _uniform_other(char.lower(), alphabet, rng)
        new = None if new is None else _match_case(char, new)
    return None if new == char else new


def _covered(char: str, action: str, layout, confusion) -> bool:
    if action == "keyboard":
        return layout is not None and bool(layout.neighbors(char) or layout.neighbors(char.lower()))
    return confusion is not None and (char in confusion or char.lower() in confusion)


def _edit_word(word: str, k: int, action: str, layout, confusion, alphabet, rng) -> str:
    if action == "insert":
        chars = list(word)
        for _ in range(k):
            pos = _rng.draw_int(rng, len(chars) + 1)
            chars.insert(pos, alphabet[_rng.draw_int(rng, len(alphabet))])
        return "".join(chars)

    # punctuation attached to a word is never a substitution target
    eligible = [i for i, ch in enumerate(word) if ch.isalnum()]
    covered = [i for i in eligible if _covered(word[i], action, layout, confusion)]
    if len(covered) >= k:
        eligible = covered
    k = min(k, len(eligible))
    chars = list(word)
    for n in range(k):
        j = n + _rng.draw_int(rng, len(eligible) - n)
        eligible[n], eligible[j] = eligible[j], eligible[n]
        pos = eligible[n]
        new = _substitute(word[pos], action, layout, confusion, alphabet, rng)
        if new is not None:
            chars[pos] = new
    return "".join(chars)


def _mutate_word(word: str, cfg: HeuristicConfig, layout, confusion, alphabet, rng) -> str:
    k = cfg.min_aug + _rng.draw_int(rng, cfg.max_aug - cfg.min_aug + 1)
    edited = word
    for _ in range(RETRIES):
        edited = _edit_word(word, k, cfg.action, layout, confusion, alphabet, rng)
        # neighbouring substitutions can fold into one transposition; redraw those
        if cfg.action == "insert" or edited == word or distance(word, edited) >= min(k, cfg.min_aug):
            break
    return edited


def augment_word_level(
    sentence: str,
    cfg: HeuristicConfig,
    layout: KeyboardLayout | None = None,
    confusion=None,
    seed: int = 0,
) -> str:
    """Apply ``cfg.action`` to randomly chosen words of ``sentence``.

    Each modified word gets between ``min_aug`` and ``max_aug`` character
    edits (fewer only if the word has fewer editable letters). Whitespace and
    unselected words come back byte-identical.
    """
    _check(cfg)
    if cfg.level != "word":
        raise StructuralError(f"word-level augmentation called with level={cfg.level!r}")
    if cfg.aug_rate == 0 or cfg.aug_prob == 0:
        return sentence
    confusion = as_confusion(confusion)
    alphabet = _fallback_alphabet(layout, confusion)
    rng = _rng.make_rng(seed)
    parts = _WS_SPLIT.split(sentence)
    for i in range(0, len(parts), 2):
        word = parts[i]
        if not word:
            continue
        if rng.random() >= cfg.aug_rate:
            continue
        if rng.random() >= cfg.aug_prob:
            continue
        parts[i] = _mutate_word(word, cfg, layout, confusion, alphabet, rng)
    return "".join(parts)


# -- sentence level ----------------------------------------------------------

_EDGE_PUNCT = re.compile(r"^(\W*)(.*?)(\W*)$", re.S)


def augment_sentence_level(sentence: str, cfg: HeuristicConfig, wrong_words: WrongWordTable, seed: int = 0) -> str:
    """Replace between ``min_aug`` and ``max_aug`` known words with a common misspelling.

    ``ceil(aug_rate * candidates)`` words are picked (clamped to the
    min/max bounds) and the pick is kept with probability ``aug_prob``.
    Lookup is case-insensitive and ignores punctuation glued to the word.
    """
    _check(cfg)
    if cfg.level != "sentence" or cfg.action != "replace":
        raise StructuralError("sentence-level augmentation needs level=sentence and action=replace")
    if cfg.aug_rate == 0 or cfg.aug_prob == 0:
        return sentence
    parts = _WS_SPLIT.split(sentence)
    candidates = []
    for i in range(0, len(parts), 2):
        lead, core, tail = _EDGE_PUNCT.match(parts[i]).groups()
        if core and core.lower() in wrong_words:
            candidates.append((i, lead, core, tail))
    if not candidates:
        return sentence

    rng = _rng.make_rng(seed)
    n = math.ceil(cfg.aug_rate * len(candidates))
    n = min(max(n, cfg.min_aug), cfg.max_aug, len(candidates))
    for m in range(n):
        j = m + _rng.draw_int(rng, len(candidates) - m)
        candidates[m], candidates[j] = candidates[j], candidates[m]
    if rng.random() >= cfg.aug_prob:
        return sentence
    for i, lead, core, tail in candidates[:n]:
        variant = wrong_words.sample(core.lower(), rng)
        if core[0].isupper():
            variant = variant[:1].upper() + variant[1:]
        parts[i] = lead + variant + tail
    return "".join(parts)


# -- entry points ------------------------------------------------------------

def augment(sentence: str, cfg: HeuristicConfig, *, layout=None, confusion=None, wrong_words=None, seed: int = 0) -> str:
    if cfg.level == "sentence":
        if wrong_words is None:
            raise StructuralError("sentence-level augmentation needs a wrong-word table")
        return augment_sentence_level(sentence, cfg, wrong_words, seed)
    return augment_word_level(sentence, cfg, layout, confusion, seed)


def variants(sentence: str, cfg: HeuristicConfig, *, layout=None, confusion=None, wrong_words=None, seed: int = 0) -> list[str]:
    """Up to ``cfg.mult_num`` distinct augmented versions of ``sentence``."""
    out: list[str] = []
    seen = {sentence}
    for attempt in range(4 * cfg.mult_num):
        text = augment(sentence, cfg, layout=layout, confusion=confusion,
                       wrong_words=wrong_words, seed=_rng.mix_seed(seed, attempt))
        if text not in seen:
            seen.add(text)
            out.append(text)
            if len(out) == cfg.mult_num:
                break
    return out


class HeuristicCorruptor:
    """Picklable ``(text, seed) -> text`` adapter used by the augmentation stages."""

    def __init__(self, cfg: HeuristicConfig, layout=None, confusion=None, wrong_words=None):
        _check(cfg)
        if cfg.level == "sentence" and wrong_words is None:
            raise StructuralError("sentence-level augmentation needs a wrong-word table")
        self.cfg = cfg
        self.layout = layout
        self.confusion = as_confusion(confusion)
        self.wrong_words = wrong_words

    def __call__(self, text: str, seed: int) -> str:
        return augment(text, self.cfg, layout=self.layout, confusion=self.confusion,
                       wrong_words=self.wrong_words, seed=seed)
