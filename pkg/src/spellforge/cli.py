"""``spellforge`` command line.

Every subcommand reads its settings from an optional JSON config file
(``--config``) and from flags; flags win. Exit status is 0 on success, 1 on
usage or validation errors and 2 on I/O errors. On success a one-line JSON
run summary goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field, fields
from typing import Any, Mapping

from . import corpus_io, error_model, evaluation, heuristic, pipeline
from ._rng import MASK64
from .errors import ConfigError, ParseError, SpellforgeError
from .heuristic import HeuristicConfig, Violation
from .pipeline import CleanRules
from .sbsc import CorruptSummary, SBSCCorruptor, corrupt_corpus

log = logging.getLogger("spellforge")

SUBCOMMANDS = ("scan", "corrupt", "augment", "clean", "balance", "build-pretrain", "evaluate")
SEED_ENV = "SPELLFORGE_SEED"

_DEFAULT_DENSITY = {"build-pretrain": 10}


@dataclass
class RunConfig:
    subcommand: str
    inputs: list = field(default_factory=list)
    output: str | None = None
    seed: int = 0
    format: str | None = None
    workers: int = 1
    model: str | None = None
    heuristic: HeuristicConfig | None = None
    clean: CleanRules | None = None
    density_factor: int = 1
    punctuation_mode: str = "keep"
    copies: int = 1
    strategy: str = "add"
    corruptor: str = "heuristic"
    target: int | None = None
    layout: str = "qwerty"
    confusion: str = "en"
    wrong_words: str = "en"
    hypothesis: str | None = None
    reference: str | None = None


# config-file keys accepted at top level; nested blocks are "heuristic" and "clean"
_TOP_KEYS = {f.name for f in fields(RunConfig)} - {"subcommand"}
_CLEAN_KEYS = {"allowed_scripts", "min_length", "max_length"}


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object", path, 1, 1)
    return data


def _merge(base: Mapping, overrides: Mapping) -> dict:
    out = dict(base)
    for key, value in overrides.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _env_seed(problems: list) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        problems.append(Violation("seed", f"{SEED_ENV}={raw!r} is not an integer"))
        return 0


def build_config(subcommand: str, values: Mapping[str, Any]) -> RunConfig:
    """Validate merged settings and return a :class:`RunConfig`.

    Raises :class:`ConfigError` listing every violation found.
    """
    problems: list[Violation] = []
    if subcommand not in SUBCOMMANDS:
        raise ConfigError([Violation("subcommand", f"unknown subcommand {subcommand!r}")])
    for key in sorted(set(values) - _TOP_KEYS):
        problems.append(Violation(key, "unknown setting"))

    cfg = RunConfig(subcommand)
    inputs = values.get("inputs", [])
    if isinstance(inputs, str):
        inputs = [inputs]
    cfg.inputs = list(inputs)
    cfg.output = values.get("output")
    cfg.seed = values["seed"] if "seed" in values else _env_seed(problems)
    for key in ("format", "workers", "model", "punctuation_mode", "copies", "strategy", "corruptor",
                "target", "layout", "confusion", "wrong_words", "hypothesis", "reference"):
        if key in values:
            setattr(cfg, key, values[key])
    cfg.density_factor = values.get("density_factor", _DEFAULT_DENSITY.get(subcommand, 1))

    if not _is_int(cfg.seed) or not 0 <= cfg.seed <= MASK64:
        problems.append(Violation("seed", f"must be a 64-bit unsigned integer, got {cfg.seed!r}"))
    if not _is_int(cfg.workers) or cfg.workers < 1:
        problems.append(Violation("workers", f"must be an integer >= 1, got {cfg.workers!r}"))
    if cfg.format is not None and cfg.format not in corpus_io.FORMATS:
        problems.append(Violation("format", f"must be one of {corpus_io.FORMATS}"))
    if not _is_int(cfg.density_factor) or cfg.density_factor < 1:
        problems.append(Violation("density_factor", f"must be an integer >= 1, got {cfg.density_factor!r}"))
    if not _is_int(cfg.copies) or cfg.copies < 1:
        problems.append(Violation("copies", f"must be an integer >= 1, got {cfg.copies!r}"))
    if cfg.punctuation_mode not in evaluation.PUNCTUATION_MODES:
        problems.append(Violation("punctuation_mode", f"must be one of {evaluation.PUNCTUATION_MODES}"))
    if cfg.strategy not in ("add", "concat"):
        problems.append(Violation("strategy", "must be add or concat"))
    if cfg.corruptor not in ("sbsc", "heuristic"):
        problems.append(Violation("corruptor", "must be sbsc or heuristic"))
    if cfg.target is not None and (not _is_int(cfg.target) or cfg.target < 0):
        problems.append(Violation("target", f"must be a non-negative integer, got {cfg.target!r}"))

    block = values.get("heuristic")
    if block is not None:
        if not isinstance(block, Mapping):
            problems.append(Violation("heuristic", "must be an object"))
        else:
            unknown = sorted(set(block) - {f.name for f in fields(HeuristicConfig)})
            problems.extend(Violation(f"heuristic.{k}", "unknown setting") for k in unknown)
            known = {k: v for k, v in block.items() if k not in unknown}
            cfg.heuristic = HeuristicConfig(**known)
            problems.extend(Violation(f"heuristic.{v.field}", v.message)
                            for v in heuristic.validate_config(cfg.heuristic))

    block = values.get("clean")
    if block is not None:
        if not isinstance(block, Mapping):
            problems.append(Violation("clean", "must be an object"))
        else:
            unknown = sorted(set(block) - _CLEAN_KEYS)
            problems.extend(Violation(f"clean.{k}", "unknown setting") for k in unknown)
            try:
                cfg.clean = CleanRules(**{k: v for k, v in block.items() if k in _CLEAN_KEYS})
            except (SpellforgeError, TypeError) as exc:
                problems.append(Violation("clean", str(exc)))

    problems.extend(_check_paths(cfg))
    if problems:
        raise ConfigError(problems)
    return cfg


_NEEDS = {
    "scan": ("inputs", "output"),
    "corrupt": ("inputs", "output", "model"),
    "augment": ("inputs", "output"),
    "clean": ("inputs", "output"),
    "balance": ("inputs", "output", "target"),
    "build-pretrain": ("inputs", "output", "model"),
    "evaluate": ("inputs",),
}


def _check_paths(cfg: RunConfig) -> list[Violation]:
    out = []
    for key in _NEEDS[cfg.subcommand]:
        if not getattr(cfg, key):
            if key == "target" and cfg.target == 0:
                continue
            out.append(Violation(key, f"required by {cfg.subcommand}"))
    if cfg.subcommand == "augment" and cfg.corruptor == "sbsc" and not cfg.model:
        out.append(Violation("model", "required when corruptor is sbsc"))
    if cfg.subcommand not in ("balance", "evaluate") and len(cfg.inputs) > 1:
        out.append(Violation("inputs", f"{cfg.subcommand} takes a single input"))
    if cfg.subcommand == "evaluate" and (cfg.hypothesis is None) != (cfg.reference is None):
        out.append(Violation("hypothesis", "--hypothesis and --reference go together"))
    paths = [("inputs", p) for p in cfg.inputs]
    paths += [(k, getattr(cfg, k)) for k in ("model", "hypothesis", "reference") if getattr(cfg, k)]
    for key, path in paths:
        if path != "-" and not os.path.isfile(path):
            out.append(Violation(key, f"no such file: {path}"))
    if cfg.output and cfg.output != "-":
        parent = os.path.dirname(os.path.abspath(cfg.output))
        if not os.path.isdir(parent):
            out.append(Violation("output", f"directory does not exist: {parent}"))
    return out


def load_config(path: str | None, overrides: Mapping[str, Any] | None = None,
                subcommand: str | None = None) -> RunConfig:
    """Read a JSON run config, apply ``overrides`` (flags) on top, validate."""
    data = _read_json(path) if path else {}
    sub = data.pop("subcommand", None)
    subcommand = subcommand or sub
    if subcommand is None:
        raise ConfigError([Violation("subcommand", "missing")])
    return build_config(subcommand, _merge(data, overrides or {}))


# -- argument parsing --------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


S = argparse.SUPPRESS


def _common(p: argparse.ArgumentParser, *, seeded=True, workers=True, fmt=True) -> None:
    p.add_argument("--config", default=S, help="JSON run config; flags override its values")
    p.add_argument("--out", dest="output", default=S, help="output path or - for stdout")
    if seeded:
        p.add_argument("--seed", type=int, default=S, help=f"base seed (default ${SEED_ENV} or 0)")
    if workers:
        p.add_argument("--workers", type=int, default=S)
    if fmt:
        p.add_argument("--format", choices=corpus_io.FORMATS, default=S, help="pair format (default: from extension)")


def _heuristic_flags(p):
    g = p.add_argument_group("heuristic corruptor")
    g.add_argument("--action", dest="heuristic.action", choices=heuristic.ACTIONS, default=S)
    g.add_argument("--level", dest="heuristic.level", choices=heuristic.LEVELS, default=S)
    g.add_argument("--aug-rate", dest="heuristic.aug_rate", type=float, default=S)
    g.add_argument("--aug-prob", dest="heuristic.aug_prob", type=float, default=S)
    g.add_argument("--min-aug", dest="heuristic.min_aug", type=int, default=S)
    g.add_argument("--max-aug", dest="heuristic.max_aug", type=int, default=S)
    g.add_argument("--mult-num", dest="heuristic.mult_num", type=int, default=S)
    g.add_argument("--layout", default=S, help="qwerty, jcuken or a layout JSON file")
    g.add_argument("--confusion", default=S, help="en, ru, or a confusion JSON file")
    g.add_argument("--wrong-words", dest="wrong_words", default=S, help="en, ru, or a wrong-word JSON file")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spellforge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("scan", help="mine an error distribution from a pair corpus")
    p.add_argument("--pairs", dest="inputs", action="append", default=S)
    _common(p, seeded=False)

    p = sub.add_parser("corrupt", help="corrupt clean sentences with a mined distribution")
    p.add_argument("--model", default=S)
    p.add_argument("--in", dest="inputs", action="append", default=S)
    p.add_argument("--density-factor", dest="density_factor", type=int, default=S)
    _common(p)

    p = sub.add_parser("augment", help="add noise to a pair corpus (Add/Concat)")
    p.add_argument("--in", dest="inputs", action="append", default=S)
    p.add_argument("--strategy", choices=("add", "concat"), default=S)
    p.add_argument("--copies", type=int, default=S)
    p.add_argument("--corruptor", choices=("sbsc", "heuristic"), default=S)
    p.add_argument("--model", default=S, help="distribution file for --corruptor sbsc")
    _heuristic_flags(p)
    _common(p)

    p = sub.add_parser("clean", help="drop sentences outside the allowed scripts or lengths")
    p.add_argument("--in", dest="inputs", action="append", default=S)
    p.add_argument("--min-length", dest="clean.min_length", type=int, default=S)
    p.add_argument("--max-length", dest="clean.max_length", type=int, default=S)
    p.add_argument("--scripts", dest="clean.allowed_scripts", type=lambda s: s.split(","), default=S,
                   help="comma-separated Unicode script names (default Cyrillic,Latin)")
    _common(p, seeded=False, workers=False, fmt=False)

    p = sub.add_parser("balance", help="sample the same number of lines from several corpora")
    p.add_argument("--in", dest="inputs", action="append", default=S)
    p.add_argument("--target", type=int, default=S)
    _common(p, fmt=False)

    p = sub.add_parser("build-pretrain", help="clean sentences -> dense synthetic pairs")
    p.add_argument("--model", default=S)
    p.add_argument("--in", dest="inputs", action="append", default=S)
    p.add_argument("--density-factor", dest="density_factor", type=int, default=S)
    _common(p)

    p = sub.add_parser("evaluate", help="score spell-checker output")
    p.add_argument("--triples", dest="inputs", action="append", default=S,
                   help="TSV: source, hypothesis, reference")
    p.add_argument("--source", dest="inputs", action="append", default=S)
    p.add_argument("--hypothesis", default=S)
    p.add_argument("--reference", default=S)
    p.add_argument("--punctuation", dest="punctuation_mode", choices=evaluation.PUNCTUATION_MODES, default=S)
    _common(p, seeded=False, workers=False, fmt=False)
    return parser


def _overrides(ns: argparse.Namespace) -> dict:
    out: dict = {}
    for key, value in vars(ns).items():
        if key in ("command", "config", "verbose"):
            continue
        if "." in key:
            block, name = key.split(".", 1)
            out.setdefault(block, {})[name] = value
        else:
            out[key] = value
    return out


# -- subcommands -------------------------------------------------------------

def _pair_format(cfg: RunConfig, path: str | None) -> str:
    return cfg.format or corpus_io.guess_format(path or "-")


def _write_pairs(pairs, cfg: RunConfig) -> int:
    fmt = _pair_format(cfg, cfg.output)
    with corpus_io.AtomicWriter(cfg.output) as out:
        for pair in pairs:
            out.write_line(corpus_io.format_pair(pair, fmt))
    return out.count


def _cmd_scan(cfg: RunConfig) -> dict:
    read = corpus_io.ReadReport()
    scan = error_model.ScanSummary()
    pairs = corpus_io.read_pairs(cfg.inputs[0], _pair_format(cfg, cfg.inputs[0]), read)
    dist = error_model.scan_corpus(pairs, workers=cfg.workers, summary=scan)
    with corpus_io.AtomicWriter(cfg.output) as out:
        error_model.save(dist, out)
    return {"records_in": read.lines, "records_out": scan.pairs_used,
            "skipped": read.skipped + scan.skipped, "mean_errors": dist.mean_errors}


def _cmd_corrupt(cfg: RunConfig) -> dict:
    dist = error_model.load(cfg.model)
    summary = CorruptSummary()
    sentences = corpus_io.read_sentences(cfg.inputs[0])
    if cfg.subcommand == "build-pretrain":
        pairs = pipeline.build_pretrain_corpus(sentences, dist, cfg.density_factor, cfg.seed,
                                               workers=cfg.workers, summary=summary)
    else:
        dist = error_model.scale_density(dist, cfg.density_factor)
        pairs = corrupt_corpus(sentences, dist, cfg.seed, workers=cfg.workers, summary=summary)
    written = _write_pairs(pairs, cfg)
    return {"records_in": summary.sentences_in, "records_out": written, "skipped": summary.skipped,
            "clamped": summary.clamped, "errors_applied": summary.errors_applied}


def _make_corruptor(cfg: RunConfig):
    if cfg.corruptor == "sbsc":
        return SBSCCorruptor(error_model.load(cfg.model))
    hcfg = cfg.heuristic or HeuristicConfig.word_default()
    if hcfg.level == "sentence":
        return heuristic.HeuristicCorruptor(hcfg, wrong_words=heuristic.load_wrong_words(cfg.wrong_words))
    return heuristic.HeuristicCorruptor(
        hcfg, layout=heuristic.load_layout(cfg.layout), confusion=heuristic.load_confusion(cfg.confusion)
    )


def _cmd_augment(cfg: RunConfig) -> dict:
    corruptor = _make_corruptor(cfg)
    read = corpus_io.ReadReport()
    summary = pipeline.AugmentSummary()
    pairs = corpus_io.read_pairs(cfg.inputs[0], _pair_format(cfg, cfg.inputs[0]), read)
    if cfg.strategy == "add":
        out = pipeline.augment_add(pairs, corruptor, cfg.seed, workers=cfg.workers, summary=summary)
    else:
        out = pipeline.augment_concat(pairs, corruptor, cfg.copies, cfg.seed, workers=cfg.workers, summary=summary)
    written = _write_pairs(out, cfg)
    return {"records_in": read.records, "records_out": written, "skipped": read.skipped + summary.skipped,
            "strategy": cfg.strategy}


def _cmd_clean(cfg: RunConfig) -> dict:
    rules = cfg.clean or CleanRules()
    kept, report = pipeline.clean_corpus(corpus_io.read_sentences(cfg.inputs[0]), rules)
    with corpus_io.AtomicWriter(cfg.output) as out:
        out.write_lines(kept)
    return {"records_in": report.seen, "records_out": report.kept, "skipped": report.rejected_total,
            "rejected": dict(sorted(report.rejected.items()))}


def _cmd_balance(cfg: RunConfig) -> dict:
    corpora = [corpus_io.read_sentences(p) for p in cfg.inputs]
    with corpus_io.AtomicWriter(cfg.output) as out:
        out.write_lines(pipeline.balance(corpora, cfg.target, cfg.seed, names=cfg.inputs))
    return {"records_in": None, "records_out": out.count, "skipped": 0}


def _cmd_evaluate(cfg: RunConfig) -> dict:
    read = corpus_io.ReadReport()
    if cfg.hypothesis:
        triples = corpus_io.read_aligned_triples(cfg.inputs[0], cfg.hypothesis, cfg.reference, read)
    else:
        triples = corpus_io.read_triples(cfg.inputs[0], read)
    report = evaluation.evaluate(triples, cfg.punctuation_mode)
    if cfg.output:
        with corpus_io.AtomicWriter(cfg.output) as out:
            out.write_line(report.to_json())
    print(report.format(), file=sys.stderr if cfg.output == "-" else sys.stdout)
    return {"records_in": read.lines, "records_out": report.sentences, "skipped": read.skipped,
            "precision": report.precision, "recall": report.recall, "f1": report.f1,
            "accuracy": report.accuracy, "correction_rate": report.correction_rate}


_COMMANDS = {
    "scan": _cmd_scan,
    "corrupt": _cmd_corrupt,
    "augment": _cmd_augment,
    "clean": _cmd_clean,
    "balance": _cmd_balance,
    "build-pretrain": _cmd_corrupt,
    "evaluate": _cmd_evaluate,
}


def run(argv=None) -> int:
    parser = make_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        cfg = load_config(getattr(ns, "config", None), _overrides(ns), ns.command)
        summary = _COMMANDS[ns.command](cfg)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"spellforge {ns.command}: {v.field}: {v.message}", file=sys.stderr)
        return 1
    except SpellforgeError as exc:
        print(f"spellforge {ns.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"spellforge {ns.command}: {exc}", file=sys.stderr)
        return 2
    summary = {"command": ns.command, **summary,
               "elapsed_s": round(time.perf_counter() - started, 3)}
    print(json.dumps(summary, ensure_ascii=False), file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
