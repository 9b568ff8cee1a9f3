"""Spelling-error mining, synthetic typo generation, corpus pipelines and
spell-checker scoring."""

from ._kernels import BACKEND
from .alignment import EditMatrix, EditOp, OpKind, align, apply_ops, build_matrix, distance, traceback
from .error_model import (
    ConfusionTable,
    ErrorDistribution,
    SentencePair,
    load,
    save,
    scale_density,
    scan_corpus,
)
from .errors import ConfigError, ParseError, SchemaVersionError, SpellforgeError, StructuralError
from .evaluation import EvalReport, EvalTriple, evaluate, extract_corrections, strip_punctuation
from .heuristic import (
    HeuristicConfig,
    KeyboardLayout,
    WrongWordTable,
    augment_sentence_level,
    augment_word_level,
    validate_config,
)
from .pipeline import CleanRules, augment_add, augment_concat, balance, build_pretrain_corpus, clean_corpus
from .sbsc import CorruptionPlan, corrupt, corrupt_corpus

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CleanRules",
    "ConfigError",
    "ConfusionTable",
    "CorruptionPlan",
    "EditMatrix",
    "EditOp",
    "ErrorDistribution",
    "EvalReport",
    "EvalTriple",
    "HeuristicConfig",
    "KeyboardLayout",
    "OpKind",
    "ParseError",
    "SchemaVersionError",
    "SentencePair",
    "SpellforgeError",
    "StructuralError",
    "WrongWordTable",
    "align",
    "apply_ops",
    "augment_add",
    "augment_concat",
    "augment_sentence_level",
    "augment_word_level",
    "balance",
    "build_matrix",
    "build_pretrain_corpus",
    "clean_corpus",
    "corrupt",
    "corrupt_corpus",
    "distance",
    "evaluate",
    "extract_corrections",
    "load",
    "save",
    "scale_density",
    "scan_corpus",
    "strip_punctuation",
    "traceback",
    "validate_config",
]
