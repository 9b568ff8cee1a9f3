"""Acceptance suite: one marked group of tests per criterion.

Run alone with ``pytest tests/test_acceptance.py`` (or ``python
tests/test_acceptance.py``); the terminal summary prints one
``criterion N: PASS/FAIL`` line per criterion.
"""

import itertools
import random
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from spellforge import _kernels as K
from spellforge import cli
from spellforge import error_model as em
from spellforge import heuristic as H
from spellforge import pipeline as P
from spellforge import sbsc
from spellforge.alignment import align, apply_ops, build_matrix, distance, traceback
from spellforge.errors import StructuralError
from spellforge.evaluation import EvalTriple, evaluate, score_triple

from helpers import CYRILLIC, plant, sentences
from oracles import osa_distance

numba = pytest.importorskip("numba")

ALPHABET = "abcd"


# -- criterion 1 ---------------------------------------------------------------

def _all_strings(max_len):
    """Every string over 0..3 up to ``max_len`` as a padded table plus lengths."""
    words = [()]
    for n in range(1, max_len + 1):
        words.extend(itertools.product(range(4), repeat=n))
    table = np.zeros((len(words), max(1, max_len)), dtype=np.int32)
    lengths = np.zeros(len(words), dtype=np.int64)
    for k, w in enumerate(words):
        table[k, : len(w)] = w
        lengths[k] = len(w)
    return table, lengths


@numba.njit(cache=True)
def _oracle_osa(a, b):
    # suffix formulation, three rolling rows: independent of the package's prefix matrix
    n, m = a.shape[0], b.shape[0]
    nxt2 = np.zeros(m + 2, dtype=np.int64)
    nxt = np.zeros(m + 2, dtype=np.int64)
    cur = np.zeros(m + 2, dtype=np.int64)
    for j in range(m + 1):
        nxt[j] = m - j
    for i in range(n - 1, -1, -1):
        cur[m] = n - i
        for j in range(m - 1, -1, -1):
            best = nxt[j + 1] + (0 if a[i] == b[j] else 1)
            if nxt[j] + 1 < best:
                best = nxt[j] + 1
            if cur[j + 1] + 1 < best:
                best = cur[j + 1] + 1
            if i + 1 < n and j + 1 < m and a[i] == b[j + 1] and a[i + 1] == b[j]:
                if nxt2[j + 2] + 1 < best:
                    best = nxt2[j + 2] + 1
            cur[j] = best
        for j in range(m + 2):
            nxt2[j] = nxt[j]
            nxt[j] = cur[j]
    return nxt[0]


@numba.njit(cache=True)
def _replay(ops, a, b):
    """Rebuild ``b`` from ``a`` and the op trace; -1 if the trace is inconsistent."""
    out = np.empty(a.shape[0] + b.shape[0], dtype=np.int32)
    k = 0
    cursor = 0
    for r in range(ops.shape[0]):
        code, i, j = ops[r, 0], ops[r, 1], ops[r, 2]
        if i != cursor:
            return -1
        if code == 0:
            out[k] = a[i]
            k += 1
            cursor += 1
        elif code == 1:
            if a[i] == b[j]:
                return -1
            out[k] = b[j]
            k += 1
            cursor += 1
        elif code == 2:
            if a[i] == a[i + 1]:
                return -1
            out[k] = a[i + 1]
            out[k + 1] = a[i]
            k += 2
            cursor += 2
        elif code == 3:
            cursor += 1
        else:
            out[k] = b[j]
            k += 1
    if cursor != a.shape[0] or k != b.shape[0]:
        return -1
    for t in range(k):
        if out[t] != b[t]:
            return -1
    return 1


@numba.njit(cache=True)
def _sweep(table, lengths, fill, trace):
    """All ordered pairs: (pairs checked, distance mismatches, replay failures)."""
    total = 0
    bad_count = 0
    bad_replay = 0
    n = lengths.shape[0]
    for x in range(n):
        a = table[x, : lengths[x]]
        for y in range(n):
            b = table[y, : lengths[y]]
            d = fill(a, b, True)
            ops = trace(d, a, b, True)
            errors = 0
            for r in range(ops.shape[0]):
                if ops[r, 0] != 0:
                    errors += 1
            if errors != _oracle_osa(a, b) or errors != d[a.shape[0], b.shape[0]]:
                bad_count += 1
            if _replay(ops, a, b) != 1:
                bad_replay += 1
            total += 1
    return total, bad_count, bad_replay


@numba.njit(cache=True)
def _random_pairs(seed, count, lo, hi, fill, trace):
    np.random.seed(seed)
    bad_count = 0
    bad_replay = 0
    for _ in range(count):
        a = np.random.randint(0, 4, np.random.randint(lo, hi + 1)).astype(np.int32)
        b = np.random.randint(0, 4, np.random.randint(lo, hi + 1)).astype(np.int32)
        d = fill(a, b, True)
        ops = trace(d, a, b, True)
        errors = 0
        for r in range(ops.shape[0]):
            if ops[r, 0] != 0:
                errors += 1
        if errors != _oracle_osa(a, b):
            bad_count += 1
        if _replay(ops, a, b) != 1:
            bad_replay += 1
    return bad_count, bad_replay


@pytest.mark.criterion(1, "edit oracle equivalence")
def test_c1_exhaustive_kernel_sweep():
    table, lengths = _all_strings(6)
    tiny_t, tiny_l = _all_strings(1)
    _sweep(tiny_t, tiny_l, K.fill_matrix_jit, K.trace_jit)  # compile outside the timed region
    _random_pairs(0, 1, 7, 12, K.fill_matrix_jit, K.trace_jit)
    started = time.perf_counter()
    total, bad_count, bad_replay = _sweep(table, lengths, K.fill_matrix_jit, K.trace_jit)
    r_count, r_replay = _random_pairs(20240601, 10_000, 7, 12, K.fill_matrix_jit, K.trace_jit)
    elapsed = time.perf_counter() - started
    print(f"\ncriterion 1: {total} exhaustive pairs + 10000 random, {elapsed:.1f}s")
    assert total == 5461 ** 2
    assert (bad_count, bad_replay, r_count, r_replay) == (0, 0, 0, 0)
    assert elapsed < 60


@pytest.mark.criterion(1, "edit oracle equivalence")
def test_c1_public_api():
    started = time.perf_counter()
    words = ["".join(p) for n in range(5) for p in itertools.product(ALPHABET, repeat=n)]
    for s in words:
        for t in words:
            ops = traceback(build_matrix(s, t))
            assert sum(op.is_error for op in ops) == osa_distance(s, t)
            assert apply_ops(s, ops) == t
    rng = random.Random(7)
    for _ in range(10_000):
        s = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(7, 12)))
        t = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(7, 12)))
        ops = align(s, t)
        assert len(ops) == osa_distance(s, t)
        assert apply_ops(s, ops) == t
    assert time.perf_counter() - started < 60


@pytest.mark.criterion(1, "edit oracle equivalence")
def test_c1_numpy_backend_agrees():
    rng = np.random.default_rng(3)
    for _ in range(2000):
        a = rng.integers(0, 4, rng.integers(0, 13)).astype(np.int32)
        b = rng.integers(0, 4, rng.integers(0, 13)).astype(np.int32)
        d = K.fill_matrix_numpy(a, b, True)
        assert np.array_equal(d, K.fill_matrix_jit(a, b, True))
        assert np.array_equal(K.trace_numpy(d, a, b, True), K.trace_jit(d, a, b, True))


# -- criteria 2 and 3 ----------------------------------------------------------

@pytest.fixture(scope="module")
def mined():
    rng = random.Random(2024)
    seed_corpus = sentences(5000, seed=101, min_len=40, max_len=120)
    pairs = [(plant(s, rng.choice([0, 1, 1, 1, 2, 2, 3, 4]), rng)[0], s) for s in seed_corpus]
    return em.scan_corpus(pairs)


@pytest.fixture(scope="module")
def fresh():
    return sentences(10_000, seed=202, min_len=40, max_len=120)


@pytest.mark.criterion(2, "statistical round-trip")
def test_c2_round_trip(mined, fresh):
    started = time.perf_counter()
    rescanned = em.scan_corpus(sbsc.corrupt_corpus(fresh, mined, base_seed=11, workers=4))
    elapsed = time.perf_counter() - started
    tv_type = em.total_variation(rescanned.type_mix, mined.type_mix)
    tv_hist = em.total_variation(rescanned.errors_per_sentence, mined.errors_per_sentence)
    print(f"\ncriterion 2: TV(type_mix)={tv_type:.4f} TV(errors/sentence)={tv_hist:.4f} in {elapsed:.1f}s")
    assert tv_type <= 0.05
    assert tv_hist <= 0.05
    assert elapsed < 120


@pytest.mark.criterion(3, "density scaling x10")
def test_c3_density_scaling(mined, fresh):
    dense = em.scale_density(mined, 10)
    rescanned = em.scan_corpus(sbsc.corrupt_corpus(fresh, dense, base_seed=12, workers=4))
    ratio = rescanned.mean_errors / (10 * mined.mean_errors)
    print(f"\ncriterion 3: mean {rescanned.mean_errors:.3f} vs 10x {10 * mined.mean_errors:.3f} (ratio {ratio:.3f})")
    assert abs(ratio - 1) <= 0.10


# -- criterion 4 ---------------------------------------------------------------

@pytest.fixture(scope="module")
def fixture_files(tmp_path_factory, mined):
    d = tmp_path_factory.mktemp("determinism")
    clean = sentences(10_000, seed=303)
    (d / "clean.txt").write_text("\n".join(clean) + "\n", encoding="utf-8")
    rng = random.Random(5)
    pairs = [f"{plant(s, rng.randint(0, 2), rng)[0]}\t{s}" for s in clean]
    (d / "pairs.tsv").write_text("\n".join(pairs) + "\n", encoding="utf-8")
    (d / "other.txt").write_text("\n".join(sentences(10_000, seed=304)) + "\n", encoding="utf-8")
    em.save(mined, d / "model.dist")
    return d


def _determinism_cases(d):
    model, clean, pairs = str(d / "model.dist"), str(d / "clean.txt"), str(d / "pairs.tsv")
    return {
        "corrupt": ["corrupt", "--model", model, "--in", clean],
        "build-pretrain": ["build-pretrain", "--model", model, "--in", clean],
        "augment-add-heuristic": ["augment", "--in", pairs, "--strategy", "add", "--aug-rate", "0.3"],
        "augment-concat-heuristic": ["augment", "--in", pairs, "--strategy", "concat", "--copies", "2"],
        "augment-add-sbsc": ["augment", "--in", pairs, "--corruptor", "sbsc", "--model", model],
        "augment-sentence": ["augment", "--in", pairs, "--action", "replace", "--level", "sentence",
                             "--strategy", "concat"],
        "balance": ["balance", "--in", clean, "--in", str(d / "other.txt"), "--target", "5000"],
    }


@pytest.mark.criterion(4, "determinism across reruns and worker counts")
@pytest.mark.parametrize("case", ["corrupt", "build-pretrain", "augment-add-heuristic", "augment-concat-heuristic",
                                  "augment-add-sbsc", "augment-sentence", "balance"])
def test_c4_byte_identical(fixture_files, case):
    argv = _determinism_cases(fixture_files)[case]
    outputs = []
    for run, workers in enumerate(["1", "1", "4"]):
        out = fixture_files / f"{case}.{run}.out.tsv"
        assert cli.run(argv + ["--seed", "99", "--workers", workers, "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    assert outputs[0].count(b"\n") >= 10_000


# -- criterion 5 ---------------------------------------------------------------

QWERTY = H.load_layout("qwerty")
CONF_EN = H.load_confusion("en")


@pytest.mark.criterion(5, "heuristic identity and bounds")
def test_c5_closed_gate_identity():
    corpus = sentences(1000, seed=404)
    wrong = H.load_wrong_words("en")
    for action in H.WORD_ACTIONS:
        cfg = H.HeuristicConfig(aug_rate=1.0, aug_prob=0.0, action=action)
        assert all(H.augment_word_level(s, cfg, QWERTY, CONF_EN, i) == s for i, s in enumerate(corpus))
    cfg = replace(H.HeuristicConfig.sentence_default(), aug_rate=1.0, aug_prob=0.0)
    assert all(H.augment_sentence_level(s, cfg, wrong, i) == s for i, s in enumerate(corpus))


@pytest.mark.criterion(5, "heuristic identity and bounds")
def test_c5_published_word_config_edit_bounds():
    cfg = H.HeuristicConfig(aug_rate=0.1, min_aug=1, max_aug=3, mult_num=5, action="orfo", aug_prob=0.7, level="word")
    assert H.validate_config(cfg) == []
    modified = 0
    out_of_bounds = []
    for i, s in enumerate(sentences(5000, seed=405)):
        out = H.augment_word_level(s, cfg, QWERTY, CONF_EN, i)
        for x, y in zip(s.split(" "), out.split(" ")):
            if x != y:
                modified += 1
                if not 1 <= distance(x, y) <= 3:
                    out_of_bounds.append((x, y))
    print(f"\ncriterion 5: {modified} modified words, {len(out_of_bounds)} out of bounds")
    assert modified > 1000
    assert out_of_bounds == []


# -- criterion 6 ---------------------------------------------------------------

@pytest.mark.criterion(6, "evaluator conventions")
def test_c6_examples():
    perfect = evaluate([EvalTriple("hte cat", "the cat", "the cat")])
    assert (perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0)
    nothing = evaluate([EvalTriple("hte cat", "hte cat", "the cat")])
    assert (nothing.tp, nothing.fp) == (0, 0)
    assert (nothing.precision, nothing.recall, nothing.f1, nothing.correction_rate) == (1.0, 0.0, 0.0, 0.0)
    hand = evaluate([EvalTriple("a bd c dd", "a bad e dd", "a bad c did")])
    assert (hand.tp, hand.fp, hand.fn) == (1, 1, 1)
    assert (hand.precision, hand.recall, hand.f1) == (0.5, 0.5, 0.5)


@pytest.mark.criterion(6, "evaluator conventions")
def test_c6_micro_aggregation():
    rng = random.Random(606)
    vocab = ["the", "teh", "cat", "cta", "sat", "on", "no", "mat", "a", "lot", "alot", "well,", "-"]
    for _ in range(50):
        items = []
        for _ in range(rng.randint(1, 60)):
            src = [rng.choice(vocab) for _ in range(rng.randint(1, 10))]
            hyp = [rng.choice(vocab) if rng.random() < 0.25 else w for w in src]
            ref = [rng.choice(vocab) if rng.random() < 0.25 else w for w in src]
            if rng.random() < 0.2:
                hyp.insert(rng.randint(0, len(hyp)), rng.choice(vocab))
            items.append(EvalTriple(" ".join(src), " ".join(hyp), " ".join(ref)))
        for mode in ("keep", "strip"):
            report = evaluate(items, mode)
            scores = [score_triple(t, mode) for t in items]
            tp, fp, fn = (sum(getattr(s, k) for s in scores) for k in ("tp", "fp", "fn"))
            assert (report.tp, report.fp, report.fn) == (tp, fp, fn)
            assert report.precision == (tp / (tp + fp) if tp + fp else 1.0)
            assert report.recall == (tp / (tp + fn) if tp + fn else 1.0)


# -- criterion 7 ---------------------------------------------------------------

@pytest.mark.criterion(7, "cleaning constants")
def test_c7_boundary_and_scripts():
    rules = P.CleanRules()
    s40 = "A sentence of exactly forty characters.."
    assert len(s40) == 40
    assert P.rejection_reason(s40[:39], rules) == "too-short"
    assert P.rejection_reason(s40, rules) is None
    assert P.rejection_reason("Предложение ровно из сорока символов, да!", rules) is None
    for foreign in ("漢", "α", "ע", "ب", "ß̵"[1], "😀"):
        assert P.rejection_reason(s40 + foreign, rules) == "script"


@pytest.mark.criterion(7, "cleaning constants")
def test_c7_idempotent_on_mixed_fixture():
    rng = random.Random(707)
    mixed = []
    for s in sentences(10_000, seed=708, min_len=25, max_len=90):
        r = rng.random()
        if r < 0.15:
            s = s[:20] + "字" + s[20:]
        elif r < 0.3:
            s = "".join(rng.choice(CYRILLIC + " ,.") for _ in range(len(s)))
        elif r < 0.35:
            s += " 🙂"
        mixed.append(s)
    once, report = P.clean_corpus(mixed)
    once = list(once)
    twice, report2 = P.clean_corpus(once)
    assert list(twice) == once
    assert report2.rejected_total == 0
    assert report.seen == 10_000 and report.kept == len(once)
    assert set(report.rejected) == {"too-short", "script"}


# -- criterion 8 ---------------------------------------------------------------

@pytest.mark.criterion(8, "Add/Concat cardinality")
def test_c8_cardinality(mined):
    rng = random.Random(808)
    pairs = [em.SentencePair(plant(s, rng.randint(0, 2), rng)[0], s) for s in sentences(3000, seed=809)]
    heur = H.HeuristicCorruptor(H.HeuristicConfig(aug_rate=0.3), QWERTY, CONF_EN)
    for corruptor in (mined, heur):
        added = list(P.augment_add(pairs, corruptor, seed=1))
        assert len(added) == len(pairs)
        assert [p.correct for p in added] == [p.correct for p in pairs]
        doubled = list(P.augment_concat(pairs, corruptor, copies=1, seed=1))
        assert len(doubled) == 2 * len(pairs)
        assert doubled[: len(pairs)] == pairs
        originals = {p.correct for p in pairs}
        assert all(p.correct in originals for p in doubled[len(pairs):])
    with pytest.raises(StructuralError):
        P.augment_concat(pairs, mined, copies=0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
