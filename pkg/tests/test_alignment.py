import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spellforge.alignment import (
    MAX_SENTENCE_CHARS,
    EditOp,
    OpKind,
    align,
    apply_ops,
    build_matrix,
    distance,
    traceback,
)
from spellforge.errors import StructuralError

from oracles import edit_script_bfs, osa_distance

small = st.text(alphabet="abcd", max_size=12)


def errors(ops):
    return [(op.kind.value, op.src_pos, op.src_chars, op.tgt_chars) for op in ops if op.is_error]


@pytest.mark.parametrize(
    "s, t, expected",
    [("x", "x", 0), ("", "abc", 3), ("abc", "", 3), ("", "", 0)],
)
def test_trivial_distances(s, t, expected):
    assert build_matrix(s, t).distance == expected


def test_kitten_sitting_against_brute_force():
    expected = edit_script_bfs("kitten", "sitting", alphabet="kitensg")
    assert expected == 3
    assert osa_distance("kitten", "sitting") == 3
    assert build_matrix("kitten", "sitting").distance == expected


def test_matrix_borders_and_recurrence():
    m = build_matrix("teh cat", "the cart")
    cells = m.cells
    assert m.rows == 8 and m.cols == 9
    assert cells[0, 0] == 0
    assert list(cells[:, 0]) == list(range(m.rows))
    assert list(cells[0, :]) == list(range(m.cols))
    for i in range(1, m.rows):
        for j in range(1, m.cols):
            assert cells[i, j] <= 1 + min(cells[i - 1, j], cells[i, j - 1], cells[i - 1, j - 1])


def test_matrix_is_read_only():
    m = build_matrix("ab", "ba")
    with pytest.raises(ValueError):
        m.cells[0, 0] = 5


def test_traceback_abc_acb():
    ops = traceback(build_matrix("abc", "acb"))
    assert [(op.kind, op.src_pos) for op in ops] == [(OpKind.MATCH, 0), (OpKind.TRANSPOSITION, 1)]
    assert ops[1].src_chars == "bc" and ops[1].tgt_chars == "cb"


def test_traceback_teh_the():
    assert errors(traceback(build_matrix("teh", "the"))) == [("transposition", 1, "eh", "he")]


def test_traceback_identical():
    ops = traceback(build_matrix("cat", "cat"))
    assert [op.kind for op in ops] == [OpKind.MATCH] * 3
    assert errors(ops) == []


def test_tie_break_prefers_substitution_over_indels():
    # "ab" -> "ba" costs 1 via transposition; "ab" -> "cb" must be a substitution, not delete+insert
    assert errors(align("ab", "cb")) == [("substitution", 0, "a", "c")]
    # equal-cost alternatives: substitution at the end rather than deletion + insertion
    assert errors(align("abc", "abd")) == [("substitution", 2, "c", "d")]


def test_tie_break_deletion_before_insertion():
    # "aa" -> "a": deleting either a costs 1; the trace keeps the diagonal match at the end
    assert errors(align("aa", "a")) == [("deletion", 0, "a", "")]
    assert errors(align("a", "aa")) == [("insertion", 0, "", "a")]


def test_traceback_is_deterministic():
    m = build_matrix("abracadabra", "abarcadbara")
    assert traceback(m) == traceback(m)


def test_traceback_positions_non_decreasing():
    rng = random.Random(4)
    for _ in range(200):
        s = "".join(rng.choice("abc") for _ in range(rng.randint(0, 10)))
        t = "".join(rng.choice("abc") for _ in range(rng.randint(0, 10)))
        pos = [op.src_pos for op in traceback(build_matrix(s, t))]
        assert pos == sorted(pos)


def test_unicode_scalar_units():
    assert distance("ёлка", "елка") == 1
    assert errors(align("молоко", "малако")) == [
        ("substitution", 1, "о", "а"),
        ("substitution", 3, "о", "а"),
    ]
    # a combining acute is its own scalar value
    assert distance("é", "e") == 1


def test_length_cap():
    long = "a" * (MAX_SENTENCE_CHARS + 1)
    with pytest.raises(StructuralError):
        build_matrix(long, "a")
    with pytest.raises(StructuralError):
        align("a", long)
    assert build_matrix("a" * MAX_SENTENCE_CHARS, "a").distance == MAX_SENTENCE_CHARS - 1


class TestApplyOps:
    def test_substitution(self):
        assert apply_ops("cat", [EditOp(OpKind.SUBSTITUTION, 0, "c", "b")]) == "bat"

    def test_empty(self):
        assert apply_ops("cat", []) == "cat"

    def test_transposition(self):
        assert apply_ops("ab", [EditOp(OpKind.TRANSPOSITION, 0, "ab", "ba")]) == "ba"

    def test_insertion_chain_and_tail(self):
        ops = [
            EditOp(OpKind.INSERTION, 0, "", "x"),
            EditOp(OpKind.INSERTION, 0, "", "y"),
            EditOp(OpKind.INSERTION, 3, "", "!"),
        ]
        assert apply_ops("cat", ops) == "xycat!"

    def test_out_of_range_names_op_index(self):
        ops = [EditOp(OpKind.SUBSTITUTION, 0, "c", "b"), EditOp(OpKind.DELETION, 5, "x", "")]
        with pytest.raises(StructuralError, match="op 1"):
            apply_ops("cat", ops)

    def test_backwards_position_rejected(self):
        ops = [EditOp(OpKind.DELETION, 2, "t", ""), EditOp(OpKind.DELETION, 0, "c", "")]
        with pytest.raises(StructuralError, match="op 1"):
            apply_ops("cat", ops)

    def test_mismatched_source_char(self):
        with pytest.raises(StructuralError, match="op 0"):
            apply_ops("cat", [EditOp(OpKind.SUBSTITUTION, 1, "x", "o")])


@pytest.mark.parametrize(
    "kind, src, tgt",
    [
        ("insertion", "a", "b"),
        ("deletion", "", ""),
        ("substitution", "a", "a"),
        ("transposition", "ab", "ab"),
        ("transposition", "aa", "aa"),
        ("match", "a", "b"),
    ],
)
def test_editop_invariants(kind, src, tgt):
    with pytest.raises(StructuralError):
        EditOp(kind, 0, src, tgt)


@settings(max_examples=400, deadline=None)
@given(small, small)
def test_op_count_matches_oracle(s, t):
    ops = traceback(build_matrix(s, t))
    assert sum(op.is_error for op in ops) == osa_distance(s, t)


@settings(max_examples=400, deadline=None)
@given(st.text(max_size=30), st.text(max_size=30))
def test_reconstruction(s, t):
    assert apply_ops(s, traceback(build_matrix(s, t))) == t
    assert apply_ops(s, align(s, t)) == t


@settings(max_examples=300, deadline=None)
@given(small, small)
def test_symmetry(s, t):
    assert distance(s, t) == distance(t, s)


def test_triangle_inequality_on_sampled_triples():
    rng = random.Random(11)

    def word():
        return "".join(rng.choice("abcdefgh") for _ in range(rng.randint(0, 10)))

    for _ in range(2000):
        a, b, c = word(), word(), word()
        assert distance(a, c) <= distance(a, b) + distance(b, c)


def test_osa_is_not_a_full_metric():
    # the restricted transposition rule breaks the triangle inequality on crafted inputs
    assert distance("ca", "abc") == 3
    assert distance("ca", "ac") + distance("ac", "abc") == 2
