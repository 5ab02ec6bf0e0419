import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from verikit.curation.rouge import lcs_length, rouge_l, tokenize_code, tokenize_text


def test_identical_sequences_score_one():
    assert rouge_l(["a", "b", "c"], ["a", "b", "c"]) == 1.0


def test_hand_computed_lcs_example():
    a = ["a", "b", "c", "d"]
    b = ["a", "c", "d"]
    assert lcs_length(a, b) == 3
    assert rouge_l(a, b) == pytest.approx(0.857142857142857)


def test_disjoint_sequences_score_zero():
    assert rouge_l(["a", "b"], ["c", "d"]) == 0.0


def test_empty_edge_cases():
    assert rouge_l([], []) == 1.0
    assert rouge_l([], ["a"]) == 0.0
    assert rouge_l(["a"], []) == 0.0


def test_tokenize_code_is_whitespace_insensitive():
    a = tokenize_code("assign y = a + b;")
    b = tokenize_code("assign   y=a+ b ;")
    assert a == b
    assert "assign" in a and "+" in a


def test_tokenize_code_drops_comments():
    toks = tokenize_code("assign y = a; // comment\n/* block */")
    assert "comment" not in " ".join(toks)


def test_tokenize_code_fallback_on_garbage():
    toks = tokenize_code("€ broken « text")
    assert toks == ["€", "broken", "«", "text"]


def test_tokenize_text_whitespace():
    assert tokenize_text("two  words\nhere") == ["two", "words", "here"]


_tokens = st.lists(st.sampled_from(list("abcdef")), max_size=25)


@given(_tokens)
@settings(max_examples=200, deadline=None)
def test_self_similarity_is_one(a):
    if a:
        assert rouge_l(a, a) == 1.0


@given(_tokens, _tokens)
@settings(max_examples=200, deadline=None)
def test_symmetric_when_equal_length(a, b):
    if len(a) == len(b):
        assert rouge_l(a, b) == pytest.approx(rouge_l(b, a))


@given(_tokens, _tokens)
@settings(max_examples=200, deadline=None)
def test_score_in_unit_interval(a, b):
    assert 0.0 <= rouge_l(a, b) <= 1.0


@given(_tokens, _tokens, st.data())
@settings(max_examples=200, deadline=None)
def test_deleting_tokens_never_increases_lcs(a, b, data):
    if not b:
        return
    idx = data.draw(st.integers(0, len(b) - 1))
    shorter = b[:idx] + b[idx + 1:]
    assert lcs_length(a, shorter) <= lcs_length(a, b)


@given(_tokens, _tokens)
@settings(max_examples=100, deadline=None)
def test_lcs_matches_reference_dp(a, b):
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    assert lcs_length(a, b) == table[n][m]
