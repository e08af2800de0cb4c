import pytest
from hypothesis import given
from hypothesis import strategies as st

from simulmt.core import (
    Action,
    BoundaryConfig,
    IdentityTokenizer,
    Memory,
    RuleTokenizer,
    SentencePair,
    SessionTrace,
    TokenLevelPolicy,
    WordLevelPolicy,
    build_sentence_pair,
)
from simulmt.errors import EmptyInput, InvalidParameter, InvalidPolicy, MemoryFinished, TokenizerFault

from oracles import rejoin

words = st.text(alphabet="abcdefgh", min_size=1, max_size=9)
lines = st.lists(words, min_size=1, max_size=10).map(" ".join)


def test_identity_tokenizer_pair():
    pair = build_sentence_pair("a b", "c", IdentityTokenizer())
    assert (pair.J, pair.M) == (2, 2)
    assert pair.source_boundaries == (1, 1)
    assert pair.source_tokens == pair.source_words


def test_rule_splitter_pair():
    pair = build_sentence_pair("Ich gehe", "-", RuleTokenizer({"gehe": ["ge", "he"]}))
    assert pair.M == 3
    assert list(pair.source_boundaries) == [1, 0, 1]
    assert rejoin(pair.source_tokens, pair.source_boundaries) == ["Ich", "gehe"]


@pytest.mark.parametrize("src,tgt", [("", "c"), ("a", "   "), ("  \t", "x")])
def test_empty_lines_rejected(src, tgt):
    with pytest.raises(EmptyInput):
        build_sentence_pair(src, tgt)


def test_tokenizer_producing_nothing():
    class Broken:
        def tokenize(self, word):
            return []

    with pytest.raises(TokenizerFault):
        build_sentence_pair("a", "b", Broken())


def test_tokenizer_that_loses_characters():
    with pytest.raises(TokenizerFault):
        build_sentence_pair("abc", "b", RuleTokenizer({"abc": ["a", "b"]}))


@given(lines, lines, st.integers(1, 4))
def test_round_trip_through_boundaries(src, tgt, width):
    pair = build_sentence_pair(src, tgt, RuleTokenizer(max_chars=width))
    assert rejoin(pair.source_tokens, pair.source_boundaries) == src.split()
    assert rejoin(pair.target_tokens, pair.target_boundaries) == tgt.split()
    assert sum(pair.source_boundaries) == pair.J
    assert sum(pair.target_boundaries) == pair.I


def test_from_tokens_keeps_dangling_target_tokens():
    pair = SentencePair.from_tokens(["a", "b"], ["x", "y", "z"], [1, 1], [0, 1, 0])
    assert pair.target_words == ("xy",)
    assert pair.N == 3


def test_from_tokens_rejects_dangling_source():
    with pytest.raises(TokenizerFault):
        SentencePair.from_tokens(["a", "b"], ["x"], [1, 0], [1])


@pytest.mark.parametrize("g,J", [((0, 1), 3), ((1, 4), 3), ((2, 1), 3), ((1.5,), 3)])
def test_word_policy_invariants(g, J):
    with pytest.raises(InvalidPolicy):
        WordLevelPolicy(g, J)


def test_token_policy_invariants():
    TokenLevelPolicy((1, 1, 3), 3)
    with pytest.raises(InvalidPolicy):
        TokenLevelPolicy((1, 4), 3)


def test_boundary_config():
    assert BoundaryConfig() == BoundaryConfig(1, 3)
    with pytest.raises(InvalidParameter):
        BoundaryConfig(3, 2)
    with pytest.raises(InvalidParameter):
        BoundaryConfig(0, 2)


def test_memory_prefix_and_finish():
    m = Memory("inst", ["a", "b"])
    m.append_source("a")
    with pytest.raises(InvalidParameter):
        m.append_source("c")
    m.append_target("A")
    assert m.view().source_read == 1 and not m.view().source_exhausted
    m.append_source("b")
    assert m.view().source_exhausted
    m.finish()
    with pytest.raises(MemoryFinished):
        m.append_target("B")
    with pytest.raises(MemoryFinished):
        m.append_source("b")


def test_trace_round_trips_through_dict():
    tr = SessionTrace(
        source=["a", "b"],
        actions=[Action.READ, Action.WRITE, Action.READ, Action.WRITE],
        realized_policy=[1, 2],
        emission_times_ms=[1.0, 2.0],
        source_arrival_times_ms=[0.0, 0.5],
        read_times_ms=[0.0, 1.5],
        translation=["A", "B"],
    )
    tr.check()
    again = SessionTrace.from_dict({"index": 3, **tr.to_dict()})
    assert again == tr


def test_trace_check_catches_mismatch():
    tr = SessionTrace(source=["a"], actions=[Action.READ, Action.WRITE], realized_policy=[1], translation=[], read_times_ms=[0.0])
    with pytest.raises(AssertionError):
        tr.check()
