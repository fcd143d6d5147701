import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sirforge.errors import EmptyCorpus
from sirforge.matcher.tokenizer import (
    BOS_ID,
    EOS_ID,
    TokenizerModel,
    train_tokenizer,
)


def test_frequent_pair_merges_first():
    # frequency oracle: 'ab' occurs twice, 'cd' once; only 'ab' may merge
    tok = train_tokenizer(["ab", "ab", "cd"], vocab_size=260)
    assert len(tok.merges) == 1
    a_id, b_id = 4 + ord("a"), 4 + ord("b")
    assert tok.merges[0] == (a_id, b_id)
    assert len(tok.encode("ab")) == 1


def test_single_char_corpus_learns_no_merges():
    tok = train_tokenizer(["a", "a", "a"], vocab_size=300)
    assert tok.merges == []
    assert tok.vocab_size == 260


def test_round_trip_ascii():
    tok = train_tokenizer(["if (x > 0)", "return x", "x = x + 1"], vocab_size=300)
    for text in ("if (x > 0)", "totally unseen text!", "tabs\tand\nnewlines"):
        assert tok.decode(tok.encode(text)) == text


def test_round_trip_non_ascii_via_byte_fallback():
    tok = train_tokenizer(["plain ascii"], vocab_size=260)
    assert tok.decode(tok.encode("héllo wörld")) == "héllo wörld"


def test_specials_ride_outside_budget():
    tok = train_tokenizer(["xy xy xy"], vocab_size=257)
    assert len(tok.merges) == 1  # budget of exactly one merge
    assert tok.vocab_size == 261


def test_add_special_brackets_sequence():
    tok = train_tokenizer(["abc"], vocab_size=260)
    ids = tok.encode("abc", add_special=True)
    assert ids[0] == BOS_ID and ids[-1] == EOS_ID


def test_deterministic_across_runs():
    corpus = ["for i in range(10):", "for j in range(20):", "total += i * j"]
    a = train_tokenizer(corpus, vocab_size=280)
    b = train_tokenizer(corpus, vocab_size=280)
    assert a.merges == b.merges


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        train_tokenizer([], vocab_size=300)
    with pytest.raises(EmptyCorpus):
        train_tokenizer([""], vocab_size=300)


def test_vocab_size_floor():
    with pytest.raises(ValueError):
        train_tokenizer(["abc"], vocab_size=100)


def test_vocab_listing_matches_size():
    tok = train_tokenizer(["ab ab ab cd cd"], vocab_size=262)
    assert len(tok.vocab()) == tok.vocab_size


@settings(max_examples=150, deadline=None)
@given(st.text(alphabet=st.characters(codec="utf-8"), min_size=0, max_size=60))
def test_round_trip_property(text):
    tok = TokenizerModel(merges=[(4 + ord("a"), 4 + ord("b"))])
    assert tok.decode(tok.encode(text)) == text
