import numpy as np
import pytest

from sirforge.errors import SequenceTooLong
from sirforge.matcher import EncoderConfig, MatchModel


def test_rows_are_unit_norm(toy_model):
    emb = toy_model.encode(["alpha beta", "gamma delta", "x"])
    norms = np.linalg.norm(emb.data, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-6)
    assert emb.normalized


def test_duplicate_texts_encode_identically(toy_model):
    emb = toy_model.encode(["same text", "other", "same text"])
    assert np.array_equal(emb.data[0], emb.data[2])


def test_padding_invariance(toy_model):
    text = "alpha beta gamma"
    solo = toy_model.encode([text]).data[0]
    batched = toy_model.encode(
        [text, "a much longer line of text to force wide padding buckets", "x",
         "yet another entry", "fifth", "sixth entry here", "seven", "eight"]
    ).data[0]
    assert np.max(np.abs(solo - batched)) < 1e-5


def test_row_order_follows_input_order(toy_model):
    a = toy_model.encode(["first", "second"]).data
    b = toy_model.encode(["second", "first"]).data
    assert np.allclose(a[0], b[1])
    assert np.allclose(a[1], b[0])


def test_sequence_too_long_without_truncation(tiny_tokenizer):
    cfg = EncoderConfig(layers=1, heads=1, model_dim=8, ffn_dim=8, max_seq=4,
                        dtype="float64", truncate=False)
    model = MatchModel(cfg, tiny_tokenizer, seed=0)
    with pytest.raises(SequenceTooLong):
        model.encode(["a very long text that cannot fit in four tokens"])


def test_truncation_keeps_head(tiny_tokenizer):
    cfg = EncoderConfig(layers=1, heads=1, model_dim=8, ffn_dim=8, max_seq=6,
                        dtype="float64", truncate=True)
    model = MatchModel(cfg, tiny_tokenizer, seed=0)
    emb = model.encode(["one two three four five six seven eight nine"])
    assert emb.data.shape == (1, 8)


def test_config_validation():
    with pytest.raises(ValueError):
        EncoderConfig(model_dim=10, heads=4)
    with pytest.raises(ValueError):
        EncoderConfig(pooling="max")


def test_empty_text_rejected(toy_model):
    with pytest.raises(ValueError):
        toy_model.encode([""])
