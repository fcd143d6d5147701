import numpy as np
import pytest

from sirforge.matcher import EncoderConfig, MatchModel, train_tokenizer
from sirforge.sir import default_rule_table


@pytest.fixture(scope="session")
def py_rules():
    return default_rule_table("python")


@pytest.fixture(scope="session")
def java_rules():
    return default_rule_table("java")


@pytest.fixture(scope="session")
def tiny_tokenizer():
    corpus = [
        "alpha beta gamma delta",
        "if (x > 0) return x;",
        "result = number % 1.0",
        "<Assignment,left> a = b <Assignment,right>",
        "for x in arr: result.append(x * x)",
    ]
    return train_tokenizer(corpus, vocab_size=300)


@pytest.fixture(scope="session")
def toy_config():
    return EncoderConfig(
        layers=2, heads=2, model_dim=8, ffn_dim=16, max_seq=32, dtype="float64"
    )


@pytest.fixture(scope="session")
def toy_model(toy_config, tiny_tokenizer):
    return MatchModel(toy_config, tiny_tokenizer, seed=7)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
