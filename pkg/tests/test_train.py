import numpy as np
import pytest

from sirforge.errors import NonFiniteLoss
from sirforge.matcher import (
    AlignmentBatch,
    EncoderConfig,
    MatchModel,
    TrainConfig,
    retrieval_top1,
    train,
    train_tokenizer,
)


def marker_batches(n_functions, statements=3, seed=0):
    """Aligned statement sets where a unique marker token is the only signal."""
    rng = np.random.default_rng(seed)
    batches = []
    texts = []
    for f in range(n_functions):
        sir, snip = [], []
        for s in range(statements):
            marker = f"mk{f}_{s}"
            filler = rng.choice(["pad", "fill", "noise"])
            sir.append(f"<stmt,left> {marker} {filler} <stmt,right>")
            snip.append(f"int {marker} = {s};")
        texts.extend(sir + snip)
        batches.append(AlignmentBatch.from_statements(sir, snip))
    return batches, texts


def small_model(texts, seed=0, dtype="float32"):
    tok = train_tokenizer(texts, vocab_size=400)
    cfg = EncoderConfig(layers=2, heads=2, model_dim=32, ffn_dim=64, max_seq=32, dtype=dtype)
    return MatchModel(cfg, tok, seed=seed)


def test_zero_epochs_leaves_parameters_unchanged():
    batches, texts = marker_batches(4)
    model = small_model(texts)
    before = {k: v.copy() for k, v in model.params.items()}
    result = train(model, batches, TrainConfig(epochs=0))
    assert not result.metrics
    for name, arr in model.params.items():
        assert np.array_equal(arr, before[name])


def test_same_seed_reproduces_loss_curve_bitwise():
    batches, texts = marker_batches(6)
    cfg = TrainConfig(epochs=3, lr=1e-3, seed=5)
    r1 = train(small_model(texts, seed=2), list(batches), cfg)
    r2 = train(small_model(texts, seed=2), list(batches), cfg)
    assert [m["loss"] for m in r1.metrics] == [m["loss"] for m in r2.metrics]


def test_training_reduces_loss_and_learns_markers():
    batches, texts = marker_batches(24, statements=3, seed=1)
    model = small_model(texts, seed=3)
    held_out = batches[:4]
    result = train(
        model, batches[4:], TrainConfig(epochs=6, lr=3e-3, seed=0), val_batches=held_out
    )
    losses = [m["loss"] for m in result.metrics]
    assert losses[-1] < losses[0]
    acc = float(np.mean([retrieval_top1(model, b) for b in held_out]))
    assert acc >= 0.75  # full 0.90 bar enforced in the acceptance suite


def test_metrics_log_schema(tmp_path):
    batches, texts = marker_batches(4)
    log = tmp_path / "metrics.jsonl"
    model = small_model(texts)
    result = train(model, batches, TrainConfig(epochs=2, log_path=str(log)))
    assert log.exists()
    assert len(result.metrics) == 2
    for entry in result.metrics:
        assert {"epoch", "step", "loss", "val_top1"} <= set(entry)


def test_tau_stays_clamped():
    batches, texts = marker_batches(5)
    model = small_model(texts)
    model.tau_match = 4.0  # above the exp cap
    train(model, batches, TrainConfig(epochs=1, lr=1e-2))
    assert np.exp(model.tau_match) <= 100.0 + 1e-6


def test_non_finite_loss_aborts_with_snapshot(tmp_path):
    batches, texts = marker_batches(3)
    model = small_model(texts)
    model.params["tok_emb"][:] = np.nan
    cfg = TrainConfig(epochs=1, snapshot_dir=str(tmp_path))
    with pytest.raises(NonFiniteLoss) as err:
        train(model, batches, cfg)
    assert err.value.snapshot_path is not None
    assert (tmp_path / "sirforge_nonfinite_snapshot.npz").exists()
