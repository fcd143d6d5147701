import numpy as np
import pytest

from sirforge.errors import CheckpointError, VersionMismatch
from sirforge.matcher import (
    EncoderConfig,
    MatchModel,
    load_model,
    save_model,
    train_tokenizer,
)


@pytest.fixture()
def model():
    tok = train_tokenizer(["alpha beta gamma", "delta eps"], vocab_size=280)
    cfg = EncoderConfig(layers=1, heads=2, model_dim=16, ffn_dim=32, max_seq=16, dtype="float64")
    m = MatchModel(cfg, tok, seed=9)
    m.tau_match = 0.25
    return m


def test_round_trip_embeddings_identical(model, tmp_path):
    path = tmp_path / "model.ckpt"
    texts = ["alpha beta", "gamma delta eps"]
    before = model.encode(texts).data
    digest = save_model(model, path)
    assert len(digest) == 16
    loaded = load_model(path)
    after = loaded.encode(texts).data
    assert np.max(np.abs(before - after)) < 1e-7
    assert loaded.tau_match == pytest.approx(0.25)


def test_truncated_file_raises(model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_model(model, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 3])
    with pytest.raises(CheckpointError):
        load_model(path)


def test_foreign_npz_raises(tmp_path):
    path = tmp_path / "foreign.ckpt"
    with open(path, "wb") as fh:
        np.savez(fh, weights=np.zeros(3))
    with pytest.raises(VersionMismatch):
        load_model(path)


def test_garbage_file_raises(tmp_path):
    path = tmp_path / "garbage.ckpt"
    path.write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointError):
        load_model(path)


def test_wrong_format_version_raises(model, tmp_path):
    import json
    import zipfile

    path = tmp_path / "model.ckpt"
    save_model(model, path)
    # rewrite the metadata entry with a bumped version
    with np.load(path) as archive:
        arrays = {k: archive[k] for k in archive.files}
    meta = json.loads(bytes(arrays["__meta__"]).decode())
    meta["format"] = "sirforge-ckpt-999"
    arrays["__meta__"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    with pytest.raises(VersionMismatch):
        load_model(path)
