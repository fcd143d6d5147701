"""Finite-difference validation of the analytic gradients.

The acceptance suite runs the full 100-batch campaign; here a smaller
sweep guards the implementation during development.
"""

import numpy as np
import pytest

from sirforge.matcher import AlignmentBatch, EncoderConfig, MatchModel, train_tokenizer
from sirforge.matcher.model import loss_and_embedding_grads
from sirforge.matcher.train import batch_loss_and_grads

WORDS = "alpha beta gamma delta eps zeta eta theta iota kappa".split()


def random_batch(rng, n=None):
    n = n or int(rng.integers(2, 5))
    sir = [" ".join(rng.choice(WORDS, size=3)) for _ in range(n)]
    snip = [" ".join(rng.choice(WORDS, size=3)) for _ in range(n)]
    return AlignmentBatch.from_statements(sir, snip)


@pytest.fixture(scope="module")
def grad_model():
    tok = train_tokenizer([" ".join(WORDS)], vocab_size=280)
    cfg = EncoderConfig(layers=2, heads=2, model_dim=8, ffn_dim=16, max_seq=24, dtype="float64")
    return MatchModel(cfg, tok, seed=3)


def loss_only(model, batch):
    ids_p, mask_p = model.prepare_batch(batch.sir_texts)
    ids_x, mask_x = model.prepare_batch(batch.snippet_texts)
    p, _ = model.encoder.forward(model.params, ids_p, mask_p)
    x, _ = model.encoder.forward(model.params, ids_x, mask_x)
    loss, _, _, _ = loss_and_embedding_grads(model, p, x, batch)
    return loss


def directional_check(model, batch, rng, eps=1e-6):
    loss, grads, dtau = batch_loss_and_grads(model, batch)
    names = sorted(grads)
    direction = {n: rng.standard_normal(grads[n].shape) for n in names}
    tau_dir = float(rng.standard_normal())
    analytic = sum(float((grads[n] * direction[n]).sum()) for n in names) + dtau * tau_dir

    def shifted(sign):
        params = {n: model.params[n] + sign * eps * direction[n] for n in names}
        probe = MatchModel(
            model.config, model.tokenizer, params=params,
            tau_match=model.tau_match + sign * eps * tau_dir, lam=model.lam,
        )
        return loss_only(probe, batch)

    fd = (shifted(+1) - shifted(-1)) / (2 * eps)
    denom = max(abs(fd), abs(analytic), 1e-10)
    return abs(fd - analytic) / denom


def test_directional_gradients_match_fd(grad_model):
    rng = np.random.default_rng(42)
    errs = [directional_check(grad_model, random_batch(rng), rng) for _ in range(12)]
    assert max(errs) <= 1e-3, f"max relative error {max(errs):.2e}"


def test_per_coordinate_spot_checks(grad_model):
    rng = np.random.default_rng(7)
    batch = random_batch(rng, n=3)
    loss, grads, dtau = batch_loss_and_grads(grad_model, batch)
    eps = 1e-6
    for name in ("layer0.wq", "layer1.w2", "tok_emb", "layer0.ln2_g"):
        flat = grads[name].reshape(-1)
        for idx in rng.choice(flat.size, size=3, replace=False):
            orig = grad_model.params[name].reshape(-1)[idx]
            grad_model.params[name].reshape(-1)[idx] = orig + eps
            hi = loss_only(grad_model, batch)
            grad_model.params[name].reshape(-1)[idx] = orig - eps
            lo = loss_only(grad_model, batch)
            grad_model.params[name].reshape(-1)[idx] = orig
            fd = (hi - lo) / (2 * eps)
            # floor the denominator: near-zero coordinates are FD-noise bound
            denom = max(abs(fd), abs(flat[idx]), 1e-6)
            assert abs(fd - flat[idx]) / denom < 1e-3, f"{name}[{idx}]"


def test_tau_gradient_matches_fd(grad_model):
    rng = np.random.default_rng(11)
    batch = random_batch(rng, n=4)
    _, _, dtau = batch_loss_and_grads(grad_model, batch)
    eps = 1e-7
    base_tau = grad_model.tau_match
    probe_hi = MatchModel(grad_model.config, grad_model.tokenizer,
                          params=grad_model.params, tau_match=base_tau + eps)
    probe_lo = MatchModel(grad_model.config, grad_model.tokenizer,
                          params=grad_model.params, tau_match=base_tau - eps)
    fd = (loss_only(probe_hi, batch) - loss_only(probe_lo, batch)) / (2 * eps)
    assert abs(fd - dtau) / max(abs(fd), abs(dtau), 1e-10) < 1e-3
