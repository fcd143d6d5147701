"""Contrastive node-to-snippet matching model."""

from sirforge.matcher.tokenizer import TokenizerModel, train_tokenizer
from sirforge.matcher.model import (
    AlignmentBatch,
    EmbeddingMatrix,
    EncoderConfig,
    MatchModel,
    align_hybrid,
    align_independent,
    align_structural,
    contrastive_loss,
    loss_from_embeddings,
    similarity,
)
from sirforge.matcher.train import TrainConfig, retrieval_top1, train
from sirforge.matcher.checkpoint import load_model, save_model

__all__ = [
    "TokenizerModel",
    "train_tokenizer",
    "EncoderConfig",
    "EmbeddingMatrix",
    "AlignmentBatch",
    "MatchModel",
    "align_independent",
    "align_structural",
    "align_hybrid",
    "similarity",
    "contrastive_loss",
    "loss_from_embeddings",
    "TrainConfig",
    "train",
    "retrieval_top1",
    "save_model",
    "load_model",
]
