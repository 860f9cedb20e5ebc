"""Mini-batch training loop with early stopping on validation accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lstm import forward_batch, init_params, loss_grads_probs
from .optim import AdamWConfig, adamw_step, init_adamw


@dataclass
class TrainConfig:
    hidden_size: int = 32
    learning_rate: float = 0.001
    weight_decay: float = 0.004
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 64
    max_epochs: int = 100
    min_delta: float = 0.001
    patience: int = 10
    restore_best: bool = True
    seed: int = 42


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float


def _accuracy(X, y, params, batch_size=512):
    correct = 0
    for start in range(0, len(X), batch_size):
        probs, _ = forward_batch(X[start : start + batch_size], params)
        correct += int(np.sum(np.argmax(probs, axis=1) == y[start : start + batch_size]))
    return correct / len(X)


def train(split, config):
    """Train a detector on a SplitDataset.

    Seeded shuffling per epoch; stops when validation accuracy has not
    improved by at least min_delta for `patience` epochs; returns the weights
    of the best-validation epoch plus the per-epoch history.
    """
    if len(split.train_X) == 0 or len(split.val_X) == 0:
        raise ValueError("train and validation sets must be non-empty")
    params = init_params(config.hidden_size, config.seed)
    opt_cfg = AdamWConfig(
        learning_rate=config.learning_rate,
        weight_decay=config.weight_decay,
        beta1=config.beta1,
        beta2=config.beta2,
        epsilon=config.epsilon,
    )
    opt = init_adamw(params)
    rng = np.random.default_rng(config.seed)

    history = []
    best_acc = -np.inf
    best_params = params.copy()
    wait = 0
    n = len(split.train_X)
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            bX, by = split.train_X[idx], split.train_y[idx]
            loss, grads, probs = loss_grads_probs(bX, by, params)
            correct += int(np.sum(np.argmax(probs, axis=1) == by))
            loss_sum += loss * len(idx)
            adamw_step(params, grads, opt, opt_cfg)
        val_acc = _accuracy(split.val_X, split.val_y, params)
        history.append(
            EpochStats(
                epoch=epoch,
                train_loss=loss_sum / n,
                train_acc=correct / n,
                val_acc=val_acc,
            )
        )
        if val_acc - best_acc > config.min_delta:
            best_acc = val_acc
            best_params = params.copy()
            wait = 0
        else:
            wait += 1
            if wait >= config.patience:
                break
    return (best_params if config.restore_best else params), history


def write_history(path, history):
    """Per-epoch table: epoch, train_loss, train_acc, val_acc (tab-delimited)."""
    with open(path, "w") as fh:
        fh.write("epoch\ttrain_loss\ttrain_acc\tval_acc\n")
        for row in history:
            fh.write(f"{row.epoch}\t{row.train_loss:.6f}\t{row.train_acc:.6f}\t{row.val_acc:.6f}\n")
