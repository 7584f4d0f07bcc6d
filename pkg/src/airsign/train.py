"""Pair training loop: RMSprop over contrastive loss, early stopping on
validation loss, best-validation-accuracy weight restore, per-epoch history.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ValidationError
from .nn.optim import OptimizerConfig, RMSprop
from .verify import LossConfig, SiameseModel, contrastive_loss, pair_distances, \
    batch_loss, calibrate_threshold, counts_at


@dataclass(frozen=True)
class EarlyStopConfig:
    patience: int = 10
    min_delta: float = 0.0

    def __post_init__(self):
        if self.patience < 1:
            raise ValidationError("patience must be >= 1")
        if self.min_delta < 0:
            raise ValidationError("min_delta must be >= 0")


class EarlyStopper:
    """Stops after `patience` consecutive epochs without the validation
    loss improving by more than `min_delta`."""

    def __init__(self, cfg: EarlyStopConfig):
        self.cfg = cfg
        self.best = float("inf")
        self.bad_epochs = 0

    def update(self, val_loss: float) -> bool:
        if val_loss < self.best - self.cfg.min_delta:
            self.best = val_loss
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
        return self.bad_epochs >= self.cfg.patience


@dataclass(frozen=True)
class HistoryRow:
    epoch: int
    train_loss: float
    val_loss: float
    val_acc: float


@dataclass
class TrainHistory:
    rows: list = field(default_factory=list)
    best_epoch: int = 0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_loss", "val_loss", "val_acc"])
            for r in self.rows:
                # repr keeps full float precision so reruns are bit-identical
                w.writerow([r.epoch, repr(r.train_loss), repr(r.val_loss),
                            repr(r.val_acc)])


@dataclass
class PairArrays:
    """Stacked pair tensors: a, b are (P, 1, H, W); labels are (P,) ints."""

    a: np.ndarray
    b: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a)
        self.b = np.asarray(self.b)
        self.labels = np.asarray(self.labels)
        if self.a.shape != self.b.shape or len(self.labels) != self.a.shape[0]:
            raise ValidationError("pair arrays misaligned")

    def __len__(self):
        return self.a.shape[0]

    def subset(self, idx) -> "PairArrays":
        return PairArrays(self.a[idx], self.b[idx], self.labels[idx])


def _val_metrics(model: SiameseModel, val: PairArrays, loss_cfg: LossConfig):
    ea = model.embed(val.a)
    eb = model.embed(val.b)
    d = pair_distances(ea, eb)
    vloss = batch_loss(d, val.labels, loss_cfg)
    tau = calibrate_threshold(d, val.labels)
    tp, tn, fp, fn = counts_at(d, val.labels, tau)
    return vloss, (tp + tn) / len(val)


def train(model: SiameseModel, train_pairs: PairArrays, val_pairs: PairArrays,
          opt_cfg: OptimizerConfig = OptimizerConfig(),
          loss_cfg: LossConfig = LossConfig(),
          early: EarlyStopConfig = EarlyStopConfig(),
          seed: int = 0) -> TrainHistory:
    """Trains in place; finishes holding the weights from the epoch with the
    best validation accuracy.  Fully deterministic for a fixed seed."""
    if len(train_pairs) == 0 or len(val_pairs) == 0:
        raise DataError("empty train or validation pair set")

    net = model.net
    shuffle_rng, dropout_rng = [
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2)
    ]
    opt = RMSprop(net.params, opt_cfg)
    stopper = EarlyStopper(early)
    history = TrainHistory()
    best_acc = -1.0
    best_params = net.get_params()
    history.best_epoch = 0

    for epoch in range(1, opt_cfg.max_epochs + 1):
        order = shuffle_rng.permutation(len(train_pairs))
        loss_sum = 0.0
        for start in range(0, len(order), opt_cfg.batch_size):
            idx = order[start:start + opt_cfg.batch_size]
            xa = train_pairs.a[idx]
            xb = train_pairs.b[idx]
            y = train_pairs.labels[idx]

            ea, ca = net.forward(xa, train=True, rng=dropout_rng)
            eb, cb = net.forward(xb, train=True, rng=dropout_rng)
            diff = ea - eb
            d = np.sqrt(np.sum(diff * diff, axis=1))
            loss, dloss_dd = contrastive_loss(d, y, loss_cfg)
            loss_sum += float(loss.sum())

            # dL/dea = (dl/dD / batch) * (ea - eb)/D, zero where D == 0.
            unit = np.where(d[:, None] > 0.0, diff / np.maximum(d, 1e-300)[:, None], 0.0)
            gea = (dloss_dd / len(idx))[:, None] * unit
            _, grads_a = net.backward(gea, ca)
            _, grads_b = net.backward(-gea, cb)
            grads = [ga + gb for ga, gb in zip(grads_a, grads_b)]
            opt.step(net.params, grads)

        train_loss = loss_sum / len(train_pairs)
        val_loss, val_acc = _val_metrics(model, val_pairs, loss_cfg)
        history.rows.append(HistoryRow(epoch, train_loss, val_loss, val_acc))

        if val_acc > best_acc:
            best_acc = val_acc
            best_params = net.get_params()
            history.best_epoch = epoch
        if stopper.update(val_loss):
            break

    net.set_params(best_params)
    return history
