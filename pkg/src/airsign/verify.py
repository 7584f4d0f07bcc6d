"""Twin-branch embedding model, contrastive loss, threshold calibration,
and FAR/FRR/accuracy evaluation.

Both branches are one and the same parameter set: a pair is scored by
embedding each image through the shared stack and taking the Euclidean
distance.  A pair is accepted as genuine iff distance <= threshold (ties
accepted).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError, ShapeError, ValidationError
from .nn.net import Sequential

POSITIVE = 1  # genuine-genuine, same signer
NEGATIVE = 0  # genuine-forged


@dataclass(frozen=True)
class LossConfig:
    margin: float = 1.0
    squared: bool = False  # Hadsell-style variant, off by default

    def __post_init__(self):
        if self.margin <= 0:
            raise ValidationError(f"margin must be > 0, got {self.margin}")


@dataclass(frozen=True)
class VerificationReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    far: float
    frr: float
    threshold: float

    @property
    def confusion(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}

    def to_json(self) -> str:
        out = asdict(self)
        out["confusion"] = self.confusion
        return json.dumps(out, indent=2)


class SiameseModel:
    """Shared-parameter twin wrapper around one embedding network."""

    def __init__(self, net: Sequential):
        self.net = net
        self.embedding_dim = net.output_shape[0]

    def embed(self, images: np.ndarray) -> np.ndarray:
        """Eval-mode embeddings for (N, 1, H, W) or a single (1, H, W)/(H, W)."""
        x = np.asarray(images)
        single = x.ndim < 4
        if x.ndim == 2:
            x = x[None, None]
        out, _ = self.net.forward(x, train=False)
        return out[0] if single else out

    def forward_pair(self, xa, xb, train=False, rng=None):
        """Embeddings plus caches for both branches (same weights)."""
        ea, ca = self.net.forward(xa, train=train, rng=rng)
        eb, cb = self.net.forward(xb, train=train, rng=rng)
        return ea, eb, ca, cb


def distance(e1: np.ndarray, e2: np.ndarray) -> float:
    """Euclidean distance between two embedding vectors."""
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    if e1.shape != e2.shape:
        raise ShapeError(f"embedding shapes differ: {e1.shape} vs {e2.shape}")
    return float(np.sqrt(np.sum((e1 - e2) ** 2)))


def pair_distances(ea: np.ndarray, eb: np.ndarray) -> np.ndarray:
    d = np.asarray(ea, dtype=np.float64) - np.asarray(eb, dtype=np.float64)
    return np.sqrt(np.sum(d * d, axis=1))


def contrastive_loss(d, labels, cfg: LossConfig = LossConfig()):
    """Per-pair loss and d(loss)/d(distance).

    positive: loss = D          (gradient 1; squared variant D^2)
    negative: loss = max(0, m - D)   (gradient -1 while D < m, else 0)
    The hinge subgradient at D == m is 0.
    """
    d = np.asarray(d, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == POSITIVE
    m = cfg.margin
    if cfg.squared:
        hinge = np.maximum(0.0, m - d)
        loss = np.where(pos, d * d, hinge * hinge)
        grad = np.where(pos, 2.0 * d, -2.0 * hinge)
    else:
        loss = np.where(pos, d, np.maximum(0.0, m - d))
        grad = np.where(pos, 1.0, np.where(d < m, -1.0, 0.0))
    return loss, grad


def batch_loss(d, labels, cfg: LossConfig = LossConfig()) -> float:
    loss, _ = contrastive_loss(d, labels, cfg)
    return float(loss.mean())


def threshold_candidates(distances: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct distances plus the extremes
    (accept-none strictly below the minimum, accept-all at the maximum)."""
    uniq = np.unique(np.asarray(distances, dtype=np.float64))
    mids = (uniq[:-1] + uniq[1:]) / 2.0
    return np.concatenate([[uniq[0] - 1.0], mids, [uniq[-1]]])


def counts_at(d: np.ndarray, labels: np.ndarray, tau: float):
    """(tp, tn, fp, fn) under accept iff D <= tau."""
    d = np.asarray(d, dtype=np.float64)
    labels = np.asarray(labels)
    accept = d <= tau
    pos = labels == POSITIVE
    tp = int(np.sum(accept & pos))
    fn = int(np.sum(~accept & pos))
    fp = int(np.sum(accept & ~pos))
    tn = int(np.sum(~accept & ~pos))
    return tp, tn, fp, fn


def report_from_counts(tp, tn, fp, fn, tau) -> VerificationReport:
    total = tp + tn + fp + fn
    if total == 0:
        raise DataError("empty evaluation set")
    return VerificationReport(
        tp=tp, tn=tn, fp=fp, fn=fn,
        accuracy=(tp + tn) / total,
        far=fp / (fp + tn) if (fp + tn) else 0.0,
        frr=fn / (fn + tp) if (fn + tp) else 0.0,
        threshold=float(tau),
    )


def calibrate_threshold(d, labels) -> float:
    """Accuracy-maximizing threshold; ties resolve to the smallest value."""
    d = np.asarray(d, dtype=np.float64)
    labels = np.asarray(labels)
    if d.shape != labels.shape or d.ndim != 1 or d.size == 0:
        raise ValidationError("need matching 1-D distances and labels")
    n_pos = int(np.sum(labels == POSITIVE))
    if n_pos == 0 or n_pos == d.size:
        raise DataError("calibration needs at least one pair of each class")
    best_tau, best_acc = None, -1.0
    for tau in threshold_candidates(d):
        tp, tn, fp, fn = counts_at(d, labels, tau)
        acc = (tp + tn) / d.size
        if acc > best_acc:  # first (smallest) candidate wins ties
            best_acc, best_tau = acc, float(tau)
    return best_tau


def equal_error_rate(d, labels) -> float:
    """Operating point where FAR and FRR cross, as (FAR + FRR)/2 at the
    candidate threshold minimizing their gap."""
    d = np.asarray(d, dtype=np.float64)
    labels = np.asarray(labels)
    best = None
    for tau in threshold_candidates(d):
        r = report_from_counts(*counts_at(d, labels, tau), tau)
        gap = abs(r.far - r.frr)
        if best is None or gap < best[0]:
            best = (gap, (r.far + r.frr) / 2.0)
    return best[1]


def evaluate_distances(d, labels, tau: float) -> VerificationReport:
    d = np.asarray(d, dtype=np.float64)
    labels = np.asarray(labels)
    if d.size == 0:
        raise DataError("empty test set")
    return report_from_counts(*counts_at(d, labels, tau), tau)


def evaluate(model: SiameseModel, pairs_a, pairs_b, labels,
             tau: float) -> VerificationReport:
    """Scores image pairs (stacked (P, 1, H, W) arrays) against `tau`."""
    a = np.asarray(pairs_a)
    b = np.asarray(pairs_b)
    if a.shape[0] == 0:
        raise DataError("empty test set")
    d = pair_distances(model.embed(a), model.embed(b))
    return evaluate_distances(d, labels, tau)


def verify_user(model: SiameseModel, references, probe,
                tau: float) -> tuple[float, bool]:
    """Min distance from the probe to any enrolled reference; accepted iff
    that distance is <= tau."""
    refs = list(references)
    if not refs:
        raise DataError("no enrolled references")
    probe_e = model.embed(np.asarray(probe))
    d = min(distance(model.embed(np.asarray(r)), probe_e) for r in refs)
    return d, d <= tau
