"""Dataset ingestion, author-disjoint splitting, pair generation, and a
deterministic synthetic-signature generator.

Layouts understood by load_dataset:
  cedar_names      flat directory of original_<signer>_<n>.png /
                   forgeries_<signer>_<n>.png
  per_signer_dirs  root/<signer>/genuine/*.png and root/<signer>/forged/*.png
  manifest         root/manifest.json: {"signers": [{"id", "genuine": [...],
                   "forged": [...]}]} with paths relative to the manifest

The benchmark corpora themselves are licensed and not shipped; the
synthetic generator produces a stand-in tree in per_signer_dirs layout.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import json

import numpy as np

from .errors import DataError, ValidationError
from .landmarks import PointerSample, Posture
from .preprocess import preprocess
from .strokes import SignatureImage, SmoothingConfig, StrokeSession, \
    export_signature, rasterize

log = logging.getLogger(__name__)

LAYOUTS = ("cedar_names", "per_signer_dirs", "manifest")

_CEDAR_RE = re.compile(r"^(original|forgeries)_(\d+)_(\d+)\.(png|PNG)$")


@dataclass(frozen=True)
class SignerRecord:
    signer_id: str
    genuine: tuple
    forged: tuple

    def __post_init__(self):
        overlap = set(self.genuine) & set(self.forged)
        if overlap:
            raise DataError(
                f"signer {self.signer_id}: paths listed as both genuine and "
                f"forged: {sorted(overlap)[:3]}")


@dataclass(frozen=True)
class SplitPlan:
    train_signers: tuple
    val_signers: tuple
    test_signers: tuple
    seed: int

    def __post_init__(self):
        groups = [set(self.train_signers), set(self.val_signers),
                  set(self.test_signers)]
        for i in range(3):
            for j in range(i + 1, 3):
                if groups[i] & groups[j]:
                    raise DataError("split partitions overlap")


def load_dataset(root, layout: str) -> list:
    """Signer records sorted by id; counts are logged for sanity."""
    root = Path(root)
    if layout not in LAYOUTS:
        raise DataError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")
    if not root.exists():
        raise DataError(f"dataset root {root} does not exist")
    if layout == "cedar_names":
        records = _load_cedar_names(root)
    elif layout == "per_signer_dirs":
        records = _load_per_signer_dirs(root)
    else:
        records = _load_manifest(root)
    if not records:
        log.warning("no signers found under %s (layout=%s)", root, layout)
    else:
        log.info("loaded %d signers, %d genuine / %d forged images",
                 len(records), sum(len(r.genuine) for r in records),
                 sum(len(r.forged) for r in records))
    return records


def _numeric_key(path: Path):
    nums = re.findall(r"\d+", path.name)
    return [int(n) for n in nums], path.name


def _load_cedar_names(root: Path) -> list:
    genuine: dict = {}
    forged: dict = {}
    for p in sorted(root.iterdir()):
        m = _CEDAR_RE.match(p.name)
        if not m:
            continue
        bucket = genuine if m.group(1) == "original" else forged
        bucket.setdefault(m.group(2), []).append(p)
    records = []
    for signer in sorted(genuine | forged, key=int):
        g = sorted(genuine.get(signer, []), key=_numeric_key)
        f = sorted(forged.get(signer, []), key=_numeric_key)
        if not g:
            raise DataError(f"signer {signer} has no genuine signatures")
        records.append(SignerRecord(signer, tuple(g), tuple(f)))
    return records


def _load_per_signer_dirs(root: Path) -> list:
    records = []
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        g = sorted((d / "genuine").glob("*.png"), key=_numeric_key) \
            if (d / "genuine").is_dir() else []
        f = sorted((d / "forged").glob("*.png"), key=_numeric_key) \
            if (d / "forged").is_dir() else []
        if not g and not f:
            continue
        if not g:
            raise DataError(f"signer {d.name} has no genuine signatures")
        records.append(SignerRecord(d.name, tuple(g), tuple(f)))
    return records


def _load_manifest(root: Path) -> list:
    manifest = root / "manifest.json" if root.is_dir() else root
    base = manifest.parent
    try:
        index = json.loads(manifest.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read manifest {manifest}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {manifest} is not valid JSON: {exc}") from exc
    records = []
    for entry in index.get("signers", []):
        try:
            sid = entry["id"]
            g = tuple(base / p for p in entry["genuine"])
            f = tuple(base / p for p in entry.get("forged", []))
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed manifest entry: {entry!r}") from exc
        missing = [str(p) for p in (*g, *f) if not p.exists()]
        if missing:
            raise DataError(f"manifest lists missing files: {missing[:3]}")
        if not g:
            raise DataError(f"signer {sid} has no genuine signatures")
        records.append(SignerRecord(str(sid), g, f))
    return sorted(records, key=lambda r: r.signer_id)


def split_by_authors(records: list, ratios, seed: int = 0) -> SplitPlan:
    """Partition signers (never images) by deterministic shuffle.

    ratios: (train, test) or (train, val, test); must sum to 1.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) not in (2, 3):
        raise ValidationError("ratios must have 2 or 3 entries")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"ratios must sum to 1, got {sum(ratios)}")
    n = len(records)
    if n < len(ratios):
        raise DataError(f"{n} signers cannot fill {len(ratios)} splits")
    ids = sorted(r.signer_id for r in records)
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(n)]
    # cumulative rounding keeps the total exact
    bounds = [round(n * c) for c in np.cumsum(ratios[:-1])]
    if len(ratios) == 2:
        train, test = order[:bounds[0]], order[bounds[0]:]
        val: list = []
    else:
        train = order[:bounds[0]]
        val = order[bounds[0]:bounds[1]]
        test = order[bounds[1]:]
    return SplitPlan(tuple(train), tuple(val), tuple(test), seed)


def generate_pairs(record: SignerRecord, balance: bool = True,
                   seed: int = 0) -> list:
    """Labeled path pairs for one signer.

    positives: all unordered genuine-genuine pairs (label 1)
    negatives: genuine x forged (label 0), subsampled to the positive count
    when balance is set.
    """
    if len(record.genuine) < 2:
        raise DataError(
            f"signer {record.signer_id}: need >= 2 genuine signatures for "
            "positive pairs")
    positives = [(a, b, 1) for a, b in combinations(record.genuine, 2)]
    negatives = [(g, f, 0) for g in record.genuine for f in record.forged]
    if balance and len(negatives) > len(positives):
        rng = np.random.default_rng(seed)
        keep = rng.choice(len(negatives), size=len(positives), replace=False)
        negatives = [negatives[i] for i in sorted(keep)]
    return positives + negatives


def pairs_for_signers(records: list, signer_ids, balance: bool = True,
                      seed: int = 0) -> list:
    by_id = {r.signer_id: r for r in records}
    pairs = []
    for sid in signer_ids:
        pairs.extend(generate_pairs(by_id[sid], balance=balance,
                                    seed=seed + _stable_offset(sid)))
    return pairs


def _stable_offset(signer_id: str) -> int:
    # Per-signer offset that does not depend on hash randomization.
    return sum(signer_id.encode("utf-8")) % 997


def load_pair_arrays(pairs: list, out_h: int, out_w: int):
    """Preprocess every distinct path once and stack the pair tensors.

    Returns (a, b, labels) with a, b shaped (P, 1, out_h, out_w).
    Import of PairArrays stays local to avoid a module cycle.
    """
    from .train import PairArrays

    if not pairs:
        raise DataError("no pairs to load")
    cache: dict = {}

    def arr(path):
        if path not in cache:
            cache[path] = preprocess(SignatureImage.load_png(path), out_h, out_w)
        return cache[path]

    a = np.stack([arr(p) for p, _, _ in pairs])[:, None]
    b = np.stack([arr(q) for _, q, _ in pairs])[:, None]
    labels = np.array([lab for _, _, lab in pairs], dtype=np.int64)
    return PairArrays(a, b, labels)


# --- synthetic signature generation -------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    n_signers: int = 12
    genuine_per_signer: int = 10
    forged_per_signer: int = 10
    jitter_sigma: float = 2.0  # px of genuine intra-class noise
    forgery_mode: str = "other_seed"  # or "heavy_perturb"
    canvas_w: int = 320
    canvas_h: int = 240
    seed: int = 0

    def __post_init__(self):
        if min(self.n_signers, self.genuine_per_signer,
               self.forged_per_signer) < 1:
            raise ValidationError("synthetic counts must be >= 1")
        if self.jitter_sigma < 0:
            raise ValidationError("jitter_sigma must be >= 0")
        if self.forgery_mode not in ("other_seed", "heavy_perturb"):
            raise ValidationError(f"unknown forgery_mode {self.forgery_mode!r}")


def _template_rng(cfg: SynthConfig, signer: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([cfg.seed, signer, 0]))


def _signature_template(cfg: SynthConfig, signer: int) -> list:
    """Seeded control polylines: 1-2 strokes meandering left to right."""
    rng = _template_rng(cfg, signer)
    w, h = cfg.canvas_w, cfg.canvas_h
    n_strokes = int(rng.integers(1, 3))
    strokes = []
    for _ in range(n_strokes):
        n_pts = int(rng.integers(5, 9))
        xs = np.linspace(0.15 * w, 0.85 * w, n_pts) + rng.normal(0, 0.02 * w, n_pts)
        ys = 0.5 * h + np.cumsum(rng.normal(0, 0.09 * h, n_pts))
        xs = np.clip(xs, 0.05 * w, 0.95 * w)
        ys = np.clip(ys, 0.12 * h, 0.88 * h)
        strokes.append(np.stack([xs, ys], axis=1))
    return strokes


def _render_sample(cfg: SynthConfig, template: list, sigma: float,
                   rng: np.random.Generator):
    """Jitter control points, densify, draw through the stroke engine."""
    session = StrokeSession(cfg.canvas_w, cfg.canvas_h,
                            SmoothingConfig(alpha=0.5, brush_radius_px=2,
                                            crop_margin_px=8))
    t = 0
    for stroke in template:
        pts = stroke + rng.normal(0.0, sigma, stroke.shape)
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            for f in np.linspace(0.0, 1.0, 8, endpoint=False):
                session.feed(Posture.ACTIVE, PointerSample(
                    x0 + f * (x1 - x0), y0 + f * (y1 - y0), t))
                t += 33
        session.feed(Posture.ACTIVE, PointerSample(pts[-1, 0], pts[-1, 1], t))
        session.feed(Posture.STOP, PointerSample(pts[-1, 0], pts[-1, 1], t + 33))
        t += 66
    return export_signature(rasterize(session),
                            session.config.crop_margin_px)


def synth_generate(cfg: SynthConfig, out_root) -> list:
    """Write a per_signer_dirs tree; pure function of cfg.

    Genuine samples jitter the signer's own template by jitter_sigma.
    Forgeries either render the next signer's template (other_seed) or the
    own template at 10x jitter (heavy_perturb).
    """
    out_root = Path(out_root)
    records = []
    for signer in range(cfg.n_signers):
        sid = f"signer{signer:03d}"
        gdir = out_root / sid / "genuine"
        fdir = out_root / sid / "forged"
        gdir.mkdir(parents=True, exist_ok=True)
        fdir.mkdir(parents=True, exist_ok=True)
        template = _signature_template(cfg, signer)
        genuine = []
        for i in range(cfg.genuine_per_signer):
            rng = np.random.default_rng(
                np.random.SeedSequence([cfg.seed, signer, 1, i]))
            img = _render_sample(cfg, template, cfg.jitter_sigma, rng)
            path = gdir / f"g{i:03d}.png"
            img.save_png(path)
            genuine.append(path)
        if cfg.forgery_mode == "other_seed" and cfg.n_signers > 1:
            forge_template = _signature_template(cfg, (signer + 1) % cfg.n_signers)
            forge_sigma = cfg.jitter_sigma
        elif cfg.forgery_mode == "other_seed":
            # single signer: fall back to an unused template seed
            forge_template = _signature_template(cfg, cfg.n_signers)
            forge_sigma = cfg.jitter_sigma
        else:
            forge_template = template
            forge_sigma = 10.0 * cfg.jitter_sigma
        forged = []
        for i in range(cfg.forged_per_signer):
            rng = np.random.default_rng(
                np.random.SeedSequence([cfg.seed, signer, 2, i]))
            img = _render_sample(cfg, forge_template, forge_sigma, rng)
            path = fdir / f"f{i:03d}.png"
            img.save_png(path)
            forged.append(path)
        records.append(SignerRecord(sid, tuple(genuine), tuple(forged)))
    return records
