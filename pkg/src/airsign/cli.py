"""Command-line interface.

Subcommands: synth, train, calibrate, eval, replay, serve, verify-pair.
Exit codes: 0 ok, 1 usage, 2 data error, 3 model-format error.

serve and replay also read a KEY=VALUE config file (--config); explicit
flags win over file values.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .capture import replay_trace
from .data import SynthConfig, load_dataset, load_pair_arrays, \
    pairs_for_signers, split_by_authors, synth_generate
from .errors import AirsignError, DataError, ModelFormatError, ValidationError
from .nn.model_io import load_model, save_model
from .nn.net import build_preset, preset_names
from .nn.optim import OptimizerConfig
from .preprocess import preprocess
from .strokes import SignatureImage, SmoothingConfig
from .traces import read_trace
from .train import EarlyStopConfig, train
from .verify import LossConfig, SiameseModel, calibrate_threshold, distance, \
    equal_error_rate, evaluate_distances, pair_distances

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def load_config_file(path) -> dict:
    """KEY=VALUE lines; blank lines and # comments ignored."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected KEY=VALUE")
        key, value = line.split("=", 1)
        out[key.strip().lower()] = value.strip()
    return out


def _fallback(flag_value, config: dict, key: str, default, cast):
    if flag_value is not None:
        return flag_value
    if key in config:
        return cast(config[key])
    return default


def _model_version(header: dict) -> str:
    return f"{header.get('preset') or 'custom'}-{header['crc32']:08x}"


def _parse_ratios(text: str):
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad ratios {text!r}") from exc


def _split_pairs(args, input_hw):
    """Load data, reproduce the author split, and build pair arrays for the
    requested partition."""
    records = load_dataset(args.data, args.layout)
    if not records:
        raise DataError(f"no signers under {args.data}")
    plan = split_by_authors(records, _parse_ratios(args.ratios), args.seed)
    signers = {"train": plan.train_signers, "val": plan.val_signers,
               "test": plan.test_signers}[args.split]
    if not signers:
        raise DataError(f"split {args.split!r} is empty under ratios "
                        f"{args.ratios}")
    pairs = pairs_for_signers(records, signers, balance=True, seed=args.seed)
    return load_pair_arrays(pairs, *input_hw)


def cmd_synth(args) -> int:
    cfg = SynthConfig(n_signers=args.signers, genuine_per_signer=args.genuine,
                      forged_per_signer=args.forged,
                      jitter_sigma=args.jitter, forgery_mode=args.forgery_mode,
                      canvas_w=args.canvas_w, canvas_h=args.canvas_h,
                      seed=args.seed)
    records = synth_generate(cfg, args.out)
    print(f"wrote {len(records)} signers to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    records = load_dataset(args.data, args.layout)
    if not records:
        raise DataError(f"no signers under {args.data}")
    ratios = _parse_ratios(args.ratios)
    if len(ratios) != 3:
        raise ValidationError("train needs train,val,test ratios")
    plan = split_by_authors(records, ratios, args.seed)
    if not plan.val_signers:
        raise DataError("validation split is empty; adjust ratios")

    net = build_preset(args.preset, seed=args.seed)
    _, in_h, in_w = net.input_shape
    train_pairs = load_pair_arrays(
        pairs_for_signers(records, plan.train_signers, seed=args.seed),
        in_h, in_w)
    val_pairs = load_pair_arrays(
        pairs_for_signers(records, plan.val_signers, seed=args.seed),
        in_h, in_w)

    model = SiameseModel(net)
    opt_cfg = OptimizerConfig(lr=args.lr, rho=args.rho, eps=args.eps,
                              momentum=args.momentum,
                              batch_size=args.batch_size,
                              max_epochs=args.epochs)
    loss_cfg = LossConfig(margin=args.margin, squared=args.squared_loss)
    history = train(model, train_pairs, val_pairs, opt_cfg, loss_cfg,
                    EarlyStopConfig(args.patience, args.min_delta),
                    seed=args.seed)

    d = pair_distances(model.embed(val_pairs.a), model.embed(val_pairs.b))
    tau = calibrate_threshold(d, val_pairs.labels)
    save_model(args.out, net, preset=args.preset, seed=args.seed,
               threshold=tau)
    if args.history:
        history.to_csv(args.history)
    last = history.rows[-1]
    print(f"trained {len(history.rows)} epochs "
          f"(best epoch {history.best_epoch}); "
          f"final val_loss={last.val_loss:.4f} val_acc={last.val_acc:.4f}")
    print(f"calibrated threshold {tau!r}")
    print(f"model written to {args.out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    net, _ = load_model(args.model)
    model = SiameseModel(net)
    pairs = _split_pairs(args, net.input_shape[1:])
    d = pair_distances(model.embed(pairs.a), model.embed(pairs.b))
    tau = calibrate_threshold(d, pairs.labels)
    print(repr(tau))
    return EXIT_OK


def cmd_eval(args) -> int:
    net, header = load_model(args.model)
    model = SiameseModel(net)
    tau = args.tau if args.tau is not None else header.get("threshold")
    if tau is None:
        raise ValidationError("model stores no threshold; pass --tau")
    pairs = _split_pairs(args, net.input_shape[1:])
    d = pair_distances(model.embed(pairs.a), model.embed(pairs.b))
    report = evaluate_distances(d, pairs.labels, tau)
    eer = equal_error_rate(d, pairs.labels)
    print(f"pairs={len(pairs)} accuracy={report.accuracy:.4f} "
          f"far={report.far:.4f} frr={report.frr:.4f} eer={eer:.4f} "
          f"threshold={tau!r}")
    if args.report:
        payload = json.loads(report.to_json())
        payload["eer"] = eer
        Path(args.report).write_text(json.dumps(payload, indent=2))
        print(f"report written to {args.report}")
    return EXIT_OK


def cmd_replay(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    alpha = _fallback(args.alpha, config, "alpha", 0.4, float)
    debounce = _fallback(args.debounce, config, "debounce", 3, int)
    smoothing = SmoothingConfig(alpha=alpha, brush_radius_px=args.brush_radius,
                                crop_margin_px=args.margin)
    img = replay_trace(read_trace(args.trace), debounce_n=debounce,
                       smoothing=smoothing)
    img.save_png(args.out)
    print(f"wrote {img.width}x{img.height} signature to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import EnrollmentStore, create_app

    config = load_config_file(args.config) if args.config else {}
    model_path = _fallback(args.model, config, "model", None, str)
    store_path = _fallback(args.store, config, "store", None, str)
    port = _fallback(args.port, config, "port", 8765, int)
    debounce = _fallback(args.debounce, config, "debounce", 3, int)
    alpha = _fallback(args.alpha, config, "alpha", 0.4, float)
    if model_path is None or store_path is None:
        raise ValidationError("serve needs --model and --store "
                              "(flags or config file)")
    net, header = load_model(model_path)
    tau = args.tau if args.tau is not None else header.get("threshold")
    if tau is None:
        raise ValidationError("model stores no threshold; pass --tau")
    version = _model_version(header)
    store = EnrollmentStore(store_path, version, tau)
    app = create_app(SiameseModel(net), store, version, debounce_n=debounce,
                     smoothing=SmoothingConfig(alpha=alpha))
    uvicorn.run(app, host=args.host, port=port)
    return EXIT_OK


def cmd_verify_pair(args) -> int:
    net, header = load_model(args.model)
    model = SiameseModel(net)
    tau = args.tau if args.tau is not None else header.get("threshold")
    if tau is None:
        raise ValidationError("model stores no threshold; pass --tau")
    _, in_h, in_w = net.input_shape
    ea = model.embed(preprocess(SignatureImage.load_png(args.a), in_h, in_w))
    eb = model.embed(preprocess(SignatureImage.load_png(args.b), in_h, in_w))
    d = distance(ea, eb)
    accepted = d <= tau
    print(f"distance={d!r} threshold={tau!r} "
          f"{'accepted' if accepted else 'rejected'}")
    return EXIT_OK


def _add_split_flags(p):
    p.add_argument("--data", required=True)
    p.add_argument("--layout", default="per_signer_dirs",
                   choices=("cedar_names", "per_signer_dirs", "manifest"))
    p.add_argument("--split", default="test",
                   choices=("train", "val", "test"))
    p.add_argument("--ratios", default="0.7,0.15,0.15")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> _Parser:
    parser = _Parser(prog="airsign")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset tree")
    p.add_argument("--out", required=True)
    p.add_argument("--signers", type=int, default=12)
    p.add_argument("--genuine", type=int, default=10)
    p.add_argument("--forged", type=int, default=10)
    p.add_argument("--jitter", type=float, default=2.0)
    p.add_argument("--forgery-mode", default="other_seed",
                   choices=("other_seed", "heavy_perturb"))
    p.add_argument("--canvas-w", type=int, default=320)
    p.add_argument("--canvas-h", type=int, default=240)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train an embedding model")
    p.add_argument("--data", required=True)
    p.add_argument("--layout", default="per_signer_dirs",
                   choices=("cedar_names", "per_signer_dirs", "manifest"))
    p.add_argument("--preset", default="tiny", choices=preset_names())
    p.add_argument("--out", required=True)
    p.add_argument("--history")
    p.add_argument("--ratios", default="0.7,0.15,0.15")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--squared-loss", action="store_true")
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--min-delta", type=float, default=0.0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("calibrate", help="pick a decision threshold")
    p.add_argument("--model", required=True)
    _add_split_flags(p)
    p.set_defaults(func=cmd_calibrate, split="val")

    p = sub.add_parser("eval", help="evaluate FAR/FRR/accuracy")
    p.add_argument("--model", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--report", help="write a JSON report here")
    _add_split_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="render a landmark trace to PNG")
    p.add_argument("trace")
    p.add_argument("out")
    p.add_argument("--alpha", type=float)
    p.add_argument("--debounce", type=int)
    p.add_argument("--brush-radius", type=int, default=2)
    p.add_argument("--margin", type=int, default=10)
    p.add_argument("--config")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the signing/verification service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.add_argument("--model")
    p.add_argument("--store")
    p.add_argument("--tau", type=float)
    p.add_argument("--debounce", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--config")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("verify-pair", help="distance and decision for two PNGs")
    p.add_argument("--model", required=True)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tau", type=float)
    p.set_defaults(func=cmd_verify_pair)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AirsignError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
