"""Command-line entry point: ``python -m sentiment_transfer <command> ...``.

Commands: ``index``, ``retrieve``, ``transfer``, ``pipeline``, ``evaluate``.
Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.

``--config FILE`` reads ``key = value`` lines whose keys are the long flag
names without dashes (``alpha = 1.0``, ``top-k = 3``); flags given on the
command line take precedence.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .backbone import SPECS, load_backbone
from .corpus import build_index, ingest_manifest, load_index
from .edges import EDGE_BACKENDS
from .errors import FormatError, SentimentTransferError
from .evaluation import evaluate_detail_preservation, load_pairs_manifest
from .imaging import load_image, save_image
from .retrieval import STRATEGIES, SentimentQuery, retrieve_reference
from .transfer import LossWeights, TransferConfig, run_transfer

WEIGHTS_ENV = "SENTIMENT_TRANSFER_WEIGHTS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_transfer_flags(p):
    p.add_argument("--out", required=True, help="output PNG")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1e6)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--backbone", choices=sorted(SPECS), default="densenet121")
    p.add_argument("--size", type=int, default=512, help="working long side in pixels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="loss trace output (.csv or .json)")


def _add_retrieve_flags(p):
    p.add_argument("--index", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--noun", required=True)
    p.add_argument("--sentiment", required=True)
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--strategy", choices=STRATEGIES, default="ssim-edge")


def _add_weights_flag(p):
    p.add_argument("--weights", help=f"weight archive (.npz); defaults to ${WEIGHTS_ENV}/<backbone>.npz")


def build_parser():
    parser = _Parser(prog="sentiment_transfer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", help="build a retrieval index from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--edge-backend", choices=EDGE_BACKENDS, default="sobel")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("retrieve", help="rank reference candidates for an input")
    _add_retrieve_flags(p)
    p.add_argument("--out", help="also write the ranking JSON here")
    p.add_argument("--backbone", choices=sorted(SPECS), default="densenet121")
    _add_weights_flag(p)

    p = sub.add_parser("transfer", help="transfer a reference's sentiment onto an input")
    p.add_argument("--input", required=True)
    p.add_argument("--reference", required=True)
    _add_transfer_flags(p)
    _add_weights_flag(p)

    p = sub.add_parser("pipeline", help="retrieve the top reference, then transfer")
    _add_retrieve_flags(p)
    _add_transfer_flags(p)
    _add_weights_flag(p)

    p = sub.add_parser("evaluate", help="mean input/output SSIM over a pairs manifest")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)

    for action in sub.choices.values():
        action.add_argument("--config", help="key = value file mirroring the flags")
    return parser


def read_config_file(path):
    """Parse a ``key = value`` config file into flag tokens."""
    tokens = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from exc
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config {path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        tokens += [f"--{key}", value]
    return tokens


def _split_config(argv):
    argv = list(argv)
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[:i] + argv[i + 2:], argv[i + 1]
        if tok.startswith("--config="):
            return argv[:i] + argv[i + 1:], tok.split("=", 1)[1]
    return argv, None


def parse_args(argv):
    parser = build_parser()
    argv, config_path = _split_config(argv)
    if config_path is not None and argv:
        # config values go first so explicit flags override them
        argv = argv[:1] + read_config_file(config_path) + argv[1:]
    args = parser.parse_args(argv)
    args.config = config_path
    _validate(args)
    return args


def _validate(args):
    for flag in ("iters", "size", "top_k", "workers"):
        value = getattr(args, flag, None)
        if value is not None and value < 1:
            raise UsageError(f"--{flag.replace('_', '-')} must be >= 1")
    for flag in ("alpha", "beta"):
        value = getattr(args, flag, None)
        if value is not None and value < 0:
            raise UsageError(f"--{flag} must be >= 0")
    if getattr(args, "lr", 1.0) <= 0:
        raise UsageError("--lr must be positive")
    if getattr(args, "alpha", 1.0) == 0 and getattr(args, "beta", 1.0) == 0:
        raise UsageError("--alpha and --beta cannot both be zero")
    if getattr(args, "size", 32) < 32:
        raise UsageError("--size must be >= 32")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _resolved(args):
    return {k: v for k, v in sorted(vars(args).items())}


def _write_sidecar(target, args, inputs, extra=None):
    meta = {
        "command": args.command,
        "config": _resolved(args),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "version": __version__,
    }
    if extra:
        meta.update(extra)
    Path(str(target) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _weights_path(args, backbone_id):
    if args.weights:
        return Path(args.weights)
    root = os.environ.get(WEIGHTS_ENV)
    if not root:
        raise FormatError(f"no weight archive for {backbone_id}: pass --weights or set ${WEIGHTS_ENV}")
    return Path(root) / f"{backbone_id}.npz"


def _transfer_config(args):
    return TransferConfig(
        iterations=args.iters,
        step_size=args.lr,
        backbone=args.backbone,
        working_long_side=args.size,
        weights=LossWeights(args.alpha, args.beta),
        seed=args.seed,
    )


def _retrieve(args):
    index = load_index(args.index)
    query = SentimentQuery(load_image(args.input), args.noun, args.sentiment,
                           strategy=args.strategy, top_k=args.top_k)
    backbone = None
    if query.strategy == "perceptual":
        backbone = load_backbone(args.backbone, _weights_path(args, args.backbone))
    result = retrieve_reference(index, query, backbone)
    return index, result


def _transfer(args, reference_path):
    backbone = load_backbone(args.backbone, _weights_path(args, args.backbone))
    result = run_transfer(load_image(args.input), load_image(reference_path),
                          _transfer_config(args), backbone)
    save_image(result.output, args.out)
    if args.trace:
        result.write_trace(args.trace)
    return result


def cmd_index(args):
    entries = ingest_manifest(args.manifest)
    index = build_index(entries, args.edge_backend, args.out, workers=args.workers)
    _write_sidecar(Path(args.out) / "index.json", args, [args.manifest],
                   {"entries": len(index.entries)})
    print(f"indexed {len(index.entries)} entries into {args.out}")


def cmd_retrieve(args):
    _, result = _retrieve(args)
    text = result.dumps()
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
        _write_sidecar(args.out, args, [args.input, Path(args.index) / "index.json"])


def cmd_transfer(args):
    _transfer(args, args.reference)
    _write_sidecar(args.out, args, [args.input, args.reference])


def cmd_pipeline(args):
    index, result = _retrieve(args)
    print(result.dumps())
    best = next(e for e in index.entries if e.id == result.best)
    _transfer(args, best.path)
    _write_sidecar(args.out, args, [args.input, best.path, Path(args.index) / "index.json"],
                   {"retrieval": result.to_json(), "reference": best.path})


def cmd_evaluate(args):
    pairs = load_pairs_manifest(args.pairs)
    report = evaluate_detail_preservation(pairs)
    report.config["command"] = _resolved(args)
    report.write(args.out)
    _write_sidecar(args.out, args, [args.pairs])
    print(f"mean_ssim {report.mean_ssim:.4f} over {len(report.per_pair)} pairs")


COMMANDS = {
    "index": cmd_index,
    "retrieve": cmd_retrieve,
    "transfer": cmd_transfer,
    "pipeline": cmd_pipeline,
    "evaluate": cmd_evaluate,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"command": args.command, "config": _resolved(args)}, sort_keys=True),
          file=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except (SentimentTransferError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0
