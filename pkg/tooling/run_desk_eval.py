#!/usr/bin/env python3
"""Write the desk set, transfer every pair with each backbone, and score it.

    python tooling/run_desk_eval.py out/desk --weights-dir weights/

Produces ``<out>/pairs.jsonl`` (input/reference), one transferred PNG per
pair and backbone, an evaluation ``pairs-<backbone>.jsonl`` usable with
``sentiment_transfer evaluate``, and ``ablation.json`` with both reports.
Without ``--weights-dir`` seeded random archives are generated (useful only
for smoke runs; the numbers are not meaningful).
"""

import argparse
import json
from pathlib import Path

from sentiment_transfer.backbone import init_random_archive, load_backbone
from sentiment_transfer.desk import desk_pairs, write_desk_set
from sentiment_transfer.evaluation import EvaluationReport, detail_preservation
from sentiment_transfer.imaging import save_image
from sentiment_transfer.transfer import TransferConfig, run_transfer

BACKBONES = ("densenet121", "vgg19")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--weights-dir", type=Path)
    ap.add_argument("--size", type=int, default=256, help="desk long side and working size")
    ap.add_argument("--iters", type=int, default=500)
    args = ap.parse_args(argv)

    write_desk_set(args.out, args.size)
    triples = list(desk_pairs(args.size))
    reports = {}
    for bid in BACKBONES:
        if args.weights_dir:
            weights = args.weights_dir / f"{bid}.npz"
        else:
            weights = init_random_archive(bid, args.out / f"random-{bid}.npz",
                                          calibration=[t[1] for t in triples])
        backbone = load_backbone(bid, weights)
        cfg = TransferConfig(iterations=args.iters, backbone=bid, working_long_side=args.size)
        per_pair, lines = [], []
        for pair_id, inp, ref in triples:
            result = run_transfer(inp, ref, cfg, backbone)
            name = f"{pair_id}-{bid}.png"
            save_image(result.output, args.out / name)
            per_pair.append((pair_id, detail_preservation(inp, result.output)))
            lines.append(json.dumps({"pair_id": pair_id, "input": f"{pair_id}-input.png", "output": name}))
            print(f"{bid} {pair_id} ssim {per_pair[-1][1]:.4f}", flush=True)
        (args.out / f"pairs-{bid}.jsonl").write_text("\n".join(lines) + "\n")
        reports[bid] = EvaluationReport(per_pair, {"transfer": cfg.to_dict(), "weights": str(weights)})
        print(f"{bid} mean ssim {reports[bid].mean_ssim:.4f}", flush=True)
    (args.out / "ablation.json").write_text(
        json.dumps({k: r.to_json() for k, r in reports.items()}, indent=2) + "\n")


if __name__ == "__main__":
    main()
