"""Scoring detail preservation and comparing backbones.

Run:  python notebooks/04_detail_preservation.py [OUT_DIR] [WEIGHTS_DIR]

The score of a transfer is the SSIM between input and output luma: 1 means
every structure survived. Published means for several methods travel with
each report for context. The ablation runs the same configuration through
densenet121 and vgg19.
"""

import sys
from pathlib import Path

from sentiment_transfer import TransferConfig
from sentiment_transfer.backbone import init_random_archive, load_backbone
from sentiment_transfer.desk import desk_pairs
from sentiment_transfer.evaluation import PUBLISHED_BASELINES, run_backbone_ablation

out = Path(sys.argv[1] if len(sys.argv) > 1 else "notebook-out/04")
out.mkdir(parents=True, exist_ok=True)
weights_dir = Path(sys.argv[2]) if len(sys.argv) > 2 else None

# %% Three small pairs keep this quick; tooling/run_desk_eval.py does the full set
triples = list(desk_pairs(96))[:3]
backbones = {}
for bid in ("densenet121", "vgg19"):
    path = weights_dir / f"{bid}.npz" if weights_dir else \
        init_random_archive(bid, out / f"random-{bid}.npz", calibration=[t[1] for t in triples])
    backbones[bid] = load_backbone(bid, path)

# %% Same config for both backbones
reports = run_backbone_ablation(triples, TransferConfig(iterations=30, working_long_side=96), backbones)
for bid, report in reports.items():
    print(bid, "mean ssim", round(report.mean_ssim, 4), [(p, round(s, 3)) for p, s in report.per_pair])
    report.write(out / f"report-{bid}.json")

print("published means for reference:", PUBLISHED_BASELINES)
