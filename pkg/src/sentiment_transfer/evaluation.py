"""Detail-preservation evaluation and the backbone ablation.

The score of a pair is the SSIM between the luma of the input and of the
transferred output at native resolution. Published reference numbers for
competing methods are carried along as metadata only.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .edges import SsimParams, ssim
from .errors import PairShapeMismatch, ParseError, MissingField
from .imaging import load_image, rgb_to_luma

# mean SSIM between input and output reported for each method on a
# 46-pair validation set; higher is better
PUBLISHED_BASELINES = {
    "gatys": 0.7019,
    "wct": 0.2443,
    "adain": 0.5301,
    "stylenas": 0.6653,
    "ours": 0.8719,
}


@dataclass
class EvaluationReport:
    per_pair: list
    config: dict = field(default_factory=dict)
    reference_baselines: dict = field(default_factory=lambda: dict(PUBLISHED_BASELINES))

    @property
    def mean_ssim(self):
        scores = [s for _, s in self.per_pair]
        return sum(scores) / len(scores)

    def to_json(self):
        return {
            "mean_ssim": self.mean_ssim,
            "per_pair": [{"pair_id": p, "ssim": s} for p, s in self.per_pair],
            "config": self.config,
            "reference_baselines": self.reference_baselines,
        }

    def write(self, path):
        path = Path(path)
        if path.suffix == ".csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["pair_id", "ssim"])
                for pair_id, score in self.per_pair:
                    writer.writerow([pair_id, repr(score)])
        else:
            path.write_text(json.dumps(self.to_json(), indent=2) + "\n")


def detail_preservation(input_img, output_img, params=None):
    if input_img.shape != output_img.shape:
        raise PairShapeMismatch(f"input {input_img.shape} vs output {output_img.shape}")
    return ssim(rgb_to_luma(input_img), rgb_to_luma(output_img), params)


def load_pairs_manifest(path):
    """Read ``{"pair_id", "input", "output"}`` JSON lines; paths resolve
    relative to the manifest."""
    path = Path(path)
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from exc
            for key in ("pair_id", "input", "output"):
                if key not in rec:
                    raise MissingField(f"missing field {key!r}", line=lineno)
            pairs.append((str(rec["pair_id"]), path.parent / rec["input"], path.parent / rec["output"]))
    return pairs


def evaluate_detail_preservation(pairs, params=None):
    """Score ``(pair_id, input_path, output_path)`` triples.

    Bare ``(input_path, output_path)`` tuples are accepted and numbered.
    """
    params = params or SsimParams()
    per_pair = []
    for n, pair in enumerate(pairs):
        if len(pair) == 2:
            pair = (f"pair-{n:03d}", *pair)
        pair_id, inp, out = pair
        a, b = load_image(inp), load_image(out)
        if a.shape != b.shape:
            raise PairShapeMismatch(f"{pair_id}: input {a.shape[:2]} vs output {b.shape[:2]}")
        per_pair.append((pair_id, detail_preservation(a, b, params)))
    if not per_pair:
        raise ValueError("no pairs to evaluate")
    config = {"ssim": vars(params), "color": "rec709-luma", "resolution": "native"}
    return EvaluationReport(per_pair, config)


def run_backbone_ablation(triples, config, backbones, params=None):
    """Transfer every ``(pair_id, input, reference)`` with each backbone.

    ``backbones`` maps backbone id to a loaded backbone; all runs share
    ``config`` apart from the backbone id. Returns ``{backbone_id: report}``.
    """
    from dataclasses import replace

    from .transfer import run_transfer

    triples = list(triples)
    reports = {}
    for bid, backbone in backbones.items():
        cfg = replace(config, backbone=bid)
        per_pair = []
        for pair_id, inp, ref in triples:
            result = run_transfer(inp, ref, cfg, backbone)
            per_pair.append((pair_id, detail_preservation(inp, result.output, params)))
        reports[bid] = EvaluationReport(per_pair, {"transfer": cfg.to_dict()})
    return reports
