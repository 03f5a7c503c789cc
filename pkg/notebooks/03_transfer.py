"""Transferring a reference's global mood onto an input.

Run:  python notebooks/03_transfer.py [OUT_DIR] [WEIGHTS.npz]

The optimizer starts from the input and moves its pixels so that deep
features stay close to the input's (content) while feature correlations
(Gram matrices) approach the reference's (sentiment). Meaningful results
need ImageNet weights converted with tooling/convert_torchvision_weights.py;
without them a seeded random network is used and the output is only a
demonstration of the mechanics.
"""

import sys
from pathlib import Path

from sentiment_transfer import TransferConfig, run_transfer
from sentiment_transfer.backbone import init_random_archive, load_backbone
from sentiment_transfer.desk import desk_pairs
from sentiment_transfer.edges import ssim
from sentiment_transfer.imaging import rgb_to_luma, save_image

out = Path(sys.argv[1] if len(sys.argv) > 1 else "notebook-out/03")
out.mkdir(parents=True, exist_ok=True)

# %% One pair from the bundled desk set: a photo and a graded, mirrored crop
pair_id, inp, ref = next(desk_pairs(128))
save_image(inp, out / "input.png")
save_image(ref, out / "reference.png")

# %% Backbone
if len(sys.argv) > 2:
    weights = Path(sys.argv[2])
else:
    weights = init_random_archive("densenet121", out / "random-densenet121.npz", calibration=[inp])
backbone = load_backbone("densenet121", weights)

# %% Run a short optimization; the defaults are 500 iterations at 512px
cfg = TransferConfig(iterations=60, working_long_side=128, trace_every=20)
result = run_transfer(inp, ref, cfg, backbone)
for row in result.trace:
    print(f"iter {row.iteration:4d}  L={row.loss:.4g}  content={row.content:.4g}  sentiment={row.sentiment:.3g}")

save_image(result.output, out / "output.png")
result.write_trace(out / "trace.csv")
print("detail preservation ssim:", round(ssim(rgb_to_luma(inp), rgb_to_luma(result.output)), 4))
