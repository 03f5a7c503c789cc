#!/usr/bin/env python3
"""Convert a torchvision ImageNet checkpoint into a sentiment_transfer archive.

    python tooling/convert_torchvision_weights.py densenet121 densenet121-a639ec97.pth weights/densenet121.npz
    python tooling/convert_torchvision_weights.py vgg19 --download weights/vgg19.npz

Only the tensors listed in docs/weights-manifest-<backbone>.txt are kept.
``--download`` fetches the checkpoint through torchvision's own cache and
needs network access to download.pytorch.org.
"""

import argparse
import re
import sys

import torch

from sentiment_transfer.backbone import get_spec, required_tensors, save_weight_archive

# old densenet checkpoints spell "norm.1" where the module tree has "norm1"
_DENSENET_KEY = re.compile(r"^(.*denselayer\d+\.(?:norm|relu|conv))\.((?:[12])\.(?:weight|bias|running_mean|running_var))$")


def _fix_densenet_keys(state):
    fixed = {}
    for key, value in state.items():
        m = _DENSENET_KEY.match(key)
        fixed[m.group(1) + m.group(2) if m else key] = value
    return fixed


def _download(backbone_id):
    from torchvision import models

    ctor = {"densenet121": models.densenet121, "vgg19": models.vgg19}[backbone_id]
    return ctor(weights="IMAGENET1K_V1").state_dict()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("backbone", choices=["densenet121", "vgg19"])
    ap.add_argument("checkpoint", nargs="?", help="torchvision .pth state dict")
    ap.add_argument("out", help="destination .npz")
    ap.add_argument("--download", action="store_true", help="fetch the checkpoint via torchvision")
    args = ap.parse_args(argv)

    if args.download == bool(args.checkpoint):
        ap.error("give exactly one of CHECKPOINT or --download")
    if args.download:
        state = _download(args.backbone)
    else:
        state = torch.load(args.checkpoint, map_location="cpu", weights_only=True)
        state = state.get("state_dict", state)
    if args.backbone == "densenet121":
        state = _fix_densenet_keys(state)

    spec = get_spec(args.backbone)
    wanted = required_tensors(spec)
    missing = [k for k in wanted if k not in state]
    if missing:
        print(f"checkpoint lacks {len(missing)} required tensors, first: {missing[0]}", file=sys.stderr)
        return 2
    for key, shape in wanted.items():
        if tuple(state[key].shape) != shape:
            print(f"{key}: expected {shape}, found {tuple(state[key].shape)}", file=sys.stderr)
            return 2
    save_weight_archive({k: state[k] for k in wanted}, args.out)
    print(f"wrote {len(wanted)} tensors to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
