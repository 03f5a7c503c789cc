"""Frozen ImageNet backbones exposing five feature taps.

Tap rule: the first ReLU of the network, then the first ReLU following each
of the four pooling operators. For DenseNet121 that is ``relu0`` plus the
``relu1`` of the first layer of every dense block; for VGG19 it is
``relu1_1 .. relu5_1``. Networks are truncated right after the deepest tap.

Weights come from a flat ``.npz`` archive of named float32 tensors whose keys
follow torchvision's ``state_dict`` naming (see ``docs/weights-manifest-*``).
A ``<archive>.sha256`` sidecar, when present, is verified on load.
"""

import hashlib
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
import zipfile

import numpy as np
import torch
from torch import nn
import torchvision

from .errors import FormatError, InputTooSmall, MissingTensor, ShapeMismatch

FORMAT_VERSION = 1
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
MIN_INPUT_SIDE = 32


@dataclass(frozen=True)
class BackboneSpec:
    id: str
    tap_names: tuple
    content_tap: int = 4
    mean: tuple = IMAGENET_MEAN
    std: tuple = IMAGENET_STD

    def __post_init__(self):
        if len(self.tap_names) != 5:
            raise ValueError("a backbone exposes exactly 5 taps")
        if not 1 <= self.content_tap <= 5:
            raise ValueError("content_tap must be in 1..5")


DENSENET121 = BackboneSpec(
    "densenet121",
    (
        "features.relu0",
        "features.denseblock1.denselayer1.relu1",
        "features.denseblock2.denselayer1.relu1",
        "features.denseblock3.denselayer1.relu1",
        "features.denseblock4.denselayer1.relu1",
    ),
)
VGG19 = BackboneSpec(
    "vgg19",
    ("features.1", "features.6", "features.11", "features.20", "features.29"),
)
SPECS = {s.id: s for s in (DENSENET121, VGG19)}


def get_spec(backbone_id):
    try:
        return SPECS[backbone_id]
    except KeyError:
        raise ValueError(f"unknown backbone {backbone_id!r}; choose from {sorted(SPECS)}") from None


class _DenseNetTaps(nn.Module):
    def __init__(self):
        super().__init__()
        full = torchvision.models.densenet121(weights=None).features
        keep = OrderedDict((name, getattr(full, name)) for name in (
            "conv0", "norm0", "relu0", "pool0",
            "denseblock1", "transition1",
            "denseblock2", "transition2",
            "denseblock3", "transition3",
        ))
        # only the entry BN+ReLU of the fourth block is needed for f5
        first = full.denseblock4.denselayer1
        layer = nn.Module()
        layer.norm1, layer.relu1 = first.norm1, first.relu1
        block = nn.Module()
        block.denselayer1 = layer
        keep["denseblock4"] = block
        self.features = nn.Sequential(keep)

    def forward(self, x):
        f = self.features
        x = f.relu0(f.norm0(f.conv0(x)))
        taps = [x]
        x = f.pool0(x)
        for block, trans in ((f.denseblock1, f.transition1),
                             (f.denseblock2, f.transition2),
                             (f.denseblock3, f.transition3)):
            entry = block.denselayer1
            taps.append(entry.relu1(entry.norm1(x)))
            x = trans(block(x))
        entry = f.denseblock4.denselayer1
        taps.append(entry.relu1(entry.norm1(x)))
        return taps


class _VGGTaps(nn.Module):
    TAP_INDICES = (1, 6, 11, 20, 29)

    def __init__(self):
        super().__init__()
        self.features = torchvision.models.vgg19(weights=None).features[:30]

    def forward(self, x):
        taps = []
        for i, layer in enumerate(self.features):
            x = layer(x)
            if i in self.TAP_INDICES:
                taps.append(x)
        return taps


_BUILDERS = {"densenet121": _DenseNetTaps, "vgg19": _VGGTaps}


def _build(spec):
    net = _BUILDERS[spec.id]()
    # in-place ReLUs would overwrite tapped tensors reused by autograd
    for m in net.modules():
        if isinstance(m, nn.ReLU):
            m.inplace = False
    return net


def required_tensors(spec):
    """Mapping of archive key -> shape needed to run ``spec``'s truncated net."""
    net = _build(spec)
    return OrderedDict(
        (k, tuple(v.shape)) for k, v in net.state_dict().items()
        if not k.endswith("num_batches_tracked")
    )


def write_manifest(spec, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {spec.id} weight archive keys (format_version {FORMAT_VERSION})\n")
        for key, shape in required_tensors(spec).items():
            fh.write(f"{key}\t{'x'.join(map(str, shape)) or 'scalar'}\n")


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def save_weight_archive(tensors, path):
    """Write named tensors as a float32 ``.npz`` archive plus its hash sidecar."""
    path = Path(path)
    arrays = {k: np.asarray(v.detach().cpu() if torch.is_tensor(v) else v, dtype=np.float32)
              for k, v in tensors.items() if not k.endswith("num_batches_tracked")}
    arrays["__format_version__"] = np.array(FORMAT_VERSION, dtype=np.int64)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    Path(str(path) + ".sha256").write_text(file_sha256(path) + "\n")
    return path


class Backbone:
    """A frozen, evaluation-mode feature extractor.

    Call :meth:`pyramid` with a ``(1, 3, H, W)`` pixel tensor in [0, 1] to get
    the five taps; gradients flow back to the pixels when they require grad.
    """

    def __init__(self, spec, net):
        self.spec = spec
        self.net = net.eval()
        for p in self.net.parameters():
            p.requires_grad_(False)

    @property
    def id(self):
        return self.spec.id

    @property
    def dtype(self):
        return next(self.net.parameters()).dtype

    def to(self, dtype):
        self.net.to(dtype)
        return self

    def normalize(self, pixels):
        mean = torch.tensor(self.spec.mean, dtype=pixels.dtype).view(1, 3, 1, 1)
        std = torch.tensor(self.spec.std, dtype=pixels.dtype).view(1, 3, 1, 1)
        return (pixels - mean) / std

    def pyramid(self, pixels):
        if pixels.ndim == 3:
            pixels = pixels.unsqueeze(0)
        if min(pixels.shape[-2:]) < MIN_INPUT_SIDE:
            raise InputTooSmall(
                f"backbone input must be at least {MIN_INPUT_SIDE}px per side, got {tuple(pixels.shape[-2:])}")
        taps = self.net(self.normalize(pixels.to(self.dtype)))
        return FeaturePyramid(tuple(t[0] for t in taps), self.spec.id)


@dataclass(frozen=True)
class FeaturePyramid:
    levels: tuple
    backbone_id: str = ""

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    @property
    def shapes(self):
        return [tuple(t.shape) for t in self.levels]


def load_backbone(spec, weights):
    """Build ``spec``'s truncated network and fill it from a weight archive."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    weights = Path(weights)
    if not weights.is_file():
        raise FormatError(f"weight archive {weights} not found")
    sidecar = Path(str(weights) + ".sha256")
    if sidecar.is_file():
        expected = sidecar.read_text().split()[0] if sidecar.read_text().strip() else ""
        if expected and expected != file_sha256(weights):
            raise FormatError(f"{weights}: content hash does not match {sidecar.name}")
    try:
        archive = np.load(weights, allow_pickle=False)
    except (ValueError, OSError, zipfile.BadZipFile) as exc:
        raise FormatError(f"{weights}: not a named-tensor archive ({exc})") from exc
    if not isinstance(archive, np.lib.npyio.NpzFile):
        raise FormatError(f"{weights}: not a named-tensor archive")

    with archive:
        if "__format_version__" in archive.files and int(archive["__format_version__"]) != FORMAT_VERSION:
            raise FormatError(f"{weights}: unsupported format_version {int(archive['__format_version__'])}")
        net = _build(spec)
        state = net.state_dict()
        for key, shape in required_tensors(spec).items():
            if key not in archive.files:
                raise MissingTensor(f"{key} missing from {weights.name}")
            value = archive[key]
            if tuple(value.shape) != shape:
                raise ShapeMismatch(f"{key}: expected {shape}, found {tuple(value.shape)}")
            state[key] = torch.from_numpy(np.array(value, dtype=np.float32))
    net.load_state_dict(state)
    return Backbone(spec, net)


def init_random_archive(spec, path, seed=0, calibration=None):
    """Write a seeded, randomly initialized archive for ``spec``.

    Stands in for pretrained weights where none are available. When
    ``calibration`` images are given, batch-norm running statistics are
    estimated from them so activations stay well scaled.
    """
    if isinstance(spec, str):
        spec = get_spec(spec)
    torch.manual_seed(seed)
    net = _build(spec)
    if calibration is not None:
        bns = [m for m in net.modules() if isinstance(m, nn.BatchNorm2d)]
        if bns:
            for m in bns:
                m.reset_running_stats()
                m.momentum = None
            net.train()
            tmp = Backbone.__new__(Backbone)
            tmp.spec, tmp.net = spec, net
            with torch.no_grad():
                for img in calibration:
                    net(tmp.normalize(to_pixels(img)))
            net.eval()
    return save_weight_archive(net.state_dict(), path)


def preprocess(img, spec=DENSENET121):
    """ImageNet normalization, channel-first: ``(H, W, 3) -> (3, H, W)``."""
    img = np.asarray(img, dtype=np.float64)
    mean = np.asarray(spec.mean)
    std = np.asarray(spec.std)
    return ((img - mean) / std).transpose(2, 0, 1)


def deprocess(arr, spec=DENSENET121):
    arr = np.asarray(arr, dtype=np.float64).transpose(1, 2, 0)
    return arr * np.asarray(spec.std) + np.asarray(spec.mean)


def to_pixels(img, dtype=torch.float32):
    """``(H, W, 3)`` numpy image -> ``(1, 3, H, W)`` tensor."""
    return torch.from_numpy(np.ascontiguousarray(np.asarray(img).transpose(2, 0, 1))).to(dtype).unsqueeze(0)


def from_pixels(pixels):
    return pixels.detach().squeeze(0).permute(1, 2, 0).cpu().double().numpy()


def extract_features(backbone, img):
    """Feature pyramid of an ``(H, W, 3)`` image, or of a pixel tensor."""
    pixels = img if torch.is_tensor(img) else to_pixels(img, backbone.dtype)
    return backbone.pyramid(pixels)
