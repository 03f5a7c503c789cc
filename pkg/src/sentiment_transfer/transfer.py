"""Iterative sentiment transfer by pixel optimization.

The output image is optimized with Adam to keep the input's features at the
content tap while matching the reference's Gram statistics at all five taps::

    L = alpha * L_content + beta * L_sentiment
    L_content   = mse(f[content_tap], f_s[content_tap])
    L_sentiment = mean_i mse(gram(f[i]), gram(f_t[i]))

``gram`` is the channel-by-channel product of the flattened features,
divided by ``C * H * W``.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
import torch

from .backbone import from_pixels, get_spec, to_pixels
from .errors import NonFiniteLoss, ShapeMismatch
from .imaging import check_image, resize, resize_long_side


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 1e6

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("loss weights must be non-negative")
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("alpha and beta cannot both be zero")


@dataclass(frozen=True)
class TransferConfig:
    iterations: int = 500
    step_size: float = 1e-2
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8
    backbone: str = "densenet121"
    working_long_side: int = 512
    weights: LossWeights = field(default_factory=LossWeights)
    trace_every: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        get_spec(self.backbone)

    def to_dict(self):
        d = asdict(self)
        d["adam_betas"] = list(self.adam_betas)
        return d


class LossBreakdown(NamedTuple):
    total: torch.Tensor
    content: torch.Tensor
    sentiment: torch.Tensor


class TraceRow(NamedTuple):
    iteration: int
    loss: float
    content: float
    sentiment: float


@dataclass
class TransferResult:
    output: np.ndarray
    trace: list
    config: TransferConfig

    def trace_json(self):
        return {
            "config": self.config.to_dict(),
            "trace": [row._asdict() for row in self.trace],
        }

    def write_trace(self, path):
        """Write the loss trace as CSV or JSON depending on the file suffix."""
        path = str(path)
        if path.endswith(".json"):
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.trace_json(), fh, indent=2)
            return
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "L", "L_content", "L_sentiment"])
            for row in self.trace:
                writer.writerow([row.iteration, repr(row.loss), repr(row.content), repr(row.sentiment)])


def gram(f):
    """Normalized ``C x C`` Gram matrix of a ``(C, H, W)`` feature tensor."""
    c, h, w = f.shape
    flat = f.reshape(c, h * w)
    return flat @ flat.T / (c * h * w)


def _check_same(a, b, what):
    if a.shape != b.shape:
        raise ShapeMismatch(f"{what}: {tuple(a.shape)} vs {tuple(b.shape)}")


def content_loss(f, f_s, content_tap=4):
    a, b = f[content_tap - 1], f_s[content_tap - 1]
    _check_same(a, b, f"content tap f{content_tap}")
    return torch.mean((a - b) ** 2)


def sentiment_loss(f, f_t):
    if len(f) != len(f_t):
        raise ShapeMismatch(f"pyramid depth {len(f)} vs {len(f_t)}")
    terms = []
    for i, (a, b) in enumerate(zip(f, f_t), start=1):
        _check_same(a, b, f"sentiment tap f{i}")
        terms.append(torch.mean((gram(a) - gram(b)) ** 2))
    return sum(terms) / len(terms)


def total_loss(f, f_s, f_t, weights=None, content_tap=4):
    weights = weights or LossWeights()
    lc = content_loss(f, f_s, content_tap)
    ls = sentiment_loss(f, f_t)
    return LossBreakdown(weights.alpha * lc + weights.beta * ls, lc, ls)


def _frozen(pyramid):
    return type(pyramid)(tuple(t.detach() for t in pyramid.levels), pyramid.backbone_id)


def run_transfer(input_img, reference_img, config, backbone):
    """Optimize a copy of ``input_img`` toward ``reference_img``'s Gram statistics.

    Returns the result at the input's original resolution along with a loss
    trace sampled every ``trace_every`` iterations plus the first and last.
    """
    input_img = check_image(input_img, "input")
    reference_img = check_image(reference_img, "reference")
    if backbone.id != config.backbone:
        raise ValueError(f"config asks for {config.backbone!r} but backbone is {backbone.id!r}")
    torch.manual_seed(config.seed)

    orig_h, orig_w = input_img.shape[:2]
    work_in = resize_long_side(input_img, config.working_long_side)
    work_h, work_w = work_in.shape[:2]
    work_ref = resize(reference_img, work_h, work_w)

    dtype = backbone.dtype
    with torch.no_grad():
        f_s = _frozen(backbone.pyramid(to_pixels(work_in, dtype)))
        f_t = _frozen(backbone.pyramid(to_pixels(work_ref, dtype)))

    pixels = to_pixels(work_in, dtype).requires_grad_(True)
    optimizer = torch.optim.Adam(
        [pixels], lr=config.step_size, betas=tuple(config.adam_betas), eps=config.adam_eps)
    content_tap = get_spec(config.backbone).content_tap

    trace = []
    for it in range(1, config.iterations + 1):
        optimizer.zero_grad(set_to_none=True)
        f = backbone.pyramid(pixels)
        losses = total_loss(f, f_s, f_t, config.weights, content_tap)
        value = losses.total.item()
        if not math.isfinite(value):
            raise NonFiniteLoss(it)
        if it == 1 or it == config.iterations or it % config.trace_every == 0:
            trace.append(TraceRow(it, value, losses.content.item(), losses.sentiment.item()))
        losses.total.backward()
        optimizer.step()

    out = np.clip(from_pixels(pixels), 0.0, 1.0)
    if (work_h, work_w) != (orig_h, orig_w):
        out = resize(out, orig_h, orig_w)
    return TransferResult(out, trace, config)
