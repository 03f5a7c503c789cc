"""Global image sentiment transfer: SSIM-on-edges reference retrieval and
Gram-statistics pixel optimization over frozen CNN features."""

__version__ = "0.1.0"

from .backbone import (
    DENSENET121,
    VGG19,
    Backbone,
    BackboneSpec,
    FeaturePyramid,
    extract_features,
    init_random_archive,
    load_backbone,
    preprocess,
)
from .corpus import CorpusEntry, CorpusIndex, build_index, ingest_manifest, load_index
from .edges import SsimParams, edge_response, ssim
from .evaluation import EvaluationReport, evaluate_detail_preservation, run_backbone_ablation
from .imaging import load_image, resize_long_side, rgb_to_luma, save_image
from .retrieval import RetrievalResult, SentimentQuery, retrieve_reference, select_subset
from .transfer import (
    LossWeights,
    TransferConfig,
    TransferResult,
    content_loss,
    gram,
    run_transfer,
    sentiment_loss,
    total_loss,
)
