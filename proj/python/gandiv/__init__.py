"""GAN diversity toolkit: adaptive input normalization, MS-SSIM and FID
diversity scoring, and a desk-scale adversarial training loop."""

from ._core import (
    Generator,
    aiin_normalize,
    clip_and_redistribute,
    collapse_delta,
    confusion_metrics,
    extract_patchstats,
    features,
    fid,
    gaussian_filter,
    geometric_augment,
    load_generator,
    make_toy_dataset,
    median_filter,
    msssim,
    train_gan,
)

__version__ = "0.1.0"

__all__ = [
    "Generator",
    "aiin_normalize",
    "clip_and_redistribute",
    "collapse_delta",
    "confusion_metrics",
    "extract_patchstats",
    "features",
    "fid",
    "gaussian_filter",
    "geometric_augment",
    "load_generator",
    "make_toy_dataset",
    "median_filter",
    "msssim",
    "train_gan",
]
