"""Lazy construction of the real Segment Anything automatic mask generator.

Imported only when actually exporting with a model, so the package (and its
tests, which inject a stub generator) work without torch installed.
"""

from __future__ import annotations

from .export import ExporterConfig

__all__ = ["BackendUnavailableError", "build_sam_generator"]


class BackendUnavailableError(RuntimeError):
    """torch / segment_anything are not installed or the model failed to load."""


def build_sam_generator(cfg: ExporterConfig, checkpoint: str):
    """Load a SAM checkpoint and wrap it in the automatic mask generator.

    Generator hyperparameters other than the prompt grid and crop layers are
    left at the library defaults; the export manifest records the settings so
    runs can be reproduced.
    """
    try:
        from segment_anything import SamAutomaticMaskGenerator, sam_model_registry
    except ImportError as exc:
        raise BackendUnavailableError(
            "segment-anything (and torch) must be installed to run the real "
            "model; pip install 'leafsieve-sam-exporter[sam]'"
        ) from exc
    try:
        model = sam_model_registry[cfg.model_variant](checkpoint=checkpoint)
    except KeyError as exc:
        raise BackendUnavailableError(
            f"unknown model variant {cfg.model_variant!r}"
        ) from exc
    except Exception as exc:  # checkpoint missing/corrupt
        raise BackendUnavailableError(f"failed to load checkpoint: {exc}") from exc
    model.to(cfg.device)
    return SamAutomaticMaskGenerator(
        model,
        points_per_side=cfg.points_per_side,
        crop_n_layers=cfg.crop_n_layers,
        output_mode="binary_mask",
    )
