"""Thin adapter exporting Segment Anything automatic masks as leafsieve
scene documents (the "leafsieve/1" wire format)."""

from .export import (
    ExporterConfig,
    GeneratorSettingsError,
    check_generator_settings,
    export_directory,
    export_scene,
)
from .rle import encode_row_major
from .scene import SCENE_FORMAT_VERSION, scene_json, write_scene

__version__ = "0.1.0"
