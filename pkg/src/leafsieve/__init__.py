"""leafsieve: filter candidate instance-segmentation masks down to leaf
objects and score segmentations against polygon ground truth.

The package is model-agnostic: any segmenter that can emit binary masks in
the scene interchange format can feed the pipeline.
"""

from .color import HsvStats, RgbImage, mask_hsv_stats, rgb_to_hsv
from .filters import (
    STAGE_GREEN,
    STAGE_MULTI_LEAF,
    STAGE_NOT_ALL,
    STAGE_ORDER,
    STAGE_SHAPE,
    CandidateMask,
    FilterConfig,
    FilterReport,
    Removal,
    filter_green,
    filter_multi_leaf,
    filter_shape,
    filter_whole_plant,
    run_pipeline,
)
from .geometry import Circle, boundary_points, min_enclosing_circle, shape_ratio
from .io import (
    SCENE_FORMAT_VERSION,
    DuplicateMaskIdError,
    RleValidationError,
    SceneDimensionError,
    SceneDocument,
    SceneFormatError,
    SceneImageRef,
    SceneMaskEntry,
    decode_scene_masks,
    load_image,
    load_labelme,
    load_measurements,
    load_scene,
    read_scene_document,
    scene_document_from_candidates,
    write_scene_document,
)
from .mask import (
    Bitmask,
    CoverageMap,
    Polygon,
    RleMask,
    area,
    containment_fraction,
    coverage_map,
    decode_rle,
    encode_rle,
    iou,
    mean_coverage,
    rasterize,
    union_all,
)
from .metrics import (
    DEFAULT_THRESHOLDS,
    CorrelationResult,
    EvalCounts,
    EvalResult,
    MaskSizeSummary,
    Match,
    MeasurementRecord,
    best_match_dsc,
    correlation_matrix,
    dsc,
    evaluate,
    mask_size_summary,
    match_instances,
    parse_threshold_grid,
    pearson,
)

__version__ = "0.1.0"
