"""Smart-camera parking pipeline bindings.

The heavy lifting lives in the `_ocpsps` extension module; this package
re-exports its public surface.
"""

from ocpsps._ocpsps import (  # noqa: F401
    BBox,
    Detection,
    FilterConfig,
    FrameError,
    FrameInference,
    GridMap,
    OcpspsError,
    Point,
    Quad,
    SlotClass,
    best_corner_matching,
    box_mask_overlap,
    epsilon_diff,
    err_assign,
    err_cost,
    evaluate_detections,
    filter_batch,
    fuse_levels,
    iou,
    make_synthetic_dataset,
    mask_target,
    normalize_training_error,
    run_simulation,
    size_loss,
    solve_assignment,
    spatial_error,
    total_error,
    validate_dataset,
    __version__,
)

__all__ = [
    "BBox",
    "Detection",
    "FilterConfig",
    "FrameError",
    "FrameInference",
    "GridMap",
    "OcpspsError",
    "Point",
    "Quad",
    "SlotClass",
    "best_corner_matching",
    "box_mask_overlap",
    "epsilon_diff",
    "err_assign",
    "err_cost",
    "evaluate_detections",
    "filter_batch",
    "fuse_levels",
    "iou",
    "make_synthetic_dataset",
    "mask_target",
    "normalize_training_error",
    "run_simulation",
    "size_loss",
    "solve_assignment",
    "spatial_error",
    "total_error",
    "validate_dataset",
    "__version__",
]
