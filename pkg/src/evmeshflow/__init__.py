"""Synthetic event-camera data generation and meshflow estimation toolkit.

The package covers the full desk-scale pipeline: analytic scenes with exact
ground-truth flow, adaptive frame sampling, an ideal threshold-crossing
event simulator, voxel/density representations, contrast-maximization
stream selection, mesh-vertex flow extraction with median filtering,
dilated cost-volume correlation, detail-completion and density fusion
operators, evaluation metrics, and binary artifact formats behind a CLI.
"""

from .cmax import (
    WarpedEvents,
    accumulate_iwe,
    contrast,
    select_best,
    two_sided_components,
    two_sided_score,
    warp_events,
)
from .correlation import (
    CostVolume,
    SearchGrid,
    average_pool,
    correlate,
    dilated_mask,
    residual_update,
    warp_features,
)
from .errors import (
    DataError,
    FormatError,
    ParameterError,
    RangeError,
    ShapeError,
    StepLimitError,
)
from .events import (
    Event,
    EventStream,
    FrameSequence,
    multi_density_sweep,
    render_sequence,
    shuffle_timestamps,
    simulate,
    spatial_guided_subsample,
    temporal_guided_subsample,
)
from .io import (
    flow_to_color,
    read_evt1,
    read_flo1,
    read_msh1,
    read_pgm,
    read_vox1,
    write_csv_rows,
    write_events_csv,
    write_evt1,
    write_flo1,
    write_msh1,
    write_pgm,
    write_ppm,
    write_vox1,
)
from .fusion import (
    DEFAULT_ALPHA,
    DEFAULT_LAMBDA_MDC,
    DEFAULT_LAMBDA_MDS,
    DEFAULT_XI,
    AttentionOperator,
    LossWeights,
    cdc_fuse,
    confidence_fuse,
    mdc_loss,
    mds_fuse,
    mds_loss,
    total_loss,
    upsample_flow_bilinear,
)
from .mesh import (
    MeshGridSpec,
    VertexCandidates,
    alignment_error,
    backward_warp,
    cell_center_pixels,
    downsample_to_mesh,
    extract_meshflow,
    f1_median,
    f2_smooth,
    propagate,
    upsample_bilinear,
)
from .metrics import angular_error, epe, npe, outlier_pct
from .scene import (
    MotionSpec,
    Scene,
    adaptive_timestamps,
    flow_at_points,
    flow_between,
    render_frame,
    scene_texture,
    seeded_rng,
    velocity_field,
)
from .voxel import density, incident_density, voxelize

__version__ = "0.1.0"

__all__ = [
    "AttentionOperator",
    "CostVolume",
    "DataError",
    "DEFAULT_ALPHA",
    "DEFAULT_LAMBDA_MDC",
    "DEFAULT_LAMBDA_MDS",
    "DEFAULT_XI",
    "Event",
    "EventStream",
    "FormatError",
    "FrameSequence",
    "LossWeights",
    "MeshGridSpec",
    "MotionSpec",
    "ParameterError",
    "RangeError",
    "Scene",
    "SearchGrid",
    "ShapeError",
    "StepLimitError",
    "VertexCandidates",
    "WarpedEvents",
    "accumulate_iwe",
    "adaptive_timestamps",
    "alignment_error",
    "angular_error",
    "average_pool",
    "backward_warp",
    "cdc_fuse",
    "cell_center_pixels",
    "confidence_fuse",
    "contrast",
    "correlate",
    "density",
    "dilated_mask",
    "downsample_to_mesh",
    "epe",
    "extract_meshflow",
    "f1_median",
    "f2_smooth",
    "flow_at_points",
    "flow_between",
    "flow_to_color",
    "incident_density",
    "mdc_loss",
    "mds_fuse",
    "mds_loss",
    "multi_density_sweep",
    "npe",
    "outlier_pct",
    "propagate",
    "read_evt1",
    "read_flo1",
    "read_msh1",
    "read_pgm",
    "read_vox1",
    "render_frame",
    "render_sequence",
    "residual_update",
    "scene_texture",
    "seeded_rng",
    "select_best",
    "shuffle_timestamps",
    "simulate",
    "spatial_guided_subsample",
    "temporal_guided_subsample",
    "total_loss",
    "two_sided_components",
    "two_sided_score",
    "upsample_bilinear",
    "upsample_flow_bilinear",
    "velocity_field",
    "voxelize",
    "warp_events",
    "warp_features",
    "write_csv_rows",
    "write_events_csv",
    "write_evt1",
    "write_flo1",
    "write_msh1",
    "write_pgm",
    "write_ppm",
    "write_vox1",
]
