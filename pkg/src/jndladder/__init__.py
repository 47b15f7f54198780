"""Per-scene JND-aware bitrate ladder prediction for adaptive streaming.

Pipeline: decode raw video into scenes, extract DCT-energy complexity
features and pooled GLCM/bitstream JND features, train per-resolution
random forests (VMAF, CRF) and an SVR threshold model, predict a bitrate
ladder per scene, eliminate perceptually redundant representations, and
evaluate ladders with Bjøntegaard deltas and storage deltas.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .bjontegaard import RDCurve, RDPoint, bd_quality, bd_rate, storage_delta
from .complexity import (
    FramePlaneFeatures,
    SceneComplexity,
    block_texture_energy,
    dct2d,
    frame_features,
    scene_complexity,
    temporal_gradient,
)
from .config import PipelineConfig
from .forest import RandomForestModel, rf_predict, rf_train
from .glcm import GlcmFeatures, glcm, glcm_features
from .ingest import (
    PlanarFrame,
    SceneClip,
    crop_patches,
    parse_raw_yuv,
    parse_y4m,
    tile_blocks,
    write_raw_yuv,
    write_y4m,
)
from .jnd import (
    BitstreamSeries,
    JND_FEATURE_NAMES,
    JndFeatureVector,
    assemble_jnd_vector,
    ingest_bitstream_features,
    pooled_glcm,
)
from .ladder import (
    BitrateLadder,
    LadderConfig,
    LadderEntry,
    build_ladder,
    convex_hull_ladder,
    eliminate_representations,
    predict_crf,
    predict_jnd_threshold,
    predict_vmaf_grid,
    select_resolution,
)
from .modelio import load_model, save_model
from .pooling import pool
from .scores import mae, r2_score
from .selection import forward_sfs
from .svr import SvrModel, svr_predict, svr_train
