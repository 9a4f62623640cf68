"""uniflow: a deterministic motion-control engine.

Heterogeneous control signals (camera trajectories, drag annotations,
reference flows) are rendered into one dense, frame-0-anchored optical
flow sequence; supporting machinery covers per-pixel ray embeddings,
temporal spectral stabilization, a 4x/8x8 flow codec, and a toy diffusion
sandbox over flow latents.
"""

from .cameras import (
    CameraFrame,
    CameraIntrinsics,
    CameraTrajectory,
    camera_flow,
    depth_proxy,
    load_trajectory,
    plucker_embed,
    save_trajectory,
)
from .codec import LatentGrid, decode, encode, load_latent, save_latent
from .diffusion import (
    REFERENCE_TWO_MODE,
    NoiseSchedule,
    OptimalTwoModeDenoiser,
    forward_diffuse,
    mode_purity,
    run_two_mode_reference,
    sample,
    train,
    training_loss,
    two_mode_flow_latents,
)
from .drags import (
    AnnotationSet,
    DragTrajectory,
    SparseFlowSequence,
    densify,
    drag_flow,
    load_annotation,
    resample_trajectory,
    save_annotation,
    sparse_flow,
)
from .errors import (
    ConfigError,
    DataError,
    DimensionMismatch,
    FormatError,
    SingularityError,
    UniflowError,
)
from .fields import (
    FlowField,
    FlowSequence,
    add_flow_noise,
    compose_add,
    compose_chain,
    flow_to_color,
    read_flo,
    read_flow_sequence,
    warp_backward,
    write_flo,
    write_flow_sequence,
)
from .metrics import (
    PoseTrajectory,
    endpoint_error,
    rotation_error,
    sample_trajectory,
    static_camera_score,
    translation_error,
)
from .nets import ToyDenoiser, attention, attention_backward, load_checkpoint, save_checkpoint
from .spectral import (
    flicker_metric,
    make_weights,
    reweight_flow_sequence,
    spectral_reweight,
    spectral_reweight_backward,
    stabilized_attention,
    temporal_fft,
)
from .unify import ControlBundle, conflict_report, unify

__version__ = "0.1.0"
