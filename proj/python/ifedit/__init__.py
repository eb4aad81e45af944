"""Image editing through an image-to-video denoising pipeline."""

from ._ifedit import (
    Codec,
    ConfigError,
    ContractError,
    IfeditError,
    IoError,
    ProtocolError,
    ShapeError,
    TransportError,
    decode_ifed,
    default_config,
    dropout_indices,
    edit,
    embed,
    encode_ifed,
    euler_step,
    expert_for,
    fallback_prompt,
    laplacian_score,
    make_schedule,
    posterior_mean,
    predicted_token_steps,
    select_sharpest,
    snr,
    synthetic_case,
    temporal_blend,
)

__version__ = "0.1.0"
