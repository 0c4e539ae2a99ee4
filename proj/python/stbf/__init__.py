"""STTC-OFDM uplink simulator with adaptive beamforming and null deepening."""

from ._core import (
    ConfigError,
    DivergenceError,
    Error,
    FerPoint,
    InvalidDimension,
    SingularMatrix,
    beam_response,
    clopper_pearson,
    config_keys,
    deepen_nulls,
    inspect_trial,
    jakes_process,
    null_steering_weights,
    ofdm_demodulate,
    ofdm_modulate,
    preset_curves,
    presets,
    run_curve,
    run_trial,
    steering_vector,
    sttc_encode,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "Error",
    "FerPoint",
    "InvalidDimension",
    "SingularMatrix",
    "beam_response",
    "clopper_pearson",
    "config_keys",
    "deepen_nulls",
    "inspect_trial",
    "jakes_process",
    "null_steering_weights",
    "ofdm_demodulate",
    "ofdm_modulate",
    "preset_curves",
    "presets",
    "run_curve",
    "run_trial",
    "steering_vector",
    "sttc_encode",
]
