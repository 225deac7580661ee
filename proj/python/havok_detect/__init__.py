"""Unsupervised event detection on noisy time series (native core in _havok)."""

import json

from ._havok import (
    NumericalError,
    ValidationError,
    bit_error_rate,
    build_hankel,
    calibrate_threshold,
    decompose,
    error_ratio,
    extract_events,
    features,
    fit_linear_model,
    gen_calcium,
    gen_periodic_anomaly,
    gen_pulse_train,
    hann_pulse,
    hilbert_envelope,
    matched_filter,
    select_sector_halfwidth,
)
from ._havok import detect_json

__all__ = [
    "NumericalError",
    "ValidationError",
    "bit_error_rate",
    "build_hankel",
    "calibrate_threshold",
    "decompose",
    "detect",
    "detect_json",
    "error_ratio",
    "extract_events",
    "features",
    "fit_linear_model",
    "gen_calcium",
    "gen_periodic_anomaly",
    "gen_pulse_train",
    "hann_pulse",
    "hilbert_envelope",
    "matched_filter",
    "select_sector_halfwidth",
]


def detect(y, sample_period=1.0, **config):
    """Run the full pipeline and return the report as a dict."""
    return json.loads(detect_json(list(map(float, y)), sample_period, **config))
