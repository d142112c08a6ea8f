"""Observation to current injection, and output spikes to action."""

from __future__ import annotations

import numpy as np

from snnevo.errors import DimensionError
from snnevo.scenarios.base import NONE

DEFAULT_GAIN = 1.2  # in units of the firing threshold


def encode(values, window: int, n_in: int | None = None, gain: float = DEFAULT_GAIN, rng=None) -> np.ndarray:
    """Constant-current rate code: a ``window x n_in`` schedule of ``gain * values``.

    ``rng`` is accepted for interface symmetry with stochastic coders; the
    default coder is deterministic and never draws from it.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise DimensionError("observation must be a vector")
    if n_in is not None and values.shape[0] != n_in:
        raise DimensionError(f"observation has {values.shape[0]} values, network has {n_in} sensory neurons")
    if window < 0:
        raise ValueError("window must be >= 0")
    return np.tile(gain * values, (window, 1))


def decode_counts(counts) -> int:
    """Winner-take-all; ties go to the lowest index; silence decodes to NONE."""
    counts = np.asarray(counts)
    if counts.size == 0 or not counts.any():
        return NONE
    return int(np.argmax(counts))


def decode(output_spikes) -> int:
    """Decode a ``window x n_out`` spike raster."""
    raster = np.asarray(output_spikes)
    if raster.ndim != 2:
        raise DimensionError("expected a window x n_out spike raster")
    return decode_counts(raster.sum(axis=0))
