"""Polarity-signed voxel grids and event density.

A stream is rasterized into B temporal bins with a triangular kernel: an
event at normalized time s contributes p * max(0, 1 - |b - s*(B-1)|) to bin
b at its pixel.  The kernel weights for one event always sum to 1, so the
grid conserves total signed polarity.
"""

import numpy as np

from .errors import ParameterError, ShapeError
from .events import EventStream


def voxelize(stream: EventStream, bins: int = 5) -> np.ndarray:
    """Accumulate a stream into a (B, H, W) float64 voxel grid.

    Normalized time runs over the event span: the first and last event map
    to 0 and 1.  An empty stream yields zeros; a stream whose events share
    one timestamp puts all mass in bin 0.
    """
    if bins < 1:
        raise ParameterError("bins must be >= 1")
    grid = np.zeros((bins, stream.height, stream.width))
    n = len(stream)
    if n == 0:
        return grid
    t0 = stream.t[0]
    tn = stream.t[-1]
    if tn > t0:
        coord = (stream.t - t0) / float(tn - t0) * (bins - 1)
    else:
        coord = np.zeros(n)
    b0 = np.floor(coord).astype(np.int64)
    b0 = np.clip(b0, 0, bins - 1)
    w1 = coord - b0
    w0 = 1.0 - w1
    pol = stream.p.astype(np.float64)
    np.add.at(grid, (b0, stream.y, stream.x), pol * w0)
    upper = b0 + 1
    valid = (upper < bins) & (w1 > 0)
    if valid.any():
        np.add.at(
            grid,
            (upper[valid], stream.y[valid], stream.x[valid]),
            pol[valid] * w1[valid],
        )
    return grid


def density(grid: np.ndarray) -> float:
    """Fraction of pixels whose summed absolute bin mass is nonzero.

    Pixels whose positive and negative contributions cancel exactly within
    a bin count as inactive under this reading; see incident_density for
    the alternative that counts any pixel touched by an event.
    """
    grid = np.asarray(grid)
    if grid.ndim != 3:
        raise ShapeError(f"expected (B, H, W) grid, got {grid.shape}")
    active = np.abs(grid).sum(axis=0) > 0.0
    return float(active.mean())


def incident_density(stream: EventStream) -> float:
    """Fraction of pixels that receive at least one event.

    Alternative density reading that is insensitive to polarity
    cancellation inside the voxel kernel.
    """
    active = np.zeros((stream.height, stream.width), dtype=bool)
    active[stream.y, stream.x] = True
    return float(active.mean())
