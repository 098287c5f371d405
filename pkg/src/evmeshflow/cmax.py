"""Flow-based event warping and contrast scoring.

Warping transports each event along the flow at its pixel to a reference
time; a motion-consistent stream collapses onto sharp edges in the
resulting event-count image, which shows up as high variance.  Scoring a
stream at both endpoints of its interval and summing the variances gives
the two-sided objective used to rank candidate streams.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .events import EventStream

SPLAT_MODES = ("bilinear", "nearest")


@dataclass
class WarpedEvents:
    """Continuous event positions after transport to a reference time.

    Positions may leave the sensor; ``on_sensor`` flags the ones that can
    still contribute mass when rasterized.
    """

    xw: np.ndarray
    yw: np.ndarray
    p: np.ndarray
    width: int
    height: int
    t_ref: float

    @property
    def on_sensor(self) -> np.ndarray:
        return (
            (self.xw >= 0)
            & (self.xw <= self.width - 1)
            & (self.yw >= 0)
            & (self.yw <= self.height - 1)
        )


def warp_events(
    stream: EventStream,
    flow: np.ndarray,
    t_ref: float,
    t_i: float,
    t_j: float,
) -> WarpedEvents:
    """Transport events to t_ref along the flow defined over [t_i, t_j].

    The flow field maps the interval start to its end; an event at time t
    moves by (t_ref - t) / (t_j - t_i) times the flow at its (integer)
    pixel.  Times are microseconds, matching stream timestamps.
    """
    flow = np.asarray(flow, dtype=np.float64)
    if flow.shape != (stream.height, stream.width, 2):
        raise ShapeError(
            f"flow shape {flow.shape} does not match sensor "
            f"({stream.height}, {stream.width}, 2)"
        )
    if t_j == t_i:
        raise ParameterError("warp interval must have nonzero length")
    factor = (t_ref - stream.t.astype(np.float64)) / float(t_j - t_i)
    fx = flow[stream.y, stream.x, 0]
    fy = flow[stream.y, stream.x, 1]
    return WarpedEvents(
        xw=stream.x + factor * fx,
        yw=stream.y + factor * fy,
        p=stream.p.copy(),
        width=stream.width,
        height=stream.height,
        t_ref=float(t_ref),
    )


def accumulate_iwe(
    warped: WarpedEvents, splat: str = "bilinear", signed: bool = False
) -> np.ndarray:
    """Rasterize warped events into an (H, W) image of event counts.

    Bilinear splatting spreads each unit of mass over the four neighboring
    pixels; mass falling outside the sensor is discarded.  With
    signed=True, polarity weights the contribution instead of unit counts.
    """
    if splat not in SPLAT_MODES:
        raise ParameterError(f"splat must be one of {SPLAT_MODES}")
    h, w = warped.height, warped.width
    img = np.zeros((h, w))
    weight = warped.p.astype(np.float64) if signed else np.ones(len(warped.p))
    if splat == "nearest":
        xi = np.rint(warped.xw).astype(np.int64)
        yi = np.rint(warped.yw).astype(np.int64)
        ok = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        np.add.at(img, (yi[ok], xi[ok]), weight[ok])
        return img
    x0 = np.floor(warped.xw).astype(np.int64)
    y0 = np.floor(warped.yw).astype(np.int64)
    fx = warped.xw - x0
    fy = warped.yw - y0
    for dx, dy, wgt in (
        (0, 0, (1 - fx) * (1 - fy)),
        (1, 0, fx * (1 - fy)),
        (0, 1, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        xi = x0 + dx
        yi = y0 + dy
        ok = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h) & (wgt > 0)
        np.add.at(img, (yi[ok], xi[ok]), weight[ok] * wgt[ok])
    return img


def contrast(image: np.ndarray) -> float:
    """Variance of an image over the full sensor domain."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ShapeError(f"expected (H, W) image, got {image.shape}")
    return float(np.var(image))


def two_sided_components(
    stream: EventStream,
    flow: np.ndarray,
    t_i: float,
    t_j: float,
    splat: str = "bilinear",
) -> tuple[float, float]:
    """Warped-image variance at each interval endpoint, as (var_i, var_j)."""
    parts = []
    for t_ref in (t_i, t_j):
        warped = warp_events(stream, flow, t_ref, t_i, t_j)
        parts.append(contrast(accumulate_iwe(warped, splat=splat)))
    return parts[0], parts[1]


def two_sided_score(
    stream: EventStream,
    flow: np.ndarray,
    t_i: float,
    t_j: float,
    splat: str = "bilinear",
) -> float:
    """Sum of warped-image variances at both interval endpoints."""
    var_i, var_j = two_sided_components(stream, flow, t_i, t_j, splat=splat)
    return var_i + var_j


def select_best(
    candidates: list[EventStream],
    flow: np.ndarray,
    t_i: float,
    t_j: float,
    splat: str = "bilinear",
) -> int:
    """Index of the candidate with the highest two-sided score.

    Ties resolve to the lowest index.
    """
    if not candidates:
        raise ParameterError("at least one candidate stream required")
    scores = [two_sided_score(s, flow, t_i, t_j, splat=splat) for s in candidates]
    return int(np.argmax(scores))
