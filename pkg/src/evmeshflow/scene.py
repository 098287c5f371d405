"""Synthetic textured scenes with analytically known motion.

A scene is a periodic band-limited texture observed through a smooth
time-dependent warp.  Because the warp has a closed form, the optical flow
between any two instants is known exactly, which makes scenes usable as
ground-truth generators for the event simulator and the flow tooling
downstream.

Coordinates are pixel units: x runs along the width, y along the height,
and pixel (x, y) samples the continuous plane at exactly (x, y).  Content
that leaves the texture wraps around toroidally, so every rendered pixel is
always defined.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import DataError, ParameterError, RangeError, StepLimitError
from .sampling import bilinear_sample_wrapped

_OCTAVE_SIZES = (4, 8, 16, 32)
_OCTAVE_GAINS = (1.0, 0.5, 0.25, 0.125)

MOTION_KINDS = ("translation", "affine", "homography")


def seeded_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Return a counted-stream generator: one master seed, many streams."""
    key = np.array([seed % (2**64), stream % (2**64)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class MotionSpec:
    """Parametric scene motion.

    kind "translation" uses coefficients (vx, vy[, ax, ay]): the texture
    offset is v*t + 0.5*a*t^2, so the velocity field is spatially constant.

    kind "affine" uses the 6 generator coefficients
    (a11, a12, tx, a21, a22, ty) of the stationary velocity field
    du/dt = A*u + b; positions evolve as the matrix exponential of the
    generator, which keeps the map invertible for all t.

    kind "homography" extends the generator with a projective row
    (g31, g32), making 8 coefficients in total.
    """

    kind: str
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in MOTION_KINDS:
            raise ParameterError(f"unknown motion kind {self.kind!r}")
        n = len(self.coefficients)
        if self.kind == "translation" and n not in (2, 4):
            raise ParameterError("translation takes (vx, vy) or (vx, vy, ax, ay)")
        if self.kind == "affine" and n != 6:
            raise ParameterError("affine takes 6 generator coefficients")
        if self.kind == "homography" and n != 8:
            raise ParameterError("homography takes 8 generator coefficients")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ParameterError("motion coefficients must be finite")

    def offset(self, t: float) -> tuple[float, float]:
        """Translation offset at time t (translation kind only)."""
        vx, vy = self.coefficients[:2]
        ax, ay = (self.coefficients[2:] if len(self.coefficients) == 4 else (0.0, 0.0))
        return (vx * t + 0.5 * ax * t * t, vy * t + 0.5 * ay * t * t)

    def generator(self) -> np.ndarray:
        """3x3 velocity-field generator (matrix kinds only)."""
        c = self.coefficients
        if self.kind == "affine":
            g = np.array([[c[0], c[1], c[2]], [c[3], c[4], c[5]], [0.0, 0.0, 0.0]])
        elif self.kind == "homography":
            g = np.array([[c[0], c[1], c[2]], [c[3], c[4], c[5]], [c[6], c[7], 0.0]])
        else:
            raise ParameterError("translation motion has no matrix generator")
        return g


@lru_cache(maxsize=4096)
def _matrix_at(motion: MotionSpec, t: float) -> np.ndarray:
    return expm(t * motion.generator())


@dataclass(frozen=True)
class Scene:
    """A textured plane under parametric motion over [t_start, t_end]."""

    width: int
    height: int
    texture_seed: int
    motion: MotionSpec
    t_start: float = 0.0
    t_end: float = 1.0
    intensity_floor: float = 1e-3

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ParameterError("scene dimensions must be at least 8 px")
        if not self.t_start < self.t_end:
            raise ParameterError("scene requires t_start < t_end")
        if not 0.0 < self.intensity_floor < 1.0:
            raise ParameterError("intensity_floor must lie in (0, 1)")

    def check_time(self, t: float) -> None:
        if not (self.t_start <= t <= self.t_end):
            raise RangeError(
                f"time {t} outside scene range [{self.t_start}, {self.t_end}]"
            )


@lru_cache(maxsize=64)
def _texture(seed: int, height: int, width: int, floor: float) -> np.ndarray:
    """Periodic band-limited texture: a sum of smoothed random octaves.

    Each octave is a coarse seeded noise grid upsampled with wrap-around
    bilinear interpolation, so the sum tiles seamlessly.  Output values
    span exactly [floor, 1].
    """
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    acc = np.zeros((height, width))
    for octave, (size, gain) in enumerate(zip(_OCTAVE_SIZES, _OCTAVE_GAINS)):
        coarse = seeded_rng(seed, octave).standard_normal((size, size))
        acc += gain * bilinear_sample_wrapped(coarse, xs * size / width, ys * size / height)
    span = acc.max() - acc.min()
    if span == 0.0:
        return np.full((height, width), 0.5 * (floor + 1.0))
    out = floor + (1.0 - floor) * (acc - acc.min()) / span
    return out


def scene_texture(scene: Scene) -> np.ndarray:
    """The scene's static texture as an (H, W) intensity image."""
    tex = _texture(scene.texture_seed, scene.height, scene.width, scene.intensity_floor)
    return tex.copy()


def _source_coords(scene: Scene, t: float, xs: np.ndarray, ys: np.ndarray):
    """Texture coordinates that appear at image positions (xs, ys) at time t."""
    if scene.motion.kind == "translation":
        ox, oy = scene.motion.offset(t)
        return xs - ox, ys - oy
    inv = np.linalg.inv(_matrix_at(scene.motion, t))
    w0 = inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2]
    w1 = inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2]
    w2 = inv[2, 0] * xs + inv[2, 1] * ys + inv[2, 2]
    if not np.all(np.isfinite(w2)) or np.any(w2 <= 0.0):
        raise DataError("projective depth vanished while inverting the motion")
    return w0 / w2, w1 / w2


def render_frame(scene: Scene, t: float) -> np.ndarray:
    """Render the scene at time t as an (H, W) image in [floor, 1]."""
    scene.check_time(t)
    tex = _texture(scene.texture_seed, scene.height, scene.width, scene.intensity_floor)
    ys, xs = np.mgrid[0 : scene.height, 0 : scene.width].astype(np.float64)
    sx, sy = _source_coords(scene, t, xs, ys)
    return bilinear_sample_wrapped(tex, sx, sy)


def flow_at_points(
    scene: Scene, t_i: float, t_j: float, xs: np.ndarray, ys: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Displacement from t_i to t_j of the scene points at (xs, ys) at t_i."""
    scene.check_time(t_i)
    scene.check_time(t_j)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if scene.motion.kind == "translation":
        oxi, oyi = scene.motion.offset(t_i)
        oxj, oyj = scene.motion.offset(t_j)
        return (
            np.full_like(xs, oxj - oxi),
            np.full_like(ys, oyj - oyi),
        )
    m = _matrix_at(scene.motion, t_j) @ np.linalg.inv(_matrix_at(scene.motion, t_i))
    w0 = m[0, 0] * xs + m[0, 1] * ys + m[0, 2]
    w1 = m[1, 0] * xs + m[1, 1] * ys + m[1, 2]
    w2 = m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
    if not np.all(np.isfinite(w2)) or np.any(w2 <= 0.0):
        raise DataError("projective depth vanished while composing the motion")
    return w0 / w2 - xs, w1 / w2 - ys


def flow_between(scene: Scene, t_i: float, t_j: float) -> np.ndarray:
    """Dense ground-truth flow field, shape (H, W, 2) with (u, v) last."""
    ys, xs = np.mgrid[0 : scene.height, 0 : scene.width].astype(np.float64)
    fx, fy = flow_at_points(scene, t_i, t_j, xs, ys)
    return np.stack([fx, fy], axis=-1)


def velocity_field(scene: Scene, t: float) -> np.ndarray:
    """Instantaneous pixel velocity (px/s) at every pixel, shape (H, W, 2)."""
    scene.check_time(t)
    ys, xs = np.mgrid[0 : scene.height, 0 : scene.width].astype(np.float64)
    if scene.motion.kind == "translation":
        vx, vy = scene.motion.coefficients[:2]
        ax, ay = (
            scene.motion.coefficients[2:]
            if len(scene.motion.coefficients) == 4
            else (0.0, 0.0)
        )
        out = np.empty((scene.height, scene.width, 2))
        out[..., 0] = vx + ax * t
        out[..., 1] = vy + ay * t
        return out
    # The generator G defines a stationary velocity field on the image:
    # du/dt = G[:2] . [u, 1] - u * (G[2] . [u, 1]).
    g = scene.motion.generator()
    d0 = g[0, 0] * xs + g[0, 1] * ys + g[0, 2]
    d1 = g[1, 0] * xs + g[1, 1] * ys + g[1, 2]
    d2 = g[2, 0] * xs + g[2, 1] * ys + g[2, 2]
    return np.stack([d0 - xs * d2, d1 - ys * d2], axis=-1)


def _peak_speed(scene: Scene, t: float) -> float:
    vel = velocity_field(scene, t)
    return float(np.hypot(vel[..., 0], vel[..., 1]).max())


def _peak_displacement(scene: Scene, t_a: float, t_b: float) -> float:
    fwd = flow_between(scene, t_a, t_b)
    bwd = flow_between(scene, t_b, t_a)
    mag_f = np.hypot(fwd[..., 0], fwd[..., 1]).max()
    mag_b = np.hypot(bwd[..., 0], bwd[..., 1]).max()
    return float(max(mag_f, mag_b))


def adaptive_timestamps(
    scene: Scene, t_i: float, t_j: float, max_steps: int = 100_000
) -> list[float]:
    """Frame times such that no pixel moves more than one pixel per step.

    Marches from t_i taking steps of 1 / (peak pixel speed); each candidate
    step is audited against the exact flow in both directions and shrunk if
    the true peak displacement exceeds one pixel (a 1e-9 px allowance
    absorbs float roundoff).  The last interval may be shorter so the final
    timestamp is exactly t_j.  Zero motion yields [t_i, t_j].
    """
    scene.check_time(t_i)
    scene.check_time(t_j)
    if not t_i < t_j:
        raise ParameterError("adaptive sampling requires t_i < t_j")
    span = t_j - t_i
    snap = 1e-9 * span
    times = [t_i]
    t = t_i
    while t < t_j:
        if len(times) > max_steps:
            raise StepLimitError(
                f"adaptive sampling exceeded {max_steps} steps; motion too fast"
            )
        speed = _peak_speed(scene, t)
        nxt = t_j if speed <= 0.0 else t + 1.0 / speed
        if nxt >= t_j - snap:
            nxt = t_j
        for _ in range(64):
            disp = _peak_displacement(scene, t, nxt)
            if disp <= 1.0 + 1e-9:
                break
            nxt = t + (nxt - t) * 0.999 / disp
            if nxt <= t:
                raise DataError("motion too fast to resolve at float precision")
        else:
            raise StepLimitError("step shrink failed to meet the 1 px bound")
        times.append(nxt)
        t = nxt
    return times
