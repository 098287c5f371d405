"""Command-line front end for the event meshflow pipeline.

Every run is a pure function of (config, seed): randomness flows through
counted-stream generators derived from the single master seed, manifests
carry data timestamps rather than wall-clock times, and all artifacts use
fixed little-endian layouts, so re-running a command with identical inputs
reproduces every output byte for byte.

Config files hold one `key = value` pair per line ('#' starts a comment);
positional `key=value` arguments override file entries.
"""

import argparse
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import io
from .cmax import select_best, two_sided_components
from .errors import FormatError, ParameterError
from .events import (
    multi_density_sweep,
    render_sequence,
    spatial_guided_subsample,
    temporal_guided_subsample,
)
from .mesh import (
    MeshGridSpec,
    alignment_error,
    backward_warp,
    extract_meshflow,
    upsample_bilinear,
)
from .metrics import angular_error, epe, npe, outlier_pct
from .scene import MotionSpec, Scene, adaptive_timestamps, flow_between, render_frame
from .voxel import density, voxelize


class StageError(Exception):
    """Pipeline failure annotated with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


@contextmanager
def _stage(name: str):
    """Convert any error raised in the block into a stage-named failure."""
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, str(exc)) from exc


# ---------------------------------------------------------------------------
# Config plumbing


def _read_config_file(path: Path) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _parse_pairs(pairs: list[str]) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ParameterError(f"override {pair!r} is not of the form key=value")
        key, value = pair.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _require(cfg: dict[str, str], key: str) -> str:
    if key not in cfg:
        raise ParameterError(f"missing required config key {key!r}")
    return cfg[key]


def _cfg_int(cfg, key, default):
    return int(cfg[key]) if key in cfg else default


def _cfg_float(cfg, key, default):
    return float(cfg[key]) if key in cfg else default


def _cfg_floats(cfg, key, default=None):
    raw = cfg.get(key, default)
    if raw is None:
        raise ParameterError(f"missing required config key {key!r}")
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


def _cfg_paths(cfg, key) -> list[Path]:
    return [Path(tok.strip()) for tok in _require(cfg, key).split(",") if tok.strip()]


def _scene_from_config(cfg: dict[str, str], seed: int) -> Scene:
    kind = cfg.get("motion", "translation")
    if kind == "translation":
        coeffs = _cfg_floats(cfg, "velocity", "10,0")
        if "accel" in cfg:
            coeffs = coeffs + _cfg_floats(cfg, "accel")
    else:
        coeffs = _cfg_floats(cfg, "generator")
    return Scene(
        width=_cfg_int(cfg, "width", 64),
        height=_cfg_int(cfg, "height", 64),
        texture_seed=seed,
        motion=MotionSpec(kind, coeffs),
        t_start=_cfg_float(cfg, "t_start", 0.0),
        t_end=_cfg_float(cfg, "t_end", 1.0),
    )


def _mesh_spec(cfg: dict[str, str]) -> MeshGridSpec:
    cells = _cfg_int(cfg, "cells", 16)
    return MeshGridSpec(cells_x=cells, cells_y=cells)


def _read_flow_auto(path: Path, image_shape: tuple[int, int]) -> np.ndarray:
    """Load a dense flow from FLO1, or a MSH1 mesh upsampled to the image."""
    magic = path.read_bytes()[:4]
    if magic == b"FLO1":
        return io.read_flo1(path)
    if magic == b"MSH1":
        return upsample_bilinear(io.read_msh1(path), *image_shape)
    raise FormatError(f"{path}: expected FLO1 or MSH1 magic, found {magic!r}")


def _write_manifest(out: Path, command: str, entries: list[tuple[str, str]]) -> None:
    lines = [f"# {command} artifacts"]
    lines.extend(f"{name}\t{note}" for name, note in entries)
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Commands


def cmd_gen(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        scene = _scene_from_config(cfg, seed)
        spec = _mesh_spec(cfg)
    with _stage("gen"):
        times = adaptive_timestamps(scene, scene.t_start, scene.t_end)
        frames = [render_frame(scene, t) for t in times]
        flows = [flow_between(scene, ta, tb) for ta, tb in zip(times, times[1:])]
        meshes = [extract_meshflow(flow, spec) for flow in flows]
    entries = []
    with _stage("write"):
        for k, (t, frame) in enumerate(zip(times, frames)):
            name = f"frame_{k:04d}.pgm"
            io.write_pgm(out / name, frame)
            entries.append((name, f"t={t:.9f}"))
        for k, (flow, msh) in enumerate(zip(flows, meshes)):
            note = f"interval=[{times[k]:.9f},{times[k + 1]:.9f}]"
            name = f"flow_{k:04d}_{k + 1:04d}.flo1"
            io.write_flo1(out / name, flow)
            entries.append((name, note))
            name = f"mesh_{k:04d}_{k + 1:04d}.msh1"
            io.write_msh1(out / name, msh)
            entries.append((name, note))
        io.write_csv_rows(
            out / "times.csv",
            ["index", "time"],
            [[k, repr(t)] for k, t in enumerate(times)],
        )
        entries.append(("times.csv", f"count={len(times)}"))
        _write_manifest(out, "gen", entries)
    print(f"gen: {len(times)} frames, {len(flows)} intervals")
    return 0


def _sweep(cfg, seed: int, threads: int):
    scene = _scene_from_config(cfg, seed)
    thresholds = _cfg_floats(cfg, "thresholds", "0.2")
    bins = _cfg_int(cfg, "bins", 5)
    times = adaptive_timestamps(scene, scene.t_start, scene.t_end)
    frames = render_sequence(scene, times)
    streams = multi_density_sweep(frames, thresholds, threads=threads)
    densities = [density(voxelize(s, bins)) for s in streams]
    return thresholds, streams, densities


def cmd_simulate(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        thresholds, streams, densities = _sweep(cfg, seed, threads)
    entries = []
    rows = []
    with _stage("write"):
        for k, (c, stream, dens) in enumerate(zip(thresholds, streams, densities)):
            name = f"events_{k:02d}_c{c:g}.evt1"
            io.write_evt1(out / name, stream)
            entries.append(
                (name, f"threshold={c:g} events={len(stream)} density={dens:.9f}")
            )
            rows.append([repr(c), len(stream), repr(dens)])
        io.write_csv_rows(out / "density.csv", ["threshold", "events", "density"], rows)
        entries.append(("density.csv", f"sweeps={len(thresholds)}"))
        _write_manifest(out, "simulate", entries)
    print(f"simulate: {len(thresholds)} threshold(s)")
    return 0


def cmd_density(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        thresholds, streams, densities = _sweep(cfg, seed, threads)
    with _stage("write"):
        rows = [
            [repr(c), len(s), repr(d)]
            for c, s, d in zip(thresholds, streams, densities)
        ]
        io.write_csv_rows(out / "density.csv", ["threshold", "events", "density"], rows)
        _write_manifest(out, "density", [("density.csv", f"sweeps={len(thresholds)}")])
    print(f"density: {len(thresholds)} threshold(s)")
    return 0


def cmd_select(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        paths = _cfg_paths(cfg, "candidates")
        flow_path = Path(_require(cfg, "flow"))
        splat = cfg.get("splat", "bilinear")
    with _stage("load"):
        candidates = [io.read_evt1(p) for p in paths]
        flow = io.read_flo1(flow_path)
    with _stage("select"):
        t_i = _cfg_float(cfg, "t_i_us", min(s.t_start for s in candidates))
        t_j = _cfg_float(cfg, "t_j_us", max(s.t_end for s in candidates))
        rows = []
        for k, stream in enumerate(candidates):
            var_i, var_j = two_sided_components(stream, flow, t_i, t_j, splat=splat)
            rows.append([k, repr(var_i), repr(var_j), repr(var_i + var_j)])
        best = select_best(candidates, flow, t_i, t_j, splat=splat)
    with _stage("write"):
        io.write_csv_rows(
            out / "scores.csv", ["candidate_index", "var_ti", "var_tj", "total"], rows
        )
        (out / "selected.txt").write_text(f"{best}\n")
        _write_manifest(
            out,
            "select",
            [
                ("scores.csv", f"candidates={len(candidates)}"),
                ("selected.txt", f"index={best}"),
            ],
        )
    print(f"selected={best}")
    return 0


def cmd_meshflow(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        flow_path = Path(_require(cfg, "flow"))
        spec = _mesh_spec(cfg)
        visualize = _cfg_int(cfg, "visualize", 0)
    with _stage("load"):
        flow = io.read_flo1(flow_path)
    with _stage("meshflow"):
        msh = extract_meshflow(flow, spec)
    entries = []
    with _stage("write"):
        io.write_msh1(out / "meshflow.msh1", msh)
        entries.append(
            ("meshflow.msh1", f"vertices={msh.shape[1]}x{msh.shape[0]}")
        )
        if visualize:
            dense = upsample_bilinear(msh, flow.shape[0], flow.shape[1])
            io.write_ppm(out / "meshflow.ppm", io.flow_to_color(dense))
            entries.append(("meshflow.ppm", f"size={flow.shape[1]}x{flow.shape[0]}"))
        _write_manifest(out, "meshflow", entries)
    print(f"meshflow: {msh.shape[1]}x{msh.shape[0]} vertices")
    return 0


def cmd_eval(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        pred_path = Path(_require(cfg, "pred"))
        gt_path = Path(_require(cfg, "gt"))
        kind = cfg.get("kind", "flow")
        if kind not in ("flow", "meshflow"):
            raise ParameterError(f"kind must be flow or meshflow, got {kind!r}")
    with _stage("load"):
        if kind == "flow":
            pred = io.read_flo1(pred_path)
            gt = io.read_flo1(gt_path)
        else:
            height = _cfg_int(cfg, "height", 64)
            width = _cfg_int(cfg, "width", 64)
            pred = upsample_bilinear(io.read_msh1(pred_path), height, width)
            gt = upsample_bilinear(io.read_msh1(gt_path), height, width)
    with _stage("eval"):
        label = cfg.get("label", pred_path.stem)
        rows = [
            [label, "epe", repr(epe(pred, gt))],
            [label, "npe_1", repr(npe(pred, gt, 1.0))],
            [label, "npe_3", repr(npe(pred, gt, 3.0))],
            [label, "angular_error", repr(angular_error(pred, gt))],
            [label, "outlier_pct", repr(outlier_pct(pred, gt))],
        ]
    with _stage("write"):
        io.write_csv_rows(out / "metrics.csv", ["sequence", "metric", "value"], rows)
        _write_manifest(out, "eval", [("metrics.csv", f"kind={kind}")])
    for _, name, value in rows:
        print(f"{name}={value}")
    return 0


def cmd_warp(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        image_path = Path(_require(cfg, "image"))
        ref_path = Path(_require(cfg, "reference"))
        flow_path = Path(_require(cfg, "flow"))
    with _stage("load"):
        image = io.read_pgm(image_path)
        reference = io.read_pgm(ref_path)
        flow = _read_flow_auto(flow_path, image.shape)
    with _stage("warp"):
        warped = backward_warp(image, flow)
        err_warped = alignment_error(reference, warped)
        err_identity = alignment_error(reference, image)
    with _stage("write"):
        io.write_pgm(out / "warped.pgm", warped)
        io.write_csv_rows(
            out / "alignment.csv",
            ["variant", "error"],
            [["warped", repr(err_warped)], ["identity", repr(err_identity)]],
        )
        _write_manifest(
            out,
            "warp",
            [
                ("warped.pgm", f"size={image.shape[1]}x{image.shape[0]}"),
                ("alignment.csv", f"warped={err_warped:.9f}"),
            ],
        )
    print(f"alignment: warped={err_warped!r} identity={err_identity!r}")
    return 0


def cmd_subsample(cfg, out: Path, seed: int, threads: int) -> int:
    with _stage("config"):
        events_path = Path(_require(cfg, "events"))
        flow_path = Path(_require(cfg, "flow"))
        mode = cfg.get("mode", "spatial")
        if mode not in ("spatial", "temporal"):
            raise ParameterError(f"mode must be spatial or temporal, got {mode!r}")
        keep_ratio = _cfg_float(cfg, "keep_ratio", 0.5)
        tolerance = _cfg_float(cfg, "tolerance", 0.5)
    with _stage("load"):
        stream = io.read_evt1(events_path)
        flow = io.read_flo1(flow_path)
    with _stage("subsample"):
        fn = spatial_guided_subsample if mode == "spatial" else temporal_guided_subsample
        kept = fn(stream, flow, keep_ratio, tolerance)
    with _stage("write"):
        io.write_evt1(out / "subsampled.evt1", kept)
        _write_manifest(
            out,
            "subsample",
            [("subsampled.evt1", f"mode={mode} kept={len(kept)} of={len(stream)}")],
        )
    print(f"subsample: kept {len(kept)} of {len(stream)}")
    return 0


_COMMANDS = {
    "gen": (cmd_gen, "render adaptive frames, GT flow, and meshflow for a scene"),
    "simulate": (cmd_simulate, "simulate event streams over a threshold sweep"),
    "select": (cmd_select, "pick the most motion-coherent candidate stream"),
    "meshflow": (cmd_meshflow, "extract a vertex meshflow from a dense flow file"),
    "eval": (cmd_eval, "compare a predicted flow or mesh against ground truth"),
    "warp": (cmd_warp, "backward-warp an image and report alignment error"),
    "subsample": (cmd_subsample, "thin an event stream along flow trajectories"),
    "density": (cmd_density, "tabulate event density across a threshold sweep"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evmeshflow",
        description="Synthetic event-camera meshflow pipeline.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in _COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, help="key=value config file")
        sub.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sub.add_argument("--seed", type=int, help="master RNG seed (overrides config)")
        sub.add_argument("--threads", type=int, default=1, help="sweep worker threads")
        sub.add_argument(
            "overrides", nargs="*", metavar="key=value", help="config overrides"
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with _stage("config"):
            cfg: dict[str, str] = {}
            if args.config is not None:
                cfg.update(_read_config_file(args.config))
            cfg.update(_parse_pairs(args.overrides))
            seed = args.seed if args.seed is not None else int(cfg.get("seed", "0"))
            threads = max(1, args.threads)
        with _stage("setup"):
            args.out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command][0](cfg, args.out, seed, threads)
    except StageError as err:
        print(f"error [{err.stage}]: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
