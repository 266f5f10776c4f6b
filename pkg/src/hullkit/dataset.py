"""Dataset builds: sample the three subsets, compute drag tables, persist.

Layout under the output directory:

    params.csv                  hull_id + 45 terms
    drag.csv                    waterline/wetted-area/Cw/Rw/Rf/Rt columns
    meshes/<id>.stl             (optional)
    images/<id>_view{1..5}.ppm  (optional)
    manifest.json

Hull `<subset>-<index>` draws its parameters from an RNG stream seeded by
(master seed, subset, index), so content never depends on scheduling or the
worker count; tables are written in a fixed id order.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hydro
from .errors import HullKitError, ParseError
from .mesh import generate_mesh, export_stl, scale_to_displacement
from .params import (HullParameters, ParameterRanges, check_feasibility,
                     load_params, sample_hull, save_params)
from .surface import HullSurface
from .views import render_views

MANIFEST_NAME = "manifest.json"
_MANIFEST_VERSION = 1

DRAG_HEADER = (
    ["hull_id"]
    + [f"Lwl_d{int(round(d * 100)):02d}" for d in hydro.DRAFT_FRACTIONS]
    + [f"Aws_d{int(round(d * 100)):02d}" for d in hydro.DRAFT_FRACTIONS]
    + [f"Cw_{lab}" for lab in hydro.DragTable.condition_labels()]
    + [f"Rw_{lab}" for lab in hydro.DragTable.condition_labels()]
    + [f"Rf_{lab}" for lab in hydro.DragTable.condition_labels()]
    + [f"Rt_{lab}" for lab in hydro.DragTable.condition_labels()]
)


@dataclass
class DatasetConfig:
    out_dir: str
    counts: tuple[int, int, int] = (100, 100, 100)
    seed: int = 0
    workers: int = 1
    with_meshes: bool = False            # STL + five views per hull
    drag_grid: tuple[int, int] = (301, 51)
    mesh_grid: tuple[int, int] = (100, 50)
    rho: float = hydro.RHO_SEAWATER
    nu: float = hydro.NU_SEAWATER

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise HullKitError("subset counts must be non-negative")
        if self.workers < 1:
            raise HullKitError("workers must be >= 1")


@dataclass
class DatasetManifest:
    config: DatasetConfig
    hulls: dict[str, dict] = field(default_factory=dict)
    wall_clock_s: float = 0.0

    @property
    def out_dir(self) -> str:
        return self.config.out_dir

    def requested(self) -> int:
        return sum(self.config.counts)

    def completed(self) -> int:
        return sum(1 for h in self.hulls.values() if h["status"] == "done")

    def hull_ids(self) -> list[str]:
        return sorted(self.hulls, key=lambda hid: (int(hid.split("-")[0]),
                                                   int(hid.split("-")[1])))

    def to_json(self) -> dict:
        ranges = {
            str(s): {
                "lower": ParameterRanges.for_subset(s).lower.tolist(),
                "upper": ParameterRanges.for_subset(s).upper.tolist(),
            }
            for s in (1, 2, 3)
        }
        return {
            "version": _MANIFEST_VERSION,
            "seed": self.config.seed,
            "counts": list(self.config.counts),
            "with_meshes": self.config.with_meshes,
            "drag_grid": list(self.config.drag_grid),
            "mesh_grid": list(self.config.mesh_grid),
            "water": {"rho": self.config.rho, "nu": self.config.nu,
                      "gravity": hydro.GRAVITY,
                      "note": "seawater defaults; paper does not state water properties"},
            "ranges": ranges,
            "files": {"params": "params.csv", "drag": "drag.csv"},
            "hulls": self.hulls,
            "wall_clock_s": self.wall_clock_s,
        }

    def save(self) -> None:
        path = os.path.join(self.out_dir, MANIFEST_NAME)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, out_dir: str) -> "DatasetManifest":
        path = os.path.join(out_dir, MANIFEST_NAME)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ParseError(f"no manifest at {path}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: corrupted manifest ({exc})") from None
        if raw.get("version") != _MANIFEST_VERSION:
            raise ParseError(f"{path}: unsupported manifest version")
        config = DatasetConfig(
            out_dir=out_dir, counts=tuple(raw["counts"]), seed=raw["seed"],
            with_meshes=raw["with_meshes"], drag_grid=tuple(raw["drag_grid"]),
            mesh_grid=tuple(raw["mesh_grid"]),
            rho=raw["water"]["rho"], nu=raw["water"]["nu"],
        )
        manifest = cls(config=config, hulls=raw["hulls"],
                       wall_clock_s=raw.get("wall_clock_s", 0.0))
        return manifest


def hull_seed_sequence(master_seed: int, subset: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((master_seed, subset, index))


def _hull_job(args):
    """Worker entry: fully deterministic per (seed, subset, index)."""
    (master_seed, subset, index, drag_grid, mesh_grid, rho, nu,
     with_meshes, out_dir) = args
    hull_id = f"{subset}-{index}"
    rng = np.random.default_rng(hull_seed_sequence(master_seed, subset, index))
    params = sample_hull(ParameterRanges.for_subset(subset), rng)
    surf = HullSurface(params)
    table = hydro.sweep_32(surf, *drag_grid, rho=rho, nu=nu)
    drag_row = drag_row_values(table)
    if with_meshes:
        mesh = generate_mesh(surf, *mesh_grid)
        export_stl(mesh, os.path.join(out_dir, "meshes", f"{hull_id}.stl"), "binary")
        render_views(mesh, os.path.join(out_dir, "images"), prefix=f"{hull_id}_view")
    return hull_id, params.values.tolist(), drag_row


def drag_row_values(table: hydro.DragTable) -> list[float]:
    return (table.lwl.tolist() + table.aws.tolist() + table.cw.reshape(-1).tolist()
            + table.rw.reshape(-1).tolist() + table.rf.reshape(-1).tolist()
            + table.rt.reshape(-1).tolist())


def _write_drag_csv(path, rows: list[tuple[str, list[float]]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(DRAG_HEADER) + "\n")
        for hull_id, values in rows:
            fh.write(hull_id + "," + ",".join(f"{v:.9e}" for v in values) + "\n")


def load_drag_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != DRAG_HEADER:
            raise ParseError(f"{path}: unexpected drag table header")
        ids = []
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(DRAG_HEADER):
                raise ParseError(f"{path}: row {lineno} has {len(parts)} columns")
            ids.append(parts[0])
            rows.append([float(p) for p in parts[1:]])
    return ids, np.array(rows)


def _required_ids(config: DatasetConfig) -> list[tuple[int, int]]:
    jobs = []
    for subset, count in zip((1, 2, 3), config.counts):
        jobs.extend((subset, i) for i in range(count))
    return jobs


def _artifacts_complete(config: DatasetConfig, hull_id: str) -> bool:
    if not config.with_meshes:
        return True
    mesh_path = os.path.join(config.out_dir, "meshes", f"{hull_id}.stl")
    if not os.path.exists(mesh_path):
        return False
    return all(
        os.path.exists(os.path.join(config.out_dir, "images", f"{hull_id}_view_{k}.ppm"))
        for k in range(1, 6)
    )


def _run_jobs(config: DatasetConfig, todo: list[tuple[int, int]]):
    args = [
        (config.seed, subset, index, config.drag_grid, config.mesh_grid,
         config.rho, config.nu, config.with_meshes, config.out_dir)
        for subset, index in todo
    ]
    if config.workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            yield from pool.map(_hull_job, args)
    else:
        for a in args:
            yield _hull_job(a)


def build_dataset(config: DatasetConfig) -> DatasetManifest:
    """Build the dataset from scratch (see resume() for continuing one)."""
    os.makedirs(config.out_dir, exist_ok=True)
    if config.with_meshes:
        os.makedirs(os.path.join(config.out_dir, "meshes"), exist_ok=True)
        os.makedirs(os.path.join(config.out_dir, "images"), exist_ok=True)
    manifest = DatasetManifest(config=config)
    for subset, index in _required_ids(config):
        manifest.hulls[f"{subset}-{index}"] = {
            "status": "pending", "subset": subset, "index": index,
        }
    return _complete(manifest, set(manifest.hulls))


def _complete(manifest: DatasetManifest, todo_ids: set[str]) -> DatasetManifest:
    config = manifest.config
    t0 = time.perf_counter()
    todo = sorted(
        ((manifest.hulls[hid]["subset"], manifest.hulls[hid]["index"]) for hid in todo_ids),
    )
    results: dict[str, tuple[list[float], list[float]]] = {}
    for hull_id, params_vals, drag_vals in _run_jobs(config, todo):
        results[hull_id] = (params_vals, drag_vals)
        manifest.hulls[hull_id]["status"] = "done"

    # deterministic tables: recompute any rows we did not just produce
    params_rows: list[tuple[str, HullParameters]] = []
    drag_rows: list[tuple[str, list[float]]] = []
    existing_params = {}
    existing_drag = {}
    params_path = os.path.join(config.out_dir, "params.csv")
    drag_path = os.path.join(config.out_dir, "drag.csv")
    if os.path.exists(params_path):
        existing_params = dict(load_params(params_path))
    if os.path.exists(drag_path):
        ids, arr = load_drag_csv(drag_path)
        existing_drag = {hid: arr[i].tolist() for i, hid in enumerate(ids)}
    for hull_id in manifest.hull_ids():
        if hull_id in results:
            vals, drag = results[hull_id]
            params_rows.append((hull_id, HullParameters(vals)))
            drag_rows.append((hull_id, drag))
        elif hull_id in existing_params and hull_id in existing_drag:
            params_rows.append((hull_id, existing_params[hull_id]))
            drag_rows.append((hull_id, existing_drag[hull_id]))
        else:
            raise ParseError(
                f"manifest lists {hull_id} as done but params/drag rows are "
                f"missing from {params_path}")
    save_params(params_path, params_rows)
    _write_drag_csv(drag_path, drag_rows)
    manifest.wall_clock_s += time.perf_counter() - t0
    manifest.save()
    return manifest


def resume(out_dir: str) -> DatasetManifest:
    """Complete missing artifacts; finished rows are reproduced byte-identically."""
    manifest = DatasetManifest.load(out_dir)
    config = manifest.config
    if config.with_meshes:
        os.makedirs(os.path.join(config.out_dir, "meshes"), exist_ok=True)
        os.makedirs(os.path.join(config.out_dir, "images"), exist_ok=True)
    params_path = os.path.join(out_dir, "params.csv")
    have_params = set()
    if os.path.exists(params_path):
        have_params = {hid for hid, _ in load_params(params_path)}
    todo = set()
    for hull_id, info in manifest.hulls.items():
        done = (info["status"] == "done" and hull_id in have_params
                and _artifacts_complete(config, hull_id))
        if not done:
            todo.add(hull_id)
    if not todo:
        manifest.save()
        return manifest
    return _complete(manifest, todo)


# --------------------------------------------------------------------------- #
# dataset statistics
# --------------------------------------------------------------------------- #

@dataclass
class NnDistanceCurve:
    sample_counts: list[int]
    mean: list[float]
    std: list[float]


@dataclass
class DatasetStats:
    nn_curve: NnDistanceCurve
    cw_summary: dict[int, dict[str, float]]      # per subset, at (Fn 0.3, d 0.5)
    min_rt: dict[float, dict]                     # displacement -> {hull_id, rt, loa}

    def report(self) -> str:
        lines = ["# nearest-neighbor distance over sample count"]
        lines.append("count,mean,std")
        for c, m, s in zip(self.nn_curve.sample_counts, self.nn_curve.mean,
                           self.nn_curve.std):
            lines.append(f"{c},{m:.6f},{s:.6f}")
        lines.append("# Cw at (Fn=0.30, T/Dd=0.50) per subset")
        lines.append("subset,min,d10,d20,d30,d40,d50,d60,d70,d80,d90,max")
        for subset, s in sorted(self.cw_summary.items()):
            deciles = ",".join(f"{s[f'd{k}']:.4e}" for k in range(10, 100, 10))
            lines.append(f"{subset},{s['min']:.4e},{deciles},{s['max']:.4e}")
        if self.min_rt:
            lines.append("# minimum total drag when scaled to displacement")
            lines.append("displacement_m3,hull_id,rt_N,loa_m")
            for disp, rec in sorted(self.min_rt.items()):
                lines.append(f"{disp:g},{rec['hull_id']},{rec['rt']:.6e},{rec['loa']:.3f}")
        return "\n".join(lines)


def _nn_curve(shape_terms: np.ndarray, fractions=None) -> NnDistanceCurve:
    """Mean/std of nearest-neighbor distance with growing sample count.

    Terms are standardized to the subset-1 sampling ranges so every
    dimension contributes comparably.
    """
    from scipy.spatial import cKDTree

    base = ParameterRanges.for_subset(1)
    lo = base.lower[1:]
    hi = base.upper[1:]
    span = np.where(hi > lo, hi - lo, 1.0)
    normed = (shape_terms - lo) / span
    n = len(normed)
    fractions = fractions or [k / 10 for k in range(1, 11)]
    counts, means, stds = [], [], []
    for frac in fractions:
        m = max(2, int(round(frac * n)))
        pts = normed[:m]
        dist, _ = cKDTree(pts).query(pts, k=2)
        nn = dist[:, 1]
        counts.append(m)
        means.append(float(nn.mean()))
        stds.append(float(nn.std()))
    return NnDistanceCurve(sample_counts=counts, mean=means, std=stds)


def dataset_stats(out_dir: str, speed_mps: float | None = None,
                  displacements: list[float] | None = None,
                  draft_frac: float = 0.5) -> DatasetStats:
    """Spread statistics over a built dataset (need >= 2 completed hulls)."""
    manifest = DatasetManifest.load(out_dir)
    rows = load_params(os.path.join(out_dir, "params.csv"))
    if len(rows) < 2:
        raise HullKitError("need at least 2 completed hulls for statistics")
    ids, drag = load_drag_csv(os.path.join(out_dir, "drag.csv"))
    shape = np.array([p.shape_terms for _, p in rows])
    curve = _nn_curve(shape)

    col = DRAG_HEADER.index("Cw_d50_f030") - 1
    cw = drag[:, col]
    subsets = np.array([int(hid.split("-")[0]) for hid in ids])
    summary = {}
    for subset in sorted(set(subsets.tolist())):
        vals = cw[subsets == subset]
        rec = {"min": float(vals.min()), "max": float(vals.max())}
        for k in range(10, 100, 10):
            rec[f"d{k}"] = float(np.percentile(vals, k))
        summary[subset] = rec

    min_rt: dict[float, dict] = {}
    if speed_mps and displacements:
        params_by_id = dict(rows)
        for disp in displacements:
            best = None
            for hull_id in ids:
                params = params_by_id[hull_id]
                scaled = scale_to_displacement(params, disp, draft_frac)
                surf = HullSurface(scaled)
                cond = hydro.FlowConditions(speed=speed_mps,
                                            draft=draft_frac * surf.depth,
                                            rho=manifest.config.rho,
                                            nu=manifest.config.nu)
                _, _, rt = hydro.total_resistance(surf, cond)
                if best is None or rt < best["rt"]:
                    best = {"hull_id": hull_id, "rt": float(rt),
                            "loa": float(scaled.loa)}
            min_rt[float(disp)] = best
    return DatasetStats(nn_curve=curve, cw_summary=summary, min_rt=min_rt)
