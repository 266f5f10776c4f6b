"""Command-line entry point: `hullkit <subcommand> ...`.

Every subcommand echoes its resolved configuration, writes only inside the
chosen output directory, and takes all randomness from --seed.  Exit codes:
0 success, 1 domain/input error (one-line `error: ...` on stderr), 2 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

KNOT_MS = 0.514444


def _echo_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print("config: " + json.dumps(resolved, default=str))


def _parse_counts(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three counts: a,b,c")
    return tuple(int(p) for p in parts)  # type: ignore[return-value]


def _parse_grid(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected nx,nz")
    return int(parts[0]), int(parts[1])


def _cmd_generate(args) -> int:
    from .dataset import DatasetConfig, build_dataset

    config = DatasetConfig(out_dir=args.out, counts=args.counts, seed=args.seed,
                           workers=args.workers, with_meshes=args.meshes,
                           drag_grid=args.grid)
    manifest = build_dataset(config)
    print(f"built {manifest.completed()}/{manifest.requested()} hulls in "
          f"{manifest.wall_clock_s:.1f} s -> {args.out}")
    return 0


def _cmd_check(args) -> int:
    from .params import check_feasibility, load_params

    rows = load_params(args.params)
    for hull_id, params in rows:
        report = check_feasibility(params)
        if report.feasible:
            print(f"{hull_id}: feasible")
        else:
            worst = ", ".join(f"{c.name}({c.margin:.4f})" for c in report.violated[:5])
            print(f"{hull_id}: infeasible [{worst}]")
    return 0


def _cmd_mesh(args) -> int:
    from .mesh import export_stl, generate_mesh
    from .params import load_params
    from .surface import HullSurface
    from .views import render_views

    os.makedirs(args.out, exist_ok=True)
    nx, nz = args.grid
    for hull_id, params in load_params(args.params):
        surf = HullSurface(params)
        mesh = generate_mesh(surf, nx, nz)
        stl_path = os.path.join(args.out, f"{hull_id}.stl")
        export_stl(mesh, stl_path, args.format)
        render_views(mesh, args.out, prefix=f"{hull_id}_view")
        print(f"{hull_id}: {mesh.n_vertices} vertices, {mesh.n_faces} faces "
              f"-> {stl_path} + 5 views")
    return 0


def _cmd_drag(args) -> int:
    from . import hydro
    from .dataset import DRAG_HEADER, drag_row_values
    from .params import load_params
    from .surface import HullSurface

    os.makedirs(args.out, exist_ok=True)
    nx, nz = args.grid
    rows = []
    if args.wigley:
        table = hydro.wigley_drag_table(nx=nx, nz=nz)
        rows.append(("wigley", drag_row_values(table)))
    else:
        if not args.params:
            print("error: drag requires --params or --wigley", file=sys.stderr)
            return 1
        for hull_id, params in load_params(args.params):
            table = hydro.sweep_32(HullSurface(params), nx, nz)
            rows.append((hull_id, drag_row_values(table)))
    out_path = os.path.join(args.out, "drag.csv")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(DRAG_HEADER) + "\n")
        for hull_id, values in rows:
            fh.write(hull_id + "," + ",".join(f"{v:.9e}" for v in values) + "\n")
    print(f"wrote {len(rows)} drag table rows -> {out_path}")
    return 0


def _cmd_reconstruct(args) -> int:
    from .chamfer import load_target_cloud
    from .evolve import GaConfig, reconstruct_hull
    from .params import save_params

    os.makedirs(args.out, exist_ok=True)
    target = load_target_cloud(args.target, samples=args.samples, seed=args.seed)
    config = GaConfig(population=args.pop, generations=args.gens, seed=args.seed)
    best, result, history = reconstruct_hull(target, config)
    save_params(os.path.join(args.out, "reconstructed.csv"), [("fit-0", best)])
    with open(os.path.join(args.out, "history.csv"), "w", encoding="utf-8") as fh:
        fh.write("generation,best_cd\n")
        for gen, cd in enumerate(history):
            fh.write(f"{gen},{cd:.9e}\n")
    print(f"cd={result.cd:.6e} rms={result.rms_cd:.6e} m "
          f"normalized={result.normalized_rms_pct:.4f}% of reference length")
    return 0


def _cmd_train(args) -> int:
    from .dataset import load_drag_csv, DRAG_HEADER
    from .params import load_params
    from .surrogate import TrainingConfig, train

    rows = load_params(os.path.join(args.dataset, "params.csv"))
    ids, drag = load_drag_csv(os.path.join(args.dataset, "drag.csv"))
    by_id = {hid: p for hid, p in rows}
    cw_cols = [i - 1 for i, name in enumerate(DRAG_HEADER) if name.startswith("Cw_")]
    x = np.array([by_id[hid].shape_terms for hid in ids])
    cw = drag[:, cw_cols]
    config = TrainingConfig(epochs=args.epochs, seed=args.seed,
                            batch_size=args.batch_size)
    model, report = train((x, cw), config)
    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, "surrogate.shln")
    model.save(model_path)
    with open(os.path.join(args.out, "training_report.csv"), "w", encoding="utf-8") as fh:
        fh.write(report.table() + "\n")
    print(f"trained on {report.n_train} rows (+{report.n_upsampled} upsampled); "
          f"validation R^2 = {report.val_r2:.4f} -> {model_path}")
    return 0


def _cmd_predict(args) -> int:
    from .params import load_params
    from .surrogate import SurrogateModel
    from . import hydro

    model = SurrogateModel.load(args.model)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "predictions.csv")
    labels = hydro.DragTable.condition_labels()
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("hull_id," + ",".join(f"log10Cw_{lab}" for lab in labels) + "\n")
        for hull_id, params in load_params(args.params):
            pred = model.predict(params.shape_terms)
            fh.write(hull_id + "," + ",".join(f"{v:.9e}" for v in pred) + "\n")
    print(f"wrote predictions -> {out_path}")
    return 0


def _cmd_optimize(args) -> int:
    from .evolve import DragCondition, GaConfig, mask_for, optimize_drag
    from .params import load_params, save_params
    from .surrogate import SurrogateModel

    rows = load_params(args.params)
    if len(rows) != 1:
        print("error: optimize expects exactly one seed hull row", file=sys.stderr)
        return 1
    seed_hull = rows[0][1]
    model = SurrogateModel.load(args.model) if args.model else None
    condition = DragCondition(speed=args.speed_knots * KNOT_MS,
                              draft_frac=args.draft_frac)
    config = GaConfig(population=args.pop, generations=args.gens, seed=args.seed,
                      frozen=mask_for(args.freeze_all_except))
    pareto = optimize_drag(seed_hull, condition, config,
                           evaluator="surrogate" if model else "direct",
                           model=model)
    os.makedirs(args.out, exist_ok=True)
    save_params(os.path.join(args.out, "pareto.csv"),
                [(f"opt-{i}", m.params) for i, m in enumerate(pareto.members)])
    with open(os.path.join(args.out, "objectives.csv"), "w", encoding="utf-8") as fh:
        fh.write("member,rank,rt_N,cw\n")
        for i, m in enumerate(pareto.members):
            fh.write(f"opt-{i},{m.rank},{m.rt:.9e},{m.cw:.9e}\n")
    best = pareto.best_rt()
    print(f"{len(pareto.members)} feasible members; best Rt = {best.rt:.6e} N")
    return 0


def _cmd_stats(args) -> int:
    from .dataset import dataset_stats

    speed = args.speed_knots * KNOT_MS if args.speed_knots else None
    disps = [float(d) for d in args.displacement_m3.split(",")] if args.displacement_m3 else None
    stats = dataset_stats(args.dataset, speed_mps=speed, displacements=disps,
                          draft_frac=args.draft_frac)
    report = stats.report()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "stats.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
        print(f"wrote stats -> {path}")
    else:
        print(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hullkit",
                                     description="Parametric hull design and drag toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default="out"):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=out_default)

    p = sub.add_parser("generate", help="build a dataset of feasible hulls")
    common(p, "dataset")
    p.add_argument("--counts", type=_parse_counts, default=(100, 100, 100),
                   metavar="A,B,C")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--meshes", action="store_true", help="also write STL + views")
    p.add_argument("--grid", type=_parse_grid, default=(301, 51), metavar="NX,NZ")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("check", help="algebraic feasibility report")
    p.add_argument("--params", required=True)
    p.set_defaults(func=_cmd_check, seed=0)

    p = sub.add_parser("mesh", help="params -> STL + five views")
    common(p)
    p.add_argument("--params", required=True)
    p.add_argument("--grid", type=_parse_grid, default=(120, 60), metavar="NX,NZ")
    p.add_argument("--format", choices=("ascii", "binary"), default="binary")
    p.set_defaults(func=_cmd_mesh)

    p = sub.add_parser("drag", help="params -> 32-coefficient drag table")
    common(p)
    p.add_argument("--params")
    p.add_argument("--wigley", action="store_true",
                   help="use the internal Wigley benchmark hull")
    p.add_argument("--grid", type=_parse_grid, default=(301, 51), metavar="NX,NZ")
    p.set_defaults(func=_cmd_drag)

    p = sub.add_parser("reconstruct", help="fit the parameterization to a mesh")
    common(p)
    p.add_argument("--target", required=True, help="STL or OBJ file")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--pop", type=int, default=100)
    p.add_argument("--gens", type=int, default=100)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("train", help="train the drag surrogate on a dataset")
    common(p, "model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--batch-size", type=int, default=64)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="surrogate log10(Cw) predictions")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--params", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("optimize", help="NSGA-II drag minimization")
    common(p)
    p.add_argument("--params", required=True, help="seed hull (one row)")
    p.add_argument("--model", help="surrogate model file (direct pipeline if omitted)")
    p.add_argument("--speed-knots", type=float, required=True)
    p.add_argument("--draft-frac", type=float, required=True)
    p.add_argument("--freeze-all-except", choices=("bulbs", "ends"),
                   required=True)
    p.add_argument("--pop", type=int, default=60)
    p.add_argument("--gens", type=int, default=40)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("stats", help="dataset spread statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--speed-knots", type=float, default=None)
    p.add_argument("--displacement-m3", default=None, metavar="V1,V2,...")
    p.add_argument("--draft-frac", type=float, default=0.5)
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    from .errors import HullKitError

    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except HullKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
