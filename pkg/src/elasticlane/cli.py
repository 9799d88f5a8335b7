"""Command-line surface.

    elasticlane encode labels.txt --grid 100x36 --out runs/enc
    elasticlane evolve gt.txt --offset -20 --grid 100x64 --sigma 5 --out runs/ev
    elasticlane eval preds/ gts/ --metric culane --grid 100x36
    elasticlane gradcheck --seed 0
    elasticlane losscmp gt.txt --offset 50 --grid 128x128 --sigma 5

Every subcommand prints a single JSON report to standard output; files
(CSV, PGM, PNG figures) are written only when --out is given. Exit codes:
0 ok, 2 parse/input error, 3 capacity exceeded, 4 divergence guard,
5 self-check failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .checks import dft_suite, fd_suite
from .dataio import (
    AnnotationParseError,
    evolution_report,
    format_culane_lines,
    metrics_report,
    parse_culane_lines,
    polyline_from_points,
    tusimple_report,
    write_field_pgm,
    write_report_json,
    write_trace_csv,
)
from .elm import (
    CapacityError,
    HeavisideParams,
    LanePolyline,
    build_level_set,
    encode_lane,
    order_and_pad,
    smoothed_heaviside,
)
from .energy import EieParams, difference_field, eie_gradient, mse_gradient_wrt_phi
from .evolve import (
    DivergenceError,
    EvolutionConfig,
    evolve_explicit,
    evolve_implicit,
    evolve_mse,
    stable_step,
)
from .field import Field2D, GridShape
from .metrics import DetectionMetrics, LaneSet, match_and_score, tusimple_tally
from . import plots

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAPACITY = 3
EXIT_DIVERGENCE = 4
EXIT_CHECK = 5


def _grid(text: str) -> GridShape:
    try:
        w, h = text.lower().split("x")
        return GridShape(width=int(w), height=int(h))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}: {exc}") from None


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return value


def _emit(report: dict) -> None:
    sys.stdout.write(write_report_json(report).decode("ascii"))


def _load_polylines(path: Path, shape: GridShape) -> list:
    rows = np.arange(shape.height)
    raw = parse_culane_lines(path.read_text())
    return [polyline_from_points(points, rows) for points in raw]


def _load_lane(path: Path, shape: GridShape, index: int) -> LanePolyline:
    lanes = _load_polylines(path, shape)
    usable = [l for l in lanes if l.n_valid >= 2]
    if index >= len(usable):
        raise AnnotationParseError(
            f"{path}: requested lane {index} but only {len(usable)} usable lanes"
        )
    return usable[index]


def _shifted(lane: LanePolyline, offset: float) -> LanePolyline:
    xs = lane.xs.copy()
    xs[lane.valid] += offset
    return LanePolyline(rows=lane.rows, xs=xs, valid=lane.valid)


def cmd_encode(args) -> int:
    shape = args.grid
    hp = HeavisideParams(args.sigma)
    lanes = [l for l in _load_polylines(Path(args.labels), shape) if l.n_valid >= 2]
    stack = order_and_pad(lanes, args.max_lanes, shape, hp)
    slots = []
    for i in range(stack.capacity):
        exists = bool(stack.exists[i])
        slots.append({
            "index": i,
            "exists": exists,
            "pgm": f"lane_{i:02d}.pgm" if exists else None,
            "rows": np.flatnonzero(stack.ranges[i]).tolist(),
        })
    manifest = {
        "grid": {"width": shape.width, "height": shape.height},
        "sigma": args.sigma,
        "capacity": stack.capacity,
        "slots": slots,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for slot in slots:
            if slot["exists"]:
                pgm = write_field_pgm(stack.fields[slot["index"]])
                (out / slot["pgm"]).write_bytes(pgm)
        (out / "manifest.json").write_bytes(write_report_json(manifest))
        if stack.n_lanes:
            items = [(f"slot {i}", stack.fields[i]) for i in range(stack.n_lanes)]
            plots.save_field_figure(out / "fields.png", items)
    _emit(manifest)
    return EXIT_OK


def _evolve_config(args, shape: GridShape, mode: str) -> EvolutionConfig:
    step = args.step if args.step is not None else stable_step(shape, args.alpha)
    return EvolutionConfig(
        step_size=step,
        max_steps=args.max_steps,
        mode=mode,
        alpha=args.alpha,
        sigma=args.sigma,
        reinit_every=args.reinit_every,
        record_every=args.record_every,
        snapshot_every=args.snapshot_every,
        stop_tol=args.stop_tol,
    )


def cmd_evolve(args) -> int:
    shape = args.grid
    hp = HeavisideParams(args.sigma)
    gt_lane = _load_lane(Path(args.gt), shape, args.lane)
    if args.init is not None:
        init_lane = _load_lane(Path(args.init), shape, args.lane)
    else:
        init_lane = _shifted(gt_lane, args.offset)
    cfg = _evolve_config(args, shape, args.mode)
    gt_psi, mask = encode_lane(gt_lane, shape, hp)
    if args.mode == "implicit":
        psi_init, _ = encode_lane(init_lane, shape, hp)
        trace = evolve_implicit(psi_init, gt_psi, mask, cfg)
    else:
        trace = evolve_explicit(init_lane, gt_lane, shape, cfg)
    report = evolution_report(trace)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.csv").write_bytes(write_trace_csv(trace))
        (out / "summary.json").write_bytes(write_report_json(report))
        for step, state in trace.snapshots:
            if isinstance(state, Field2D):
                (out / f"psi_{step:06d}.pgm").write_bytes(write_field_pgm(state))
            else:
                (out / f"lane_{step:06d}.txt").write_text(
                    format_culane_lines([state])
                )
        plots.save_trace_figure(out / "trace.png", [(args.mode, trace)])
        if isinstance(trace.final_state, Field2D):
            (out / "final.pgm").write_bytes(write_field_pgm(trace.final_state))
            plots.save_field_figure(
                out / "fields.png",
                [("ground truth", gt_psi), ("final", trace.final_state)],
            )
        else:
            (out / "final_lane.txt").write_text(
                format_culane_lines([trace.final_state])
            )
            final_psi, _ = encode_lane(trace.final_state, shape, hp)
            plots.save_field_figure(
                out / "fields.png",
                [("ground truth", gt_psi), ("final", final_psi)],
            )
    _emit(report)
    return EXIT_OK


def cmd_eval(args) -> int:
    shape = args.grid
    pred_dir = Path(args.pred)
    gt_dir = Path(args.gt)
    gt_files = sorted(gt_dir.glob("*.txt"))
    names = []
    scores = []
    counts = np.zeros(3, dtype=np.int64)  # tp, fp, fn
    tallies = np.zeros(5, dtype=np.int64)
    lane_totals = np.zeros(2, dtype=np.int64)  # pred lanes, gt lanes
    for gt_file in gt_files:
        pred_file = pred_dir / gt_file.name
        if not pred_file.exists():
            print(f"error: no prediction file for {gt_file.name}", file=sys.stderr)
            return EXIT_PARSE
        preds = LaneSet(shape, _load_polylines(pred_file, shape))
        gts = LaneSet(shape, _load_polylines(gt_file, shape))
        names.append(gt_file.stem)
        if args.metric == "culane":
            m = match_and_score(preds, gts, args.iou_thresh, args.width_px)
            counts += (m.tp, m.fp, m.fn)
            scores.append(m.f1)
        else:
            t = tusimple_tally(preds, gts, args.x_thresh, args.match_frac)
            tallies += t
            lane_totals += (preds.n_lanes, gts.n_lanes)
            scores.append(t[0] / t[1] if t[1] > 0 else 0.0)
    if args.metric == "culane":
        report = metrics_report(DetectionMetrics.from_counts(*(int(v) for v in counts)))
        ylabel = "F1"
    else:
        correct, total, tp, fp, fn = (int(v) for v in tallies)
        report = tusimple_report(
            DetectionMetrics.from_counts(tp, fp, fn),
            acc=correct / total if total > 0 else 0.0,
            fp_rate=fp / int(lane_totals[0]) if lane_totals[0] > 0 else 0.0,
            fn_rate=fn / int(lane_totals[1]) if lane_totals[1] > 0 else 0.0,
        )
        ylabel = "accuracy"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_bytes(write_report_json(report))
        lines = ["image,score"] + [
            f"{n},{s:.12g}" for n, s in zip(names, scores)
        ]
        (out / "per_image.csv").write_text("\n".join(lines) + "\n")
        if names:
            plots.save_eval_figure(out / "eval.png", names, scores, ylabel)
    _emit(report)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    report = {
        "dft": dft_suite(seed=args.seed, size=args.dft_size, trials=args.dft_trials),
        "fd": fd_suite(
            seed=args.seed,
            size=args.fd_size,
            trials=args.fd_trials,
            corrupt_kernel=args.corrupt_kernel,
        ),
    }
    report["pass"] = report["dft"]["pass"] and report["fd"]["pass"]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "gradcheck.json").write_bytes(write_report_json(report))
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_CHECK


def _trace_dict(trace) -> dict:
    errors = [e if np.isfinite(e) else None for e in trace.lane_errors]
    return {
        "step": trace.step_indices.tolist(),
        "energy": trace.energies.tolist(),
        "lane_error": errors,
        "converged": trace.converged,
        "final_energy": trace.final_energy,
    }


def cmd_losscmp(args) -> int:
    shape = args.grid
    hp = HeavisideParams(args.sigma)
    ep = EieParams(args.alpha)
    gt_lane = _load_lane(Path(args.gt), shape, args.lane)
    init_lane = _shifted(gt_lane, -args.offset)
    gt_psi, mask = encode_lane(gt_lane, shape, hp)
    phi_init = build_level_set(init_lane, shape)
    psi_init = Field2D(smoothed_heaviside(phi_init, hp).values - 0.5)

    mse_grad = mse_gradient_wrt_phi(gt_psi, psi_init, phi_init, hp).values
    eie_grad = eie_gradient(difference_field(gt_psi, psi_init, ep)).values
    locality = {
        "mse_zero_grad_fraction": float(np.mean(mse_grad == 0.0)),
        "eie_zero_grad_fraction": float(np.mean(eie_grad == 0.0)),
        "saturated_fraction": float(np.mean(np.abs(phi_init.values) >= args.sigma)),
    }
    cfg = _evolve_config(args, shape, "implicit")
    eie_trace = evolve_implicit(psi_init, gt_psi, mask, cfg)
    mse_trace = evolve_mse(phi_init, gt_psi, mask, cfg)
    report = {
        "eie_trace": _trace_dict(eie_trace),
        "mse_trace": _trace_dict(mse_trace),
        "locality": locality,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eie_trace.csv").write_bytes(write_trace_csv(eie_trace))
        (out / "mse_trace.csv").write_bytes(write_trace_csv(mse_trace))
        (out / "losscmp.json").write_bytes(write_report_json(report))
        plots.save_losscmp_figure(out / "losscmp.png", eie_trace, mse_trace, locality)
    _emit(report)
    return EXIT_OK


def _add_common_grid(p, default="100x36", sigma=3.0):
    p.add_argument("--grid", type=_grid, default=_grid(default),
                   help=f"grid as WxH (default {default})")
    p.add_argument("--sigma", type=_positive, default=sigma,
                   help=f"Heaviside band half-width (default {sigma})")


def _add_evolution_flags(p):
    p.add_argument("--alpha", type=_positive, default=0.5,
                   help="prediction coupling weight (default 0.5)")
    p.add_argument("--step", type=_positive, default=None,
                   help="step size (default: stability-derived)")
    p.add_argument("--max-steps", type=_positive_int, default=500)
    p.add_argument("--record-every", type=_positive_int, default=1)
    p.add_argument("--reinit-every", type=_nonneg_int, default=0,
                   help="redistance (decode + re-encode) every N steps; 0 = off")
    p.add_argument("--snapshot-every", type=_nonneg_int, default=0,
                   help="store field/lane snapshots every N steps; 0 = off")
    p.add_argument("--stop-tol", type=float, default=1e-12,
                   help="stop once the recorded energy decrease falls below this")
    p.add_argument("--lane", type=_nonneg_int, default=0,
                   help="lane index within the labels file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elasticlane",
        description="Implicit lane maps, elastic-interaction energies, "
                    "curve evolution, and lane metrics.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("encode", help="encode annotation lanes as lane-map PGMs")
    p.add_argument("labels", help="annotation file (one lane per line)")
    _add_common_grid(p)
    p.add_argument("--max-lanes", type=_positive_int, default=4,
                   help="stack capacity (default 4)")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("evolve", help="run a curve-evolution simulation")
    p.add_argument("gt", help="ground-truth annotation file")
    p.add_argument("--init", default=None,
                   help="initialization annotation file (default: shifted ground truth)")
    p.add_argument("--offset", type=float, default=-20.0,
                   help="horizontal shift building the default initialization")
    p.add_argument("--mode", choices=("implicit", "explicit"), default="implicit")
    _add_common_grid(p)
    _add_evolution_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_evolve)

    p = sub.add_parser("eval", help="score predictions against ground truths")
    p.add_argument("pred", help="directory of prediction annotation files")
    p.add_argument("gt", help="directory of ground-truth annotation files")
    p.add_argument("--metric", choices=("culane", "tusimple"), default="culane")
    _add_common_grid(p)
    p.add_argument("--iou-thresh", type=_positive, default=0.5)
    p.add_argument("--width-px", type=_positive_int, default=30)
    p.add_argument("--x-thresh", type=_positive, default=20.0)
    p.add_argument("--match-frac", type=_positive, default=0.85)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("gradcheck", help="run the DFT-oracle and gradient self-checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dft-size", type=_positive_int, default=8)
    p.add_argument("--dft-trials", type=_positive_int, default=100)
    p.add_argument("--fd-size", type=_positive_int, default=16)
    p.add_argument("--fd-trials", type=_positive_int, default=20)
    p.add_argument("--corrupt-kernel", action="store_true",
                   help="negative control: corrupt the gradient kernel")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser("losscmp", help="compare spectral and MSE gradient flows")
    p.add_argument("gt", help="ground-truth annotation file")
    p.add_argument("--offset", type=float, default=50.0,
                   help="initial separation in pixels (init x = gt x - offset)")
    _add_common_grid(p, default="128x128", sigma=5.0)
    _add_evolution_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_losscmp)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (AnnotationParseError, FileNotFoundError, ValueError) as exc:
        if isinstance(exc, CapacityError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CAPACITY
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
