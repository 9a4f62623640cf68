"""Command-line front door.

Exit codes: 0 success, 1 usage error, 2 data/configuration error. Every
subcommand accepts --seed; commands without randomness simply ignore it,
so scripted runs stay uniform.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import cameras, codec, diffusion, drags, fields, metrics, nets, spectral
from .errors import UniflowError
from .unify import conflict_report, load_bundle
from .unify import unify as run_unify

DEFAULT_LIMITS = {"max_dim": 512, "max_frames": 64}


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _schedule_from_config(cfg: dict) -> diffusion.NoiseSchedule:
    sched = cfg.get("schedule", {})
    return diffusion.NoiseSchedule.linear(
        t_steps=int(sched.get("t_steps", 100)),
        beta_start=float(sched.get("beta_start", 1e-4)),
        beta_end=float(sched.get("beta_end", 0.02)),
    )


def _write_outputs(seq: fields.FlowSequence, out_dir: str) -> None:
    fields.write_flow_sequence(seq, out_dir)
    print(f"wrote {len(seq)} fields to {out_dir}")


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_camera_flow(args) -> int:
    traj = cameras.load_trajectory(args.trajectory)
    depth = cameras.parse_depth_spec(args.depth, args.width, args.height)
    _write_outputs(cameras.camera_flow(traj, depth), args.out)
    return 0


def cmd_drag_flow(args) -> int:
    ann = drags.load_annotation(args.annotation)
    _write_outputs(drags.drag_flow(ann, args.sigma), args.out)
    return 0


def cmd_unify(args) -> int:
    bundle, mode = load_bundle(args.bundle)
    if args.mode is not None:
        mode = args.mode
    seq = run_unify(bundle, mode)
    _write_outputs(seq, args.out)
    if len(bundle.rendered_controls()) >= 2:
        report = conflict_report(bundle)
        for l, value in enumerate(report, start=1):
            print(f"conflict frame {l}: {value:+.6f}")
    return 0


def cmd_stabilize(args) -> int:
    seq = fields.read_flow_sequence(args.input)
    if args.weights is not None:
        w = spectral.load_weights(args.weights)
    else:
        w = spectral.make_weights(args.filter, len(seq))
    out = spectral.reweight_flow_sequence(seq, w)
    if len(seq) >= 3:
        print(f"flicker before: {spectral.flicker_metric(seq):.9g}")
        print(f"flicker after:  {spectral.flicker_metric(out):.9g}")
    else:
        print("flicker: n/a (needs at least 3 fields)")
    _write_outputs(out, args.out)
    return 0


def cmd_codec(args) -> int:
    if args.encode is not None:
        seq = fields.read_flow_sequence(args.encode)
        lat = codec.encode(seq)
        codec.save_latent(lat, args.out)
        tb, hb, wb, _ = lat.shape
        print(f"encoded to {tb}x{hb}x{wb} latent cells at {args.out}")
    else:
        lat = codec.load_latent(args.decode)
        _write_outputs(codec.decode(lat), args.out)
    return 0


def cmd_toy_train(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    sched = _schedule_from_config(cfg)
    dataset_spec = cfg.get("dataset", "two-mode")
    if dataset_spec == "two-mode":
        dataset, _ = diffusion.two_mode_flow_latents()
    else:
        rows = [codec.load_latent(p).values.reshape(-1) for p in dataset_spec]
        dataset = np.stack(rows)
    model = nets.ToyDenoiser(
        data_dim=dataset.shape[1],
        hidden_dim=int(cfg.get("hidden_dim", 64)),
        time_dim=int(cfg.get("time_dim", 8)),
        seed=seed,
    )
    steps = int(cfg.get("steps", 2000))
    model, losses = diffusion.train(
        model,
        dataset,
        sched,
        steps=steps,
        lr=float(cfg.get("lr", 1e-3)),
        batch_size=int(cfg.get("batch_size", 32)),
        seed=seed,
    )
    nets.save_checkpoint(model, args.out, seed=seed, steps=steps)
    if args.loss_csv:
        with open(args.loss_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "loss"])
            for i, loss in enumerate(losses, start=1):
                writer.writerow([i, f"{loss:.12g}"])
    if len(losses):
        print(f"trained {steps} steps: loss {losses[0]:.6g} -> {losses[-1]:.6g}")
    else:
        print("trained 0 steps: model unchanged")
    return 0


def cmd_toy_sample(args) -> int:
    model, meta = nets.load_checkpoint(args.model)
    cfg = load_config(args.config)
    sched = _schedule_from_config(cfg)
    seed = args.seed if args.seed is not None else 0
    condition = None
    if args.condition is not None:
        condition = codec.load_latent(args.condition).values.reshape(1, -1)
    out = diffusion.sample(model, sched, (args.count, model.data_dim), seed=seed, condition=condition)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(model.data_dim)])
        for row in out:
            writer.writerow([f"{v:.12g}" for v in row])
    print(f"wrote {args.count} samples to {args.out}")
    return 0


def cmd_eval_traj(args) -> int:
    pred = metrics.PoseTrajectory.from_camera_trajectory(cameras.load_trajectory(args.pred))
    gt = metrics.PoseTrajectory.from_camera_trajectory(cameras.load_trajectory(args.gt))
    rows = [("full", metrics.translation_error(pred, gt), metrics.rotation_error(pred, gt))]
    for mode in ("basic", "difficult"):
        try:
            p = metrics.sample_trajectory(pred, mode, args.clip_len)
            g = metrics.sample_trajectory(gt, mode, args.clip_len)
        except UniflowError:
            continue
        rows.append((mode, metrics.translation_error(p, g), metrics.rotation_error(p, g)))
    for name, t_err, r_err in rows:
        print(f"{name:10s} T-Err {t_err:.6f}  R-Err {r_err:.6f}")
    if args.report:
        with open(args.report, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sampling", "t_err", "r_err"])
            for name, t_err, r_err in rows:
                writer.writerow([name, f"{t_err:.12g}", f"{r_err:.12g}"])
    return 0


def cmd_viz(args) -> int:
    from PIL import Image

    if os.path.isdir(args.input):
        seq = fields.read_flow_sequence(args.input)
        os.makedirs(args.out, exist_ok=True)
        m = args.max_magnitude
        if m is None:
            m = max(float(f.magnitude().max()) for f in seq) or 1.0
        for i, f in enumerate(seq):
            img = Image.fromarray(fields.flow_to_color(f, m))
            img.save(os.path.join(args.out, f"frame_{i + 1:04d}.png"))
        print(f"wrote {len(seq)} images to {args.out}")
    else:
        field = fields.read_flo(args.input)
        Image.fromarray(fields.flow_to_color(field, args.max_magnitude)).save(args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = load_config(args.config)
    limits = {**DEFAULT_LIMITS, **cfg.get("limits", {})}
    port = args.port
    if port is None:
        port = int(os.environ.get("UNIFLOW_PORT", cfg.get("port", 8080)))
    app = create_app(limits=limits, drag_sigma=cfg.get("drag_sigma"))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="uniflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--seed", type=int, default=None, help="seed for stochastic steps")
        p.add_argument("--config", default=None, help="JSON config with defaults")
        return p

    p = add("camera-flow", cmd_camera_flow, "render dense flow from a camera trajectory")
    p.add_argument("--trajectory", required=True, help="camera trajectory JSON")
    p.add_argument("--depth", required=True, help="'constant:V', 'ramp:N:F', or PFM path")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory for .flo fields")

    p = add("drag-flow", cmd_drag_flow, "densify drag annotations into flow")
    p.add_argument("--annotation", required=True, help="annotation JSON")
    p.add_argument("--sigma", type=float, default=None, help="densifier bandwidth in px")
    p.add_argument("--out", required=True)

    p = add("unify", cmd_unify, "fuse a control bundle into one flow sequence")
    p.add_argument("--bundle", required=True, help="bundle spec JSON")
    p.add_argument("--mode", choices=["add", "chain"], default=None)
    p.add_argument("--out", required=True)

    p = add("stabilize", cmd_stabilize, "temporal spectral filtering of a sequence")
    p.add_argument("--input", required=True, help=".flo directory")
    p.add_argument("--filter", default="identity", help="identity | dc-only | lowpass:k")
    p.add_argument("--weights", default=None, help="custom weight JSON file")
    p.add_argument("--out", required=True)

    p = add("codec", cmd_codec, "compress flow to latents or decode back")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--encode", default=None, help=".flo directory to encode")
    group.add_argument("--decode", default=None, help="latent file to decode")
    p.add_argument("--out", required=True)

    p = add("toy-train", cmd_toy_train, "train the toy denoiser on flow latents")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--loss-csv", default=None, help="write the loss curve as CSV")

    p = add("toy-sample", cmd_toy_sample, "draw samples from a trained denoiser")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--count", type=int, default=16)
    p.add_argument("--condition", default=None, help="latent file used as condition")
    p.add_argument("--out", required=True, help="samples CSV path")

    p = add("eval-traj", cmd_eval_traj, "trajectory alignment metrics")
    p.add_argument("--pred", required=True, help="predicted trajectory JSON")
    p.add_argument("--gt", required=True, help="reference trajectory JSON")
    p.add_argument("--clip-len", type=int, default=16)
    p.add_argument("--report", default=None, help="CSV report path")

    p = add("viz", cmd_viz, "render flow fields as color PNGs")
    p.add_argument("--input", required=True, help=".flo file or directory")
    p.add_argument("--out", required=True, help="PNG path or directory")
    p.add_argument("--max-magnitude", type=float, default=None)

    p = add("serve", cmd_serve, "run the preview HTTP service")
    p.add_argument("--port", type=int, default=None, help="overrides UNIFLOW_PORT")
    p.add_argument("--host", default="127.0.0.1")

    return parser


def cli_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not getattr(args, "handler", None):
        parser.print_help()
        return 1
    try:
        return args.handler(args)
    except (UniflowError, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"uniflow: {e}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
