"""Command-line surface: register, synth, train, eval, selftest.

Exit codes: 0 success, 1 usage, 2 I/O, 3 validation, 4 selftest failure.
Every flag with a SIMREG_* environment variable counterpart (same name,
upper-cased, dashes to underscores: e.g. SIMREG_SEED, SIMREG_BETA) uses
the variable as its default; explicit flags win. Seeds for stochastic
commands are echoed in the JSON output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import estimator, pgm, selftest, synth, trainer
from .losses import LossWeights
from .randomization import PoseRange

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_SELFTEST = 4

ENV_PREFIX = "SIMREG_"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _env(name: str, fallback, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return fallback
    return cast(raw)


def _estimator_config(args) -> estimator.EstimatorConfig:
    return estimator.EstimatorConfig(
        n_theta=args.n_theta, n_rho=args.n_rho, beta=args.beta,
        window=not args.no_window, use_highpass=not args.no_highpass)


def _add_estimator_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=("soft", "hard"),
                   default=_env("mode", "soft"))
    p.add_argument("--beta", type=float, default=_env("beta", 100.0, float))
    p.add_argument("--n-theta", type=int, default=_env("n_theta", None, int))
    p.add_argument("--n-rho", type=int, default=_env("n_rho", None, int))
    p.add_argument("--no-window", action="store_true",
                   default=_env("no_window", False, lambda s: s == "1"))
    p.add_argument("--no-highpass", action="store_true",
                   default=_env("no_highpass", False, lambda s: s == "1"))


def _add_range_flags(p: argparse.ArgumentParser):
    p.add_argument("--t-max", type=float, default=_env("t_max", 50.0, float))
    p.add_argument("--scale-min", type=float, default=_env("scale_min", 0.8, float))
    p.add_argument("--scale-max", type=float, default=_env("scale_max", 1.2, float))
    p.add_argument("--theta-min", type=float, default=_env("theta_min", 0.0, float))
    p.add_argument("--theta-max", type=float, default=_env("theta_max", math.pi, float))


def _pose_range(args) -> PoseRange:
    return PoseRange(scale_min=args.scale_min, scale_max=args.scale_max,
                     theta_min=args.theta_min, theta_max=args.theta_max,
                     t_max=args.t_max)


def _print_json(payload: dict):
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_register(args) -> int:
    moving = pgm.read_image(args.moving)
    fixed = pgm.read_image(args.fixed)
    if moving.shape != fixed.shape:
        print(f"error: image sizes differ: {moving.shape} vs {fixed.shape}",
              file=sys.stderr)
        return EXIT_IO
    cfg = _estimator_config(args)
    est = estimator.estimate_sim2(moving, fixed, mode=args.mode, cfg=cfg)
    _print_json({
        "s": est.pose.scale,
        "theta_deg": math.degrees(est.pose.theta),
        "tx": est.pose.tx,
        "ty": est.pose.ty,
        "confidence": {"rot_scale": est.conf_rot_scale,
                       "translation": est.conf_translation},
        "low_confidence": est.low_confidence,
        "mode": args.mode,
    })
    if args.apply:
        pgm.write_image(args.apply, estimator.apply_estimate(moving, est))
    return 0


def cmd_synth(args) -> int:
    spec = synth.StyleSpec.random(seed=args.style_seed,
                                  kernel_size=args.kernel_size,
                                  blur_sigma=args.blur_sigma,
                                  gain=args.gain, bias=args.bias)
    manifest = synth.generate_corpus(args.out, n=args.n, seed=args.seed,
                                     spec=spec, pose_range=_pose_range(args),
                                     source_dir=args.source, size=args.size)
    _print_json({"out": str(args.out), "pairs": len(manifest["pairs"]),
                 "seed": args.seed})
    return 0


def _train_config(args) -> trainer.TrainConfig:
    ablations = set(filter(None, (args.ablate or "").split(",")))
    unknown = ablations - {"pr", "cycle", "xi_r", "theta_s"}
    if unknown:
        raise ValueError(f"unknown ablations: {sorted(unknown)}")
    return trainer.TrainConfig(
        mode=args.train_mode,
        no_pr="pr" in ablations, no_cycle="cycle" in ablations,
        no_l_xi_r="xi_r" in ablations, no_l_theta_s="theta_s" in ablations,
        learning_rate=args.lr, momentum=args.momentum, lr_decay=args.lr_decay,
        steps=args.steps, batch_size=args.batch, weights=LossWeights(),
        seed=args.seed, beta=args.beta, kernel_size=args.translator_kernel)


def cmd_train(args) -> int:
    config = _train_config(args)
    result = trainer.train(args.manifest, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params_path = out / "params.json"
    history_path = out / "history.csv"
    trainer.save_params(params_path, result.params_t, result.params_o, config)
    trainer.save_history(history_path, result.history)
    _print_json({"params": str(params_path), "history": str(history_path),
                 "steps": len(result.history), "seed": config.seed,
                 "final_total": result.history[-1]["total"]})
    return 0


def cmd_eval(args) -> int:
    params_t, _ = trainer.load_params(args.params)
    config = trainer.TrainConfig(seed=args.seed, beta=args.beta)
    metrics = trainer.evaluate(params_t, args.manifest, config, out_csv=args.out)
    _print_json({"out": str(args.out), "seed": args.seed,
                 "pairs": len(metrics["pairs"]),
                 "success_rate": metrics["success_rate"],
                 "mean_masked_l1": metrics["summary"]["mean_masked_l1"]})
    return 0


def cmd_selftest(args) -> int:
    failures = selftest.run(verbose=True)
    return EXIT_SELFTEST if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simreg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", help="estimate the SIM(2) pose mapping "
                                        "a moving image onto a fixed one")
    p.add_argument("moving")
    p.add_argument("fixed")
    _add_estimator_flags(p)
    p.add_argument("--apply", default=None,
                   help="write the pose-applied moving image here")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("synth", help="generate a weakly-paired corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--size", type=int, default=_env("size", 64, int))
    p.add_argument("--source", default=None,
                   help="directory of source images (default: synthetic textures)")
    p.add_argument("--blur-sigma", type=float, default=_env("blur_sigma", 1.0, float))
    p.add_argument("--kernel-size", type=int, default=_env("kernel_size", 3, int))
    p.add_argument("--gain", type=float, default=_env("gain", 0.9, float))
    p.add_argument("--bias", type=float, default=_env("bias", 0.05, float))
    p.add_argument("--style-seed", type=int, default=_env("style_seed", 0, int))
    _add_range_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the parametric translators")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train-mode", choices=("basic", "full"),
                   default=_env("train_mode", "full"))
    p.add_argument("--ablate", default=_env("ablate", ""),
                   help="comma list from: pr,cycle,xi_r,theta_s")
    p.add_argument("--lr", type=float, default=_env("lr", 3e-3, float))
    p.add_argument("--momentum", type=float, default=_env("momentum", 0.5, float))
    p.add_argument("--lr-decay", type=float, default=_env("lr_decay", 1.0, float))
    p.add_argument("--steps", type=int, default=_env("steps", 100, int))
    p.add_argument("--batch", type=int, default=_env("batch", 4, int))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--beta", type=float, default=_env("beta", 100.0, float))
    p.add_argument("--translator-kernel", type=int,
                   default=_env("translator_kernel", 5, int))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate trained params on an eval manifest")
    p.add_argument("--manifest", required=True, help="eval manifest (with poses)")
    p.add_argument("--params", required=True)
    p.add_argument("--out", required=True, help="metrics CSV path")
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--beta", type=float, default=_env("beta", 100.0, float))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("selftest", help="run the module invariant suites")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError,
            pgm.ImageFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
