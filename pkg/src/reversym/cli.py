"""Command-line entry point: simulate, train, eval, analyze.

Every run writes a manifest before doing any work and finalizes it on
success.  Exit codes: 0 success, 2 usage or validation error, 3 numerical
failure.  Config precedence for training: command-line flag over config
file over built-in default; the resolved configuration is echoed into the
manifest.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict

import numpy as np

from .analysis import (
    constructed_worst_cases,
    maxerror_comparison,
    solver_order_experiment,
    write_csv,
    write_summary,
)
from .analysis.sweeps import alpha_sweep, energy_curves, horizon_sweep, ratio_sweep, reversal_track
from .dataio import generate_dataset, read_dataset
from .dataio.generate import default_sampling
from .manifest import RunManifest, manifest_id
from .model import Model, ModelConfig, init_params, load_checkpoint, save_checkpoint
from .model.params import config_from_params
from .training import TrainSettings, TrainingDiverged, evaluate, read_train_config, train
from .training.losses import LossConfig

EXIT_USAGE = 2
EXIT_NUMERIC = 3

SYSTEM_CHOICES = ("simple-spring", "forced-spring", "damped-spring", "pendulum")
EXPERIMENTS = ("solver-order", "maxerror", "alpha-sweep", "horizon-sweep",
               "ratio-sweep", "reversal-track")


class CliError(RuntimeError):
    pass


def _out_dir(args, command: str, config: dict) -> str:
    if getattr(args, "out", None):
        return args.out
    return os.path.join("runs", f"{command}-{manifest_id(command, config)}")


def cmd_simulate(args) -> int:
    config = {
        "system": args.system, "n_agents": args.n_agents, "n_train": args.n_train,
        "n_test": args.n_test, "seed": args.seed, "edge_prob": args.edge_prob,
        "dt": args.dt, "stride": args.stride,
    }
    out = _out_dir(args, "simulate", config)
    dataset_dir = os.path.join(out, "dataset")
    if os.path.exists(dataset_dir) and not args.force:
        raise CliError(f"{dataset_dir} exists; pass --force to overwrite")
    manifest = RunManifest("simulate", config, args.seed, out)
    manifest.write()
    overrides = {}
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.stride is not None:
        overrides["stride"] = args.stride
    sampling = default_sampling(args.system, seed=args.seed, **overrides)
    _, _, report = generate_dataset(args.system, args.n_agents, sampling,
                                    args.n_train, args.n_test, out_dir=dataset_dir,
                                    edge_prob=args.edge_prob)
    if report.regenerated:
        print(f"regenerated {report.regenerated} diverged trajectories")
    manifest.finish([dataset_dir])
    print(dataset_dir)
    return 0


def _resolved_settings(args) -> TrainSettings:
    settings = read_train_config(args.config) if args.config else TrainSettings()
    for key in ("dataset", "alpha", "variant", "epochs", "lr", "batch", "seed",
                "solver_substeps", "clip"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(settings, key, value)
    if not settings.dataset:
        raise CliError("no dataset given (flag --dataset or config key `dataset`)")
    return settings


def cmd_train(args) -> int:
    settings = _resolved_settings(args)
    config = asdict(settings)
    out = _out_dir(args, "train", config)
    manifest = RunManifest("train", config, settings.seed, out)
    manifest.write()
    meta, records = read_dataset(settings.dataset)
    model_cfg = ModelConfig(feature_dim=meta.feature_dim)
    model = Model(model_cfg, init_params(model_cfg, seed=settings.seed),
                  substeps=settings.solver_substeps)
    loss_cfg = LossConfig(alpha=settings.alpha, variant=settings.variant)
    rows = []

    def log(report):
        rows.append((report.epoch, report.l_pred, report.l_reverse, report.total))
        print(f"epoch {report.epoch}: L_pred {report.l_pred:.6g} "
              f"L_reverse {report.l_reverse:.6g} total {report.total:.6g}")

    try:
        train(model, records[:meta.n_train], meta.sampling, loss_cfg,
              epochs=settings.epochs, seed=settings.seed, lr=settings.lr,
              batch_size=settings.batch, clip=settings.clip_or_none(), log=log)
    except TrainingDiverged as err:
        ckpt = os.path.join(out, "last_good.ckpt")
        save_checkpoint(ckpt, model.params)
        print(f"{err}; last good checkpoint at {ckpt}", file=sys.stderr)
        return EXIT_NUMERIC
    ckpt = os.path.join(out, "checkpoint.ckpt")
    save_checkpoint(ckpt, model.params)
    losses_csv = os.path.join(out, "losses.csv")
    write_csv(losses_csv, ["epoch", "l_pred", "l_reverse", "total"], rows)
    manifest.finish([ckpt, losses_csv])
    print(ckpt)
    return 0


def cmd_eval(args) -> int:
    config = {"checkpoint": args.checkpoint, "dataset": args.dataset,
              "mask_ratio": args.mask_ratio, "max_length": args.max_length,
              "mode": args.mode, "seed": args.seed,
              "energy_curves": args.energy_curves}
    out = _out_dir(args, "eval", config)
    manifest = RunManifest("eval", config, args.seed, out)
    manifest.write()
    params = load_checkpoint(args.checkpoint)
    model_cfg = config_from_params(params)
    meta, records = read_dataset(args.dataset)
    if model_cfg.feature_dim != meta.feature_dim:
        raise CliError(f"checkpoint feature dim {model_cfg.feature_dim} does not "
                       f"match dataset feature dim {meta.feature_dim}")
    model = Model(model_cfg, params)
    eval_records = records[meta.n_train:] if args.mode == "test" else records[:meta.n_train]
    lengths = sorted({min(L, args.max_length) for L in (20, 30, 40, 50, 60)})
    result = evaluate(model, eval_records, meta.sampling, mode=args.mode,
                      mask_ratio=args.mask_ratio, mask_seed=args.seed,
                      max_length=args.max_length, lengths=lengths)
    metrics_csv = os.path.join(out, "metrics.csv")
    rows = [("overall", result["mse"])]
    rows += [(f"length_{L}", mse) for L, mse in sorted(result["per_length"].items())]
    write_csv(metrics_csv, ["metric", "mse"], rows)
    outputs = [metrics_csv]
    if args.energy_curves:
        curves = energy_curves(args.dataset, model,
                               list(range(meta.n_train,
                                          meta.n_train + min(args.energy_curves,
                                                             meta.n_test))))
        energy_csv = os.path.join(out, "energy.csv")
        write_csv(energy_csv, ["traj_id", "frame", "time", "predicted_total",
                               "true_total"], curves)
        outputs.append(energy_csv)
    manifest.finish(outputs)
    print(metrics_csv)
    return 0


def cmd_analyze(args) -> int:
    config = {"experiment": args.experiment, "dataset": args.dataset,
              "integrator": args.integrator, "system": args.analytic_system,
              "alphas": args.alphas, "lengths": args.lengths, "ratios": args.ratios,
              "alpha": args.alpha, "epochs": args.epochs, "seed": args.seed,
              "scenarios": args.scenarios}
    out = _out_dir(args, "analyze", config)
    manifest = RunManifest("analyze", config, args.seed, out)
    manifest.write()
    outputs = []
    summary = [f"experiment {args.experiment}"]

    if args.experiment == "solver-order":
        result = solver_order_experiment(args.analytic_system, args.integrator)
        csv = os.path.join(out, "solver_order.csv")
        write_csv(csv, ["dt", "horizon", "reconstruction_sq", "closure_sq"],
                  result.rows())
        outputs.append(csv)
        summary += [
            f"system {result.system} integrator {result.integrator}",
            f"dt_slope_reconstruction {result.dt_slope_recon:.6g}",
            f"dt_slope_closure {result.dt_slope_closure:.6g}",
            f"horizon_slope_reconstruction {result.horizon_slope_recon:.6g}",
        ]
    elif args.experiment == "maxerror":
        constructed = constructed_worst_cases()
        sampled = maxerror_comparison(n_scenarios=args.scenarios, seed=args.seed)
        csv = os.path.join(out, "maxerror.csv")
        rows = [("constructed",) + c for c in constructed.rows()]
        rows += [("sampled",) + c for c in sampled.rows()]
        write_csv(csv, ["kind", "a", "b", "maxerr_impl1", "maxerr_impl2"], rows)
        outputs.append(csv)
        summary.append(f"fraction_impl1_no_worse {sampled.fraction_impl1_no_worse():.6g}")
    elif args.experiment == "alpha-sweep":
        _need_dataset(args)
        rows = alpha_sweep(args.dataset, args.alphas, args.epochs, args.seed,
                           lr=args.lr, batch=args.batch)
        csv = os.path.join(out, "alpha_sweep.csv")
        write_csv(csv, ["alpha", "final_l_pred", "final_l_reverse", "test_mse",
                        "diverged"], rows)
        outputs.append(csv)
        best = min((r for r in rows if not r[4]), key=lambda r: r[3])
        summary.append(f"best_alpha {best[0]:.6g} mse {best[3]:.6g}")
    elif args.experiment == "horizon-sweep":
        _need_dataset(args)
        rows = horizon_sweep(args.dataset, args.lengths, args.epochs, args.seed,
                             alpha=args.alpha, lr=args.lr, batch=args.batch)
        csv = os.path.join(out, "horizon_sweep.csv")
        write_csv(csv, ["length", "test_mse"], rows)
        outputs.append(csv)
    elif args.experiment == "ratio-sweep":
        _need_dataset(args)
        rows = ratio_sweep(args.dataset, args.ratios, args.epochs, args.seed,
                           alpha=args.alpha, lr=args.lr, batch=args.batch)
        csv = os.path.join(out, "ratio_sweep.csv")
        write_csv(csv, ["ratio", "test_mse"], rows)
        outputs.append(csv)
    elif args.experiment == "reversal-track":
        _need_dataset(args)
        rows = reversal_track(args.dataset, args.alpha, args.epochs, args.seed,
                              lr=args.lr, batch=args.batch)
        csv = os.path.join(out, "reversal_track.csv")
        write_csv(csv, ["epoch", "l_pred", "l_reverse", "total"], rows)
        outputs.append(csv)
        summary.append(f"alpha {args.alpha:.6g} (reversal tracked"
                       + (", never backpropagated)" if args.alpha == 0 else ")"))
    summary_path = os.path.join(out, "summary.txt")
    write_summary(summary_path, summary)
    outputs.append(summary_path)
    manifest.finish(outputs)
    print(summary_path)
    return 0


def _need_dataset(args) -> None:
    if not args.dataset:
        raise CliError(f"experiment {args.experiment} needs --dataset")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reversym")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a trajectory dataset")
    sim.add_argument("--system", required=True, choices=SYSTEM_CHOICES)
    sim.add_argument("--n-agents", type=int, default=5)
    sim.add_argument("--n-train", type=int, default=200)
    sim.add_argument("--n-test", type=int, default=50)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--edge-prob", type=float, default=0.5)
    sim.add_argument("--dt", type=float, default=None,
                     help="integration step (default 0.001 springs, 0.0001 pendulum)")
    sim.add_argument("--stride", type=int, default=None)
    sim.add_argument("--out", default=None)
    sim.add_argument("--force", action="store_true")
    sim.set_defaults(fn=cmd_simulate)

    tr = sub.add_parser("train", help="train a model on a dataset")
    tr.add_argument("--config", default=None, help="plain-text key value file")
    tr.add_argument("--dataset", default=None)
    tr.add_argument("--alpha", type=float, default=None)
    tr.add_argument("--variant", choices=("tango", "gt-rev", "rev2"), default=None)
    tr.add_argument("--epochs", type=int, default=None)
    tr.add_argument("--lr", type=float, default=None)
    tr.add_argument("--batch", type=int, default=None)
    tr.add_argument("--seed", type=int, default=None)
    tr.add_argument("--solver-substeps", dest="solver_substeps", type=int, default=None)
    tr.add_argument("--clip", type=float, default=None)
    tr.add_argument("--out", default=None)
    tr.set_defaults(fn=cmd_train)

    ev = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--mask-ratio", type=float, default=None)
    ev.add_argument("--max-length", type=int, default=60)
    ev.add_argument("--mode", choices=("train", "test"), default="test")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--energy-curves", type=int, default=0,
                    help="export energy curves for this many test trajectories")
    ev.add_argument("--out", default=None)
    ev.set_defaults(fn=cmd_eval)

    an = sub.add_parser("analyze", help="run an analysis experiment")
    an.add_argument("experiment", choices=EXPERIMENTS)
    an.add_argument("--dataset", default=None)
    an.add_argument("--integrator", choices=("euler", "rk4"), default="rk4")
    an.add_argument("--analytic-system", choices=("exponential", "linear-spring"),
                    default="linear-spring")
    an.add_argument("--alphas", type=float, nargs="+",
                    default=[0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
    an.add_argument("--lengths", type=int, nargs="+", default=[20, 30, 40, 50, 60])
    an.add_argument("--ratios", type=float, nargs="+", default=[1.0, 0.8, 0.4])
    an.add_argument("--alpha", type=float, default=1.0)
    an.add_argument("--epochs", type=int, default=5)
    an.add_argument("--lr", type=float, default=1e-4)
    an.add_argument("--batch", type=int, default=32)
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--scenarios", type=int, default=100)
    an.add_argument("--out", default=None)
    an.set_defaults(fn=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDiverged as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except FloatingPointError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
