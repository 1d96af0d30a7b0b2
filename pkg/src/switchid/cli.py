"""Command-line front end: reproducible file-based experiments.

One binary, subcommand style.  Every run resolves its full configuration
(flags, config-file values, defaults, seed, thread cap) and records it next
to the outputs, so a rerun with the same files is byte-identical.

Exit codes: 0 success, 2 validation error (bad flags, files, or models),
3 numerical failure (degenerate data, unidentifiable patterns).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys as _sys
from pathlib import Path

import numpy as np

from . import serialization as ser
from .hankel import build_hankel, hankel_rank
from .lss import (HybridWord, check_l1_stability_sufficient, check_reversible,
                  probe_word, simulate)
from .markov import ModelMarkovSource
from .pe_estimation import (ConfigError, NotIdentifiableError, PeSignalConfig,
                            check_pe_conditions, estimate_all_markov, generate_pe_input,
                            identify)
from .pe_inputs import (IncompleteDataError, NoZeroingInputError,
                        build_pe_input_model_based, extract_markov_from_response)
from .realization import DegenerateSystemError, realize
from .words import InvalidWordError, as_mode_word, words_up_to

_NUMERICAL_ERRORS = (DegenerateSystemError, NoZeroingInputError,
                     NotIdentifiableError, IncompleteDataError,
                     np.linalg.LinAlgError)
_VALIDATION_ERRORS = (FileNotFoundError, ser.ModelFormatError, ConfigError,
                      InvalidWordError, ValueError, KeyError)


def _thread_cap() -> int:
    raw = os.environ.get("SWITCHID_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"SWITCHID_THREADS={raw!r} is not an integer") from None
    if cap < 1:
        raise ConfigError("SWITCHID_THREADS must be at least 1")
    return cap


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the JSON config file, if one was given."""
    if getattr(args, "config", None) is None:
        return
    path = Path(args.config)
    if not path.exists():
        raise FileNotFoundError(path)
    data = json.loads(path.read_text())
    for key, value in data.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _resolved(command: str, args: argparse.Namespace, keys: list[str]) -> dict:
    cfg = {"command": command, "threads": _thread_cap()}
    for key in keys:
        value = getattr(args, key)
        if isinstance(value, Path):
            value = str(value)
        cfg[key] = value
    return cfg


def _write_run_report(out: str, config: dict, summary: dict) -> None:
    payload = {"config": config, **summary}
    Path(str(out) + ".run.json").write_text(
        json.dumps(payload, indent=1, sort_keys=True) + "\n")


def _parse_probe(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"--probe expects q0,v,q,j, got {text!r}")
    q0, vtxt, q, j = parts
    if vtxt == "":
        v = ()
    elif "." in vtxt:
        v = tuple(int(x) for x in vtxt.split("."))
    else:
        v = tuple(int(ch) for ch in vtxt)
    return int(q0), as_mode_word(v), int(q), int(j)


def _default_signal(model, seed: int, horizon: int) -> PeSignalConfig:
    return PeSignalConfig(D=model.D, m=model.m, R=np.eye(model.m),
                          N=horizon, seed=seed)


def _require(args, names):
    for name in names:
        if getattr(args, name) is None:
            raise ValueError(f"--{name.replace('_', '-')} is required")


# ----------------------------------------------------------------- commands

def _cmd_simulate(args) -> int:
    _require(args, ["model", "out"])
    model = ser.load_model(args.model)
    if (args.input is None) == (args.probe is None):
        raise ValueError("give exactly one of --input or --probe")
    if args.probe is not None:
        q0, v, q, j = _parse_probe(args.probe)
        w = probe_word(q0, v, q, j, model.m)
    else:
        w = ser.load_word(args.input)
        if len(w) == 0:
            w = HybridWord.empty(model.m)
    traj = simulate(model, w)
    ser.save_trajectory(w, traj, args.out)
    summary = {"steps": len(w)}
    if len(w):
        summary["final_output"] = [float(y) for y in traj.final_output]
    _write_run_report(args.out, _resolved("simulate", args,
                                          ["model", "input", "probe", "out"]), summary)
    return 0


def _cmd_markov(args) -> int:
    _require(args, ["model", "depth", "out"])
    model = ser.load_model(args.model)
    src = ModelMarkovSource(model)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q0", "v", "q"]
                        + [f"S_{i}{j}" for i in range(1, model.p + 1)
                           for j in range(1, model.m + 1)])
        for v in words_up_to(args.depth, model.D):
            for q0 in range(1, model.D + 1):
                for q in range(1, model.D + 1):
                    S = src(q0, v, q)
                    writer.writerow([q0, ".".join(map(str, v)), q]
                                    + [repr(float(x)) for x in S.ravel()])
    _write_run_report(args.out, _resolved("markov", args, ["model", "depth", "out"]),
                      {"n_words": sum(1 for _ in words_up_to(args.depth, model.D))})
    return 0


def _cmd_hankel(args) -> int:
    _require(args, ["model", "out"])
    if args.L is None or args.K is None:
        raise ValueError("--L and --K are required")
    model = ser.load_model(args.model)
    tol = args.tol if args.tol is not None else 1e-9
    H = build_hankel(ModelMarkovSource(model), args.L, args.K)
    ser.save_hankel(H, args.out, tol)
    _write_run_report(args.out, _resolved("hankel", args,
                                          ["model", "L", "K", "tol", "out"]),
                      {"shape": list(H.H.shape), "rank": hankel_rank(H, tol)})
    return 0


def _cmd_realize(args) -> int:
    _require(args, ["out"])
    tol = args.tol if args.tol is not None else 1e-9
    if (args.model is None) == (args.hankel is None):
        raise ValueError("give exactly one of --model or --hankel")
    if args.model is not None:
        if args.order is None:
            raise ValueError("--order (the Hankel depth N) is required with --model")
        model = ser.load_model(args.model)
        H = build_hankel(ModelMarkovSource(model), args.order, args.order + 1)
    else:
        H, _ = ser.load_hankel(args.hankel)
    result = realize(H, tol)
    ser.save_model(result.system, args.out)
    report = ser.realization_report(result, tol)
    report["config"] = _resolved("realize", args,
                                 ["model", "hankel", "order", "tol", "out"])
    Path(str(args.out) + ".report.json").write_text(
        json.dumps(report, indent=1, sort_keys=True) + "\n")
    return 0


def _cmd_pe_build(args) -> int:
    _require(args, ["model", "out"])
    model = ser.load_model(args.model)
    n_bound = args.n_bound if args.n_bound is not None else model.n
    tol = args.tol if args.tol is not None else 1e-9
    pe = build_pe_input_model_based(model, n_bound, tol=tol)
    ser.save_pe_input(pe, args.out, str(args.out) + ".probes.json")
    _write_run_report(args.out, _resolved("pe-build", args,
                                          ["model", "n_bound", "tol", "out"]),
                      {"length": len(pe.w), "n_probes": len(pe.probe_index)})
    return 0


def _cmd_pe_estimate(args) -> int:
    _require(args, ["model", "seed", "horizon", "depth", "out"])
    model = ser.load_model(args.model)
    cfg = _default_signal(model, args.seed, args.horizon)
    w = generate_pe_input(cfg)
    outputs = simulate(model, w).outputs
    report = estimate_all_markov(w, outputs, args.depth, model.D,
                                 mode=args.est_mode, cfg=cfg,
                                 reference=ModelMarkovSource(model))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "v", "q", "count", "pi_hat"]
                        + [f"S_{i}{j}" for i in range(1, model.p + 1)
                           for j in range(1, model.m + 1)])
        for (r, v, q), est in sorted(report.estimates.items()):
            writer.writerow([r, ".".join(map(str, v)), q, est.count,
                             repr(float(est.pi_hat))]
                            + [repr(float(x)) for x in est.S_hat.ravel()])
    conv = report.convergence
    with open(str(args.out) + ".convergence.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "max_abs_error", "max_rel_error",
                         "freq_error", "cross_residual"])
        for rec in conv.records:
            writer.writerow([rec.N] + [repr(float(x)) for x in
                                       (rec.max_abs_error, rec.max_rel_error,
                                        rec.freq_error, rec.cross_residual)])
    _write_run_report(args.out,
                      _resolved("pe-estimate", args,
                                ["model", "seed", "horizon", "depth",
                                 "est_mode", "out"]),
                      {"reference_scale": conv.reference_scale,
                       "final_max_abs_error": conv.records[-1].max_abs_error})
    return 0


def _cmd_identify(args) -> int:
    _require(args, ["model", "seed", "horizon", "n_guess", "out"])
    model = ser.load_model(args.model)
    depth = args.depth if args.depth is not None else 2 * args.n_guess - 1
    tol = args.tol if args.tol is not None else 1e-9
    cfg = _default_signal(model, args.seed, args.horizon)
    w = generate_pe_input(cfg)
    outputs = simulate(model, w).outputs
    result = identify(w, outputs, args.n_guess, depth, model.D,
                      tol_rel=tol, mode=args.est_mode, cfg=cfg)
    ser.save_model(result.system, args.out)
    report = ser.realization_report(result, tol)
    report["config"] = _resolved("identify", args,
                                 ["model", "seed", "horizon", "n_guess",
                                  "depth", "tol", "est_mode", "out"])
    Path(str(args.out) + ".report.json").write_text(
        json.dumps(report, indent=1, sort_keys=True) + "\n")
    return 0


def _cmd_check(args) -> int:
    _require(args, ["model", "out"])
    model = ser.load_model(args.model)
    report = {
        "l1_stable_sufficient": check_l1_stability_sufficient(model),
        "reversible": check_reversible(model),
        "pe": None,
    }
    w = None
    if args.input is not None:
        w = ser.load_word(args.input)
    elif args.seed is not None:
        horizon = args.horizon if args.horizon is not None else 100_000
        w = generate_pe_input(_default_signal(model, args.seed, horizon))
    if w is not None and len(w):
        tol = args.tol if args.tol is not None else 0.05
        pe = check_pe_conditions(w, max_word_len=3, max_lag=3, tol=tol, D=model.D)
        report["pe"] = {
            "passed": pe.passed,
            "max_cross_residual": pe.max_cross_residual,
            "min_mode_freq": pe.min_mode_freq,
            "covariance_spread": pe.covariance_spread,
            "horizon": pe.horizon,
        }
    report["config"] = _resolved("check", args,
                                 ["model", "input", "seed", "horizon", "tol", "out"])
    Path(args.out).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    print(f"stability={report['l1_stable_sufficient']} "
          f"reversible={report['reversible']}"
          + (f" pe_passed={report['pe']['passed']}" if report["pe"] else ""))
    return 0


# ------------------------------------------------------------------- parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="switchid",
        description="Simulation, realization, and persistently exciting "
                    "input design for discrete-time linear switched systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **flags):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file providing defaults for flags")
        p.add_argument("--out", help="primary output path")
        for flag, kwargs in flags.items():
            p.add_argument(f"--{flag}", **kwargs)
        return p

    add("simulate", _cmd_simulate,
        model={}, input={}, probe={"help": "impulse probe q0,v,q,j (v like 12 or 1.2)"})
    add("markov", _cmd_markov, model={}, depth={"type": int})
    add("hankel", _cmd_hankel, model={}, L={"type": int}, K={"type": int},
        tol={"type": float})
    add("realize", _cmd_realize, model={}, hankel={},
        order={"type": int, "help": "Hankel depth N (builds H_{N,N+1})"},
        tol={"type": float})
    add("pe-build", _cmd_pe_build, model={},
        **{"n-bound": {"type": int, "dest": "n_bound"}}, tol={"type": float})
    add("pe-estimate", _cmd_pe_estimate, model={}, seed={"type": int},
        horizon={"type": int}, depth={"type": int},
        **{"est-mode": {"dest": "est_mode", "choices": ["empirical", "theoretical"]}})
    add("identify", _cmd_identify, model={}, seed={"type": int},
        horizon={"type": int}, depth={"type": int}, tol={"type": float},
        **{"n-guess": {"type": int, "dest": "n_guess"},
           "est-mode": {"dest": "est_mode", "choices": ["empirical", "theoretical"]}})
    add("check", _cmd_check, model={}, input={}, seed={"type": int},
        horizon={"type": int}, tol={"type": float})
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        if hasattr(args, "est_mode") and args.est_mode is None:
            args.est_mode = "empirical"
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=_sys.stderr)
        return 3
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
