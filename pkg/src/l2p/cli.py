"""Command-line front end.

Subcommands: run, sweep, lower-bound, account, audit, tune. Long-form
flags only. Exit codes: 0 success, 2 configuration or usage error,
3 tuner infeasibility, 4 sampler failure. All CSV output is RFC-4180,
UTF-8, LF-terminated, and byte-reproducible from (config, version);
the thread count comes from --threads unless L2P_THREADS is set.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .accountant import (
    TunerError,
    config_budget,
    l2p_privacy,
    tune_oco,
    tune_ope,
)
from .adversaries import (
    bernoulli_experts,
    epoch_lower_bound_stream,
    linear_oco_stream,
)
from .audit import (
    empirical_epsilon,
    marginal_tv_test,
    ratio_range_check,
    switch_statistics,
)
from .harness import monte_carlo, strawman_fixed_switch
from .measures import SamplerError
from .seeding import replicate_seed
from .transform import ConfigError, L2PConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TUNER = 3
EXIT_SAMPLER = 4

SCHEMA_VERSION = 1


def _threads(args) -> int:
    env = os.environ.get("L2P_THREADS")
    if env is not None:
        return max(1, int(env))
    if getattr(args, "threads", None):
        return max(1, args.threads)
    return os.cpu_count() or 1


def _theory_bound_ope(T: int, d: int, eps: float, delta: float) -> float:
    return math.sqrt(T * math.log(d)) + T ** (1.0 / 3.0) * math.log(d) * math.log(
        T / delta
    ) / eps ** (2.0 / 3.0)


def _load_run_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"config schema must be {SCHEMA_VERSION}")
    required = ["problem", "T", "d", "epsilon", "delta", "reps", "base_seed", "adversary"]
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ConfigError(f"config missing fields: {', '.join(missing)}")
    if cfg["problem"] not in ("ope", "oco"):
        raise ConfigError("problem must be 'ope' or 'oco'")
    override = cfg.get("override")
    if override is not None:
        keys = set(override)
        if keys != {"B", "eta", "p"}:
            raise ConfigError("override block must set exactly B, eta and p")
    return cfg


def _build_stream(cfg: dict):
    adv = cfg["adversary"]
    kind = adv.get("kind")
    T, d = int(cfg["T"]), int(cfg["d"])
    seed = int(adv.get("seed", 0))
    if kind == "bernoulli":
        means = adv.get("means", list(np.linspace(0.35, 0.65, d)))
        return bernoulli_experts(d, T, means, seed)
    if kind == "epoch_lower_bound":
        return epoch_lower_bound_stream(T, float(adv["epsilon"]), d, seed)
    if kind in ("iid-sphere", "drift"):
        return linear_oco_stream(d, T, float(adv.get("lipschitz", 1.0)), seed, kind)
    raise ConfigError(f"unknown adversary kind {kind!r}")


def _build_config(cfg: dict) -> L2PConfig:
    T, d = int(cfg["T"]), int(cfg["d"])
    eps, delta = float(cfg["epsilon"]), float(cfg["delta"])
    override = cfg.get("override")
    if cfg["problem"] == "ope":
        if override is None:
            return tune_ope(T, d, eps, delta)
        return L2PConfig(
            T=T,
            B=int(override["B"]),
            eta=float(override["eta"]),
            p=float(override["p"]),
            delta0=0.0,
            delta1=delta / (2.0 * T),
        )
    L = float(cfg.get("lipschitz", 1.0))
    D = float(cfg.get("diameter", 1.0))
    if override is None:
        return tune_oco(T, d, eps, delta, L, D)
    eta = float(override["eta"])
    lam = (L / D) * max(math.sqrt(T), math.sqrt(d * math.log(T)) / eta)
    return L2PConfig(
        T=T,
        B=int(override["B"]),
        eta=eta,
        p=float(override["p"]),
        delta0=0.0,
        delta1=delta / (2.0 * T),
        beta=eta * eta * lam / (20.0 * L * L),
        lam=lam,
        radius=D / 2.0,
        lipschitz=L,
    )


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_run(args) -> int:
    cfg = _load_run_config(args.config)
    stream = _build_stream(cfg)
    config = _build_config(cfg)
    kind = "mw" if cfg["problem"] == "ope" else "rmw"
    reps, base_seed = int(cfg["reps"]), int(cfg["base_seed"])
    summary = monte_carlo(config, kind, stream, reps, base_seed, threads=_threads(args))
    outdir = Path(cfg.get("output_dir", args.output or "."))
    buf = io.StringIO()
    summary.write_csv(buf)
    _write(outdir / "reps.csv", buf.getvalue())
    _write(outdir / "summary.json", summary.to_json() + "\n")
    provenance = {
        "config": cfg,
        "library_version": __version__,
        "tuned": {
            "B": config.B,
            "eta": config.eta,
            "p": config.p,
            "delta0": config.delta0,
            "delta1": config.delta1,
            "eta_accounted": config.eta_accounted,
        },
        "budget": config_budget(config).to_dict(),
        "seeds": [replicate_seed(base_seed, i) for i in range(reps)],
    }
    _write(outdir / "provenance.json", json.dumps(provenance, sort_keys=True) + "\n")
    print(f"wrote {outdir}/reps.csv, summary.json, provenance.json")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_run_config(args.config)
    grid = [float(v) for v in args.epsilon_grid]
    if len(grid) < 1:
        raise ConfigError("sweep needs at least one epsilon")
    stream = _build_stream(cfg)
    T, d, delta = int(cfg["T"]), int(cfg["d"]), float(cfg["delta"])
    rows = ["epsilon,mean_regret,std_regret,theory_bound"]
    for eps in grid:
        local = dict(cfg)
        local["epsilon"] = eps
        config = _build_config(local)
        kind = "mw" if cfg["problem"] == "ope" else "rmw"
        summary = monte_carlo(
            config, kind, stream, int(cfg["reps"]), int(cfg["base_seed"]), threads=_threads(args)
        )
        bound = _theory_bound_ope(T, d, eps, delta)
        rows.append(
            f"{eps!r},{summary.mean_regret!r},{summary.std_regret!r},{bound!r}"
        )
    out = Path(args.output or "sweep.csv")
    _write(out, "\n".join(rows) + "\n")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_lower_bound(args) -> int:
    T, eps, d, reps = args.T, args.epsilon, args.d, args.reps
    stream = epoch_lower_bound_stream(T, eps, d, args.seed)
    comparator = math.sqrt(stream.n_epochs) * stream.epoch_len
    budget = max(1, round((T * eps) ** (2.0 / 3.0)))
    rows = ["rep,seed,strawman_regret,comparator,clamped"]
    for i in range(reps):
        seed = replicate_seed(args.seed, i)
        result = strawman_fixed_switch(stream, budget, seed)
        rows.append(f"{i},{seed},{result.regret!r},{comparator!r},{int(stream.clamped)}")
    out = Path(args.output or "lower_bound.csv")
    _write(out, "\n".join(rows) + "\n")
    if stream.clamped:
        print("warning: epoch count clamped to T", file=sys.stderr)
    if d == 1:
        print("note: single expert, regret is identically 0", file=sys.stderr)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_account(args) -> int:
    budget = l2p_privacy(args.eta, args.p, args.T, args.B, args.delta0, args.delta1)
    if args.json:
        print(json.dumps(budget.to_dict(), sort_keys=True))
    else:
        print(f"epsilon={budget.epsilon!r}")
        print(f"delta={budget.delta!r}")
        print(f"preconditions_met={budget.preconditions_met}")
        for note in budget.notes:
            print(f"note={note}")
    return EXIT_OK


def cmd_tune(args) -> int:
    if args.problem == "ope":
        config = tune_ope(args.T, args.d, args.epsilon, args.delta)
    else:
        config = tune_oco(args.T, args.d, args.epsilon, args.delta, args.L, args.D)
    out = {
        "T": config.T,
        "B": config.B,
        "eta": config.eta,
        "p": config.p,
        "delta0": config.delta0,
        "delta1": config.delta1,
        "beta": config.beta,
        "lam": config.lam,
        "radius": config.radius,
        "eta_accounted": config.eta_accounted,
        "budget": config_budget(config).to_dict(),
    }
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_audit(args) -> int:
    d, T = args.d, args.T
    delta = args.delta
    stream = bernoulli_experts(d, T, np.linspace(0.3, 0.7, d), args.seed)
    if args.override_eta is not None:
        config = L2PConfig(
            T=T, B=args.B, eta=args.override_eta, p=args.p, delta0=0.0, delta1=delta / (2 * T)
        )
    else:
        config = tune_ope(T, d, args.epsilon, delta)
    if args.test == "marginal":
        for s in range(1, config.n_batches + 1) if args.s is None else [args.s]:
            report = marginal_tv_test(config, stream, s, args.runs, args.seed)
            print(report.to_json_line())
    elif args.test == "ratio":
        print(ratio_range_check(config, stream, args.runs, args.seed).to_json_line())
    elif args.test == "epsilon":
        from .adversaries import neighbor_of

        flipped = 1.0 - stream.values[T // 2]
        neighbor = neighbor_of(stream, T // 2, flipped)
        report = empirical_epsilon(config, stream, neighbor, args.runs, args.seed)
        print(report.to_json_line())
    elif args.test == "switches":
        from .harness import monte_carlo

        summary = monte_carlo(config, "mw", stream, args.runs, args.seed, threads=_threads(args))
        print(switch_statistics(summary.results, config).to_json_line())
    else:
        raise ConfigError(f"unknown audit {args.test!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l2p", description="Private online learning by lazy switching"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run replicated games from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output", default=None)
    p_run.add_argument("--threads", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="regret vs epsilon over a grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--epsilon-grid", nargs="+", required=True)
    p_sweep.add_argument("--output", default=None)
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_lb = sub.add_parser("lower-bound", help="epoch-stream demo for limited switching")
    p_lb.add_argument("--T", type=int, required=True)
    p_lb.add_argument("--epsilon", type=float, required=True)
    p_lb.add_argument("--d", type=int, required=True)
    p_lb.add_argument("--reps", type=int, default=100)
    p_lb.add_argument("--seed", type=int, default=0)
    p_lb.add_argument("--output", default=None)
    p_lb.set_defaults(func=cmd_lower_bound)

    p_acc = sub.add_parser("account", help="print the budget for explicit parameters")
    p_acc.add_argument("--eta", type=float, required=True)
    p_acc.add_argument("--p", type=float, required=True)
    p_acc.add_argument("--T", type=int, required=True)
    p_acc.add_argument("--B", type=int, required=True)
    p_acc.add_argument("--delta0", type=float, default=0.0)
    p_acc.add_argument("--delta1", type=float, required=True)
    p_acc.add_argument("--json", action="store_true")
    p_acc.set_defaults(func=cmd_account)

    p_tune = sub.add_parser("tune", help="closed-form parameter tuning")
    p_tune.add_argument("problem", choices=["ope", "oco"])
    p_tune.add_argument("--T", type=int, required=True)
    p_tune.add_argument("--d", type=int, required=True)
    p_tune.add_argument("--epsilon", type=float, required=True)
    p_tune.add_argument("--delta", type=float, required=True)
    p_tune.add_argument("--L", type=float, default=1.0)
    p_tune.add_argument("--D", type=float, default=1.0)
    p_tune.set_defaults(func=cmd_tune)

    p_audit = sub.add_parser("audit", help="empirical distribution and privacy checks")
    p_audit.add_argument("test", choices=["marginal", "ratio", "epsilon", "switches"])
    p_audit.add_argument("--d", type=int, default=3)
    p_audit.add_argument("--T", type=int, default=5)
    p_audit.add_argument("--B", type=int, default=1)
    p_audit.add_argument("--p", type=float, default=0.5)
    p_audit.add_argument("--epsilon", type=float, default=1.0)
    p_audit.add_argument("--delta", type=float, default=1e-6)
    p_audit.add_argument("--runs", type=int, default=100_000)
    p_audit.add_argument("--s", type=int, default=None)
    p_audit.add_argument("--seed", type=int, default=0)
    p_audit.add_argument("--override-eta", type=float, default=None)
    p_audit.add_argument("--threads", type=int, default=None)
    p_audit.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; preserve both
        return int(exc.code or 0)
    try:
        return args.func(args)
    except TunerError as exc:
        print(f"tuner infeasibility: {exc}", file=sys.stderr)
        return EXIT_TUNER
    except SamplerError as exc:
        print(f"sampler failure: {exc}", file=sys.stderr)
        return EXIT_SAMPLER
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
