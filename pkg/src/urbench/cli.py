"""Command line front end: constants, plan, simulate, fit and verify.

Every command reads optional settings from an INI file (``--config``), one
section per command, and echoes the effective settings into its output.
Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical
infeasibility.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, channels, fitting, protocol, reptheory, verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_INFEASIBLE = 3


class UsageError(Exception):
    pass


class Infeasible(Exception):
    pass


# ---------------------------------------------------------------- config


def parse_value(text: str):
    """Parse a config value: int, float, inf, none, bool, comma list or string."""
    t = text.strip()
    if "," in t:
        return [parse_value(x) for x in t.split(",") if x.strip()]
    low = t.lower()
    if low in ("none", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    if low in ("inf", "infinity"):
        return math.inf
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def format_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ", ".join(format_value(x) for x in v) + ("," if len(v) == 1 else "")
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if v == math.inf else repr(v)
    return str(v)


def load_config(path, section: str) -> dict:
    if path is None:
        return {}
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path}")
    if not cp.has_section(section):
        return {}
    return {k: parse_value(v) for k, v in cp.items(section)}


def dump_config(values: dict, section: str) -> str:
    cp = configparser.ConfigParser()
    cp[section] = {k: format_value(v) for k, v in values.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _as_list(v) -> list:
    if v is None:
        return []
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _json_safe(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def _emit(text: str, out_dir, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)
    print(f"wrote {path / name}")


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: format_value(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _merge(defaults: dict, cfg: dict, overrides: dict) -> dict:
    out = dict(defaults)
    out.update(cfg)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


# ---------------------------------------------------------------- commands


def cmd_constants(args) -> int:
    cfg = _merge({"d": [2, 4, 8, 16, 32], "convention": "table"}, load_config(args.config, "constants"),
                 {"d": args.d, "convention": args.convention})
    rows = []
    for d in _as_list(cfg["d"]):
        try:
            c1, c2, c3 = bounds.c_constants(int(d), cfg["convention"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows.append({"d": int(d), "c1": c1, "c2": c2, "c3": c3})
    if args.format == "csv":
        _emit(_rows_to_csv(rows), args.out, "constants.csv")
    else:
        _emit(json.dumps({"config": _json_safe(cfg), "constants": rows}, indent=1), args.out, "constants.json")
    return EXIT_OK


PLAN_DEFAULTS = {
    "d": 2,
    "u": 0.98,
    "alpha": 1.0,
    "beta": 1.0,
    "rho_spam_sq": 0.0,
    "e_spam_sq": 0.0,
    "epsilon": 0.02,
    "delta": 0.01,
    "lengths": [10, 30, 100, math.inf],
    "shots": None,
    "convention": "table",
}


def plan_report(cfg: dict) -> dict:
    """Variance bound, interval bound and required sample counts per length."""
    spam = bounds.SpamParams.from_squares(cfg["rho_spam_sq"], cfg["e_spam_sq"], cfg["alpha"], cfg["beta"])
    L = bounds.interval_bound(spam)
    cp = bounds.ConfidenceParams(cfg["epsilon"], cfg["delta"])
    if cp.epsilon >= L:
        raise Infeasible(f"epsilon={cp.epsilon} is not below the interval bound L={L}")
    rows = []
    for m in _as_list(cfg["lengths"]):
        m = math.inf if m == math.inf else int(m)
        s2 = bounds.variance_bound(bounds.BoundInputs(cfg["u"], m, int(cfg["d"]), spam), cfg["convention"])
        row = {"m": m, "sigma2": s2, "N": bounds.hoeffding_N(cp, s2, L), "sigma2_zero": s2 == 0}
        if cfg.get("shots"):
            tv = bounds.total_variance(s2, cfg["shots"])
            row["total_variance"] = tv
            row["N_with_shots"] = bounds.hoeffding_N(cp, tv, L)
        rows.append(row)
    return {
        "config": _json_safe(cfg),
        "L": L,
        "first_order_N": bounds.first_order_N(cp, L),
        "rows": _json_safe(rows),
    }


def cmd_plan(args) -> int:
    over = {"u": args.u, "epsilon": args.epsilon, "delta": args.delta, "d": args.d_single}
    cfg = _merge(PLAN_DEFAULTS, load_config(args.config, "plan"), over)
    try:
        report = plan_report(cfg)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "csv":
        _emit(_rows_to_csv(report["rows"]), args.out, "plan.csv")
    else:
        _emit(json.dumps(report, indent=1), args.out, "plan.json")
    return EXIT_OK


SIM_DEFAULTS = {
    "q": 1,
    "implementation": "two_copy",
    "lengths": [1, 2, 4, 8, 16, 32, 64, 128],
    "n_sequences": 250,
    "shots": None,
    "noise": "identity_mix",
    "target_u": 0.98,
    "p": None,
    "eta": None,
    "kraus_rank": None,
    "n_terms": None,
    "spam_eta": 0.05,
    "seed": 0,
    "delta": 0.01,
}


def simulate(cfg: dict) -> tuple[protocol.ExperimentDataset, np.ndarray, list[dict]]:
    """Run a simulation described by a flat config; returns (dataset, channel, summary rows)."""
    q = int(cfg["q"])
    d = 2**q
    setup_rng = np.random.default_rng(np.random.SeedSequence([int(cfg["seed"]), 0xC0FFEE]))
    kw = {k: cfg[k] for k in ("p", "eta", "kraus_rank", "n_terms") if cfg.get(k) is not None}
    if cfg["noise"] == "identity_mix" and cfg.get("eta") is None:
        kw["target_u"] = cfg["target_u"]
    ptm = protocol.channel_from_preset(cfg["noise"], q, setup_rng, **kw)
    if cfg["implementation"] == "two_copy":
        spam = protocol.perturbed_two_copy_spam(d, float(cfg["spam_eta"]), setup_rng)
    else:
        spam = protocol.perturbed_single_copy_spam(d, float(cfg["spam_eta"]), setup_rng)
    pc = protocol.ProtocolConfig(
        q=q,
        implementation=cfg["implementation"],
        lengths=[int(m) for m in _as_list(cfg["lengths"])],
        n_sequences=cfg["n_sequences"],
        shots=cfg["shots"],
        seed=int(cfg["seed"]),
    )
    ds = protocol.run_experiment(pc, ptm, spam)
    ds.config = {"simulate": _json_safe(cfg), "protocol": pc.to_dict()}
    summary = summarize(ds, ptm, spam, float(cfg["delta"]))
    return ds, ptm, summary


def summarize(ds: protocol.ExperimentDataset, ptm: np.ndarray, spam, delta: float) -> list[dict]:
    """Per-length mean, sample variance, planner sigma^2 and the Hoeffding half-width."""
    if isinstance(spam, protocol.SingleCopySpam):
        rho_bar, e = protocol.effective_operators(spam)
    else:
        rho_bar, e = spam.rho_bar, spam.e
    params = bounds.spam_decompose(reptheory.absorb_first_noise(ptm, rho_bar), e)
    d = spam.d
    u = channels.unitarity(ptm)
    L = bounds.interval_bound(params)
    rows = []
    for m, vals in sorted(ds.samples.items()):
        s2 = bounds.variance_bound(bounds.BoundInputs(u, m, d, params))
        if ds.n_shots:
            s2 = bounds.total_variance(s2, ds.n_shots)
        try:
            eps = bounds.hoeffding_epsilon(len(vals), delta, s2, L)
        except ValueError:
            eps = math.nan
        rows.append(
            {
                "m": m,
                "n": len(vals),
                "mean": float(np.mean(vals)),
                "variance": float(np.var(vals, ddof=1)) if len(vals) > 1 else 0.0,
                "sigma2_bound": s2,
                "epsilon": eps,
            }
        )
    return rows


def cmd_simulate(args) -> int:
    cfg = _merge(SIM_DEFAULTS, load_config(args.config, "simulate"), {"seed": args.seed})
    try:
        ds, ptm, summary = simulate(cfg)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    out = args.out or "urb_run"
    _emit(ds.to_json(), out, "dataset.json")
    _emit(ds.to_csv(), out, "dataset.csv")
    _emit(_rows_to_csv(summary), out, "summary.csv")
    decay = [{"m": r["m"], "mean": r["mean"], "lower": r["mean"] - r["epsilon"], "upper": r["mean"] + r["epsilon"]}
             for r in summary]
    _emit(_rows_to_csv(decay), out, "decay.csv")
    channels.save_channel(ptm, Path(out) / "channel.json")
    return EXIT_OK


def load_dataset(path) -> protocol.ExperimentDataset:
    text = Path(path).read_text()
    if str(path).endswith(".csv"):
        return protocol.ExperimentDataset.from_csv(text)
    return protocol.ExperimentDataset.from_json(text)


def cmd_fit(args) -> int:
    try:
        ds = load_dataset(args.dataset)
        fit = fitting.fit_decay(ds.points())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from exc
    report = {"dataset": str(args.dataset), "config": ds.config, **fit.to_dict()}
    _emit(json.dumps(_json_safe(report), indent=1), args.out, "fit.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_checks(args.level, args.seed or 0)
    ok = verify.all_passed(results)
    report = {
        "level": args.level,
        "seed": args.seed or 0,
        "passed": ok,
        "checks": [_json_safe(r.to_dict()) for r in results],
    }
    _emit(json.dumps(report, indent=1), args.out, "verify.json")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with a section per command")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output directory (default: stdout, or urb_run for simulate)")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    parser = argparse.ArgumentParser(prog="urbench", description="Unitarity randomized benchmarking toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="dimension constants of the variance bound")
    p.add_argument("--d", type=int, nargs="+")
    p.add_argument("--convention", choices=["table", "printed"])
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("plan", parents=[common], help="sample sizes from the variance bound")
    p.add_argument("--u", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--d", dest="d_single", type=int)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", parents=[common], help="simulate the protocol")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="fit the decay of a dataset")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", parents=[common], help="run the numerical verification suite")
    p.add_argument("--level", choices=["fast", "full"], default="fast")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
