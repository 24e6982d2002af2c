"""Batch command-line front-end emitting CSV/JSON.

Subcommands: ``analyze``, ``grid``, ``alpha-sweep``, ``design``,
``simulate``, ``verify``.  Values may come from a JSON config file
(``--config``); explicit flags always override config entries.  Exit
codes: 0 success, 1 verification failure, 2 usage/validation error (with a
machine-readable JSON error object on stderr).

Serialization rules: numeric fields are written with full double precision
(shortest round-trip form); divergent metrics serialize as the literal
string ``inf``, never NaN; ``--bits`` converts ``*_nats`` fields to
``*_bits`` by dividing by ln 2 at the output boundary only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .design import (
    boundary_diagnostics,
    masks_from_nnr,
    optimal_nnr,
    tradeoff_curve,
)
from .errors import PrivmaskError, UnstableClosedLoop
from .oracle import CHECK_TOL, consistency_report
from .params import MaskParams, SystemParams, closed_loop_stable
from .rates import mi_rate, mi_rate_from_nnr, mi_rate_from_nnr_alt
from .riccati import solve_are
from .simulation import empirical_cost, empirical_prediction_error, simulate

LN2 = math.log(2.0)

_DEFAULTS = {
    "w": 0.05, "q": 1.0, "r": 1.0, "m": 0.0, "n": 0.05,
    "seed": 7, "trajectories": 64, "workers": 1,
    "lambda": [0.0],
    "m_range": "0.01:0.5:50", "n_range": "0.01:0.5:50",
    "alpha_range": "0.01:100:601",
}
_T_DEFAULTS = {"simulate": 100_000, "verify": 10}


@dataclass
class RunConfig:
    """Merged command configuration (flags over config file over defaults)."""

    command: str
    a: float
    k: float
    w: float
    q: float
    r: float
    m: float
    n: float
    alpha: float | None
    lambdas: list
    horizon: int | None
    trajectories: int
    seed: int
    workers: int
    m_range: tuple
    n_range: tuple
    alpha_range: tuple
    output: str | None
    fmt: str | None
    bits: bool

    @property
    def system(self) -> SystemParams:
        return SystemParams(a=self.a, k=self.k, w=self.w, q=self.q, r=self.r)

    @property
    def masks(self) -> MaskParams:
        return MaskParams(m=self.m, n=self.n)


def _parse_range(text: str, name: str) -> tuple:
    try:
        lo_s, hi_s, count_s = text.split(":")
        lo, hi, count = float(lo_s), float(hi_s), int(count_s)
    except ValueError:
        raise PrivmaskError(f"--{name} must be lo:hi:count, got {text!r}") from None
    if count < 1 or hi < lo:
        raise PrivmaskError(f"--{name} needs hi >= lo and count >= 1, got {text!r}")
    return lo, hi, count


def _parse_lambdas(text: str) -> list:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise PrivmaskError(f"--lambda must be a comma-separated float list, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("parameters")
    g.add_argument("--a", type=float, help="state coefficient (required)")
    g.add_argument("--k", type=float, help="feedback gain, nonzero (required)")
    g.add_argument("--w", type=float, help="process-noise variance")
    g.add_argument("--q", type=float, help="state cost weight")
    g.add_argument("--r", type=float, help="input cost weight")
    g.add_argument("--m", type=float, help="downlink mask variance")
    g.add_argument("--n", type=float, help="uplink mask variance")
    g.add_argument("--alpha", type=float, help="noise-to-noise ratio for single-point sweeps")
    g.add_argument("--lambda", dest="lambdas", type=str, help="comma-separated trade-off weights")
    g.add_argument("--T", dest="horizon", type=int, help="horizon / number of steps")
    g.add_argument("--trajectories", type=int, help="Monte Carlo trajectory count")
    g.add_argument("--seed", type=int, help="random seed")
    g.add_argument("--workers", type=int, help="trajectory worker count (results identical)")
    g.add_argument("--m-range", dest="m_range", type=str, help="lo:hi:count (linear)")
    g.add_argument("--n-range", dest="n_range", type=str, help="lo:hi:count (linear)")
    g.add_argument("--alpha-range", dest="alpha_range", type=str, help="lo:hi:count (log-spaced)")
    g.add_argument("--config", type=str, help="JSON config file; flags override its entries")
    g.add_argument("--output", type=str, help="output path (default: stdout)")
    g.add_argument("--format", dest="fmt", choices=("csv", "json"), help="output format")
    g.add_argument("--bits", action="store_true", default=None,
                   help="report information in bits instead of nats")

    parser = argparse.ArgumentParser(
        prog="privmask",
        description="Privacy-mask analysis and design for cloud-controlled scalar plants.",
    )
    parser.add_argument("--version", action="version", version=f"privmask {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[shared], help="closed-form rates and cost at one point")
    sub.add_parser("grid", parents=[shared], help="rate/cost surface over an (m, n) grid")
    sub.add_parser("alpha-sweep", parents=[shared], help="rate as a function of the noise ratio")
    sub.add_parser("design", parents=[shared], help="optimal ratio, trade-off curve, masks")
    sub.add_parser("simulate", parents=[shared], help="Monte Carlo validation of cost and sigma")
    sub.add_parser("verify", parents=[shared], help="exact-oracle consistency checks")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = {}
    if args.config is not None:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise PrivmaskError(f"config file must hold a JSON object, got {type(file_cfg).__name__}")

    def pick(flag_value, key, default=None):
        if flag_value is not None:
            return flag_value
        if key in file_cfg:
            return file_cfg[key]
        return default

    a = pick(args.a, "a")
    k = pick(args.k, "k")
    if a is None or k is None:
        raise PrivmaskError("both --a and --k are required (flag or config file)")

    lambdas = args.lambdas
    if lambdas is not None:
        lambdas = _parse_lambdas(lambdas)
    elif "lambda" in file_cfg:
        lambdas = [float(v) for v in file_cfg["lambda"]]
    else:
        lambdas = list(_DEFAULTS["lambda"])

    horizon = pick(args.horizon, "T", _T_DEFAULTS.get(args.command))
    return RunConfig(
        command=args.command,
        a=float(a),
        k=float(k),
        w=float(pick(args.w, "w", _DEFAULTS["w"])),
        q=float(pick(args.q, "q", _DEFAULTS["q"])),
        r=float(pick(args.r, "r", _DEFAULTS["r"])),
        m=float(pick(args.m, "m", _DEFAULTS["m"])),
        n=float(pick(args.n, "n", _DEFAULTS["n"])),
        alpha=(lambda v: None if v is None else float(v))(pick(args.alpha, "alpha")),
        lambdas=lambdas,
        horizon=None if horizon is None else int(horizon),
        trajectories=int(pick(args.trajectories, "trajectories", _DEFAULTS["trajectories"])),
        seed=int(pick(args.seed, "seed", _DEFAULTS["seed"])),
        workers=int(pick(args.workers, "workers", _DEFAULTS["workers"])),
        m_range=_parse_range(pick(args.m_range, "m_range", _DEFAULTS["m_range"]), "m-range"),
        n_range=_parse_range(pick(args.n_range, "n_range", _DEFAULTS["n_range"]), "n-range"),
        alpha_range=_parse_range(pick(args.alpha_range, "alpha_range", _DEFAULTS["alpha_range"]),
                                 "alpha-range"),
        output=pick(args.output, "output"),
        fmt=pick(args.fmt, "format"),
        bits=bool(pick(args.bits, "bits", False)),
    )


# ---------------------------------------------------------------- output


def _fmt_num(x) -> str:
    """Full-precision text form; infinities as the literal 'inf'."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {key: _jsonable(v) for key, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return "inf" if math.isinf(obj) and obj > 0 else ("-inf" if math.isinf(obj) else float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def _convert_bits(obj):
    """Rename *_nats keys to *_bits and divide their values by ln 2."""
    if isinstance(obj, dict):
        out = {}
        for key, v in obj.items():
            if key.endswith("_nats") and isinstance(v, (int, float, np.floating)):
                out[key[: -len("_nats")] + "_bits"] = float(v) / LN2
            else:
                out[key] = _convert_bits(v)
        return out
    if isinstance(obj, list):
        return [_convert_bits(v) for v in obj]
    return obj


def _emit_json(cfg: RunConfig, payload: dict) -> None:
    if cfg.bits:
        payload = _convert_bits(payload)
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    _write(cfg, text)


def _emit_csv(cfg: RunConfig, header: list, rows: list) -> None:
    if cfg.bits:
        idx = [i for i, name in enumerate(header) if name.endswith("_nats")]
        header = [h[:-5] + "_bits" if h.endswith("_nats") else h for h in header]
        rows = [[v / LN2 if i in idx and isinstance(v, float) and math.isfinite(v) else v
                 for i, v in enumerate(row)] for row in rows]
    lines = ["# schema=1", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_num(v) if isinstance(v, (float, np.floating))
                              else str(v) for v in row))
    _write(cfg, "\n".join(lines) + "\n")


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


# ------------------------------------------------------------- commands


def _cost_value(sysp: SystemParams, masks: MaskParams) -> float:
    """Cost rate with in-band divergence for unstable loops."""
    from .rates import control_cost_rate

    try:
        return control_cost_rate(sysp, masks).cost
    except UnstableClosedLoop:
        if sysp.q == 0 and sysp.r == 0:
            return 0.0
        if sysp.w == 0 and masks.m == 0 and masks.n == 0:
            return 0.0
        return math.inf


def _sigma_value(a: float, p: float, n: float) -> float:
    from .errors import DegenerateAll

    try:
        return solve_are(a, p, n)
    except DegenerateAll:
        return math.inf


def cmd_analyze(cfg: RunConfig) -> int:
    sysp, masks = cfg.system, cfg.masks
    rates = mi_rate(sysp, masks)
    payload = {
        "sigma": _sigma_value(cfg.a, cfg.m + cfg.w, cfg.n),
        "uplink_nats": rates.uplink,
        "downlink_nats": rates.downlink,
        "mi_nats": rates.total,
        "cost": _cost_value(sysp, masks),
        "diagnostics": boundary_diagnostics(masks, cfg.w).value,
    }
    _emit_json(cfg, payload)
    return 0


def _emit_table(cfg: RunConfig, header: list, rows: list) -> None:
    if cfg.fmt == "json":
        payload = {"schema": 1, "rows": [dict(zip(header, row)) for row in rows]}
        _emit_json(cfg, payload)
    else:
        _emit_csv(cfg, header, rows)


def cmd_grid(cfg: RunConfig) -> int:
    sysp = cfg.system
    m_lo, m_hi, m_count = cfg.m_range
    n_lo, n_hi, n_count = cfg.n_range
    header = ["m", "n", "alpha", "sigma", "uplink_nats", "downlink_nats", "mi_nats", "cost"]
    rows = []
    for m in np.linspace(m_lo, m_hi, m_count):
        for n in np.linspace(n_lo, n_hi, n_count):
            masks = MaskParams(m=float(m), n=float(n))
            p = masks.m + sysp.w
            if p > 0:
                alpha = masks.n / p
            else:
                alpha = math.inf if masks.n > 0 else 0.0
            rates = mi_rate(sysp, masks)
            rows.append([masks.m, masks.n, alpha, _sigma_value(sysp.a, p, masks.n),
                         rates.uplink, rates.downlink, rates.total,
                         _cost_value(sysp, masks)])
    _emit_table(cfg, header, rows)
    return 0


def cmd_alpha_sweep(cfg: RunConfig) -> int:
    sysp = cfg.system
    if cfg.alpha is not None:
        alphas = np.array([cfg.alpha])
    else:
        lo, hi, count = cfg.alpha_range
        if lo <= 0:
            raise PrivmaskError(f"--alpha-range lower end must be > 0, got {lo}")
        alphas = np.geomspace(lo, hi, count)
    header = ["alpha", "uplink_nats", "downlink_nats", "mi_nats", "mi_nats_alt"]
    rows = []
    for alpha in alphas:
        rates = mi_rate_from_nnr(sysp, float(alpha))
        rows.append([float(alpha), rates.uplink, rates.downlink, rates.total,
                     mi_rate_from_nnr_alt(sysp, float(alpha))])
    _emit_table(cfg, header, rows)
    return 0


def cmd_design(cfg: RunConfig) -> int:
    report = optimal_nnr(cfg.a, cfg.k)
    points = tradeoff_curve(cfg.system, cfg.lambdas)
    if cfg.m == 0:
        _sys.stderr.write(
            "warning: recommended masks use m = 0; the achieved noise ratio is then "
            "maximally sensitive to errors in w (pass --m to add a downlink mask)\n")
    recommended = masks_from_nnr(report.alpha_star, cfg.w, cfg.m)
    payload = {
        "alpha_star": report.alpha_star,
        "residual": report.residual,
        "mi_min_nats": report.mi_min,
        "tradeoff": [
            {"lambda": pt.lam, "alpha": pt.alpha, "mi_nats": pt.mi,
             "cost": pt.cost, "objective": pt.objective, "at_boundary": pt.at_boundary}
            for pt in points
        ],
        "recommended": {"m": recommended.m, "n": recommended.n},
    }
    _emit_json(cfg, payload)
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    sysp, masks = cfg.system, cfg.masks
    if not closed_loop_stable(sysp).stable:
        raise UnstableClosedLoop(f"|a+k| = {abs(cfg.a + cfg.k)} >= 1")
    from .rates import control_cost_rate

    batch = simulate(sysp, masks, cfg.horizon, cfg.trajectories, cfg.seed,
                     workers=cfg.workers)
    cost, cost_se = empirical_cost(batch, cfg.q, cfg.r)
    sigma, sigma_se = empirical_prediction_error(batch)
    cf_cost = control_cost_rate(sysp, masks).cost
    cf_sigma = solve_are(cfg.a, cfg.m + cfg.w, cfg.n)
    ok = abs(cost - cf_cost) <= 3 * cost_se and abs(sigma - cf_sigma) <= 3 * sigma_se
    payload = {
        "empirical_cost": cost,
        "cost_stderr": cost_se,
        "closed_form_cost": cf_cost,
        "empirical_sigma": sigma,
        "sigma_stderr": sigma_se,
        "closed_form_sigma": cf_sigma,
        "pass": bool(ok),
    }
    _emit_json(cfg, payload)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    report = consistency_report(cfg.system, cfg.masks, cfg.horizon)
    header = ["name", "lhs", "rhs", "abs_err", "pass", "gating"]
    rows = [[c.name, c.lhs, c.rhs, c.abs_err, str(c.passed).lower(),
             str(not c.informational).lower()] for c in report]
    if cfg.fmt == "json":
        payload = {
            "tolerance": CHECK_TOL,
            "checks": [
                {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "abs_err": c.abs_err,
                 "pass": c.passed, "gating": not c.informational}
                for c in report
            ],
        }
        _emit_json(cfg, payload)
    else:
        _emit_csv(cfg, header, rows)
    return 0 if all(c.passed for c in report if not c.informational) else 1


_COMMANDS = {
    "analyze": cmd_analyze,
    "grid": cmd_grid,
    "alpha-sweep": cmd_alpha_sweep,
    "design": cmd_design,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}

# analyze/design/simulate emit structured reports, not tables
_JSON_ONLY = {"analyze", "design", "simulate"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if cfg.command in _JSON_ONLY and cfg.fmt == "csv":
            raise PrivmaskError(f"{cfg.command} emits a JSON report; --format csv is not available")
        return _COMMANDS[cfg.command](cfg)
    except PrivmaskError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        _sys.stderr.write(json.dumps(err) + "\n")
        return 2
    except OSError as exc:
        _sys.stderr.write(json.dumps({"error": "OSError", "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
