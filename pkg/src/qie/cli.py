"""Command-line interface: ``qie validate | run | optimize | sweep``.

Exit codes: 0 success, 1 validation failure, 2 config parse error,
3 infeasible physics, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import validation
from .cycle import derive_cycle, run_cycle
from .errors import InfeasibleDurationError, InvalidParameterError
from .isotherm import BathCoupling
from .optimize import CycleFamily, brute_force_max_power, eta_star_microscopic, sweep

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3, 4

REQUIRED = ("omega_fb", "omega3", "omega4", "beta_h", "a", "q", "tau_fb")
OPTIONAL = ("tau_h", "beta_prime", "mode", "steps", "output")
RESIDUAL_COLUMNS = ("closure", "reservoir_energy", "meas_energy", "ledger", "first_law_isotherm")


class ConfigError(Exception):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class ScenarioConfig:
    omega_fb: float
    omega3: float
    omega4: float
    beta_h: float
    a: float
    q: float
    tau_fb: float
    tau_h: Optional[float] = None
    beta_prime: Optional[float] = None
    mode: str = "analytic"
    steps: int = 400
    output: Optional[str] = None
    lines: dict = field(default_factory=dict, repr=False)

    def bath(self) -> BathCoupling:
        return BathCoupling(self.a, self.q, self.beta_h)

    def family(self, mode: Optional[str] = None) -> CycleFamily:
        return CycleFamily(
            self.omega_fb, self.omega3, self.omega4, self.bath(), self.tau_fb, mode or self.mode, self.steps
        )


def _positive(v):
    return v > 0


_RANGES = {
    "omega_fb": (_positive, "must be > 0"),
    "omega4": (_positive, "must be > 0"),
    "omega3": (_positive, "must be > 0"),
    "beta_h": (_positive, "must be > 0"),
    "a": (_positive, "must be > 0"),
    "q": (lambda v: -1 < v < 0, "must lie in (-1, 0)"),
    "tau_fb": (lambda v: v >= 0, "must be >= 0"),
    "tau_h": (_positive, "must be > 0"),
    "beta_prime": (_positive, "must be > 0"),
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in REQUIRED and key not in OPTIONAL:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if key == "mode":
            if value not in ("analytic", "numeric"):
                raise ConfigError(f"mode must be 'analytic' or 'numeric', got {value!r}", lineno)
        elif key == "steps":
            try:
                value = int(value)
            except ValueError:
                raise ConfigError(f"steps must be an integer, got {value!r}", lineno) from None
            if value < 100:
                raise ConfigError("steps must be >= 100", lineno)
        elif key != "output":
            try:
                value = float(value)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {value!r}", lineno) from None
            ok, why = _RANGES[key]
            if not (math.isfinite(value) and ok(value)):
                raise ConfigError(f"{key} {why}, got {value}", lineno)
        values[key] = value
        lines[key] = lineno

    end = len(text.splitlines()) + 1
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}", end)
    if ("tau_h" in values) == ("beta_prime" in values):
        raise ConfigError("give exactly one of tau_h and beta_prime", end)
    if not values["omega3"] > values["omega4"]:
        raise ConfigError("omega3 must exceed omega4", lines["omega3"])
    return ScenarioConfig(**values, lines=lines)


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def fmt(x) -> str:
    return format(float(x), ".17g")


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_run(cfg: ScenarioConfig, mode: Optional[str] = None) -> str:
    mode = mode or cfg.mode
    if cfg.beta_prime is not None and not cfg.beta_prime > cfg.beta_h:
        raise InfeasibleDurationError(f"beta_prime ({cfg.beta_prime}) must exceed beta_h ({cfg.beta_h})")
    cycle = derive_cycle(
        cfg.omega_fb, cfg.omega3, cfg.omega4, cfg.bath(), cfg.tau_fb, cfg.tau_h, beta_prime=cfg.beta_prime
    )
    res = run_cycle(cycle, mode, cfg.steps)
    header = ["dS", "sigma", "tau_circ", "W_total", "W_fb", "W_wm", "Q_h", "Q_c", "eta", "P"]
    row = [res.dS, res.sigma, res.tau_circ, res.W_total, res.W_fb, res.W_wm, res.Q_h, res.Q_c, res.eta, res.P]
    if mode == "numeric":
        header += list(RESIDUAL_COLUMNS)
        row += [res.residuals[k] for k in RESIDUAL_COLUMNS]
    return to_csv(header, [row])


def _rel(a, b):
    return abs(a - b) / abs(b)


def cmd_optimize(cfg: ScenarioConfig, mode: Optional[str] = None) -> str:
    fam = cfg.family(mode)
    ref = fam.reference_optimum()
    xtol = 1e-9 if fam.mode == "analytic" else 1e-7
    found = brute_force_max_power(fam, (fam.tau_circ * 1.001, 4.0 * ref.tau_h_star), xtol=xtol)
    eta_micro = eta_star_microscopic(cfg.a, cfg.tau_fb, cfg.omega3, cfg.omega4)
    header = [
        "tau_circ", "tau_h_star", "tau_h_star_bruteforce", "rel_diff_tau_h_star",
        "eta_star", "eta_star_microscopic", "eta_star_bruteforce", "rel_diff_eta_star",
        "p_star", "p_star_bruteforce", "rel_diff_p_star",
    ]
    row = [
        ref.tau_circ, ref.tau_h_star, found.tau_h_star, _rel(found.tau_h_star, ref.tau_h_star),
        ref.eta_star, eta_micro, found.eta_star, _rel(found.eta_star, ref.eta_star),
        ref.p_star, found.p_star, _rel(found.p_star, ref.p_star),
    ]
    return to_csv(header, [row])


def parse_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --tau-fb-list {text!r}") from None
    if not vals or any(v < 0 or not math.isfinite(v) for v in vals):
        raise ConfigError(f"bad --tau-fb-list {text!r}")
    return sorted(vals)


def parse_grid(text: str) -> list[float]:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"bad --grid {text!r}, expected lo:hi:n") from None
    if n < 2 or not lo < hi:
        raise ConfigError(f"bad --grid {text!r}")
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


SWEEP_HEADER = ["tau_fb_over_circ", "tau_h_over_circ", "power_over_pstar", "eta", "power"]


def cmd_sweep(cfg: ScenarioConfig, tau_fb_list="0.5,1,3", grid="1.02:20:400", mode: Optional[str] = None) -> str:
    rows = sweep(cfg.family(mode), parse_list(tau_fb_list), parse_grid(grid))
    return to_csv(
        SWEEP_HEADER,
        [(r.tau_fb_over_circ, r.tau_h_over_circ, r.power_over_pstar, r.eta, r.power) for r in rows],
    )


def cmd_validate(fault: Optional[str] = None, out=None) -> int:
    out = out or sys.stdout
    results = validation.run_all(fault)
    for r in results:
        print(r.line(), file=out)
    failed = sorted({r.name for r in results if not r.passed})
    if failed:
        print(f"validation FAILED: {', '.join(failed)}", file=out)
        return EXIT_VALIDATION
    print("validation passed", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qie", description="Finite-time Carnot quantum information engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run the invariant suites")
    p.add_argument("--inject-fault", choices=["cptp"], default=None, help=argparse.SUPPRESS)

    for name, helptext in (("run", "evaluate one cycle"), ("optimize", "maximize power over tau_h")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("--mode", choices=["analytic", "numeric"])
        p.add_argument("--out")

    p = sub.add_parser("sweep", help="power/efficiency curves over tau_h")
    p.add_argument("config")
    p.add_argument("--tau-fb-list", default="0.5,1,3", help="feedback times in units of tau_circ")
    p.add_argument("--grid", default="1.02:20:400", help="tau_h/tau_circ grid lo:hi:n")
    p.add_argument("--mode", choices=["analytic", "numeric"])
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.inject_fault)
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            text = cmd_run(cfg, args.mode)
        elif args.command == "optimize":
            text = cmd_optimize(cfg, args.mode)
        else:
            text = cmd_sweep(cfg, args.tau_fb_list, args.grid, args.mode)
    except ConfigError as exc:
        print(f"qie: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleDurationError, InvalidParameterError) as exc:
        print(f"qie: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        emit(text, args.out or cfg.output)
    except OSError as exc:
        print(f"qie: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def entry():
    sys.exit(main())
