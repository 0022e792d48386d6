"""Power maximization and efficiency at maximum power.

With Q = T_h (dS - Sigma/tau_h) and P = Q / (tau_h + tau_fb), everything is
expressed through the dissipation time tau_circ = Sigma/dS.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .cycle import CycleResult, derive_cycle, run_cycle
from .errors import BracketError, InvalidParameterError
from .isotherm import BathCoupling, dissipation_time_qubit
from .states import qubit_entropy

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def dissipation_time(sigma: float, dS: float) -> float:
    if not dS > 0 or not sigma >= 0:
        raise InvalidParameterError(f"need sigma >= 0 and dS > 0, got {sigma}, {dS}")
    return sigma / dS


def _check_times(tau_circ, tau_fb):
    if not tau_circ > 0:
        raise InvalidParameterError(f"tau_circ must be > 0, got {tau_circ}")
    if not tau_fb >= 0:
        raise InvalidParameterError(f"tau_fb must be >= 0, got {tau_fb}")


def optimal_hot_time(tau_circ: float, tau_fb: float) -> float:
    _check_times(tau_circ, tau_fb)
    return tau_circ * (1.0 + math.sqrt(1.0 + tau_fb / tau_circ))


def eta_star(tau_circ: float, tau_fb: float) -> float:
    _check_times(tau_circ, tau_fb)
    return 1.0 - 1.0 / (1.0 + math.sqrt(1.0 + tau_fb / tau_circ))


def eta_star_microscopic(a: float, tau_fb: float, omega3: float, omega4: float) -> float:
    if not (a > 0 and omega3 > omega4 > 0 and tau_fb >= 0):
        raise InvalidParameterError("require a > 0, omega3 > omega4 > 0, tau_fb >= 0")
    return 1.0 - 1.0 / (1.0 + math.sqrt(1.0 + 4.0 * a * tau_fb / math.log(omega3 / omega4)))


def analytic_power(tau_h: float, T_h: float, dS: float, tau_circ: float, tau_fb: float) -> float:
    """P(tau_h) = T_h dS (1 - tau_circ/tau_h) / (tau_h + tau_fb)."""
    return T_h * dS * (1.0 - tau_circ / tau_h) / (tau_h + tau_fb)


def p_star(T_h: float, dS: float, tau_circ: float, tau_fb: float) -> float:
    if not (T_h > 0 and dS > 0):
        raise InvalidParameterError("T_h and dS must be > 0")
    return eta_star(tau_circ, tau_fb) * T_h * dS / (optimal_hot_time(tau_circ, tau_fb) + tau_fb)


@dataclass(frozen=True)
class OptimizationReport:
    tau_h_star: float
    tau_circ: float
    eta_star: float
    p_star: float
    method: str
    evaluations: int = 0


def analytic_optimum(T_h: float, dS: float, tau_circ: float, tau_fb: float) -> OptimizationReport:
    return OptimizationReport(
        tau_h_star=optimal_hot_time(tau_circ, tau_fb),
        tau_circ=tau_circ,
        eta_star=eta_star(tau_circ, tau_fb),
        p_star=p_star(T_h, dS, tau_circ, tau_fb),
        method="analytic",
    )


def golden_section_max(f: Callable, lo, hi, xtol: float = 1e-9, max_iter: int = 500, inv_phi=INV_PHI):
    """Maximize a unimodal ``f`` on [lo, hi] until (hi - lo) <= xtol * |midpoint|.

    Arithmetic follows the type of ``lo``/``hi``, so mpmath numbers (with an
    mpmath ``inv_phi``) give extended-precision searches. Returns
    (x, f(x), number of evaluations).
    """
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    n = 2
    for _ in range(max_iter):
        if hi - lo <= xtol * abs(0.5 * (lo + hi)):
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = f(x2)
        n += 1
    x = 0.5 * (lo + hi)
    return x, f(x), n + 1


class CycleFamily:
    """Cycles parameterized by the hot-isotherm duration.

    ``hold="states"`` (default) keeps the four corner states fixed: the given
    frequencies are those of the reversible limit and are rescaled by
    beta_h/beta_prime = 1 - tau_circ/tau_h, so dS and tau_circ do not depend
    on tau_h. ``hold="frequencies"`` keeps the frequencies fixed instead, in
    which case dS varies with tau_h.
    """

    def __init__(self, omega_fb, omega3, omega4, bath: BathCoupling, tau_fb, mode="analytic", steps=400, hold="states"):
        if hold not in ("states", "frequencies"):
            raise InvalidParameterError(f"unknown hold {hold!r}")
        self.omega_fb = omega_fb
        self.omega3 = omega3
        self.omega4 = omega4
        self.bath = bath
        self.tau_fb = tau_fb
        self.mode = mode
        self.steps = steps
        self.hold = hold
        self.tau_circ = dissipation_time_qubit(omega3, omega4, bath.a)

    @property
    def T_h(self) -> float:
        return self.bath.T_h

    @property
    def dS(self) -> float:
        """Entropy swing of the reversible-limit cycle."""
        b = self.bath.beta_h
        return qubit_entropy(b * self.omega4) - qubit_entropy(b * self.omega3)

    def config(self, tau_h: float):
        s = 1.0 - self.tau_circ / tau_h if self.hold == "states" else 1.0
        return derive_cycle(self.omega_fb * s, self.omega3 * s, self.omega4 * s, self.bath, self.tau_fb, tau_h)

    def __call__(self, tau_h: float) -> CycleResult:
        return run_cycle(self.config(tau_h), self.mode, self.steps)

    def with_tau_fb(self, tau_fb: float) -> "CycleFamily":
        return CycleFamily(
            self.omega_fb, self.omega3, self.omega4, self.bath, tau_fb, self.mode, self.steps, self.hold
        )

    def reference_optimum(self) -> OptimizationReport:
        return analytic_optimum(self.T_h, self.dS, self.tau_circ, self.tau_fb)


def brute_force_max_power(
    family: Callable[[float], CycleResult],
    bracket: tuple[float, float],
    xtol: float = 1e-9,
    scan: int = 17,
) -> OptimizationReport:
    """Golden-section maximization of P(tau_h) over ``bracket``.

    A coarse scan first locates the best interior sample; if the best value
    sits on a bracket end the power is not unimodal inside the bracket and
    BracketError is raised.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise BracketError(f"invalid bracket {bracket}")
    cache = {}

    def power(t):
        if t not in cache:
            cache[t] = family(t)
        return cache[t].P

    xs = np.linspace(lo, hi, scan)
    ps = [power(float(x)) for x in xs]
    k = int(np.argmax(ps))
    if k == 0 or k == scan - 1:
        raise BracketError(
            f"power is largest at the bracket end tau_h={xs[k]:.6g}; no interior maximum in {bracket}"
        )
    x, _, _ = golden_section_max(power, float(xs[k - 1]), float(xs[k + 1]), xtol=xtol)
    best = family(x)
    return OptimizationReport(
        tau_h_star=x,
        tau_circ=best.tau_circ,
        eta_star=best.eta,
        p_star=best.P,
        method="golden-section",
        evaluations=len(cache) + 1,
    )


@dataclass(frozen=True)
class SweepRow:
    tau_fb_over_circ: float
    tau_h_over_circ: float
    power_over_pstar: float
    eta: float
    power: float
    feasible: bool = True


def sweep(
    family: CycleFamily,
    tau_fb_over_circ: Sequence[float] = (0.5, 1.0, 3.0),
    tau_h_over_circ: Optional[Iterable[float]] = None,
    include_optimum: bool = True,
) -> list[SweepRow]:
    """Power and efficiency along tau_h for several feedback times.

    Times are in units of the dissipation time. Rows come out ordered by
    tau_fb, then ascending tau_h. Each curve is normalized by its own maximum
    power from the closed form; with ``include_optimum`` the optimal tau_h of
    each curve is inserted into the grid. Grid points at or below the
    dissipation time are returned with ``feasible=False`` and NaN values.
    """
    if tau_h_over_circ is None:
        tau_h_over_circ = np.linspace(1.02, 20.0, 400)
    grid = sorted(float(g) for g in tau_h_over_circ)
    tc = family.tau_circ
    rows = []
    for r_fb in tau_fb_over_circ:
        fam = family.with_tau_fb(r_fb * tc)
        ref = fam.reference_optimum()
        points = list(grid)
        r_star = ref.tau_h_star / tc
        if include_optimum and grid and grid[0] <= r_star <= grid[-1] and r_star not in points:
            points.append(r_star)
            points.sort()
        for r_h in points:
            if not r_h > 1.0:
                rows.append(SweepRow(r_fb, r_h, math.nan, math.nan, math.nan, feasible=False))
                continue
            res = fam(r_h * tc)
            rows.append(SweepRow(r_fb, r_h, res.P / ref.p_star, res.eta, res.P))
    return rows
