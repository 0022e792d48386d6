"""Self-check suites run by ``qie validate``.

Each suite samples its invariant over a fixed-seed parameter set and reports
the worst observed defect against a threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from .cycle import derive_cycle, run_cycle_numeric
from .isotherm import (
    BathCoupling,
    IsothermSpec,
    frequency_schedule,
    isotherm_duration_highT,
    polarization_rate,
    relax_constant_omega,
)
from .measurement import (
    GeneralizedMeasurement,
    apply_measurement,
    build_measurement,
    completeness_defect,
    measurement_statistics,
)
from .optimize import analytic_power, eta_star, golden_section_max, optimal_hot_time
from .states import (
    PolarizationSpectrum,
    ScaledHamiltonian,
    effective_beta,
    energy,
    entropy,
    polarization_of,
    qubit_entropy,
    spin_flip,
    thermal_state,
)

SEED = 20211


@dataclass
class SuiteResult:
    name: str
    check: str
    worst: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.threshold)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<16} {self.check} <= {self.threshold:g}  (worst {self.worst:.3e})"


def random_triples(rng, n):
    beta_b = rng.uniform(0.01, 3.0, n)
    beta_a = beta_b * (1.0 + rng.uniform(1e-3, 3.0, n))
    omega = rng.uniform(0.05, 4.0, n)
    return zip(beta_b, beta_a, omega)


def perturb(meas: GeneralizedMeasurement, eps: float = 1e-6) -> GeneralizedMeasurement:
    ops = [m.copy() for m in meas.kraus_ops]
    ops[0][1, 1] += eps
    return GeneralizedMeasurement(tuple(ops), meas.context)


def suite_states(rng):
    worst = 0.0
    for beta, omega in zip(rng.uniform(1e-3, 20.0, 1000), rng.uniform(0.01, 5.0, 1000)):
        H = ScaledHamiltonian.qubit(omega)
        rho = thermal_state(beta, H)
        x = beta * omega
        worst = max(worst, abs(entropy(rho) - qubit_entropy(x)), abs(energy(rho, H) + 0.5 * omega * math.tanh(x / 2)))
    yield SuiteResult("states", "thermal entropy/energy vs closed form", worst, 1e-12)

    worst = 0.0
    lam = PolarizationSpectrum.qubit()
    # beta*omega <= 5: closer to full polarization artanh amplifies rounding of <P>
    for beta in np.geomspace(1e-4, 50.0, 200):
        omega = 0.1
        p = polarization_of(thermal_state(beta, ScaledHamiltonian.qubit(omega)), lam)
        worst = max(worst, abs(effective_beta(p, omega).beta - beta) / beta)
    yield SuiteResult("states", "effective beta round trip (relative)", worst, 1e-10)


def suite_cptp(rng, fault: bool = False):
    worst = 0.0
    for bb, ba, w in random_triples(rng, 1000):
        meas = build_measurement(bb, ba, w)
        if fault:
            meas = perturb(meas)
        worst = max(worst, completeness_defect(meas))
    yield SuiteResult("cptp", "completeness defect", worst, 1e-12)


def suite_reversibility(rng):
    worst_state = worst_energy = worst_work = 0.0
    for bb, ba, w in random_triples(rng, 1000):
        H = ScaledHamiltonian.qubit(w)
        before = thermal_state(bb, H)
        after = thermal_state(ba, H)
        meas = build_measurement(bb, ba, w)
        r0, r1 = apply_measurement(meas, before, H)
        worst_state = max(worst_state, r0.post_state.distance(after), r1.post_state.distance(spin_flip(after)))
        stats = measurement_statistics(meas, before, H, [r0, r1])
        worst_energy = max(worst_energy, abs(stats.avg_energy_change_meas))
        worst_work = max(worst_work, abs(stats.avg_feedback_work - (energy(before, H) - energy(after, H))))
    yield SuiteResult("reversibility", "post-measurement states vs thermal/flipped", worst_state, 1e-12)
    yield SuiteResult("reversibility", "average measurement energy change", worst_energy, 1e-12)
    yield SuiteResult("reversibility", "feedback work vs E_before - E_after", worst_work, 1e-12)


def suite_master_equation(rng):
    worst = 0.0
    for _ in range(20):
        bath = BathCoupling(rng.uniform(0.05, 2.0), rng.uniform(-0.95, -0.05), rng.uniform(0.05, 3.0))
        omega = rng.uniform(0.1, 3.0)
        p0 = rng.uniform(-0.49, 0.49)
        t_end = rng.uniform(0.1, 5.0)
        sol = solve_ivp(
            lambda t, y: [polarization_rate(y[0], omega, bath)], (0, t_end), [p0], method="RK45", rtol=1e-12, atol=1e-14
        )
        worst = max(worst, abs(sol.y[0, -1] - relax_constant_omega(p0, omega, bath, t_end)))
    yield SuiteResult("master-equation", "constant-omega relaxation vs RK45", worst, 1e-9)

    worst = 0.0
    for omega in rng.uniform(0.01, 5.0, 200):
        bath = BathCoupling(0.3, -0.4, 0.8)
        worst = max(worst, abs(polarization_rate(-0.5 * math.tanh(bath.beta_h * omega / 2), omega, bath)))
    yield SuiteResult("master-equation", "stationary-point residual", worst, 1e-15)


def suite_isotherm(rng):
    errors = []
    for s in (0.1, 0.03, 0.01, 0.003):
        bath = BathCoupling(0.25, -0.3, s / math.e)
        spec = IsothermSpec(math.e, 1.0, 2 * bath.beta_h)
        errors.append(abs(frequency_schedule(spec, bath).duration / isotherm_duration_highT(spec, bath) - 1))
    yield SuiteResult("isotherm", "high-T duration relative error at beta_h*omega3 = 0.01", errors[2], 0.01)
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    yield SuiteResult("isotherm", "duration error shrinking with temperature (violations)", float(not monotone), 0.0)


def suite_cycle(rng):
    bath = BathCoupling(0.25, -0.5, 0.01 / math.e)
    res = run_cycle_numeric(derive_cycle(0.5, math.e, 1.0, bath, 1.0, 2.5))
    r = res.residuals
    yield SuiteResult("cycle", "closure of the numeric cycle", r["closure"], 1e-9)
    yield SuiteResult("cycle", "|Q_c + W_fb|", abs(r["reservoir_energy"]), 1e-10)
    yield SuiteResult("cycle", "|W_total - W_fb - W_wm|", abs(r["ledger"]), 1e-9)
    yield SuiteResult("cycle", "W_total >= T_h dS (violations)", float(not res.W_total < bath.T_h * res.dS), 0.0)


def suite_optimizer(rng):
    mpmath.mp.dps = 40
    inv_phi = (mpmath.sqrt(5) - 1) / 2
    worst_tau = worst_eta = 0.0
    for _ in range(50):
        tc = rng.uniform(0.1, 10.0)
        tfb = tc * rng.uniform(0.0, 100.0)
        ts = optimal_hot_time(tc, tfb)
        x, _, _ = golden_section_max(
            lambda t: analytic_power(t, 1, 1, mpmath.mpf(tc), mpmath.mpf(tfb)),
            mpmath.mpf(tc) * 1.0001, mpmath.mpf(ts) * 10, xtol=1e-13, inv_phi=inv_phi,
        )
        worst_tau = max(worst_tau, abs(float(x) / ts - 1))
        worst_eta = max(worst_eta, abs(float(1 - tc / x) - eta_star(tc, tfb)))
    yield SuiteResult("optimizer", "optimal tau_h closed form vs golden section (relative)", worst_tau, 1e-6)
    yield SuiteResult("optimizer", "efficiency at max power closed form vs golden section", worst_eta, 1e-9)


SUITES: dict[str, Callable] = {
    "states": suite_states,
    "cptp": suite_cptp,
    "reversibility": suite_reversibility,
    "master-equation": suite_master_equation,
    "isotherm": suite_isotherm,
    "cycle": suite_cycle,
    "optimizer": suite_optimizer,
}


def run_all(fault: Optional[str] = None) -> list[SuiteResult]:
    results = []
    for name, suite in SUITES.items():
        rng = np.random.default_rng(SEED)
        if name == "cptp":
            results.extend(suite(rng, fault=(fault == "cptp")))
        else:
            results.extend(suite(rng))
    return results
