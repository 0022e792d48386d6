"""One cycle of the qubit information engine.

Branches, from the working medium's point of view:

1-2  isochore at omega_fb: measurement plus feedback, beta_b -> beta_a
2-3  adiabat omega_fb -> omega3 (populations frozen)
3-4  hot isotherm omega3 -> omega4 at effective inverse temperature beta_prime
4-1  adiabat omega4 -> omega_fb

The adiabats take zero time. Populations are invariant along them because
H_t = omega_t * P commutes with itself at all times, which fixes
beta_a * omega_fb = beta_prime * omega3 and beta_b * omega_fb = beta_prime * omega4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidParameterError
from .isotherm import (
    BathCoupling,
    IsothermSpec,
    beta_prime_for_duration,
    dissipation_time_qubit,
    isotherm_duration_highT,
    simulate_isotherm,
)
from .measurement import apply_measurement, build_measurement, completeness_defect, measurement_statistics
from .states import (
    DensityMatrix,
    PolarizationSpectrum,
    ScaledHamiltonian,
    energy,
    entropy,
    polarization_of,
    qubit_entropy,
    qubit_polarization,
    thermal_state,
)


@dataclass(frozen=True)
class CycleConfig:
    omega_fb: float
    omega3: float
    omega4: float
    bath: BathCoupling
    tau_fb: float
    tau_h: float
    beta_prime: float
    beta_b: float
    beta_a: float

    @property
    def tau_circ(self) -> float:
        return dissipation_time_qubit(self.omega3, self.omega4, self.bath.a)

    @property
    def T_h(self) -> float:
        return self.bath.T_h

    def isotherm(self) -> IsothermSpec:
        return IsothermSpec(self.omega3, self.omega4, self.beta_prime)


def derive_cycle(
    omega_fb: float,
    omega3: float,
    omega4: float,
    bath: BathCoupling,
    tau_fb: float,
    tau_h: Optional[float] = None,
    *,
    beta_prime: Optional[float] = None,
) -> CycleConfig:
    """Close the cycle from the frequencies and either tau_h or beta_prime.

    beta_prime follows from the high-temperature duration formula; the
    measurement temperatures follow from adiabatic invariance of beta*omega.
    """
    if not (omega_fb > 0 and math.isfinite(omega_fb)):
        raise InvalidParameterError(f"omega_fb must be finite and > 0, got {omega_fb}")
    if not (math.isfinite(omega3) and omega3 > omega4 > 0):
        raise InvalidParameterError(f"require omega3 > omega4 > 0, got {omega3}, {omega4}")
    if not (tau_fb >= 0 and math.isfinite(tau_fb)):
        raise InvalidParameterError(f"tau_fb must be finite and >= 0, got {tau_fb}")
    if (tau_h is None) == (beta_prime is None):
        raise InvalidParameterError("give exactly one of tau_h and beta_prime")
    if beta_prime is None:
        beta_prime = beta_prime_for_duration(omega3, omega4, bath, tau_h)
    else:
        tau_h = isotherm_duration_highT(IsothermSpec(omega3, omega4, beta_prime), bath)
    return CycleConfig(
        omega_fb=omega_fb,
        omega3=omega3,
        omega4=omega4,
        bath=bath,
        tau_fb=tau_fb,
        tau_h=tau_h,
        beta_prime=beta_prime,
        beta_b=beta_prime * omega4 / omega_fb,
        beta_a=beta_prime * omega3 / omega_fb,
    )


@dataclass(frozen=True)
class CycleResult:
    dS: float
    sigma: float
    tau_circ: float
    W_total: float
    W_fb: float
    W_wm: float
    Q_h: float
    Q_c: float
    eta: float
    P: float
    mode: str
    tau_h: float
    residuals: dict = field(default_factory=dict)


def _feedback_work(cfg: CycleConfig) -> float:
    # E_before - E_after at omega_fb
    return cfg.omega_fb * (
        qubit_polarization(cfg.beta_b * cfg.omega_fb) - qubit_polarization(cfg.beta_a * cfg.omega_fb)
    )


def run_cycle_analytic(cfg: CycleConfig) -> CycleResult:
    """Energy ledger from the closed forms.

    dS uses exact qubit entropies; Sigma = dS * tau_circ with
    tau_circ = ln(omega3/omega4)/(4a), so that W_total = T_h (dS - Sigma/tau_h)
    and eta = 1 - tau_circ/tau_h hold exactly.
    """
    dS = qubit_entropy(cfg.beta_b * cfg.omega_fb) - qubit_entropy(cfg.beta_a * cfg.omega_fb)
    tau_circ = cfg.tau_circ
    sigma = dS * tau_circ
    if math.isinf(cfg.tau_h):
        W = cfg.T_h * dS
        eta = 1.0
        P = 0.0
    else:
        W = cfg.T_h * (dS - sigma / cfg.tau_h)
        eta = 1.0 - tau_circ / cfg.tau_h
        P = W / (cfg.tau_h + cfg.tau_fb)
    W_fb = _feedback_work(cfg)
    return CycleResult(
        dS=dS,
        sigma=sigma,
        tau_circ=tau_circ,
        W_total=W,
        W_fb=W_fb,
        W_wm=W - W_fb,
        Q_h=W,
        Q_c=-W_fb,
        eta=eta,
        P=P,
        mode="analytic",
        tau_h=cfg.tau_h,
    )


def _qubit_state(polarization: float) -> DensityMatrix:
    return DensityMatrix.diagonal([0.5 - polarization, 0.5 + polarization], atol=1e-9)


def run_cycle_numeric(cfg: CycleConfig, steps: int = 400) -> CycleResult:
    """Ledger assembled from the measurement channel and the integrated isotherm.

    W_total is the heat drawn from the bath minus the medium's energy drift
    over the cycle; W_fb + W_wm is accumulated branch by branch, so their
    agreement checks both the information-reservoir identity and the
    integration. The power uses the realized isotherm duration.
    """
    lam = PolarizationSpectrum.qubit()
    H_fb = ScaledHamiltonian.qubit(cfg.omega_fb)

    # 1-2: measurement and feedback
    rho1 = thermal_state(cfg.beta_b, H_fb)
    meas = build_measurement(cfg.beta_b, cfg.beta_a, cfg.omega_fb)
    records = apply_measurement(meas, rho1, H_fb)
    stats = measurement_statistics(meas, rho1, H_fb, records)
    rho2 = meas.target_state()
    W_fb = stats.avg_feedback_work
    Q_c = energy(rho2, H_fb) - energy(rho1, H_fb)

    # 2-3: adiabatic sweep, populations frozen
    p2 = polarization_of(rho2, lam)
    W_ad1 = (cfg.omega_fb - cfg.omega3) * p2

    # 3-4: hot isotherm
    traj = simulate_isotherm(cfg.isotherm(), cfg.bath, steps=steps, P0=p2)
    p4 = float(traj.polarization[-1])

    # 4-1: adiabatic sweep back
    W_ad2 = (cfg.omega4 - cfg.omega_fb) * p4
    rho_end = _qubit_state(p4)

    W_wm = W_ad1 + traj.work_output + W_ad2
    drift = energy(rho_end, H_fb) - energy(rho1, H_fb)
    W_total = traj.heat_absorbed - drift
    dS = entropy(rho1) - entropy(rho2)
    duration = traj.duration
    T_h = cfg.T_h
    sigma = (dS - cfg.bath.beta_h * traj.heat_absorbed) * duration

    s_branches = sum(r.probability * r.post_entropy for r in records)
    residuals = {
        "closure": rho_end.distance(rho1),
        "reservoir_energy": Q_c + W_fb,
        "meas_energy": stats.avg_energy_change_meas,
        "ledger": W_total - (W_fb + W_wm),
        "first_law_isotherm": traj.first_law_residual,
        "branch_entropy": s_branches - entropy(rho2),
        "completeness": completeness_defect(meas),
        "isotherm_start": p2 - qubit_polarization(cfg.beta_prime * cfg.omega3),
    }
    return CycleResult(
        dS=dS,
        sigma=sigma,
        tau_circ=sigma / dS,
        W_total=W_total,
        W_fb=W_fb,
        W_wm=W_wm,
        Q_h=traj.heat_absorbed,
        Q_c=Q_c,
        eta=W_total / (T_h * dS),
        P=W_total / (duration + cfg.tau_fb),
        mode="numeric",
        tau_h=duration,
        residuals=residuals,
    )


def run_cycle(cfg: CycleConfig, mode: str = "analytic", steps: int = 400) -> CycleResult:
    if mode == "analytic":
        return run_cycle_analytic(cfg)
    if mode == "numeric":
        return run_cycle_numeric(cfg, steps)
    raise InvalidParameterError(f"unknown mode {mode!r}")
