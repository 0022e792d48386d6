"""Polarization dynamics of a qubit coupled to the hot bath.

The bath obeys detailed balance with rates gamma_+ = a exp(q beta_h omega)
and gamma_- = a exp((1+q) beta_h omega). Along the hot isotherm the
frequency is lowered from omega_start to omega_end on the schedule that keeps
the qubit thermal at a constant effective inverse temperature beta_prime.

Sign convention: ``work_output > 0`` is energy delivered by the medium,
``heat_absorbed > 0`` is energy received from the bath.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import InfeasibleDurationError, InvalidParameterError, NumericFailureError
from .states import PolarizationSpectrum, qubit_polarization

RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class BathCoupling:
    a: float
    q: float
    beta_h: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise InvalidParameterError(f"a must be > 0, got {self.a}")
        if not -1.0 < self.q < 0.0:
            raise InvalidParameterError(f"q must lie in (-1, 0), got {self.q}")
        if not (math.isfinite(self.beta_h) and self.beta_h > 0):
            raise InvalidParameterError(f"beta_h must be > 0, got {self.beta_h}")

    @property
    def T_h(self) -> float:
        return 1.0 / self.beta_h

    def gamma_plus(self, omega: float) -> float:
        return self.a * math.exp(self.q * self.beta_h * omega)

    def gamma_minus(self, omega: float) -> float:
        return self.a * math.exp((1.0 + self.q) * self.beta_h * omega)

    def relaxation_rate(self, omega: float) -> float:
        """Gamma = 2 (gamma_+ + gamma_-) = 2 a e^{q h} (1 + e^{h}), h = beta_h omega."""
        h = self.beta_h * omega
        return 2.0 * self.a * math.exp(self.q * h) * (1.0 + math.exp(h))

    def equilibrium_polarization(self, omega: float) -> float:
        return qubit_polarization(self.beta_h * omega)


@dataclass(frozen=True)
class IsothermSpec:
    omega_start: float
    omega_end: float
    beta_prime: float

    def __post_init__(self):
        if not (self.omega_end > 0 and math.isfinite(self.omega_start)):
            raise InvalidParameterError("isotherm frequencies must be finite and > 0")
        if not self.omega_start > self.omega_end:
            raise InvalidParameterError(
                f"omega_start ({self.omega_start}) must exceed omega_end ({self.omega_end})"
            )
        if not (math.isfinite(self.beta_prime) and self.beta_prime > 0):
            raise InvalidParameterError(f"beta_prime must be finite and > 0, got {self.beta_prime}")

    def check_bath(self, bath: BathCoupling):
        if not self.beta_prime > bath.beta_h:
            raise InvalidParameterError(
                f"beta_prime ({self.beta_prime}) must exceed beta_h ({bath.beta_h}) for heat to flow in"
            )


def polarization_rate(P: float, omega: float, bath: BathCoupling) -> float:
    """d<P>/dt = -a e^{q h} [2 (1 + e^h) <P> + (e^h - 1)], h = beta_h omega.

    Evaluated in the equivalent form -Gamma (P - P_eq) so that the
    stationary point is an exact zero in floating point.
    """
    return -bath.relaxation_rate(omega) * (P - bath.equilibrium_polarization(omega))


def relax_constant_omega(P0: float, omega: float, bath: BathCoupling, t: float) -> float:
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    p_eq = bath.equilibrium_polarization(omega)
    g = bath.relaxation_rate(omega) * t
    return P0 * math.exp(-g) - p_eq * math.expm1(-g)


def schedule_slope(omega, spec: IsothermSpec, bath: BathCoupling):
    """dt/domega (negative) along the constant-beta_prime schedule.

    Uses tanh(A) - tanh(B) = sinh(A - B) / (cosh A cosh B) to avoid the
    cancellation between the thermal and bath polarizations at high T.
    Vectorized over ``omega``.
    """
    w = np.asarray(omega, dtype=float)
    bp, bh = spec.beta_prime, bath.beta_h
    h = bh * w
    gamma = 2.0 * bath.a * np.exp(bath.q * h) * (1.0 + np.exp(h))
    num = bp * np.cosh(0.5 * h)
    den = 2.0 * gamma * np.cosh(0.5 * bp * w) * np.sinh(0.5 * (bp - bh) * w)
    return -num / den


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class FrequencySchedule:
    """omega(t) on [0, duration], tabulated from t(omega) and inverted monotonically."""

    spec: IsothermSpec
    bath: BathCoupling
    omega_grid: np.ndarray
    t_grid: np.ndarray
    duration: float
    _omega_of_t: Callable = None

    def __call__(self, t):
        return self._omega_of_t(np.clip(t, 0.0, self.duration))

    def time_at(self, omega):
        """t(omega), interpolated on the quadrature grid."""
        return np.interp(-np.asarray(omega), -self.omega_grid, self.t_grid)


def frequency_schedule(spec: IsothermSpec, bath: BathCoupling, n_grid: int = 2001) -> FrequencySchedule:
    """Tabulate t(omega) by Gauss-Legendre quadrature of the exact integrand.

    The grid is geometric in omega (the integrand behaves like 1/omega); the
    inverse omega(t) is a monotone cubic (PCHIP) interpolant.
    """
    spec.check_bath(bath)
    grid = np.geomspace(spec.omega_start, spec.omega_end, n_grid)
    lo, hi = grid[1:], grid[:-1]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    # integrate |dt/domega| from hi down to lo
    pieces = half * (-schedule_slope(nodes, spec, bath) @ _GL_WEIGHTS)
    t_grid = np.concatenate([[0.0], np.cumsum(pieces)])
    duration = float(t_grid[-1])
    grid.setflags(write=False)
    t_grid.setflags(write=False)
    return FrequencySchedule(spec, bath, grid, t_grid, duration, PchipInterpolator(t_grid, grid))


def isotherm_duration_quad(spec: IsothermSpec, bath: BathCoupling) -> float:
    """Duration by adaptive quadrature (independent of the tabulated schedule)."""
    spec.check_bath(bath)
    # substitute s = ln omega: smooth, nearly constant integrand
    val, _ = quad(
        lambda s: -math.exp(s) * float(schedule_slope(math.exp(s), spec, bath)),
        math.log(spec.omega_end),
        math.log(spec.omega_start),
        epsabs=0.0,
        epsrel=1e-13,
        limit=200,
    )
    return val


def dissipation_time_qubit(omega3: float, omega4: float, a: float) -> float:
    """ln(omega3/omega4) / (4a): isotherm duration at which net work vanishes."""
    return math.log(omega3 / omega4) / (4.0 * a)


def isotherm_duration_highT(spec: IsothermSpec, bath: BathCoupling) -> float:
    """tau_h = ln(omega3/omega4) / (4a (1 - beta_h/beta_prime))."""
    spec.check_bath(bath)
    return dissipation_time_qubit(spec.omega_start, spec.omega_end, bath.a) / (
        1.0 - bath.beta_h / spec.beta_prime
    )


def beta_prime_for_duration(omega3: float, omega4: float, bath: BathCoupling, tau_h: float) -> float:
    """Invert the high-temperature duration formula for beta_prime."""
    tau_circ = dissipation_time_qubit(omega3, omega4, bath.a)
    if not tau_h > tau_circ:
        raise InfeasibleDurationError(
            f"tau_h = {tau_h} does not exceed the dissipation time {tau_circ}; no work is produced"
        )
    if math.isinf(tau_h):
        return bath.beta_h
    return bath.beta_h / (1.0 - tau_circ / tau_h)


@dataclass(frozen=True)
class Trajectory:
    samples: np.ndarray  # columns: t, omega, <P>
    heat_absorbed: float
    work_output: float
    duration: float
    nfev: int

    @property
    def t(self):
        return self.samples[:, 0]

    @property
    def omega(self):
        return self.samples[:, 1]

    @property
    def polarization(self):
        return self.samples[:, 2]

    @property
    def delta_energy(self) -> float:
        (_, w0, p0), (_, w1, p1) = self.samples[0], self.samples[-1]
        return w1 * p1 - w0 * p0

    @property
    def first_law_residual(self) -> float:
        return self.heat_absorbed - self.delta_energy - self.work_output


def simulate_isotherm(
    spec: IsothermSpec,
    bath: BathCoupling,
    steps: int = 1000,
    P0: Optional[float] = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Trajectory:
    """Integrate the polarization master equation along the schedule.

    The frequency is used as the independent variable (the schedule is
    strictly monotone), carrying t, <P>, the work -int <P> domega and the
    heat int omega d<P> as state. Without ``P0`` the qubit starts thermal
    at beta_prime. ``steps`` bounds the step size and sets the number of
    output samples.
    """
    if steps < 100:
        raise InvalidParameterError("steps must be >= 100")
    spec.check_bath(bath)
    w0, w1 = spec.omega_start, spec.omega_end
    if P0 is None:
        P0 = qubit_polarization(spec.beta_prime * w0)

    def rhs(w, y):
        g = float(schedule_slope(w, spec, bath))
        dp = polarization_rate(y[1], w, bath) * g
        return [g, dp, -y[1], w * dp]

    sol = solve_ivp(
        rhs,
        (w0, w1),
        [0.0, P0, 0.0, 0.0],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        max_step=(w0 - w1) / steps,
        t_eval=np.linspace(w0, w1, steps + 1),
    )
    if not sol.success:
        raise NumericFailureError(
            f"isotherm integration failed at omega={sol.t[-1]:.6g} after {sol.nfev} evaluations: {sol.message}"
        )
    t, p, work, heat = sol.y
    samples = np.column_stack([t, sol.t, p])
    samples.setflags(write=False)
    return Trajectory(samples, float(heat[-1]), float(work[-1]), float(t[-1]), sol.nfev)


def sigma_coefficient(omega3: float, omega4: float, bath: BathCoupling, beta: Optional[float] = None) -> float:
    """Entropy-production coefficient of the qubit isotherm (high temperature).

    Sigma = (beta^2/8)(omega3^2 - omega4^2) ln(omega3/omega4)/(4a). ``beta``
    defaults to the bath inverse temperature; pass the medium's effective
    inverse temperature to pair Sigma with the medium's entropy change.
    """
    if not omega3 >= omega4 > 0:
        raise InvalidParameterError("require omega3 >= omega4 > 0")
    b = bath.beta_h if beta is None else beta
    return b * b / 8.0 * (omega3**2 - omega4**2) * dissipation_time_qubit(omega3, omega4, bath.a)


def entropy_change_highT(
    kind: str,
    *,
    beta: Optional[float] = None,
    omega: Optional[float] = None,
    omega_start: Optional[float] = None,
    omega_end: Optional[float] = None,
    beta_start: Optional[float] = None,
    beta_end: Optional[float] = None,
    spectrum: Optional[PolarizationSpectrum] = None,
) -> float:
    """S(end) - S(start) from the quadratic high-temperature entropy.

    ``kind="isothermal"`` takes beta, omega_start, omega_end;
    ``kind="isochoric"`` takes omega, beta_start, beta_end.
    """
    spectrum = spectrum or PolarizationSpectrum.qubit()
    c = spectrum.chi / spectrum.dim
    if kind == "isothermal":
        return beta**2 * c * (omega_start**2 - omega_end**2)
    if kind == "isochoric":
        return omega**2 * c * (beta_start**2 - beta_end**2)
    raise InvalidParameterError(f"unknown process kind {kind!r}")
