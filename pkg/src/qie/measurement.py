"""Reversible qubit energy measurement and outcome-dependent feedback.

The two Kraus operators are diagonal in the energy basis and map the thermal
state at ``beta_b`` onto the thermal state at ``beta_a`` (outcome 0) or onto
its spin flip (outcome 1). Feedback then swaps the levels for outcome 1 so
that every branch ends in the same colder thermal state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, ProtocolMismatchError, ReversibilityViolationError
from .states import (
    DensityMatrix,
    ScaledHamiltonian,
    energy,
    entropy,
    spin_flip,
    thermal_state,
)

_DEGENERATE_P = 1e-15
_COMMUTE_TOL = 1e-9
_MATCH_TOL = 1e-9


class MeasurementContext(NamedTuple):
    beta_b: float
    beta_a: float
    omega_fb: float


@dataclass(frozen=True)
class GeneralizedMeasurement:
    kraus_ops: tuple
    context: Optional[MeasurementContext] = None

    def __post_init__(self):
        ops = tuple(np.array(m, dtype=complex) for m in self.kraus_ops)
        if not ops:
            raise InvalidParameterError("at least one Kraus operator is required")
        n = ops[0].shape[0]
        for m in ops:
            if m.shape != (n, n):
                raise InvalidParameterError("Kraus operators must be square and of equal size")
            m.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def hamiltonian(self) -> ScaledHamiltonian:
        if self.context is None:
            raise InvalidParameterError("measurement carries no construction context")
        return ScaledHamiltonian.qubit(self.context.omega_fb)

    def target_state(self) -> DensityMatrix:
        """Thermal state at beta_a, the state every branch is fed back into."""
        return thermal_state(self.context.beta_a, self.hamiltonian())


def kraus_amplitudes(beta_b: float, beta_a: float, omega_fb: float) -> tuple[float, float, float, float]:
    """Squared diagonal entries (x2, y2, u2, v2) of M0 = diag(y, x), M1 = diag(v, u).

    x, u act on the excited level, y, v on the ground level. Written in terms of
    expm1 so that the radicands stay accurate when a = beta_b*omega and
    b = beta_a*omega are small or large.
    """
    for name, val in (("beta_b", beta_b), ("beta_a", beta_a), ("omega_fb", omega_fb)):
        if not (math.isfinite(val) and val > 0):
            raise InvalidParameterError(f"{name} must be finite and > 0, got {val}")
    if beta_a < beta_b:
        raise InvalidParameterError(
            f"beta_a ({beta_a}) < beta_b ({beta_b}): the measurement would have to heat the state"
        )
    a = beta_b * omega_fb
    b = beta_a * omega_fb
    den = math.expm1(-2.0 * b)
    y2 = math.expm1(-(a + b)) / den
    x2 = math.exp(a - b) * y2
    u2 = math.expm1(a - b) / den
    v2 = math.exp(-(a + b)) * u2
    return x2, y2, u2, v2


def build_measurement(beta_b: float, beta_a: float, omega_fb: float) -> GeneralizedMeasurement:
    x2, y2, u2, v2 = kraus_amplitudes(beta_b, beta_a, omega_fb)
    m0 = np.diag([math.sqrt(y2), math.sqrt(x2)])
    m1 = np.diag([math.sqrt(v2), math.sqrt(u2)])
    return GeneralizedMeasurement((m0, m1), MeasurementContext(beta_b, beta_a, omega_fb))


def completeness_defect(meas: GeneralizedMeasurement) -> float:
    """Max-norm of sum_i M_i^dag M_i - I."""
    total = sum(m.conj().T @ m for m in meas.kraus_ops)
    return float(np.max(np.abs(total - np.eye(meas.dim))))


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    probability: float
    post_state: DensityMatrix
    post_entropy: float
    post_energy: float
    degenerate: bool = False


def apply_measurement(
    meas: GeneralizedMeasurement,
    rho: DensityMatrix,
    H: Optional[ScaledHamiltonian] = None,
) -> list[MeasurementRecord]:
    """Outcome records rho_i = M_i rho M_i^dag / p_i.

    ``rho`` must be diagonal in the energy basis; otherwise the measurement
    does not commute with the state and is rejected. Outcomes with
    p_i < 1e-15 are flagged ``degenerate`` and carry the analytic target state
    (or the input state when the measurement has no construction context).
    """
    if rho.dim != meas.dim:
        raise InvalidParameterError(f"dimension mismatch: state {rho.dim}, measurement {meas.dim}")
    off = rho.off_diagonal_norm()
    if off > _COMMUTE_TOL:
        raise ReversibilityViolationError(f"state has off-diagonal weight {off:.3e}")
    if H is None:
        H = meas.hamiltonian()

    records = []
    for i, m in enumerate(meas.kraus_ops):
        unnorm = m @ rho.matrix @ m.conj().T
        p = float(np.real(np.trace(unnorm)))
        if p < _DEGENERATE_P:
            if meas.context is not None:
                post = meas.target_state()
                if i == 1:
                    post = spin_flip(post)
            else:
                post = rho
            records.append(MeasurementRecord(i, max(p, 0.0), post, entropy(post), energy(post, H), True))
            continue
        post = DensityMatrix(unnorm / p, atol=1e-9)
        records.append(MeasurementRecord(i, p, post, entropy(post), energy(post, H)))
    return records


@dataclass(frozen=True)
class FeedbackReport:
    final_state: DensityMatrix
    work_extracted: float
    entropy_change: float


def apply_feedback(record: MeasurementRecord, target: DensityMatrix, H: ScaledHamiltonian) -> FeedbackReport:
    """Map one measurement branch onto ``target``.

    Outcome 0 needs no action. Outcome 1 is reordered by the level inversion
    H_1 = -H + (E_1 - E_after) I, which keeps the energy, and the levels are
    then shifted back to H. The work extracted is E_i - E_after in both cases.
    """
    if record.outcome == 0:
        expected = target
    elif record.outcome == 1:
        expected = spin_flip(target)
    else:
        raise ProtocolMismatchError(f"no feedback defined for outcome {record.outcome}")
    mismatch = record.post_state.distance(expected)
    if mismatch > _MATCH_TOL:
        raise ProtocolMismatchError(
            f"outcome {record.outcome} state differs from its feedback branch by {mismatch:.3e}"
        )
    e_after = energy(target, H)
    return FeedbackReport(
        final_state=target,
        work_extracted=record.post_energy - e_after,
        entropy_change=entropy(target) - record.post_entropy,
    )


class MeasurementStatistics(NamedTuple):
    avg_feedback_work: float
    avg_entropy_change: float
    avg_energy_change_meas: float


def measurement_statistics(
    meas: GeneralizedMeasurement,
    rho_before: DensityMatrix,
    H: Optional[ScaledHamiltonian] = None,
    records: Optional[Sequence[MeasurementRecord]] = None,
) -> MeasurementStatistics:
    """Outcome-averaged feedback work, entropy change and measurement energy change."""
    if H is None:
        H = meas.hamiltonian()
    if records is None:
        records = apply_measurement(meas, rho_before, H)
    target = meas.target_state() if meas.context is not None else records[0].post_state

    e_before = energy(rho_before, H)
    s_before = entropy(rho_before)
    w_fb = 0.0
    s_avg = 0.0
    e_avg = 0.0
    for rec in records:
        fb = apply_feedback(rec, target, H)
        w_fb += rec.probability * fb.work_extracted
        s_avg += rec.probability * entropy(fb.final_state)
        e_avg += rec.probability * rec.post_energy
    return MeasurementStatistics(w_fb, s_avg - s_before, e_avg - e_before)
