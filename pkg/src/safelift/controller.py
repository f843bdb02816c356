"""Adaptive backstepping controller in lifted coordinates.

Design summary, for a frame with lifted state z and normalized state xn:

    e1 = z1 - z1_ref                         first-stage tracking error
    e2 = virtual_gain * xn2 + k1 * e1        second-stage error, with xn2
                                             playing the role of the
                                             virtual control

Driving e2 to zero makes the z1 rate approach -k1 e1. The control input
and the two parameter-estimate updates are

    inner = regressor * theta1_hat + virtual_gain * k2 * e2
    u     = -x2_max * p2_hat * inner / input_gain
    p2_hat'     = p2_law_sign * gamma * sign(theta2) * xn2 * inner
    theta1_hat' = alpha * xn2 * regressor

with k2 fixed at 1 / k1 (there is deliberately no independent k2 anywhere;
that coupling is what collapses the Lyapunov derivative to a perfect
square). p2_hat estimates the reciprocal of the input gain parameter, and
theta1_hat tracks the drift parameter scaled by 1 / x2_max.

p2_law_sign selects the sign of the p2_hat update. +1 (the default) is the
choice under which the monitored Lyapunov function is provably
non-increasing; -1 is an alternate sign that tracks more aggressively on
some scenarios but voids the monotonicity certificate. See the monitor module's
sign adjudication helper.

The controller reads only the plant shape (g1, f2, g2) and sign(theta2),
never the true parameter values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParams, NonFiniteInput
from .lifting import CoordinateFrame, SafeSet, FamilySpec, family_pair
from .lifted_dynamics import LiftedDynamics


@dataclass(frozen=True)
class ControllerGains:
    """Backstepping gain, adaptation gains, and the known input-gain sign.

    k2 is not a field: it is always 1 / k1.
    """

    k1: float
    gamma: float
    alpha: float
    theta2_sign: float

    def __post_init__(self):
        if not (math.isfinite(self.k1) and self.k1 > 0.0):
            raise InvalidParams(f"k1 must be positive, got {self.k1}")
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise InvalidParams(f"gamma must be positive, got {self.gamma}")
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise InvalidParams(f"alpha must be positive, got {self.alpha}")
        if self.theta2_sign not in (1.0, -1.0, 1, -1):
            raise InvalidParams(f"theta2_sign must be +1 or -1, got {self.theta2_sign}")

    @property
    def k2(self) -> float:
        return 1.0 / self.k1


@dataclass(frozen=True)
class EstimatorState:
    """Current parameter estimates (reciprocal input gain, scaled drift)."""

    p2_hat: float
    theta1_hat: float


@dataclass(frozen=True)
class Reference:
    """A constant position target and its lifted image."""

    x1d: float
    xn1d: float
    z1d: float

    @classmethod
    def for_target(cls, x1d: float, safe_set: SafeSet, family: FamilySpec) -> "Reference":
        x1d = float(x1d)
        if not math.isfinite(x1d):
            raise InvalidParams(f"reference must be finite, got {x1d}")
        if not abs(x1d) < safe_set.x1_max:
            raise InvalidParams(
                f"reference x1d={x1d} must lie strictly inside (-{safe_set.x1_max}, "
                f"{safe_set.x1_max})")
        fam1, _ = family_pair(family)
        xn1d = x1d / safe_set.x1_max
        return cls(x1d=x1d, xn1d=xn1d, z1d=safe_set.x1_max * fam1.unsquash(xn1d))


@dataclass(frozen=True)
class ControllerSignals:
    """Everything the control law produces at one state."""

    e1: float
    e2: float
    u: float
    dp2_hat: float
    dtheta1_hat: float


def _signals(dyn: LiftedDynamics, frame: CoordinateFrame, ref: Reference,
             gains: ControllerGains, est: EstimatorState,
             p2_law_sign: float = 1.0, fields=None) -> ControllerSignals:
    # fields lets a caller that already evaluated the lifted gains at this
    # frame skip the recomputation.
    if fields is None:
        fields = dyn._fields_at(frame)
    vgain, regressor, igain = fields
    c2 = frame.xn[1]
    e1 = frame.z[0] - ref.z1d
    e2 = vgain * c2 + gains.k1 * e1
    if not (math.isfinite(est.p2_hat) and math.isfinite(est.theta1_hat)):
        raise NonFiniteInput(f"non-finite estimates {est}")
    inner = regressor * est.theta1_hat + vgain * gains.k2 * e2
    u = -dyn.safe_set.x2_max * est.p2_hat * inner / igain
    if not math.isfinite(u):
        raise NonFiniteInput(f"control input overflowed to {u!r}")
    dp2 = p2_law_sign * gains.gamma * gains.theta2_sign * c2 * inner
    dth1 = gains.alpha * c2 * regressor
    return ControllerSignals(e1=e1, e2=e2, u=u, dp2_hat=dp2, dtheta1_hat=dth1)


def tracking_errors(dyn: LiftedDynamics, frame: CoordinateFrame, ref: Reference,
                    gains: ControllerGains) -> tuple[float, float]:
    """(e1, e2) at a frame."""
    fields = dyn._fields_at(frame)
    vgain = fields[0]
    e1 = frame.z[0] - ref.z1d
    return e1, vgain * frame.xn[1] + gains.k1 * e1


def control_input(dyn: LiftedDynamics, frame: CoordinateFrame, ref: Reference,
                  gains: ControllerGains, est: EstimatorState) -> float:
    """The control input u at a frame under the current estimates."""
    return _signals(dyn, frame, ref, gains, est).u


def adaptation_rates(dyn: LiftedDynamics, frame: CoordinateFrame, ref: Reference,
                     gains: ControllerGains, est: EstimatorState,
                     p2_law_sign: float = 1.0) -> tuple[float, float]:
    """(p2_hat rate, theta1_hat rate) at a frame."""
    sig = _signals(dyn, frame, ref, gains, est, p2_law_sign)
    return sig.dp2_hat, sig.dtheta1_hat


def evaluate(dyn: LiftedDynamics, frame: CoordinateFrame, ref: Reference,
             gains: ControllerGains, est: EstimatorState,
             p2_law_sign: float = 1.0) -> ControllerSignals:
    """Errors, control input, and adaptation rates in one evaluation."""
    return _signals(dyn, frame, ref, gains, est, p2_law_sign)
