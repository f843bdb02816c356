"""Numerical stability and safety certification of completed runs.

The monitor evaluates the composite Lyapunov function

    V = e1^2 / 2 + squash_integral(zn2)
        + |theta2| (p2_hat - p2)^2 / (2 gamma)
        + (theta1_target - theta1_hat)^2 / (2 alpha)

with p2 = 1 / theta2 and theta1_target = theta1 / x2_max, and checks the
trajectory-level facts the design promises: the state never leaves the
safe box, logged V never increases beyond integrator noise, the numeric
derivative of V matches -(sqrt(k1) e1 - sqrt(k2) e2)^2, the estimates stay
inside a ball fixed by V(0), and the run ends near the closed-loop
equilibrium (z1_ref, 0) with u near 0. These are finite-horizon numerical
certificates over a sampled trajectory, not proofs; thresholds are
explicit and configurable.

Because V needs the true parameters, the monitor is a diagnostic layer on
top of a simulation; nothing here flows back into the control law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dc_fields
from typing import Optional

import numpy as np

from .controller import EstimatorState, Reference, ControllerGains, _signals
from .lifted_dynamics import LiftedDynamics
from .lifting import CoordinateFrame, family_pair, lift
from .errors import InvalidParams


def lyapunov(dyn: LiftedDynamics, frame: CoordinateFrame, ref: Reference,
             gains: ControllerGains, est: EstimatorState) -> float:
    """Composite Lyapunov value at one state.

    dyn must be truth-backed (its plant carries theta1/theta2);
    nonnegative, and zero exactly at the equilibrium with exact estimates.
    """
    plant = dyn.plant
    try:
        th1, th2 = plant.theta1, plant.theta2
    except AttributeError:
        raise InvalidParams(
            "lyapunov needs truth-backed dynamics (a plant with theta1/theta2); "
            "got the controller-facing view") from None
    _, fam2 = family_pair(dyn.family)
    xb2 = dyn.safe_set.x2_max
    e1 = frame.z[0] - ref.z1d
    dp = est.p2_hat - 1.0 / th2
    dth = th1 / xb2 - est.theta1_hat
    return (0.5 * e1 * e1 + fam2.squash_integral(frame.zn[1])
            + 0.5 / gains.gamma * abs(th2) * dp * dp
            + 0.5 / gains.alpha * dth * dth)


def vdot_analytic(e1: float, e2: float, gains: ControllerGains) -> float:
    """Closed-form Lyapunov rate under the design coupling k2 = 1/k1.

    Equals -(sqrt(k1) e1 - sqrt(k2) e2)^2, hence never positive, and zero
    exactly on the k1 e1 = e2 locus.
    """
    r = math.sqrt(gains.k1) * e1 - math.sqrt(gains.k2) * e2
    return -r * r


@dataclass(frozen=True)
class CertThresholds:
    """Thresholds applied when certifying a trajectory.

    lyap_increment_rel scales with max(1, V(0)); estimate_bound_factor
    scales with 1 + V(0). vdot_tol covers the finite-difference error of
    the numeric V rate, so it depends on the log spacing used.
    """

    lyap_increment_rel: float = 1e-6
    vdot_tol: float = 1e-3
    estimate_bound_factor: float = 10.0
    tracking_tol: float = 0.02
    final_residual_tol: float = 1e-2

    @classmethod
    def from_mapping(cls, data: dict) -> "CertThresholds":
        known = {f.name for f in dc_fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParams(f"unknown certificate thresholds: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass
class Certificate:
    """Checked facts about one trajectory, with the evidence attached.

    Pass/fail applies to safety, Lyapunov monotonicity, and estimate
    boundedness (plus run completion); the remaining entries are measured
    values recorded for inspection against the thresholds.
    """

    completed: bool
    failure: Optional[str]
    v0: float
    safe_invariance: bool
    first_violation_time: Optional[float]
    lyapunov_monotone: bool
    worst_v_increment: float
    vdot_identity_error: float
    estimates_bounded: bool
    sup_p2_hat: float
    sup_theta1_hat: float
    tracking_error_final: float
    final_e1: float
    final_e2: float
    final_u: float
    final_z2: float
    equilibrium_residual: float
    thresholds: CertThresholds

    @property
    def all_pass(self) -> bool:
        return (self.completed and self.safe_invariance
                and self.lyapunov_monotone and self.estimates_bounded)

    def to_report(self) -> str:
        th = self.thresholds
        yn = lambda b: "pass" if b else "FAIL"
        opt = lambda v: "none" if v is None else f"{v:.15g}"
        lines = [
            f"completed = {self.completed}",
            f"failure = {self.failure or 'none'}",
            f"v0 = {self.v0:.15g}",
            f"safe_invariance = {yn(self.safe_invariance)}",
            f"first_violation_time = {opt(self.first_violation_time)}",
            f"lyapunov_monotone = {yn(self.lyapunov_monotone)}",
            f"worst_v_increment = {self.worst_v_increment:.15g}",
            f"lyap_increment_allowance = {th.lyap_increment_rel * max(1.0, self.v0):.15g}",
            f"vdot_identity_error = {self.vdot_identity_error:.15g}",
            f"vdot_tol = {th.vdot_tol:.15g}",
            f"estimates_bounded = {yn(self.estimates_bounded)}",
            f"sup_p2_hat = {self.sup_p2_hat:.15g}",
            f"sup_theta1_hat = {self.sup_theta1_hat:.15g}",
            f"estimate_allowance = {th.estimate_bound_factor * (1.0 + self.v0):.15g}",
            f"tracking_error_final = {self.tracking_error_final:.15g}",
            f"tracking_tol = {th.tracking_tol:.15g}",
            f"final_e1 = {self.final_e1:.15g}",
            f"final_e2 = {self.final_e2:.15g}",
            f"final_u = {self.final_u:.15g}",
            f"final_z2 = {self.final_z2:.15g}",
            f"final_residual_tol = {th.final_residual_tol:.15g}",
            f"equilibrium_residual = {self.equilibrium_residual:.15g}",
            f"all_pass = {yn(self.all_pass)}",
        ]
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_report())


def certify(traj, cfg, thresholds: Optional[CertThresholds] = None) -> Certificate:
    """Evaluate every certificate check on a (possibly partial) trajectory."""
    th = thresholds or CertThresholds()
    nan = float("nan")
    if len(traj) == 0:
        # Failed before the first sample could be logged.
        return Certificate(
            completed=False,
            failure=None if traj.failure is None else
            f"{traj.failure.kind} at t={traj.failure.time:.6g}: {traj.failure.message}",
            v0=nan, safe_invariance=False,
            first_violation_time=None if traj.failure is None else traj.failure.time,
            lyapunov_monotone=False, worst_v_increment=nan,
            vdot_identity_error=nan, estimates_bounded=False,
            sup_p2_hat=nan, sup_theta1_hat=nan, tracking_error_final=nan,
            final_e1=nan, final_e2=nan, final_u=nan, final_z2=nan,
            equilibrium_residual=nan, thresholds=th)
    v0 = float(traj.v[0])

    if traj.failure is not None:
        safe = False
        first_violation = traj.failure.time
    else:
        ok = bool(np.all(traj.in_safe_set))
        safe = ok and traj.completed
        first_violation = None
        if not ok:
            first_violation = float(traj.t[int(np.argmin(traj.in_safe_set))])

    increments = np.diff(traj.v)
    worst_inc = float(increments.max()) if len(increments) else 0.0
    monotone = worst_inc < th.lyap_increment_rel * max(1.0, v0)

    vdot_err = float(np.max(np.abs(traj.vdot_numeric - traj.vdot_analytic))) \
        if len(traj.v) else float("nan")

    sup_p2 = float(np.max(np.abs(traj.p2_hat)))
    sup_th1 = float(np.max(np.abs(traj.theta1_hat)))
    bound = th.estimate_bound_factor * (1.0 + v0)
    bounded = sup_p2 < bound and sup_th1 < bound

    tracking = float(abs(traj.x1[-1] - cfg.reference.x1d))

    dyn = cfg.dynamics()
    frame = lift((traj.x1[-1], traj.x2[-1]), cfg.safe_set, cfg.family)
    est = EstimatorState(p2_hat=float(traj.p2_hat[-1]),
                         theta1_hat=float(traj.theta1_hat[-1]))
    sig = _signals(dyn, frame, cfg.reference, cfg.gains, est, cfg.p2_law_sign)
    dz1, dz2 = dyn.rhs(frame.z, sig.u)
    residual = max(abs(dz1), abs(dz2), abs(sig.dp2_hat), abs(sig.dtheta1_hat))

    return Certificate(
        completed=traj.completed,
        failure=None if traj.failure is None else
        f"{traj.failure.kind} at t={traj.failure.time:.6g}: {traj.failure.message}",
        v0=v0,
        safe_invariance=safe,
        first_violation_time=first_violation,
        lyapunov_monotone=monotone,
        worst_v_increment=worst_inc,
        vdot_identity_error=vdot_err,
        estimates_bounded=bounded,
        sup_p2_hat=sup_p2,
        sup_theta1_hat=sup_th1,
        tracking_error_final=tracking,
        final_e1=float(traj.e1[-1]),
        final_e2=float(traj.e2[-1]),
        final_u=float(traj.u[-1]),
        final_z2=float(traj.z2[-1]),
        equilibrium_residual=float(residual),
        thresholds=th,
    )


@dataclass
class SignAdjudication:
    """Side-by-side certification of the two p2_hat update signs."""

    plus: Certificate
    minus: Certificate
    recommended_sign: float

    def to_report(self) -> str:
        rows = [
            ("", "p2_law_sign=+1", "p2_law_sign=-1"),
            ("lyapunov_monotone",
             "pass" if self.plus.lyapunov_monotone else "FAIL",
             "pass" if self.minus.lyapunov_monotone else "FAIL"),
            ("worst_v_increment",
             f"{self.plus.worst_v_increment:.3e}", f"{self.minus.worst_v_increment:.3e}"),
            ("vdot_identity_error",
             f"{self.plus.vdot_identity_error:.3e}", f"{self.minus.vdot_identity_error:.3e}"),
            ("tracking_error_final",
             f"{self.plus.tracking_error_final:.3e}", f"{self.minus.tracking_error_final:.3e}"),
            ("safe_invariance",
             "pass" if self.plus.safe_invariance else "FAIL",
             "pass" if self.minus.safe_invariance else "FAIL"),
            ("estimates_bounded",
             "pass" if self.plus.estimates_bounded else "FAIL",
             "pass" if self.minus.estimates_bounded else "FAIL"),
            ("sup_p2_hat", f"{self.plus.sup_p2_hat:.3e}", f"{self.minus.sup_p2_hat:.3e}"),
        ]
        width = max(len(r[0]) for r in rows) + 2
        out = ["p2_hat update-sign adjudication (same scenario, both laws):"]
        for name, a, b in rows:
            out.append(f"  {name:<{width}} {a:>18} {b:>18}")
        out.append(f"  recommended default sign: {self.recommended_sign:+.0f} "
                   "(the law whose monitored V is non-increasing)")
        return "\n".join(out) + "\n"


def adjudicate_p2_sign(cfg, thresholds: Optional[CertThresholds] = None) -> SignAdjudication:
    """Run both p2_hat update signs on one scenario and certify each.

    The recommended sign is the one whose Lyapunov trace is monotone
    (+1 wins ties). The certified law and the better-tracking law need not
    coincide; the report keeps both outcomes visible.
    """
    from .simulator import run

    plus = certify(run(cfg.with_sign(+1.0)), cfg.with_sign(+1.0), thresholds)
    minus = certify(run(cfg.with_sign(-1.0)), cfg.with_sign(-1.0), thresholds)
    if plus.lyapunov_monotone or not minus.lyapunov_monotone:
        rec = 1.0
    else:
        rec = -1.0
    return SignAdjudication(plus=plus, minus=minus, recommended_sign=rec)
