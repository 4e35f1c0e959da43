"""Step-size bounds and time stepping on the state-dependent linear form.

Explicit methods carry a-priori bounds h < 2/||A|| (Euler) and
h < 2.785/||A|| (classic RK4, real-axis stability interval), with the matrix
norm (l1 or linf) standing in for the spectral radius.  Implicit methods are
judged a posteriori by a negative-definiteness certificate on the symmetric
part of A(U).
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .system import PolySystem
from .expressions import SemiDiscreteIVP, h_eval, lower_to_poly

__all__ = [
    "IVP",
    "StabilityReport",
    "Trajectory",
    "step_bound_explicit_euler",
    "step_bound_rk4",
    "burgers_step_bound",
    "is_negative_definite",
    "integrate",
    "scan_blowup_threshold",
]

METHODS = ("explicit_euler", "rk4", "implicit_euler", "semi_implicit_euler")
RK4_REAL_AXIS = 2.785

_NORM_ORD = {"l1": 1, "linf": np.inf}


def _matrix_norm(A, norm_kind):
    if norm_kind not in _NORM_ORD:
        raise ValueError(f"norm_kind must be 'l1' or 'linf', got {norm_kind!r}")
    return np.linalg.norm(A, _NORM_ORD[norm_kind])


def step_bound_explicit_euler(A, norm_kind="linf"):
    """Sufficient explicit-Euler step bound 2/||A||.

    The matrix norm dominates every eigenvalue modulus, so this is at most
    the eigenvalue-based bound 2/|lambda|_max.  A zero matrix imposes no
    restriction; returns inf.
    """
    nrm = _matrix_norm(np.asarray(A, dtype=float), norm_kind)
    if nrm == 0.0:
        return math.inf
    return 2.0 / nrm


def step_bound_rk4(A, norm_kind="linf"):
    """Classic RK4 step bound 2.785/||A|| (real-axis stability interval)."""
    nrm = _matrix_norm(np.asarray(A, dtype=float), norm_kind)
    if nrm == 0.0:
        return math.inf
    return RK4_REAL_AXIS / nrm


def burgers_step_bound(ivp, U, Re=None, norm_kind="linf"):
    """A-priori explicit-Euler bound for the Burgers semi-discretization.

    Returns 2 / ((1/Re) ||B|| + ||A|| ||U||_inf), more conservative than
    2/||A(t,U)|| of the assembled state-dependent matrix (triangle
    inequality applied termwise).
    """
    if ivp.first_diff is None or ivp.second_diff is None:
        raise ValueError("ivp lacks difference matrices; build it with burgers_discretize")
    Re = float(ivp.reynolds if Re is None else Re)
    U = np.asarray(U, dtype=float).ravel()
    denom = _matrix_norm(ivp.second_diff, norm_kind) / Re + _matrix_norm(
        ivp.first_diff, norm_kind
    ) * np.linalg.norm(U, np.inf)
    if denom == 0.0:
        return math.inf
    return 2.0 / denom


def is_negative_definite(A, tol=0.0):
    """Negative definiteness of A judged via its symmetric part.

    Returns (lambda_max(sym(A)) < -tol, lambda_max).  The symmetric-part
    criterion is the standard sufficient condition for ||exp(At)|| decay and
    is the definition adopted here for nonsymmetric A.
    """
    A = np.asarray(A, dtype=float)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    lam = float(np.linalg.eigvalsh(0.5 * (A + A.T))[-1])
    return lam < -tol, lam


@dataclass(frozen=True)
class StabilityReport:
    """Per-step stability certificate for one integration method."""

    method: str
    norm_kind: str
    norm_value: float
    h_bound: float = None
    negdef_certificate: bool = None
    eig_max_symmetric_part: float = None


@dataclass
class Trajectory:
    """Time grid, states and optional per-step reports of one integration."""

    times: list
    states: list
    per_step_reports: list = field(default_factory=list)
    status: str = "completed"
    failure_step: int = None

    def to_csv(self):
        n = np.asarray(self.states[0]).size
        lines = ["t," + ",".join(f"U{i}" for i in range(n)) + ",h_bound,negdef"]
        for k, (t, u) in enumerate(zip(self.times, self.states)):
            rep = self.per_step_reports[k] if k < len(self.per_step_reports) else None
            hb = "" if rep is None or rep.h_bound is None else f"{rep.h_bound:.17g}"
            nd = "" if rep is None or rep.negdef_certificate is None else str(rep.negdef_certificate).lower()
            row = ",".join(f"{x:.17g}" for x in np.asarray(u).ravel())
            lines.append(f"{t:.17g},{row},{hb},{nd}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps(
            {
                "status": self.status,
                "failure_step": self.failure_step,
                "times": [float(t) for t in self.times],
                "states": [np.asarray(u).tolist() for u in self.states],
            }
        )


class IVP:
    """Initial value problem dU/dt = rhs(U) with optional polynomial structure.

    Built from a PolySystem (rhs = its residual, constant term folded in) or a
    SemiDiscreteIVP expression tree.  Polynomial sources additionally expose
    the state-dependent matrix A(U), which implicit stepping requires; a
    polynomial expression tree is lowered automatically.
    """

    def __init__(self, source, U0, t0=0.0):
        self.U0 = np.asarray(U0, dtype=float).ravel()
        self.t0 = float(t0)
        if isinstance(source, PolySystem):
            self.poly = source
        elif isinstance(source, SemiDiscreteIVP):
            self.semidiscrete = source
            try:
                self.poly = lower_to_poly(source.rhs, source.n)
            except (ValueError, TypeError):
                self.poly = None
        else:
            raise TypeError("source must be a PolySystem or SemiDiscreteIVP")
        self.semidiscrete = getattr(self, "semidiscrete", None)
        n = self.poly.n if self.poly is not None else self.semidiscrete.n
        if self.U0.size != n:
            raise ValueError(f"U0 length {self.U0.size} != dimension {n}")
        self.n = n

    def rhs(self, U):
        if self.semidiscrete is not None:
            return h_eval(self.semidiscrete.rhs, U)
        return self.poly.eval(U)

    def linear_form(self, U):
        if self.poly is None:
            raise ValueError("no polynomial structure; linear form unavailable")
        return self.poly.linearized_matrix(U)


DIVERGENCE_LIMIT = 1e8
PICARD_TOL = 1e-12
PICARD_MAX_ITER = 50


def _report_explicit(method, A, norm_kind):
    nrm = _matrix_norm(A, norm_kind)
    bound = (2.0 if method == "explicit_euler" else RK4_REAL_AXIS) / nrm if nrm > 0 else math.inf
    return StabilityReport(method=method, norm_kind=norm_kind, norm_value=float(nrm), h_bound=bound)


def _report_implicit(method, A, norm_kind):
    ok, lam = is_negative_definite(A)
    return StabilityReport(
        method=method,
        norm_kind=norm_kind,
        norm_value=float(_matrix_norm(A, norm_kind)),
        negdef_certificate=ok,
        eig_max_symmetric_part=lam,
    )


def integrate(ivp, method, h, steps, report=False, norm_kind="linf"):
    """Advance an IVP with a fixed step; returns a Trajectory.

    explicit_euler advances through the linear form [I + A(U)h]U + hF when
    polynomial structure is available (identical to U + h rhs(U), asserted
    each step) and through rhs directly otherwise.  implicit_euler solves the
    step equation by Picard iteration on the frozen linear form;
    semi_implicit_euler does one linear solve with the exact Jacobian per
    step.  Divergence is declared at ||U||_inf > 1e8.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    if method in ("implicit_euler", "semi_implicit_euler") and ivp.poly is None:
        raise ValueError(f"{method} requires polynomial structure")

    U = ivp.U0.copy()
    t = ivp.t0
    traj = Trajectory(times=[t], states=[U.copy()])
    F = ivp.poly.const if ivp.poly is not None else None
    eye = np.eye(ivp.n)

    for k in range(steps):
        if method == "explicit_euler":
            if ivp.poly is not None:
                A = ivp.linear_form(U).A
                U_next = (eye + h * A) @ U + h * F
                direct = U + h * ivp.rhs(U)
                scale = 1.0 + np.linalg.norm(direct, np.inf)
                if np.linalg.norm(U_next - direct, np.inf) > 1e-9 * scale:
                    raise AssertionError("linear-form step disagrees with direct step")
                if report:
                    traj.per_step_reports.append(_report_explicit(method, A, norm_kind))
            else:
                U_next = U + h * ivp.rhs(U)
        elif method == "rk4":
            k1 = ivp.rhs(U)
            k2 = ivp.rhs(U + 0.5 * h * k1)
            k3 = ivp.rhs(U + 0.5 * h * k2)
            k4 = ivp.rhs(U + h * k3)
            U_next = U + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if report and ivp.poly is not None:
                traj.per_step_reports.append(
                    _report_explicit(method, ivp.linear_form(U).A, norm_kind)
                )
        elif method == "implicit_euler":
            # Picard iteration: freeze A at the current guess, solve, repeat
            V = U.copy()
            rhs_vec = U + h * F
            converged = False
            for _ in range(PICARD_MAX_ITER):
                A = ivp.linear_form(V).A
                try:
                    V_new = np.linalg.solve(eye - h * A, rhs_vec)
                except np.linalg.LinAlgError:
                    traj.status = "solver_failed"
                    traj.failure_step = k
                    return traj
                if not np.all(np.isfinite(V_new)):
                    traj.status = "solver_failed"
                    traj.failure_step = k
                    return traj
                if np.linalg.norm(V_new - V, np.inf) <= PICARD_TOL * (
                    1.0 + np.linalg.norm(V_new, np.inf)
                ):
                    V = V_new
                    converged = True
                    break
                V = V_new
            if not converged:
                traj.status = "solver_failed"
                traj.failure_step = k
                return traj
            U_next = V
            if report:
                traj.per_step_reports.append(
                    _report_implicit(method, ivp.linear_form(U_next).A, norm_kind)
                )
        else:  # semi_implicit_euler
            J = ivp.poly.jacobian(U)
            try:
                step = np.linalg.solve(eye - h * J, ivp.rhs(U))
            except np.linalg.LinAlgError:
                traj.status = "solver_failed"
                traj.failure_step = k
                return traj
            U_next = U + h * step
            if report:
                traj.per_step_reports.append(
                    _report_implicit(method, ivp.linear_form(U).A, norm_kind)
                )

        t += h
        U = U_next
        traj.times.append(t)
        traj.states.append(U.copy())
        if not np.all(np.isfinite(U)) or np.linalg.norm(U, np.inf) > DIVERGENCE_LIMIT:
            traj.status = "diverged"
            traj.failure_step = k
            return traj

    traj.status = "completed"
    return traj


def scan_blowup_threshold(ivp, method, h_lo, h_hi, horizon):
    """Bisect for the largest stable step over a fixed time horizon.

    Requires a valid bracket: completing at h_lo and failing at h_hi.
    Resolves to 2% relative width.
    """
    if not h_lo < h_hi:
        raise ValueError(f"need h_lo < h_hi, got {h_lo} >= {h_hi}")

    def stable(h):
        steps = max(1, int(math.ceil(horizon / h)))
        return integrate(ivp, method, h, steps).status == "completed"

    if not stable(h_lo):
        raise ValueError(f"bracket invalid: unstable at h_lo={h_lo}")
    if stable(h_hi):
        raise ValueError(f"bracket invalid: stable at h_hi={h_hi}")
    while (h_hi - h_lo) > 0.02 * h_lo:
        mid = 0.5 * (h_lo + h_hi)
        if stable(mid):
            h_lo = mid
        else:
            h_hi = mid
    return h_lo
