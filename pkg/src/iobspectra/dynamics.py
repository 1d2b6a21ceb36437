"""Time-domain mean-field Bloch dynamics with self-consistent renormalization.

The state is the real triple (u, v, w): twice the real and imaginary parts
of the coherence, rho12 = (u + i v)/2, and the population difference w.
The equations of motion in the frame rotating at the laser frequency are

    du/dt = -delta_bar v - (gamma/2) u + 2 Im(omega_bar) w
    dv/dt =  delta_bar u - (gamma/2) v - 2 Re(omega_bar) w
    dw/dt =  gamma (1 - w) + 2 (Re(omega_bar) v - Im(omega_bar) u)

with the instantaneous renormalizations
omega_bar(t) = omega(t) + zeta_lorentz (u + i v)/2 and
delta_bar(t) = delta - zeta_detuning w(t).  Zeros of the right-hand side
coincide with the algebraic steady states, which is the dynamic validation
route for the cubic solver, and the Jacobian eigenvalues supply the
stability classification of each branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .core import Branch, IntegrationError, MediumParams, Mechanism, validate_mechanism
from . import steady_state

BLOCH_BALL_SLACK = 1e-9
RAMP_RATE_MAX_FACTOR = 1e-3  # max ramp rate in units of gamma^2
JUMP_THRESHOLD = 0.1         # |delta w| per sample marking a branch jump
ADIABATIC_DISTANCE = 0.05    # allowed distance from the instantaneous stable manifold

_METHODS = ("DOP853", "RK45", "Radau")


class NonAdiabaticWarning(UserWarning):
    """A sweep strayed from the instantaneous stable manifold away from folds."""


@dataclass(frozen=True)
class BlochState:
    """Coherence quadratures and population difference, confined to the unit ball."""

    u: float
    v: float
    w: float

    def __post_init__(self):
        for name in ("u", "v", "w"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.u**2 + self.v**2 + self.w**2 > 1.0 + BLOCH_BALL_SLACK:
            raise ValueError(
                f"state ({self.u}, {self.v}, {self.w}) lies outside the Bloch ball"
            )
        if abs(self.w) > 1.0 + BLOCH_BALL_SLACK:
            raise ValueError(f"population difference w={self.w} out of range")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled evolution: times (1/gamma units), states, and drive values."""

    times: np.ndarray
    states: list[BlochState]
    omegas: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")

    def state_array(self) -> np.ndarray:
        return np.array([(s.u, s.v, s.w) for s in self.states])


@dataclass(frozen=True, eq=False)
class SweepResult:
    trajectory: Trajectory
    jumps: list[float]


def _coupling(params: MediumParams, mech: Mechanism) -> tuple[float, float]:
    validate_mechanism(params, mech)
    return params.zeta_lorentz, params.zeta_detuning


def _rhs(u, v, w, om, g, d, zl, zm) -> tuple[float, float, float]:
    obr = om + 0.5 * zl * u
    obi = 0.5 * zl * v
    db = d - zm * w
    return (
        -db * v - 0.5 * g * u + 2.0 * obi * w,
        db * u - 0.5 * g * v - 2.0 * obr * w,
        g * (1.0 - w) + 2.0 * (obr * v - obi * u),
    )


def _jac(u, v, w, om, g, d, zl, zm) -> np.ndarray:
    db = d - zm * w
    zs = zl + zm
    return np.array(
        [
            [-0.5 * g, -db + zl * w, zs * v],
            [db - zl * w, -0.5 * g, -zs * u - 2.0 * om],
            [0.0, 2.0 * om, -g],
        ]
    )


def bloch_rhs(
    state: BlochState, params: MediumParams, mech: Mechanism, omega_now: float
) -> tuple[float, float, float]:
    """Time derivatives (du/dt, dv/dt, dw/dt) at the given state and drive."""
    zl, zm = _coupling(params, mech)
    return _rhs(state.u, state.v, state.w, omega_now, params.gamma, params.delta, zl, zm)


def bloch_rhs_raw(y, params: MediumParams, mech: Mechanism, omega_now: float) -> np.ndarray:
    """RHS on a raw (u, v, w) triple, without Bloch-ball validation.

    Intended for root searches, whose iterates may leave the physical ball.
    """
    zl, zm = _coupling(params, mech)
    return np.array(_rhs(y[0], y[1], y[2], omega_now, params.gamma, params.delta, zl, zm))


def jacobian(
    state: BlochState, params: MediumParams, mech: Mechanism, omega_now: float
) -> np.ndarray:
    """Exact Jacobian of :func:`bloch_rhs`, including the d(omega_bar)/d(u,v)
    and d(delta_bar)/dw self-consistency terms."""
    zl, zm = _coupling(params, mech)
    return _jac(state.u, state.v, state.w, omega_now, params.gamma, params.delta, zl, zm)


def jacobian_raw(y, params: MediumParams, mech: Mechanism, omega_now: float) -> np.ndarray:
    """Jacobian on a raw (u, v, w) triple; companion to :func:`bloch_rhs_raw`."""
    zl, zm = _coupling(params, mech)
    return _jac(y[0], y[1], y[2], omega_now, params.gamma, params.delta, zl, zm)


def fixed_point_state(params: MediumParams, mech: Mechanism, w: float) -> BlochState:
    """Bloch state of the algebraic steady state with inversion w."""
    omega_eff, delta_eff = steady_state.effective_params(w, params, mech)
    r12 = steady_state.coherence(w, omega_eff, delta_eff, params.gamma)
    return BlochState(2.0 * r12.real, 2.0 * r12.imag, w)


def _drive_function(drive) -> Callable[[float], float]:
    if callable(drive):
        return drive
    value = float(drive)
    return lambda t: value


def integrate(
    state0: BlochState,
    params: MediumParams,
    mech: Mechanism,
    drive,
    t_end: float,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-11,
    *,
    t_eval=None,
    method: str = "DOP853",
) -> Trajectory:
    """Integrate the Bloch equations with an adaptive one-step method.

    ``drive`` is a constant Rabi frequency or a callable omega(t).  Any of
    DOP853 (default), RK45, or Radau may be selected; all are adaptive
    embedded one-step schemes of order >= 4, Radau being the stiff-friendly
    choice for slow parameter ramps.  Sample times are taken from ``t_eval``
    when given, otherwise the integrator's own steps are returned.
    """
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not 0.0 < rel_tol <= 1e-3 or not 0.0 < abs_tol <= 1e-3:
        raise ValueError("tolerances must lie in (0, 1e-3]")
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}")

    zl, zm = _coupling(params, mech)
    g = params.gamma
    d = params.delta
    omega_of_t = _drive_function(drive)

    def rhs(t, y):
        return _rhs(y[0], y[1], y[2], omega_of_t(t), g, d, zl, zm)

    kwargs = {}
    if method == "Radau":
        def jac(t, y):
            return _jac(y[0], y[1], y[2], omega_of_t(t), g, d, zl, zm)

        kwargs["jac"] = jac

    sol = solve_ivp(
        rhs,
        (0.0, float(t_end)),
        (state0.u, state0.v, state0.w),
        method=method,
        rtol=rel_tol,
        atol=abs_tol,
        t_eval=t_eval,
        **kwargs,
    )
    if not sol.success:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(
            f"integration failed at t={t_fail}: {sol.message}", time=t_fail
        )
    try:
        states = [BlochState(*y) for y in sol.y.T]
    except ValueError as exc:
        raise IntegrationError(f"integrator left the Bloch ball: {exc}") from exc
    omegas = np.array([omega_of_t(t) for t in sol.t])
    return Trajectory(times=sol.t.copy(), states=states, omegas=omegas)


def sweep_adiabatic(
    params: MediumParams,
    mech: Mechanism,
    omega_start: float,
    omega_end: float,
    ramp_rate: float,
    *,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    samples: int | None = None,
    check_adiabatic: bool = True,
) -> SweepResult:
    """Linearly ramp the drive and detect hysteresis jumps.

    The sweep starts on the stable branch appropriate to its direction
    (lower going up, upper going down) and integrates with the stiff Radau
    scheme so that long slow ramps stay cheap.  Branch jumps show up as
    |dw| spikes between samples; their drive locations are returned.
    A NonAdiabaticWarning is raised if, away from detected jumps, the state
    strays more than ADIABATIC_DISTANCE from every instantaneous stable
    fixed point.
    """
    if omega_start < 0.0 or omega_end < 0.0 or omega_start == omega_end:
        raise ValueError("sweep endpoints must be nonnegative and distinct")
    if not 0.0 < ramp_rate <= RAMP_RATE_MAX_FACTOR * params.gamma**2:
        raise ValueError(
            f"ramp_rate must lie in (0, {RAMP_RATE_MAX_FACTOR} gamma^2] for adiabaticity"
        )

    direction = 1.0 if omega_end > omega_start else -1.0
    span = abs(omega_end - omega_start)
    t_end = span / ramp_rate

    def drive(t):
        return omega_start + direction * ramp_rate * min(t, t_end)

    start_params = replace(params, omega=float(omega_start))
    sols = steady_state.solutions_at(start_params, mech, resolve_single=True)
    preferred = Branch.LOWER if direction > 0 else Branch.UPPER
    by_branch = {s.branch: s for s in sols}
    start = by_branch.get(preferred, sols[0])
    y0 = fixed_point_state(start_params, mech, start.w)

    if samples is None:
        samples = min(20001, max(101, int(span / (0.01 * params.gamma)) + 1))
    t_eval = np.linspace(0.0, t_end, samples)

    traj = integrate(
        y0, params, mech, drive, t_end,
        rel_tol=rel_tol, abs_tol=abs_tol, t_eval=t_eval, method="Radau",
    )

    w = np.array([s.w for s in traj.states])
    dw = np.abs(np.diff(w))
    spikes = dw > JUMP_THRESHOLD
    jumps: list[float] = []
    i = 0
    while i < spikes.size:
        if spikes[i]:
            j = i
            while j + 1 < spikes.size and spikes[j + 1]:
                j += 1
            k = i + int(np.argmax(dw[i : j + 1]))
            jumps.append(0.5 * (traj.omegas[k] + traj.omegas[k + 1]))
            i = j + 1
        else:
            i += 1

    if check_adiabatic:
        _warn_if_nonadiabatic(traj, params, mech, jumps)
    return SweepResult(trajectory=traj, jumps=jumps)


def _warn_if_nonadiabatic(
    traj: Trajectory, params: MediumParams, mech: Mechanism, jumps: list[float]
) -> None:
    arr = traj.state_array()
    worst = 0.0
    for idx in range(0, len(traj.times), 4):
        om = traj.omegas[idx]
        if any(abs(om - jump) < 0.3 * params.gamma for jump in jumps):
            continue
        p = replace(params, omega=float(om))
        dist = math.inf
        for root in steady_state.solve_inversion(p, mech):
            stable, _ = steady_state._stability(root, p, mech)
            if not stable:
                continue
            fp = fixed_point_state(p, mech, root)
            dist = min(dist, float(np.linalg.norm(arr[idx] - (fp.u, fp.v, fp.w))))
        if math.isfinite(dist):
            worst = max(worst, dist)
    if worst > ADIABATIC_DISTANCE:
        warnings.warn(
            f"sweep strayed {worst:.3g} from the stable manifold (limit {ADIABATIC_DISTANCE})",
            NonAdiabaticWarning,
            stacklevel=3,
        )
