"""Steady states of the driven medium: cubic inversion roots, branches, thresholds.

Writing the stationary single-atom master equation in the rotating frame and
eliminating the coherence gives one real equation for the population
difference W = rho11 - rho22,

    (1 - W) * ((delta - zeta*W)**2 + gamma**2/4) = 2 * omega**2 * W,

which expands to the cubic  c3 W^3 + c2 W^2 + c1 W + c0 = 0  solved here.
Up to three roots coexist in (0, 1]; the middle one (by excited population)
is dynamically unstable and the root-count changes at two fold drives,
the switching thresholds of the hysteresis loop.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .core import (
    Branch,
    BranchNotPresentError,
    MediumParams,
    Mechanism,
    NoPhysicalRootError,
    SingularFeedbackError,
    validate_mechanism,
    zeta_total,
)

# Normalized residual demanded after root polishing (coefficients scaled by max |c_i|).
RESIDUAL_TOL = 1e-12
# Roots closer than this collapse to a single (tangency) root.
ROOT_MERGE_TOL = 1e-8
# Eigenvalue real parts smaller than this flag marginal stability.
MARGINAL_STABILITY_TOL = 1e-9
# Bisection accuracy of fold locations, in units of gamma.
THRESHOLD_TOL = 1e-6


class ThresholdRangeWarning(UserWarning):
    """A fold coincides with an endpoint of the scanned drive range."""


class MarginalStabilityWarning(UserWarning):
    """A fixed point sits on the stability boundary (fold tangency)."""


@dataclass(frozen=True)
class SteadyStateSolution:
    """One root of the inversion cubic with its derived quantities.

    w         : population difference, in (0, 1]
    rho22     : excited-state population, (1 - w)/2
    rho12     : steady-state coherence <sigma+>
    omega_eff : effective (local-field corrected) Rabi frequency
    delta_eff : effective detuning entering the master equation
    branch    : position within the solution set by ascending rho22
    stable    : all linearization eigenvalues have negative real part
    residual  : |cubic(w)| with coefficients normalized by max |c_i|
    """

    w: float
    rho22: float
    rho12: complex
    omega_eff: complex
    delta_eff: float
    branch: Branch
    stable: bool
    residual: float


class ScanPoint(NamedTuple):
    omega: float
    solutions: list[SteadyStateSolution]


@dataclass(frozen=True)
class HysteresisScan:
    """Full solution sets over a drive grid, with switching thresholds."""

    points: list[ScanPoint]
    omega_up: float | None
    omega_down: float | None


@dataclass(frozen=True)
class StationaryState:
    """Stationary density matrix of a two-level atom for fixed effective parameters."""

    rho11: float
    rho12: complex
    rho21: complex
    rho22: float
    w: float


def cubic_coefficients(
    params: MediumParams, mech: Mechanism
) -> tuple[float, float, float, float]:
    """Coefficients (c3, c2, c1, c0) of the inversion cubic.

    c3 = zeta^2
    c2 = -zeta (zeta + 2 delta)
    c1 = 2 omega^2 + delta (delta + 2 zeta) + gamma^2 / 4
    c0 = -(delta^2 + gamma^2 / 4)
    """
    zeta = zeta_total(params, mech)
    g2_4 = 0.25 * params.gamma**2
    c3 = zeta * zeta
    c2 = -zeta * (zeta + 2.0 * params.delta)
    c1 = 2.0 * params.omega**2 + params.delta * (params.delta + 2.0 * zeta) + g2_4
    c0 = -(params.delta**2 + g2_4)
    return c3, c2, c1, c0


def _polish(c3: float, c2: float, c1: float, c0: float, w: float) -> float:
    """A few Newton steps on the (normalized) cubic; keeps the best iterate."""
    best_w, best_r = w, abs(((c3 * w + c2) * w + c1) * w + c0)
    for _ in range(3):
        p = ((c3 * w + c2) * w + c1) * w + c0
        dp = (3.0 * c3 * w + 2.0 * c2) * w + c1
        if dp == 0.0:
            break
        w = w - p / dp
        r = abs(((c3 * w + c2) * w + c1) * w + c0)
        if r < best_r:
            best_w, best_r = w, r
        if r == 0.0:
            break
    return best_w


def _real_cubic_roots(c3: float, c2: float, c1: float, c0: float) -> list[float]:
    """All real roots of c3 x^3 + c2 x^2 + c1 x + c0, closed form plus polishing.

    Coefficients are normalized by their largest magnitude first; degenerate
    leading coefficients fall back to the quadratic/linear formulas.
    """
    scale = max(abs(c3), abs(c2), abs(c1), abs(c0))
    if scale == 0.0:
        return []
    c3, c2, c1, c0 = c3 / scale, c2 / scale, c1 / scale, c0 / scale

    if abs(c3) < 1e-14:
        if abs(c2) < 1e-14:
            return [] if abs(c1) < 1e-14 else [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0.0:
            return []
        s = math.sqrt(disc)
        # standard stable quadratic formula
        qq = -0.5 * (c1 + math.copysign(s, c1))
        roots = [qq / c2] if qq == 0.0 else [qq / c2, c0 / qq]
        return sorted(_polish(c3, c2, c1, c0, r) for r in roots)

    b, c, d = c2 / c3, c1 / c3, c0 / c3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = (2.0 * b * b * b - 9.0 * b * c) / 27.0 + d
    disc = 0.25 * q * q + p * p * p / 27.0

    if disc > 0.0:  # one real root
        s = math.sqrt(disc)
        u = math.copysign(abs(-0.5 * q + s) ** (1.0 / 3.0), -0.5 * q + s)
        v = math.copysign(abs(-0.5 * q - s) ** (1.0 / 3.0), -0.5 * q - s)
        ts = [u + v]
    elif p == 0.0:  # triple root
        ts = [math.copysign(abs(q) ** (1.0 / 3.0), -q)]
    else:  # three real roots, trigonometric form
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg)
        ts = [m * math.cos((phi - 2.0 * math.pi * k) / 3.0) for k in range(3)]

    return sorted(_polish(c3, c2, c1, c0, t - shift) for t in ts)


def solve_inversion(params: MediumParams, mech: Mechanism) -> list[float]:
    """All inversion roots W in (0, 1], ascending, polished and de-duplicated.

    With gamma > 0 the cubic always changes sign on [0, 1] (its value at 0
    is strictly negative and at 1 equals 2 omega^2), so at least one
    physical root exists for any valid parameter set.
    """
    coeffs = cubic_coefficients(params, mech)
    roots = _real_cubic_roots(*coeffs)

    kept: list[float] = []
    for w in roots:
        if w <= 0.0:
            continue
        if w > 1.0:
            if w > 1.0 + 1e-9:
                continue
            w = 1.0
        kept.append(w)
    kept.sort()

    normalized = _normalized(coeffs)
    merged: list[float] = []
    for w in kept:
        if merged and w - merged[-1] < ROOT_MERGE_TOL:
            mid = _polish(*normalized, 0.5 * (merged[-1] + w))
            merged[-1] = min(mid, 1.0) if mid > 0.0 else merged[-1]
        else:
            merged.append(w)

    c3n, c2n, c1n, c0n = normalized
    for i, w in enumerate(merged):
        if abs(((c3n * w + c2n) * w + c1n) * w + c0n) > RESIDUAL_TOL:
            merged[i] = min(_polish(c3n, c2n, c1n, c0n, w), 1.0)

    if not merged:
        raise NoPhysicalRootError(
            f"no inversion root in (0, 1] for coefficients {coeffs}"
        )
    return merged


def _normalized(coeffs: tuple[float, float, float, float]) -> tuple[float, float, float, float]:
    scale = max(abs(x) for x in coeffs)
    return tuple(x / scale for x in coeffs)  # type: ignore[return-value]


def cubic_residual(params: MediumParams, mech: Mechanism, w: float) -> float:
    """|c3 w^3 + c2 w^2 + c1 w + c0| with coefficients normalized by max |c_i|."""
    c3, c2, c1, c0 = _normalized(cubic_coefficients(params, mech))
    return abs(((c3 * w + c2) * w + c1) * w + c0)


def effective_params(
    w: float, params: MediumParams, mech: Mechanism
) -> tuple[complex, float]:
    """Effective (omega_eff, delta_eff) at inversion w.

    detuning : delta_eff = delta - zeta_detuning * w, omega_eff = omega.
    lorentz  : delta_eff = delta; omega_eff solves the linear self-consistency
               omega_eff = omega + zeta_lorentz * rho12(omega_eff), where the
               coherence is linear in the drive at fixed w, so one division
               closes it.
    joint    : both substitutions, with the coherence evaluated at the
               shifted detuning.
    """
    validate_mechanism(params, mech)
    g = params.gamma
    delta_eff = params.delta - params.zeta_detuning * w
    zl = params.zeta_lorentz
    if zl == 0.0:
        return complex(params.omega), delta_eff
    dd = delta_eff * delta_eff + 0.25 * g * g
    feedback = 1.0 - zl * w * (delta_eff - 0.5j * g) / dd
    if abs(feedback) < 1e-14:
        raise SingularFeedbackError(
            f"local-field self-consistency singular at w={w} (|denominator|={abs(feedback)})"
        )
    return params.omega / feedback, delta_eff


def coherence(w: float, omega_eff: complex, delta_eff: float, gamma: float) -> complex:
    """Steady-state coherence <sigma+> of the master equation at fixed inversion.

    Setting the stationary off-diagonal Bloch equation
    (i delta_eff - gamma/2) rho12 = i omega_eff w to zero gives

        rho12 = omega_eff * w * (delta_eff - i gamma/2) / (delta_eff^2 + gamma^2/4).
    """
    dd = delta_eff * delta_eff + 0.25 * gamma * gamma
    return omega_eff * w * (delta_eff - 0.5j * gamma) / dd


def stationary_state(omega_eff: complex, delta_eff: float, gamma: float) -> StationaryState:
    """Unique stationary density matrix for fixed effective parameters.

    This is the free-atom stationary state evaluated at the effective
    (possibly complex) drive and shifted detuning; the populations follow
    the saturation law and the coherence from :func:`coherence`.
    """
    dd = delta_eff * delta_eff + 0.25 * gamma * gamma
    w = dd / (2.0 * abs(omega_eff) ** 2 + dd)
    r12 = coherence(w, omega_eff, delta_eff, gamma)
    return StationaryState(
        rho11=0.5 * (1.0 + w),
        rho12=r12,
        rho21=r12.conjugate(),
        rho22=0.5 * (1.0 - w),
        w=w,
    )


def rabi_relation_sq(w: float, params: MediumParams, mech: Mechanism) -> float:
    """|omega_eff|^2 from the closed identity

        |omega_eff|^2 = omega^2 (delta_eff^2 + gamma^2/4)
                        / ((delta_eff - zeta_lorentz w)^2 + gamma^2/4),

    where delta_eff is the detuning entering the master equation (the bare
    one for the pure local-field mechanism).
    """
    validate_mechanism(params, mech)
    g2_4 = 0.25 * params.gamma**2
    delta_eff = params.delta - params.zeta_detuning * w
    shifted = delta_eff - params.zeta_lorentz * w
    return params.omega**2 * (delta_eff**2 + g2_4) / (shifted**2 + g2_4)


def classify_stability(w: float, params: MediumParams, mech: Mechanism) -> bool:
    """True iff the Bloch fixed point at root w is linearly stable.

    Stability means every eigenvalue of the dynamics Jacobian (including the
    self-consistent renormalization terms) has strictly negative real part.
    Eigenvalues with |Re| below MARGINAL_STABILITY_TOL indicate a fold
    tangency and trigger a MarginalStabilityWarning.
    """
    stable, marginal = _stability(w, params, mech)
    if marginal:
        warnings.warn(
            f"fixed point at w={w} is marginally stable (fold tangency)",
            MarginalStabilityWarning,
            stacklevel=2,
        )
    return stable


def _stability(w: float, params: MediumParams, mech: Mechanism) -> tuple[bool, bool]:
    from . import dynamics  # deferred: dynamics imports this module at load time

    state = dynamics.fixed_point_state(params, mech, w)
    eigs = np.linalg.eigvals(dynamics.jacobian(state, params, mech, params.omega))
    re = eigs.real
    return bool(np.all(re < 0.0)), bool(np.any(np.abs(re) < MARGINAL_STABILITY_TOL))


def _build_solution(
    w: float, params: MediumParams, mech: Mechanism, branch: Branch
) -> SteadyStateSolution:
    omega_eff, delta_eff = effective_params(w, params, mech)
    rho12 = coherence(w, omega_eff, delta_eff, params.gamma)
    stable, marginal = _stability(w, params, mech)
    if marginal:
        warnings.warn(
            f"solution at omega={params.omega}, w={w} is marginally stable",
            MarginalStabilityWarning,
            stacklevel=3,
        )
    return SteadyStateSolution(
        w=w,
        rho22=0.5 * (1.0 - w),
        rho12=rho12,
        omega_eff=omega_eff,
        delta_eff=delta_eff,
        branch=branch,
        stable=stable,
        residual=cubic_residual(params, mech, w),
    )


def _default_threshold_range(params: MediumParams, mech: Mechanism) -> tuple[float, float]:
    # Any fold obeys 2 omega^2 <= 3 zeta^2 (pairwise root products in (0,1]),
    # so omega <= sqrt(1.5) zeta; pad a little beyond that.
    return 0.0, 1.25 * zeta_total(params, mech) + params.gamma


def find_thresholds(
    params: MediumParams,
    mech: Mechanism,
    omega_range: tuple[float, float] | None = None,
) -> tuple[float, float] | None:
    """Fold drives (omega_up, omega_down) where the root count changes 1 <-> 3.

    Located by bisection on the root count, robust to the zeta -> 0 limit
    where the cubic degenerates.  Returns None when the medium is monostable
    over the range.  A fold lying on a range endpoint raises a
    ThresholdRangeWarning since the true fold may sit outside.
    """
    validate_mechanism(params, mech)
    if omega_range is None:
        omega_range = _default_threshold_range(params, mech)
    lo, hi = float(omega_range[0]), float(omega_range[1])
    if not (0.0 <= lo < hi):
        raise ValueError(f"invalid omega_range {omega_range}")

    def count(om: float) -> int:
        return len(solve_inversion(replace(params, omega=om), mech))

    grid = np.linspace(lo, hi, 512)
    counts = [count(om) for om in grid]
    idx3 = [i for i, c in enumerate(counts) if c == 3]
    if not idx3:
        return None

    def bisect(a: float, b: float, three_at_a: bool) -> float:
        # invariant: count==3 on the `three_at_a` side
        while b - a > THRESHOLD_TOL * params.gamma:
            mid = 0.5 * (a + b)
            if (count(mid) == 3) == three_at_a:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    first, last = idx3[0], idx3[-1]
    if first == 0:
        warnings.warn(
            "bistable window touches the lower end of omega_range; "
            "omega_down may lie outside the range",
            ThresholdRangeWarning,
            stacklevel=2,
        )
        omega_down = grid[0]
    else:
        omega_down = bisect(grid[first - 1], grid[first], False)
    if last == len(grid) - 1:
        warnings.warn(
            "bistable window touches the upper end of omega_range; "
            "omega_up may lie outside the range",
            ThresholdRangeWarning,
            stacklevel=2,
        )
        omega_up = grid[-1]
    else:
        omega_up = bisect(grid[last], grid[last + 1], True)
    return omega_up, omega_down


def solutions_at(
    params: MediumParams,
    mech: Mechanism,
    *,
    thresholds: tuple[float, float] | None = None,
    resolve_single: bool = False,
) -> list[SteadyStateSolution]:
    """All steady-state solutions at ``params.omega``, ordered by ascending rho22.

    Three coexisting roots are labeled lower/middle/upper by excited
    population.  A single root is labeled ``lower`` unless threshold context
    (given or computed when ``resolve_single`` is set) shows the drive sits
    above the upper fold, where the surviving root continues the upper
    branch.
    """
    roots = solve_inversion(params, mech)
    ws = sorted(roots, reverse=True)  # ascending rho22

    if len(ws) == 3:
        branches = [Branch.LOWER, Branch.MIDDLE, Branch.UPPER]
    elif len(ws) == 2:
        branches = [Branch.LOWER, Branch.UPPER]
    else:
        branch = Branch.LOWER
        if thresholds is None and resolve_single:
            lo, hi = _default_threshold_range(params, mech)
            hi = max(hi, params.omega * (1.0 + 1e-9))
            thresholds = find_thresholds(params, mech, (lo, hi))
        if thresholds is not None:
            omega_up, omega_down = thresholds
            if params.omega >= omega_up:
                branch = Branch.UPPER
        branches = [branch]

    return [_build_solution(w, params, mech, b) for w, b in zip(ws, branches)]


def branch_solution(
    params: MediumParams,
    mech: Mechanism,
    branch: Branch,
    omega: float | None = None,
) -> SteadyStateSolution:
    """The solution on a given branch, or BranchNotPresentError outside its window."""
    branch = Branch(branch)
    if omega is not None:
        params = replace(params, omega=float(omega))
    for sol in solutions_at(params, mech, resolve_single=True):
        if sol.branch is branch:
            return sol
    raise BranchNotPresentError(
        f"branch '{branch.value}' does not exist at omega={params.omega}"
    )


def scan_hysteresis(
    params: MediumParams, mech: Mechanism, omega_grid
) -> HysteresisScan:
    """Full solution sets over a drive grid, with branch labels and thresholds.

    Single-root points are labeled by continuity: through the attached
    thresholds when the grid spans a bistable window, by nearest excited
    population against the previous grid point otherwise, and ``lower`` when
    neither context exists.  Solver failures at individual points are
    recorded as empty solution sets rather than aborting the scan.
    """
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("omega_grid must be a nonempty 1-d array")
    if np.any(grid < 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("omega_grid must be strictly increasing and nonnegative")

    thresholds = find_thresholds(params, mech, (float(grid[0]), float(grid[-1])))

    points: list[ScanPoint] = []
    prev: list[SteadyStateSolution] = []
    for om in grid:
        p = replace(params, omega=float(om))
        try:
            sols = solutions_at(p, mech, thresholds=thresholds)
        except (NoPhysicalRootError, SingularFeedbackError) as exc:
            warnings.warn(f"solver failed at omega={om}: {exc}", stacklevel=2)
            points.append(ScanPoint(float(om), []))
            continue
        if len(sols) == 1 and thresholds is None and prev:
            # continuity with the previous point (stable labels only)
            candidates = [s for s in prev if s.branch is not Branch.MIDDLE]
            if candidates:
                nearest = min(candidates, key=lambda s: abs(s.rho22 - sols[0].rho22))
                if nearest.branch is not sols[0].branch:
                    sols = [replace(sols[0], branch=nearest.branch)]
        points.append(ScanPoint(float(om), sols))
        prev = sols

    omega_up, omega_down = thresholds if thresholds is not None else (None, None)
    return HysteresisScan(points=points, omega_up=omega_up, omega_down=omega_down)
