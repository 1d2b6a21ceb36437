import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import null_space

from iobspectra import (
    Branch,
    BranchNotPresentError,
    MediumParams,
    Mechanism,
    branch_solution,
    classify_stability,
    coherence,
    cubic_coefficients,
    effective_params,
    find_thresholds,
    rabi_relation_sq,
    scan_hysteresis,
    solutions_at,
    solve_inversion,
    stationary_state,
    zeta_total,
)
from iobspectra.steady_state import ThresholdRangeWarning, cubic_residual

LORENTZ_50 = MediumParams(delta=3.0, zeta_lorentz=50.0)
DETUNING_50 = MediumParams(delta=3.0, zeta_detuning=50.0)

# Fold locations for delta = 3, zeta = 50, gamma = 1.  Eliminating 2 omega^2
# between the cubic and its W-derivative leaves 5000 W^3 - 2800 W^2 + 9.25 = 0,
# whose physical roots give the two fold drives below (see fold_oracle()).
OMEGA_UP_EXACT = 15.674130803086713
OMEGA_DOWN_EXACT = 1.393969707984965


def fold_oracle() -> tuple[float, float]:
    """Fold drives from the resultant cubic, solved by companion matrix."""
    folds = []
    for w in np.roots([5000.0, -2800.0, 0.0, 9.25]):
        if abs(w.imag) < 1e-12 and 0.0 < w.real <= 1.0:
            w = w.real
            omega_sq = (5600.0 * w - 7500.0 * w * w - 309.25) / 2.0
            if omega_sq > 0.0:
                folds.append(np.sqrt(omega_sq))
    return max(folds), min(folds)


def liouvillian(omega_eff: complex, delta_eff: float, gamma: float) -> np.ndarray:
    """Master-equation generator on (rho11, rho12, rho21, rho22)."""
    ob = complex(omega_eff)
    obc = ob.conjugate()
    return np.array(
        [
            [0.0, -1j * obc, 1j * ob, gamma],
            [-1j * ob, 1j * delta_eff - 0.5 * gamma, 0.0, 1j * ob],
            [1j * obc, 0.0, -1j * delta_eff - 0.5 * gamma, -1j * obc],
            [0.0, 1j * obc, -1j * ob, -gamma],
        ],
        dtype=complex,
    )


# ---------------------------------------------------------------- coefficients

def test_cubic_coefficients_printed_values():
    p = replace(LORENTZ_50, omega=0.0)
    assert cubic_coefficients(p, Mechanism.LORENTZ) == (2500.0, -2800.0, 309.25, -9.25)


def test_cubic_coefficients_free_atom():
    p = MediumParams(omega=1.0)
    assert cubic_coefficients(p, Mechanism.LORENTZ) == (0.0, 0.0, 2.25, -0.25)


def test_cubic_three_roots_by_sign_sampling():
    """Sign changes of the cubic on a dense grid bracket exactly three roots."""
    p = replace(LORENTZ_50, omega=8.0)
    c3, c2, c1, c0 = cubic_coefficients(p, Mechanism.LORENTZ)
    grid = np.linspace(1e-6, 1.0, 10_000)
    values = ((c3 * grid + c2) * grid + c1) * grid + c0
    crossings = np.nonzero(np.diff(np.sign(values)))[0]
    assert len(crossings) == 3
    roots = solve_inversion(p, Mechanism.LORENTZ)
    assert len(roots) == 3
    for w, i in zip(roots, crossings):
        assert grid[i] <= w <= grid[i + 1]


# ---------------------------------------------------------------- root solving

def test_zero_drive_root_is_unity():
    for zeta in (0.0, 5.0, 50.0):
        for delta in (-3.0, 0.0, 3.0):
            p = MediumParams(delta=delta, omega=0.0, zeta_lorentz=zeta)
            assert solve_inversion(p, Mechanism.LORENTZ) == [1.0]


def test_free_atom_saturation_law():
    p = MediumParams(delta=3.0, omega=2.0)
    (w,) = solve_inversion(p, Mechanism.LORENTZ)
    dd = 3.0**2 + 0.25
    assert w == pytest.approx(dd / (2.0 * 4.0 + dd), rel=1e-14)


def test_roots_match_companion_matrix_oracle():
    rng = np.random.default_rng(7)
    cases = [replace(LORENTZ_50, omega=om) for om in (1.6, 8.0, 15.6, 20.0)]
    # nearly-degenerate leading coefficient: the closed form must hand over
    # to the lower-degree path without losing the physical root
    cases += [
        MediumParams(delta=3.0, omega=2.0, zeta_lorentz=zeta)
        for zeta in (1e-6, 1e-4, 1e-2)
    ]
    for _ in range(40):
        cases.append(
            MediumParams(
                gamma=rng.uniform(0.3, 2.0),
                delta=rng.uniform(-6.0, 6.0),
                omega=rng.uniform(0.0, 25.0),
                zeta_lorentz=rng.uniform(0.0, 80.0),
            )
        )
    for p in cases:
        coeffs = cubic_coefficients(p, Mechanism.LORENTZ)
        if coeffs[0] != 0.0:
            ref = [
                r.real
                for r in np.roots(coeffs)
                if abs(r.imag) < 1e-9 and 0.0 < r.real <= 1.0 + 1e-12
            ]
        else:
            ref = [-coeffs[3] / coeffs[2]]
        got = solve_inversion(p, Mechanism.LORENTZ)
        assert len(got) == len(ref)
        for a, b in zip(got, sorted(ref)):
            assert a == pytest.approx(b, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(
    gamma=st.floats(0.1, 10.0),
    delta=st.floats(-30.0, 30.0),
    omega=st.floats(0.0, 40.0),
    zeta=st.floats(0.0, 100.0),
)
def test_root_invariants(gamma, delta, omega, zeta):
    p = MediumParams(gamma=gamma, delta=delta, omega=omega, zeta_lorentz=zeta)
    roots = solve_inversion(p, Mechanism.LORENTZ)
    assert 1 <= len(roots) <= 3
    assert roots == sorted(roots)
    for w in roots:
        assert 0.0 < w <= 1.0
        assert cubic_residual(p, Mechanism.LORENTZ, w) <= 1e-12


def test_near_fold_roots_stay_distinct_or_merge():
    """Arbitrarily close to a fold the solver never reports near-duplicate roots."""
    for eps in (0.0, 1e-12, -1e-12, 1e-10, -1e-10, 1e-8, -1e-8, -1e-6):
        p = replace(LORENTZ_50, omega=OMEGA_UP_EXACT + eps)
        roots = solve_inversion(p, Mechanism.LORENTZ)
        assert 1 <= len(roots) <= 3
        gaps = np.diff(roots)
        assert np.all(gaps >= 0.9e-8)
    # just inside the window the tangent pair is clearly resolved
    inside = solve_inversion(replace(LORENTZ_50, omega=OMEGA_UP_EXACT - 1e-5), Mechanism.LORENTZ)
    assert len(inside) == 3
    # just outside it is gone
    outside = solve_inversion(replace(LORENTZ_50, omega=OMEGA_UP_EXACT + 1e-3), Mechanism.LORENTZ)
    assert len(outside) == 1


# --------------------------------------------------------- effective parameters

def test_effective_params_no_coupling():
    omega_eff, delta_eff = effective_params(0.7, MediumParams(delta=2.0, omega=1.5), Mechanism.LORENTZ)
    assert omega_eff == 1.5 + 0.0j
    assert delta_eff == 2.0


def test_effective_params_detuning_shift():
    p = replace(DETUNING_50, omega=1.0)
    omega_eff, delta_eff = effective_params(0.02, p, Mechanism.DETUNING)
    assert delta_eff == pytest.approx(2.0, abs=1e-15)
    assert omega_eff == 1.0 + 0.0j


def test_rabi_relation_closed_identity():
    """|omega_eff|^2 from the self-consistency division obeys the strict relation."""
    for om in np.linspace(0.2, 25.0, 40):
        p = replace(LORENTZ_50, omega=float(om))
        for w in solve_inversion(p, Mechanism.LORENTZ):
            omega_eff, _ = effective_params(w, p, Mechanism.LORENTZ)
            expected = rabi_relation_sq(w, p, Mechanism.LORENTZ)
            assert abs(omega_eff) ** 2 == pytest.approx(expected, rel=1e-10)


def test_joint_effective_params_use_shifted_detuning():
    p = MediumParams(delta=3.0, omega=2.0, zeta_lorentz=30.0, zeta_detuning=20.0)
    w = 0.05
    omega_eff, delta_eff = effective_params(w, p, Mechanism.JOINT)
    assert delta_eff == pytest.approx(3.0 - 20.0 * w, rel=1e-15)
    assert abs(omega_eff) ** 2 == pytest.approx(
        rabi_relation_sq(w, p, Mechanism.JOINT), rel=1e-12
    )


# -------------------------------------------------------------------- coherence

def test_coherence_zero_drive():
    assert coherence(1.0, 0.0 + 0.0j, 3.0, 1.0) == 0.0


def test_coherence_exact_fraction():
    # gamma=1, delta=3, omega=2, zeta=0: W = 37/69 and rho12 = (24 - 4i)/69
    w = 37.0 / 69.0
    r12 = coherence(w, 2.0 + 0.0j, 3.0, 1.0)
    assert r12 == pytest.approx((24.0 - 4.0j) / 69.0, rel=1e-14)


@pytest.mark.parametrize(
    "omega_eff,delta_eff,gamma",
    [
        (2.0 + 0.0j, 3.0, 1.0),
        (0.7 - 1.3j, -2.0, 0.8),  # complex drive, as a local-field solution has
        (13.4j, 3.0, 1.0),
        (5.0 + 0.0j, 0.0, 2.0),
    ],
)
def test_coherence_against_nullspace_oracle(omega_eff, delta_eff, gamma):
    """The closed stationary solution spans the master-equation kernel."""
    ns = null_space(liouvillian(omega_eff, delta_eff, gamma))
    assert ns.shape[1] == 1
    vec = ns[:, 0]
    vec = vec / (vec[0] + vec[3])  # unit trace
    rho = stationary_state(omega_eff, delta_eff, gamma)
    assert rho.rho12 == pytest.approx(vec[1], abs=1e-12)
    assert rho.rho22 == pytest.approx(vec[3].real, abs=1e-12)
    assert abs(vec[3].imag) < 1e-12


def test_saturation_destroys_coherence():
    rho = stationary_state(1e4 + 0.0j, 0.0, 1.0)
    assert rho.w < 1e-6
    assert abs(rho.rho12) < 1e-4


# -------------------------------------------------------------------- stability

def test_free_atom_stable():
    p = MediumParams(delta=2.0, omega=1.0)
    (w,) = solve_inversion(p, Mechanism.LORENTZ)
    assert classify_stability(w, p, Mechanism.LORENTZ)


def test_three_root_stability_pattern():
    p = replace(LORENTZ_50, omega=8.0)
    lo, mid, hi = solve_inversion(p, Mechanism.LORENTZ)  # ascending w
    assert classify_stability(hi, p, Mechanism.LORENTZ)   # lower branch
    assert not classify_stability(mid, p, Mechanism.LORENTZ)
    assert classify_stability(lo, p, Mechanism.LORENTZ)   # upper branch


# ------------------------------------------------------------------- thresholds

def test_free_atom_has_no_thresholds():
    assert find_thresholds(MediumParams(delta=3.0), Mechanism.LORENTZ) is None


def test_thresholds_match_fold_oracle():
    up_ref, down_ref = fold_oracle()
    assert up_ref == pytest.approx(OMEGA_UP_EXACT, abs=1e-9)
    assert down_ref == pytest.approx(OMEGA_DOWN_EXACT, abs=1e-9)
    result = find_thresholds(LORENTZ_50, Mechanism.LORENTZ)
    assert result is not None
    omega_up, omega_down = result
    assert omega_up == pytest.approx(up_ref, abs=2e-6)
    assert omega_down == pytest.approx(down_ref, abs=2e-6)
    assert omega_down < omega_up


def test_thresholds_range_warning():
    with pytest.warns(ThresholdRangeWarning):
        find_thresholds(LORENTZ_50, Mechanism.LORENTZ, (2.0, 10.0))


# ------------------------------------------------------------------------ scans

def test_scan_free_atom_single_stable_branch():
    p = MediumParams(delta=3.0)
    scan = scan_hysteresis(p, Mechanism.LORENTZ, np.linspace(0.0, 10.0, 50))
    assert scan.omega_up is None and scan.omega_down is None
    rho22_prev = -1.0
    for point in scan.points:
        (sol,) = point.solutions
        assert sol.branch is Branch.LOWER
        assert sol.stable
        assert sol.rho22 >= rho22_prev  # saturation curve rises monotonically
        rho22_prev = sol.rho22


def test_scan_bistable_structure():
    grid = np.linspace(0.0, 25.0, 401)
    scan = scan_hysteresis(LORENTZ_50, Mechanism.LORENTZ, grid)
    assert scan.omega_down == pytest.approx(OMEGA_DOWN_EXACT, abs=2e-6)
    assert scan.omega_up == pytest.approx(OMEGA_UP_EXACT, abs=2e-6)
    for point in scan.points:
        inside = scan.omega_down < point.omega < scan.omega_up
        away = min(abs(point.omega - scan.omega_down), abs(point.omega - scan.omega_up))
        if away < 1e-3:
            continue
        assert len(point.solutions) == (3 if inside else 1)
        labels = [s.branch for s in point.solutions]
        if inside:
            assert labels == [Branch.LOWER, Branch.MIDDLE, Branch.UPPER]
            stabilities = [s.stable for s in point.solutions]
            assert stabilities == [True, False, True]
        rho22s = [s.rho22 for s in point.solutions]
        assert rho22s == sorted(rho22s)


@pytest.mark.filterwarnings("ignore::iobspectra.steady_state.ThresholdRangeWarning")
def test_scan_single_root_continuity_above_window():
    grid = np.linspace(14.0, 20.0, 61)
    scan = scan_hysteresis(LORENTZ_50, Mechanism.LORENTZ, grid)
    tail = [pt for pt in scan.points if pt.omega > OMEGA_UP_EXACT + 0.05]
    assert tail
    for point in tail:
        (sol,) = point.solutions
        assert sol.branch is Branch.UPPER


def test_scan_monotone_stable_branches():
    grid = np.linspace(0.05, 25.0, 300)
    scan = scan_hysteresis(LORENTZ_50, Mechanism.LORENTZ, grid)
    last = {Branch.LOWER: -1.0, Branch.UPPER: -1.0}
    for point in scan.points:
        for sol in point.solutions:
            if sol.branch in last:
                assert sol.rho22 >= last[sol.branch] - 1e-12
                last[sol.branch] = sol.rho22


def test_mechanism_equivalence_of_excitation():
    """Equal couplings give identical root sets for either single mechanism."""
    grid = np.linspace(0.0, 25.0, 100)
    for om in grid:
        lor = solve_inversion(replace(LORENTZ_50, omega=float(om)), Mechanism.LORENTZ)
        det = solve_inversion(replace(DETUNING_50, omega=float(om)), Mechanism.DETUNING)
        assert len(lor) == len(det)
        for a, b in zip(lor, det):
            assert abs(a - b) <= 1e-12


def test_scan_rejects_bad_grids():
    with pytest.raises(ValueError):
        scan_hysteresis(LORENTZ_50, Mechanism.LORENTZ, [1.0, 0.5])
    with pytest.raises(ValueError):
        scan_hysteresis(LORENTZ_50, Mechanism.LORENTZ, [-1.0, 0.5])
    with pytest.raises(ValueError):
        scan_hysteresis(LORENTZ_50, Mechanism.LORENTZ, [])


# -------------------------------------------------------------- branch selection

def test_branch_existence_windows():
    # below the lower fold only the lower branch exists
    with pytest.raises(BranchNotPresentError):
        branch_solution(LORENTZ_50, Mechanism.LORENTZ, Branch.UPPER, omega=0.5)
    with pytest.raises(BranchNotPresentError):
        branch_solution(LORENTZ_50, Mechanism.LORENTZ, Branch.MIDDLE, omega=0.5)
    sol = branch_solution(LORENTZ_50, Mechanism.LORENTZ, Branch.LOWER, omega=0.5)
    assert sol.w > 0.99

    # above the upper fold the surviving root continues the upper branch
    sol = branch_solution(LORENTZ_50, Mechanism.LORENTZ, Branch.UPPER, omega=20.0)
    assert sol.rho22 > 0.45
    with pytest.raises(BranchNotPresentError):
        branch_solution(LORENTZ_50, Mechanism.LORENTZ, Branch.LOWER, omega=20.0)

    # all three inside the window
    for branch in Branch:
        assert branch_solution(LORENTZ_50, Mechanism.LORENTZ, branch, omega=8.0).branch is branch


def test_solution_record_invariants():
    for om in (0.5, 8.0, 20.0):
        for sol in solutions_at(replace(LORENTZ_50, omega=om), Mechanism.LORENTZ, resolve_single=True):
            assert 0.0 < sol.w <= 1.0
            assert sol.rho22 == 0.5 * (1.0 - sol.w)
            assert 0.0 <= sol.rho22 < 0.5
            assert sol.residual <= 1e-10
            # coherence consistent with the effective parameters
            expected = coherence(sol.w, sol.omega_eff, sol.delta_eff, 1.0)
            assert sol.rho12 == pytest.approx(expected, rel=1e-12)
