import math
import warnings

import numpy as np
import pytest

from ptikeda.core import FieldState, MapParams, step
from ptikeda.orbits import (
    DivergenceWarning,
    OrbitSpec,
    PeriodLabel,
    _run_batch,
    bifurcation_scan,
    classify,
    count_clusters,
    detect_period,
    iterate_orbit,
    lle,
    lle_scan,
    parameter_basin,
)
from ptikeda.spectrum import eigenvalues, transfer_matrix

SHORT = OrbitSpec(n_transient=20, n_keep=2000)
# beta=0.5, eta=1 shows a genuine period-doubling cascade at E=0.65
CASCADE = MapParams(beta=0.5, eta=1.0)


def linear(gamma, e=0.65):
    return MapParams(gamma=gamma, beta=0.0, eta=0.0, e_in=e, e_in_prime=e)


def brute_force_period(x, max_period=8, rel_tol=1e-5, abs_tol=1e-9, tail=256):
    """Every shift 1..max_period checked element by element; smallest passing power of two."""
    x = [float(v) for v in x]
    n = len(x)
    scale = max(abs(v) for v in x[-(tail + max_period):])
    tol = abs_tol + rel_tol * scale
    passing = []
    for p in range(1, max_period + 1):
        m = min(tail, n - p)
        if all(abs(x[j] - x[j - p]) <= tol for j in range(n - m, n)):
            passing.append(p)
    powers = [p for p in passing if p & (p - 1) == 0]
    return min(powers) if powers else None


# -- iterate_orbit -------------------------------------------------------

def test_undriven_orbit_stays_at_origin():
    o = iterate_orbit(MapParams(gamma=0.9, e_in=0, e_in_prime=0))
    assert len(o) == 2000 and not o.diverged
    assert np.all(o.e1 == 0) and np.all(o.e4 == 0)


def test_orbit_matches_repeated_step():
    p = MapParams(gamma=0.91)
    s = FieldState(0.2 - 0.1j, 0.3j)
    o = iterate_orbit(p, OrbitSpec(n_transient=5, n_keep=30, initial=s))
    for _ in range(5):
        s = step(s, p)
    for k in range(30):
        s = step(s, p)
        assert abs(o.e1[k] - s.e1) <= 1e-12 * max(1, abs(s.e1))
        assert abs(o.e4[k] - s.e4) <= 1e-12 * max(1, abs(s.e4))


def test_linear_orbit_reaches_affine_fixed_point():
    p = linear(0.5)
    t = transfer_matrix(0.5)
    drive = 1j / math.sqrt(2) * np.array([math.exp(-0.25) * 0.65, math.exp(0.25) * 0.65])
    fixed = np.linalg.solve(np.eye(2) - t, drive)
    o = iterate_orbit(p)
    assert np.ptp(o.p4) <= 1e-8
    assert o.p4[-1] == pytest.approx(abs(fixed[1]) ** 2, abs=1e-10)
    assert o.e1[-1] == pytest.approx(fixed[0], abs=1e-10)


def test_orbit_powers_are_squared_moduli():
    o = iterate_orbit(MapParams(gamma=0.9), OrbitSpec(100, 50))
    assert np.array_equal(o.p4, o.e4.real**2 + o.e4.imag**2)
    assert np.array_equal(o.p1, o.e1.real**2 + o.e1.imag**2)
    assert len(o.states) == 50


def test_diverging_orbit_is_flagged_not_raised():
    o = iterate_orbit(linear(1.2), OrbitSpec(n_transient=10, n_keep=2000))
    assert o.diverged
    assert 0 < len(o) < 2000
    assert np.all(o.p4 <= 1e12)


def test_orbit_spec_validation():
    with pytest.raises(ValueError):
        OrbitSpec(n_transient=-1)
    with pytest.raises(ValueError):
        OrbitSpec(n_keep=0)
    assert OrbitSpec().total == 3500


# -- detect_period -------------------------------------------------------

def test_detect_period_simple_series():
    assert detect_period(np.full(300, 3.0)) == 1
    assert detect_period(np.tile([1.0, 5.0], 150)) == 2
    assert detect_period(np.tile([1.0, 5.0, 2.0, 7.0], 80)) == 4
    assert detect_period(np.tile(np.arange(8.0), 40)) == 8
    assert detect_period(np.tile(np.arange(3.0), 100)) is None


def test_detect_period_too_short():
    with pytest.raises(ValueError):
        detect_period(np.ones(31))


@pytest.mark.parametrize("seed", range(5))
def test_detect_period_random_series_matches_brute_force(seed):
    x = np.random.default_rng(seed).uniform(size=1024)
    assert brute_force_period(x) is None
    assert detect_period(x) is None


@pytest.mark.parametrize("seed", range(5))
def test_detect_period_noisy_cycles_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.choice([1, 2, 3, 4, 6, 8]))
    x = np.tile(rng.uniform(1, 2, size=p), 600 // p + 1)[:600]
    x = x + rng.normal(scale=10 ** rng.uniform(-9, -3), size=len(x))
    assert detect_period(x) == brute_force_period(x)


# -- Lyapunov exponent ---------------------------------------------------

@pytest.mark.parametrize("g", [0.3, 0.5, 0.8])
def test_lle_linear_stable(g):
    assert lle(linear(g)) == pytest.approx(math.log(2 ** -0.5), abs=1e-3)


def test_lle_linear_unstable_short_transient():
    with pytest.warns(DivergenceWarning):
        value = lle(linear(1.2), SHORT)
    assert value == pytest.approx(math.log(eigenvalues(1.2).spectral_radius), abs=1e-3)


def test_lle_nan_when_diverged_in_transient():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergenceWarning)
        assert math.isnan(lle(linear(1.2)))


def test_lle_linear_limit_random_gammas():
    rng = np.random.default_rng(7)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergenceWarning)
        for g in rng.uniform(0, 1.4, 20):
            expected = math.log(eigenvalues(g).spectral_radius)
            assert lle(linear(g), SHORT) == pytest.approx(expected, abs=1e-3), g


def test_batch_lle_matches_scalar_lle():
    p = CASCADE.with_(gamma=0.93)
    res = _run_batch(p.gamma, p.e_in, p.e_in_prime, p, OrbitSpec(), n_record=1)
    assert res.lle[0] == pytest.approx(lle(p), abs=1e-6)


def test_tangent_norm_stays_bounded():
    res = _run_batch(np.array([0.5, 0.9, 0.72]), 0.65, 0.65, MapParams(beta=6, eta=1.0),
                     OrbitSpec(200, 500), n_record=1)
    assert 1e-12 <= res.min_tangent_norm and res.max_tangent_norm <= 1e12


def two_trajectory_lle(params, spec, d0=1e-8):
    """Independent estimate: separation growth of a twin orbit, renormalised each step."""
    a = spec.initial
    b = FieldState(a.e1 + d0, a.e4)
    total = 0.0
    for j in range(spec.total):
        a, b = step(a, params), step(b, params)
        diff = b.to_real() - a.to_real()
        dist = np.linalg.norm(diff)
        if j >= spec.n_transient:
            total += math.log(dist / d0)
        b = FieldState.from_real(a.to_real() + diff * d0 / dist)
    return total / spec.n_keep


def test_lle_matches_two_trajectory_estimate_on_periodic_orbit():
    p = CASCADE.with_(gamma=0.93)
    spec = OrbitSpec(1500, 2000)
    assert lle(p, spec) == pytest.approx(two_trajectory_lle(p, spec), abs=1e-3)


def test_lle_positive_in_chaos_like_two_trajectory_estimate():
    # different rounding sends the two chaotic orbits apart, so only the
    # finite-time statistics are comparable
    p = MapParams(gamma=0.72, beta=6.0, eta=1.0)
    spec = OrbitSpec(500, 3000)
    benettin = lle(p, spec)
    assert benettin > 0.05
    assert benettin == pytest.approx(two_trajectory_lle(p, spec), abs=0.05)


# -- classification ------------------------------------------------------

def test_classify_fixed_point_and_zero_drive():
    assert classify(MapParams(gamma=0.6)).label is PeriodLabel.P1
    assert classify(MapParams(gamma=0.9, e_in=0, e_in_prime=0)).label is PeriodLabel.P1


def test_classify_diverged():
    assert classify(MapParams(gamma=1.0)).label is PeriodLabel.DIVERGED


def test_classify_chaotic():
    c = classify(MapParams(gamma=0.72, beta=6.0, eta=1.0))
    assert c.label is PeriodLabel.CHAOTIC and c.lle > 0.005


@pytest.mark.parametrize("gamma,label", [(0.8, PeriodLabel.P4), (0.93, PeriodLabel.P8)])
def test_classify_cascade_and_label_soundness(gamma, label):
    p = CASCADE.with_(gamma=gamma)
    c = classify(p)
    assert c.label is label
    k = c.period
    p4 = iterate_orbit(p).p4
    tail = p4[-(256 + 8):]
    tol = 1e-9 + 1e-5 * np.max(np.abs(tail))
    assert np.max(np.abs(p4[-256:] - p4[-256 - k:-k])) <= tol
    smaller = k // 2
    while smaller >= 1:
        assert np.max(np.abs(p4[-256:] - p4[-256 - smaller:-smaller])) > tol
        smaller //= 2


def test_classify_quasiperiodic_band():
    c = classify(MapParams(gamma=0.8))
    assert c.label is PeriodLabel.QUASIPERIODIC and abs(c.lle) <= 0.005


# -- sweeps --------------------------------------------------------------

def test_count_clusters():
    assert count_clusters([1.0, 1.0 + 1e-12, 2.0, 2.0, 3.0]) == 3
    assert count_clusters([]) == 0


def test_bifurcation_linear_columns_collapse():
    table = bifurcation_scan(linear(0.0), 0.1, 0.9, 9)
    assert table.p4.shape == (9, 200)
    assert not table.diverged.any()
    for col in table.p4:
        assert count_clusters(col) == 1


@pytest.mark.parametrize("beta,eta,clusters", [(1.5, 10.0, 2), (2.0, 3.0, 4), (2.0, 10.0, 8)])
def test_bifurcation_periodic_column_clusters(beta, eta, clusters):
    table = bifurcation_scan(MapParams(beta=beta, eta=eta), 0.72, 0.75, 1)
    assert count_clusters(table.p4[0]) == clusters
    assert classify(MapParams(gamma=0.72, beta=beta, eta=eta)).period == clusters


def test_bifurcation_long_form_rows_and_divergence():
    table = bifurcation_scan(MapParams(), 0.9, 1.0, 3, n_points=10)
    rows = list(table.rows())
    assert table.diverged.tolist() == [False, False, True]
    assert len(rows) == 10 + 10 + 1 and rows[-1][1] is None


def test_bifurcation_rejects_too_many_points():
    with pytest.raises(ValueError):
        bifurcation_scan(MapParams(), 0.6, 1.0, 4, OrbitSpec(10, 100), n_points=101)
    with pytest.raises(ValueError):
        bifurcation_scan(MapParams(), 1.0, 0.6, 4)


def test_lle_scan_matches_single_calls():
    gammas, values, diverged = lle_scan(linear(0.0), 0.2, 0.6, 3)
    for g, v in zip(gammas, values):
        assert v == pytest.approx(lle(linear(g)), abs=1e-9)
    assert not diverged.any()


def test_basin_zero_drive_row_and_layout():
    spec = OrbitSpec(500, 600)
    grid = parameter_basin((0.6, 0.9), (0.0, 0.5), 3, 2, spec)
    labels = grid.labels
    assert labels.shape == (3, 2)
    assert all(lab == "P1" for lab in labels[:, 0])
    rows = list(grid.rows())
    assert [(round(g, 3), e) for g, e, _ in rows[:2]] == [(0.6, 0.0), (0.6, 0.5)]
    # each cell equals a standalone classification
    for g, e, cell in rows:
        solo = classify(MapParams(gamma=g, e_in=e, e_in_prime=e), spec)
        assert solo.label == cell.label


def test_basin_parallel_matches_serial():
    spec = OrbitSpec(300, 400)
    args = ((0.7, 1.0), (0.3, 0.9), 6, 5, spec, CASCADE)
    serial = parameter_basin(*args, workers=1)
    split = parameter_basin(*args, workers=3)
    assert np.array_equal(serial.labels, split.labels)
    assert np.array_equal(serial.lle, split.lle, equal_nan=True)


def test_basin_transient_sufficiency():
    kw = dict(gamma_range=(0.6, 1.1), e_in_range=(0.3, 0.9), n_gamma=50, n_e=50)
    a = parameter_basin(spec=OrbitSpec(1500, 2000), **kw).labels
    b = parameter_basin(spec=OrbitSpec(3000, 2000), **kw).labels
    periodic = np.isin(a, ["P1", "P2", "P4", "P8"]) | np.isin(b, ["P1", "P2", "P4", "P8"])
    assert np.array_equal(a[periodic], b[periodic])
    assert np.mean(a != b) <= 0.02
