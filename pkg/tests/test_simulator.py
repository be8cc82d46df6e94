import numpy as np
import pytest
from scipy import stats

from netcrlb.analytic import CdfCurve, CondCdfParams, angle2_mean, cond_cdf_s
from netcrlb.errors import ConfigError
from netcrlb.geometry import compute_s_from_angles
from netcrlb.localizability import NetworkParams, pmf_with_reuse
from netcrlb.simulator import (McEstimate, SimConfig, empirical_cdf, ks_distance, run_conditional_mc,
                               run_d_mc, run_network_mc, sup_norm)


def baseline(K=1, **kw):
    return NetworkParams.from_db(gamma_db=20, beta_db=10, K=K, **kw)


def ks_critical(n, m, alpha=1e-3):
    """Large-sample two-sample KS critical value."""
    return np.sqrt(-0.5 * np.log(alpha / 2)) * np.sqrt((n + m) / (n * m))


@pytest.fixture(scope="module")
def small_run():
    return run_network_mc(SimConfig(baseline(), 20.0, 10, 200.0, n_realizations=3000, rng_seed=5))


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(baseline(), 20.0, 10, 200.0, n_realizations=0)
    with pytest.raises(ConfigError):
        SimConfig(baseline(), 20.0, 2, 200.0)
    with pytest.raises(ConfigError):
        SimConfig(baseline(), 20.0, 10, 200.0, mean_anchors_per_realization=50)
    cfg = SimConfig(baseline(), 20.0, 10, 200.0, mean_anchors_per_realization=1000)
    assert np.pi * cfg.disk_radius ** 2 * cfg.np.lam == pytest.approx(1000)


def test_network_deterministic_and_worker_invariant():
    cfg = SimConfig(baseline(K=2), 20.0, 10, 200.0, n_realizations=1600, rng_seed=3)
    a = run_network_mc(cfg)
    b = run_network_mc(cfg)
    c = run_network_mc(cfg, n_jobs=4)
    for other in (b, c):
        np.testing.assert_array_equal(a.sorted_samples, other.sorted_samples)
        np.testing.assert_array_equal(a.l_histogram, other.l_histogram)
        np.testing.assert_array_equal(a.columns["s"], other.columns["s"])


def test_histogram_and_atom(small_run):
    est = small_run
    assert est.l_histogram.sum() == est.n
    assert np.all(np.diff(est.sorted_samples) >= 0)
    atom = np.mean(est.columns["s"] == 200.0)
    assert atom == pytest.approx(est.l_pmf[:3].sum(), abs=0)


def test_outcomes_respect_bound_and_recompute(small_run):
    est = small_run
    for i in range(0, est.n, 37):
        out = est.outcome(i)
        if out.l_heard < 3:
            assert out.s_value == 200.0
            continue
        m = min(out.l_heard, 10)
        assert out.selected_angles.size == m
        assert out.s_value >= 20.0 * np.sqrt(4 / m) * (1 - 1e-12)
        assert out.s_value == pytest.approx(compute_s_from_angles(out.selected_angles, 20.0).s, rel=1e-9)


def test_unreachable_threshold_all_unlocalizable():
    cfg = SimConfig(NetworkParams(gamma=1.0, beta=1e12), 20.0, 10, 200.0, n_realizations=500)
    est = run_network_mc(cfg)
    assert est.l_histogram[0] == 500
    assert np.all(est.sorted_samples == 200.0)


@pytest.fixture(scope="module")
def idle_run():
    return run_network_mc(SimConfig(NetworkParams(q=0.0), 20.0, 10, 200.0,
                                    n_realizations=20_000, rng_seed=1))


def test_idle_network_saturates_and_matches_exact_conditional(idle_run):
    assert np.all(idle_run.columns["l_heard"] >= 10)
    ref = run_conditional_mc(10, 20.0, 400_000, seed=7)
    res = stats.ks_2samp(idle_run.columns["s"], ref.columns["s"])
    assert res.statistic < ks_critical(idle_run.n, ref.n)


@pytest.mark.xfail(strict=True, reason="single-angle approximation of D is too coarse for a 0.01 sup-norm")
def test_idle_network_vs_analytic_conditional(idle_run):
    p = CondCdfParams(10, 20.0)
    assert ks_distance(idle_run.columns["s"], lambda s: cond_cdf_s(s, p)) < 0.01


def test_conditional_support_and_determinism():
    a = run_conditional_mc(4, 20.0, 50_000, seed=9)
    b = run_conditional_mc(4, 20.0, 50_000, seed=9, n_jobs=3)
    np.testing.assert_array_equal(a.columns["s"], b.columns["s"])
    assert a.sorted_samples[0] >= 20.0 * np.sqrt(4 / 4)
    assert a.n_singular == 0
    with pytest.raises(ValueError):
        run_conditional_mc(2, 20.0, 10)


def test_conditional_approximation_samples_follow_analytic_law():
    est = run_conditional_mc(4, 20.0, 1_000_000, seed=2)
    p = CondCdfParams(4, 20.0)
    assert ks_distance(est.columns["s_approx"], lambda s: cond_cdf_s(s, p)) < 0.005


@pytest.mark.xfail(strict=True, reason="exact S departs from the single-angle law by about 0.15 in sup-norm")
def test_conditional_exact_vs_analytic():
    est = run_conditional_mc(4, 20.0, 1_000_000, seed=2)
    p = CondCdfParams(4, 20.0)
    assert ks_distance(est.sorted_samples, lambda s: cond_cdf_s(s, p)) < 0.06


def test_conditional_quantiles_close_to_analytic():
    # the approximation is close in quantile terms even where the sup-norm is not
    est = run_conditional_mc(4, 20.0, 200_000, seed=4)
    p = CondCdfParams(4, 20.0)
    grid = np.linspace(20.0, 200.0, 20_000)
    F = cond_cdf_s(grid, p)
    for prob in (0.5, 0.8, 0.9):
        assert np.interp(prob, F, grid) == pytest.approx(np.quantile(est.sorted_samples, prob), abs=4.0)


def test_d_mc_bounds_and_angle_mean():
    L = 6
    est = run_d_mc(L, 200_000, seed=3)
    d = est.columns["d"]
    assert d.min() >= 0 and d.max() <= L ** 2 / 4 + 1e-12
    for name in ("w_L", "w_Lm1", "w_Lm2"):
        assert np.all((est.columns[name] >= 0) & (est.columns[name] <= 1))
    x = est.columns["angle_Lm1"]
    assert abs(x.mean() - angle2_mean(L)) < 3 * x.std(ddof=1) / np.sqrt(x.size)
    assert np.all(est.columns["angle_L"] >= x) and np.all(x >= est.columns["angle_Lm2"])


def test_empirical_cdf_basics():
    one = empirical_cdf([5.0], [1.0, 5.0, 9.0])
    np.testing.assert_array_equal(one.probs, [0, 1, 1])
    est = McEstimate(np.array([1.0, 2.0, 3.0, 4.0]), np.array([0, 0, 0, 4]), 0, 4)
    curve = empirical_cdf(est, [0.0, 0.5, 1.0, 2.5, 4.0, 10.0])
    np.testing.assert_array_equal(curve.probs, [0, 0, 0.25, 0.5, 1.0, 1.0])
    assert np.diff(np.concatenate([[0], curve.probs])).sum() == 1.0
    assert est.cdf(2.0) == 0.5


def test_ks_and_sup_norm():
    x = np.linspace(0.005, 0.995, 100)
    assert ks_distance(x, lambda s: s) == pytest.approx(0.005, abs=1e-12)
    assert ks_distance(np.array([np.inf, 0.5]), lambda s: s) == pytest.approx(0.5)
    a = CdfCurve(np.array([1.0, 2.0]), np.array([0.1, 0.9]))
    b = CdfCurve(np.array([1.0, 2.0]), np.array([0.2, 0.5]))
    assert sup_norm(a, b) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        sup_norm(a, CdfCurve(np.array([1.0, 3.0]), np.array([0.1, 0.9])))


def test_tiny_disk_aborts():
    # heavy shadowing lets rim anchors win the SIR ranking in a 30-anchor disk
    np_ = NetworkParams(gamma=1.0, beta=1.0, q=0.1, shadow_sigma_db=20.0)
    cfg = SimConfig(np_, 20.0, 3, 200.0, n_realizations=2000, mean_anchors_per_realization=30)
    with pytest.raises(ConfigError):
        run_network_mc(cfg)


@pytest.mark.slow
@pytest.mark.parametrize("K,centre", [(1, 0.25), (2, 0.85)])
def test_baseline_localizable_fraction(K, centre):
    cfg = SimConfig(baseline(K=K), 20.0, 10, 200.0, n_realizations=100_000, rng_seed=11)
    est = run_network_mc(cfg, n_jobs=4)
    frac = est.l_pmf[3:].sum()
    assert frac == pytest.approx(centre, abs=0.05)
    pmf = pmf_with_reuse(baseline(K=K), 35)
    n = est.n
    for ell in range(0, 15):
        emp = est.l_pmf[ell] if ell < est.l_pmf.size else 0.0
        ana = pmf.prob(ell)
        se = np.sqrt(max(ana * (1 - ana), 1e-12) / n)
        assert abs(emp - ana) <= 3 * se + 0.02
