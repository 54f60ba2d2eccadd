import numpy as np
import pytest
from scipy.spatial.distance import cdist

from conftest import small_problem
from ufrb.fuzzy import RuleBase, project_batch
from ufrb.gcm import gcm_cluster
from ufrb.train import (TrainConfig, TrainingDivergedError, fit, gradients, init_rulebase,
                        init_rulebase_random, objective_value, reference_distances, stress,
                        value_and_gradients)

KINDS = ["geodesic_stress", "sammon_stress"]


def naive_stress(y, ref, kind):
    n = len(y)
    num, pairs, total = 0.0, 0, 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            e = float(np.sqrt(np.sum((y[i] - y[j]) ** 2)))
            num += (ref[i, j] - e) ** 2 / ref[i, j]
            pairs += 1
            total += ref[i, j]
    return num / (pairs if kind == "geodesic_stress" else total)


def problem_rulebase(seed, ds, n_c=3, d_l=2):
    rng = np.random.default_rng(seed)
    x = ds.points
    return RuleBase(x[rng.choice(ds.n, n_c, replace=False)],
                    0.3 + rng.uniform(0, 0.1, size=(n_c, ds.dim)),
                    rng.uniform(-0.5, 0.5, size=(n_c, d_l, ds.dim + 1)))


def central_differences(rb, x, ref, kind, h=1e-5):
    params = [rb.centers, rb.spreads, rb.consequents]
    out = []
    for p_i, p in enumerate(params):
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            plus = [q.copy() for q in params]
            minus = [q.copy() for q in params]
            plus[p_i][idx] += h
            minus[p_i][idx] -= h
            ep = stress(project_batch(RuleBase(*plus), x, 0.0).coords, ref, kind)
            em = stress(project_batch(RuleBase(*minus), x, 0.0).coords, ref, kind)
            g[idx] = (ep - em) / (2 * h)
        out.append(g)
    return out


def test_stress_zero_chain():
    y = np.array([[0.0], [1.0], [2.0]])
    gd = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    assert stress(y, gd) == 0.0
    assert stress(2 * y, gd) > 0.0
    assert stress(y.ravel(), gd, "sammon_stress") == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_stress_matches_naive(kind):
    rng = np.random.default_rng(0)
    y = rng.normal(size=(20, 2))
    ref = cdist(*(2 * [rng.normal(size=(20, 4))]))
    assert stress(y, ref, kind) == pytest.approx(naive_stress(y, ref, kind), rel=1e-12, abs=1e-12)


def test_stress_excludes_zero_pairs():
    y = np.array([[0.0], [1.0], [2.0]])
    ref = np.array([[0, 0, 2], [0, 0, 1], [2, 1, 0]], dtype=float)
    # pair (0, 1) is a duplicate; the other two are preserved exactly
    assert stress(y, ref) == pytest.approx(0.0)


def test_stress_rigid_invariance():
    rng = np.random.default_rng(1)
    y = rng.normal(size=(40, 2))
    ref = cdist(*(2 * [rng.normal(size=(40, 3))]))
    th = 0.7
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    moved = y @ rot.T + np.array([3.0, -2.0])
    for kind in KINDS:
        assert abs(stress(y, ref, kind) - stress(moved, ref, kind)) < 1e-9


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("seed", [0, 1])
def test_gradients_match_finite_differences(kind, seed):
    ds, gd = small_problem(seed)
    rb = problem_rulebase(seed, ds)
    ref = reference_distances(ds, gd, kind)
    analytic = gradients(rb, ds, gd, kind)
    numeric = central_differences(rb, ds.points, ref, kind)
    for a, f in zip(analytic, numeric):
        rel = np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-300)
        assert rel.max() < 1e-4


def test_gradient_zero_at_exact_fit():
    # one rule with the identity consequent reproduces 2-D inputs exactly
    rng = np.random.default_rng(0)
    x = rng.uniform(size=(15, 2))
    a = np.zeros((1, 2, 3))
    a[0, 0, 1] = a[0, 1, 2] = 1.0
    rb = RuleBase(x[:1], np.ones((1, 2)), a)
    ref = cdist(x, x)
    for kind in KINDS:
        e, dv, ds_, da = value_and_gradients(rb, x, ref, kind)
        assert e < 1e-20
        assert max(np.abs(g).max() for g in (dv, ds_, da)) < 1e-8


def test_init_rulebase(swiss500, swiss500_gd):
    cl = gcm_cluster(swiss500, swiss500_gd, 5, seed=0)
    cfg = TrainConfig(seed=4, spread_init_ratio=0.2)
    rb = init_rulebase(swiss500, cl, 2, cfg)
    np.testing.assert_array_equal(rb.centers, swiss500.points[cl.centroid_indices])
    rng_q = swiss500.points.max(0) - swiss500.points.min(0)
    np.testing.assert_allclose(rb.spreads, np.tile(0.2 * rng_q, (5, 1)))
    assert rb.consequents.shape == (5, 2, 4)
    assert rb.consequents.min() >= -0.5 and rb.consequents.max() < 0.5
    again = init_rulebase(swiss500, cl, 2, cfg)
    assert again.consequents.tobytes() == rb.consequents.tobytes()


@pytest.mark.parametrize("ratio", [0.2, 0.4])
def test_init_spread_on_normalized_data(ratio):
    from ufrb.data import normalize_unit, generate_s_curve
    from ufrb.graph import geodesic_distances
    ds, _ = normalize_unit(generate_s_curve(200, seed=0))
    cl = gcm_cluster(ds, geodesic_distances(ds, 5), 4, seed=0)
    rb = init_rulebase(ds, cl, 2, TrainConfig(spread_init_ratio=ratio))
    np.testing.assert_allclose(rb.spreads, ratio)


def test_init_zero_range_feature(caplog):
    from ufrb.data import Dataset
    from ufrb.gcm import ClusterResult
    ds = Dataset(np.column_stack([np.linspace(0, 1, 10), np.full(10, 3.0)]))
    cl = ClusterResult(np.array([0, 9]), np.repeat([0, 1], 5), 1)
    rb = init_rulebase(ds, cl, 2, TrainConfig(spread_init_ratio=0.3))
    np.testing.assert_allclose(rb.spreads[:, 1], 0.3)
    assert "zero-range" in caplog.text


def test_random_antecedents_in_bounding_box(swiss500):
    rb = init_rulebase_random(swiss500, 7, 2, TrainConfig(seed=1))
    assert np.all(rb.centers >= swiss500.points.min(0))
    assert np.all(rb.centers <= swiss500.points.max(0))


def test_zero_step_leaves_parameters():
    ds, gd = small_problem(3)
    rb = problem_rulebase(3, ds)
    cfg = TrainConfig(learning_rate=0.0, momentum=0.0, max_iter=10)
    out, rep = fit(rb, ds, gd, cfg)
    assert out.centers.tobytes() == rb.centers.tobytes()
    assert out.consequents.tobytes() == rb.consequents.tobytes()
    values = [e for _, e in rep.stress_trace]
    assert max(values) == min(values)
    assert rep.final_stress == values[-1] == rep.initial_stress


@pytest.mark.parametrize("kind", KINDS)
def test_small_step_monotone(kind):
    ds, gd = small_problem(4)
    rb = problem_rulebase(4, ds)
    _, rep = fit(rb, ds, gd, TrainConfig(objective=kind, learning_rate=1e-3, momentum=0.0,
                                         max_iter=50))
    values = np.array([e for _, e in rep.stress_trace])
    assert np.all(np.diff(values) <= 1e-15)
    assert rep.final_stress < rep.initial_stress


def test_fit_descends_and_is_deterministic(swiss500, swiss500_gd):
    cl = gcm_cluster(swiss500, swiss500_gd, 5, seed=0)
    cfg = TrainConfig(max_iter=100, seed=0, log_every=10)
    rb = init_rulebase(swiss500, cl, 2, cfg)
    a, rep = fit(rb, swiss500, swiss500_gd, cfg)
    b, _ = fit(rb, swiss500, swiss500_gd, cfg)
    assert rep.final_stress < rep.initial_stress
    assert rep.iterations_run == 100
    assert rep.stress_trace[0] == (0, rep.initial_stress)
    assert rep.stress_trace[-1] == (100, rep.final_stress)
    assert a.consequents.tobytes() == b.consequents.tobytes()
    assert objective_value(a, swiss500, swiss500_gd) == pytest.approx(rep.final_stress)


def test_sigma_clamped():
    ds, gd = small_problem(5)
    rb = problem_rulebase(5, ds)
    out, _ = fit(rb, ds, gd, TrainConfig(learning_rate=5.0, momentum=0.9, max_iter=30))
    rng_q = ds.points.max(0) - ds.points.min(0)
    assert np.all(out.spreads >= 1e-3 * rng_q - 1e-15)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reported():
    ds, gd = small_problem(6)
    rb = problem_rulebase(6, ds)
    with pytest.raises(TrainingDivergedError, match="iteration"):
        fit(rb, ds, gd, TrainConfig(learning_rate=1e200, max_iter=20))


def test_early_stop_and_pair_subsampling():
    ds, gd = small_problem(7)
    rb = problem_rulebase(7, ds)
    _, rep = fit(rb, ds, gd, TrainConfig(max_iter=5000, early_stop_tol=1e-3))
    assert rep.iterations_run < 5000
    _, rep2 = fit(rb, ds, gd, TrainConfig(max_iter=50, pair_fraction=0.5))
    assert np.isfinite(rep2.final_stress)


@pytest.mark.parametrize("kwargs", [
    {"objective": "bogus"}, {"learning_rate": -1}, {"momentum": 1.0}, {"max_iter": 0},
    {"spread_init_ratio": 0}, {"consequent_init_range": (1, 0)}, {"antecedent_init": "fcm"},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs)


def test_trace_csv(tmp_path):
    ds, gd = small_problem(8)
    _, rep = fit(problem_rulebase(8, ds), ds, gd, TrainConfig(max_iter=5))
    path = tmp_path / "t.csv"
    rep.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,stress"
    assert len(lines) == 1 + len(rep.stress_trace)
