import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ufrb.data import NormStats
from ufrb.fuzzy import (DegenerateFiringError, RuleBase, firing_strengths, load_model,
                        membership, normalized_weights, log_firing, project, project_batch,
                        save_model, suggest_reject_threshold)


def random_rulebase(seed, n_c=4, d_h=3, d_l=2, spread=0.3):
    rng = np.random.default_rng(seed)
    return RuleBase(rng.uniform(size=(n_c, d_h)),
                    spread + rng.uniform(0, 0.2, size=(n_c, d_h)),
                    rng.uniform(-0.5, 0.5, size=(n_c, d_l, d_h + 1)))


def test_membership_values():
    assert membership(1.3, 1.3, 0.7) == 1.0
    # closed forms: exp(-1/2) and exp(-9/2)
    assert membership(2.0, 1.0, 1.0) == pytest.approx(0.6065306597126334, abs=1e-15)
    assert membership(0.5 + 3 * 0.2, 0.5, 0.2) == pytest.approx(0.011108996538242306, rel=1e-12)
    assert membership(2.0, 1.0, 1.0) == pytest.approx(0.60653, abs=1e-5)
    assert membership(4.0, 1.0, 1.0) == pytest.approx(0.011109, abs=1e-6)


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_membership_bad_sigma(sigma):
    with pytest.raises(ValueError):
        membership(0.0, 0.0, sigma)


def test_firing_is_product():
    rb = RuleBase(np.zeros((1, 2)), np.ones((1, 2)), np.zeros((1, 2, 3)))
    # each coordinate at distance sqrt(2 ln 2) has membership 0.5
    x = np.full(2, math.sqrt(2 * math.log(2)))
    assert firing_strengths(rb, x)[0] == pytest.approx(0.25, rel=1e-12)
    rb2 = random_rulebase(0)
    np.testing.assert_array_equal(firing_strengths(rb2, rb2.centers[2])[2], 1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 1000), st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_firing_range(seed, x):
    f = firing_strengths(random_rulebase(seed), np.array(x))
    assert np.all((f >= 0) & (f <= 1))


def test_single_rule_is_affine():
    rng = np.random.default_rng(2)
    rb = RuleBase(rng.uniform(size=(1, 3)), np.ones((1, 3)), rng.normal(size=(1, 2, 4)))
    x = rng.normal(size=3)
    y, amax = project(rb, x)
    expected = rb.consequents[0, :, 0] + rb.consequents[0, :, 1:] @ x
    # weight is exactly 1; only summation order can differ
    np.testing.assert_allclose(y, expected, rtol=1e-14, atol=1e-14)
    assert amax == pytest.approx(firing_strengths(rb, x)[0])


def test_symmetric_two_rules_midpoint():
    v = np.array([[-1.0, 0.0], [1.0, 0.0]])
    a = np.array([[[1.0, 2.0, 0.0]], [[5.0, 0.0, -1.0]]])
    rb = RuleBase(v, np.ones((2, 2)), a)
    x = np.array([0.0, 0.3])
    y, _ = project(rb, x)
    r1 = a[0, 0, 0] + a[0, 0, 1:] @ x
    r2 = a[1, 0, 0] + a[1, 0, 1:] @ x
    assert y[0] == pytest.approx(0.5 * (r1 + r2), abs=1e-14)


def test_at_center_with_negligible_others():
    rng = np.random.default_rng(5)
    v = np.array([[0.0, 0.0, 0.0], [10.0, 10.0, 10.0], [-10.0, 5.0, 10.0]])
    rb = RuleBase(v, np.full((3, 3), 0.5), rng.uniform(-0.5, 0.5, size=(3, 2, 4)))
    y, amax = project(rb, v[0])
    assert amax == 1.0
    expected = rb.consequents[0] @ np.concatenate([[1.0], v[0]])
    assert np.max(np.abs(y - expected)) < 1e-6


def test_weights_sum_to_one():
    rb = random_rulebase(3)
    x = np.random.default_rng(3).uniform(size=(200, 3))
    w = normalized_weights(log_firing(x, rb.centers, rb.spreads))
    assert np.max(np.abs(w.sum(axis=1) - 1)) < 1e-12


def test_continuity():
    for seed in range(5):
        rb = random_rulebase(seed)
        x = np.random.default_rng(seed + 100).uniform(size=3)
        y0, _ = project(rb, x)
        y1, _ = project(rb, x + 1e-6)
        assert np.max(np.abs(y1 - y0)) < 1e-3


def test_rule_permutation_invariance():
    rb = random_rulebase(7, n_c=6)
    perm = np.random.default_rng(0).permutation(6)
    rp = RuleBase(rb.centers[perm], rb.spreads[perm], rb.consequents[perm])
    x = np.random.default_rng(1).uniform(size=(50, 3))
    a = project_batch(rb, x, 0.0).coords
    b = project_batch(rp, x, 0.0).coords
    assert np.max(np.abs(a - b)) < 1e-12


def test_degenerate_firing():
    rb = RuleBase(np.zeros((2, 1)), np.full((2, 1), 0.01), np.zeros((2, 1, 2)))
    with pytest.raises(DegenerateFiringError):
        project(rb, np.array([1e3]))
    p = project_batch(rb, np.array([[1e3], [0.0]]), 0.15)
    assert p.degenerate.tolist() == [True, False]
    assert np.all(np.isfinite(p.coords))
    assert p.rejected.tolist() == [True, False]


def test_project_batch_thresholds():
    rb = random_rulebase(4)
    x = rb.centers + 0.01
    assert not project_batch(rb, x, 0.0).rejected.any()
    far = project_batch(rb, x + 100.0, 0.15)
    assert far.rejected.all()
    p = project_batch(rb, x, 0.15)
    np.testing.assert_array_equal(p.rejected, p.max_firing < 0.15)
    assert np.all((p.max_firing >= 0) & (p.max_firing <= 1))


def test_project_batch_errors():
    rb = random_rulebase(4)
    with pytest.raises(ValueError, match="dimension mismatch"):
        project_batch(rb, np.zeros((3, 5)))
    with pytest.raises(ValueError):
        project_batch(rb, np.zeros((3, 3)), 1.0)


def test_suggest_threshold():
    assert 0 <= suggest_reject_threshold(np.ones(10)) <= 1
    grid = np.arange(1, 101) / 100
    assert suggest_reject_threshold(grid) == pytest.approx(0.01, abs=1e-2)
    with pytest.raises(ValueError):
        suggest_reject_threshold([])


def test_rulebase_validation():
    with pytest.raises(ValueError):
        RuleBase(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((2, 2, 4)))
    with pytest.raises(ValueError):
        RuleBase(np.zeros((2, 3)), np.ones((2, 3)), np.zeros((2, 2, 3)))


def test_raw_input_uses_norm_stats():
    rb = random_rulebase(8)
    stats = NormStats(np.array([0.0, 10.0, -5.0]), np.array([2.0, 20.0, 5.0]))
    rbn = RuleBase(rb.centers, rb.spreads, rb.consequents, stats)
    raw = np.array([[1.0, 15.0, 0.0]])
    a = project_batch(rbn, raw, raw=True).coords
    b = project_batch(rb, stats.apply(raw)).coords
    np.testing.assert_array_equal(a, b)


def test_model_round_trip(tmp_path):
    rb = random_rulebase(9)
    stats = NormStats(np.array([0.1, 0.2, 0.3]), np.array([1.0, 2.0, 3.0]))
    rb = RuleBase(rb.centers / 3, rb.spreads, rb.consequents * np.pi, stats,
                  {"epsilon": 5, "objective": "geodesic_stress"})
    path = tmp_path / "m.json"
    save_model(rb, path)
    back = load_model(path)
    assert back.centers.tobytes() == rb.centers.tobytes()
    assert back.spreads.tobytes() == rb.spreads.tobytes()
    assert back.consequents.tobytes() == rb.consequents.tobytes()
    assert back.norm_stats.minimum.tobytes() == stats.minimum.tobytes()
    assert back.meta["epsilon"] == 5
    save_model(back, tmp_path / "m2.json")
    assert (tmp_path / "m2.json").read_bytes() == path.read_bytes()
    assert '"schema": "ufrb-model/1"' in path.read_text()


def test_describe_lists_every_rule():
    rb = random_rulebase(1, n_c=3, d_l=2)
    assert len(rb.describe().splitlines()) == 6
