import json
import math

import pytest

import nashpricing as np_


def small_config():
    cfg = np_.default_config()
    cfg.update(
        episodes=2,
        max_steps=4,
        batch_update_frequency=2,
        batch_size=2,
        action_dims=3,
        turbo_max_evals=4,
        turbo_batch=2,
        hidden_layers=1,
        q_hidden=6,
        psi_hidden=6,
        gamma_hidden=6,
    )
    return cfg


def test_scenarios():
    assert np_.scenario_names() == ["scenario1", "scenario2", "scenario3", "scenario4"]
    s = np_.find_scenario("2")
    assert s.params.beta0 == 15.0
    with pytest.raises(ValueError):
        np_.find_scenario("nope")


def test_market_functions():
    p = np_.MarketParams()
    probs = np_.win_probabilities(p, [2.0, 5.0, 8.0])
    assert math.isclose(sum(probs), 1.0, abs_tol=1e-12)
    assert probs[0] > probs[1] > probs[2]
    assert np_.expected_demand(p, 100.0, 1.0) == 0.0
    profits = np_.expected_profits(p, [5.0, 5.0, 5.0], 5.0)
    assert len(profits) == 3


def test_surface_and_deviation():
    s = np_.find_scenario("2")
    grid = [1.0 + i for i in range(10)]
    surf = np_.epsilon_surface(s.params, grid, grid)
    assert len(surf["epsilon"]) == 100
    assert min(surf["epsilon"]) >= 0.0
    assert any(surf["ne_mask"])
    d, eps = np_.optimal_deviation(s.params, 5.0, 5.0)
    assert eps >= 0.0


def test_turbo_stays_on_simplex():
    seen = []

    def objective(x):
        seen.append(x)
        return -(x[0] - 0.7) ** 2

    point, value, evals, violations = np_.turbo_optimize(objective, [2, 3], max_evals=12, batch=4, seed=3)
    assert evals == 12 and len(seen) == 12
    assert violations == 0
    for x in seen:
        assert math.isclose(sum(x[:2]), 1.0, abs_tol=1e-12)
        assert math.isclose(sum(x[2:]), 1.0, abs_tol=1e-12)
    assert value == max(-(x[0] - 0.7) ** 2 for x in seen)


def test_small_game_bound():
    ok, excess, comparisons = np_.small_game_delta_bound()
    assert ok and comparisons > 0


def test_train_is_deterministic():
    params = np_.find_scenario("2", 3, 3).params
    a = np_.train(params, small_config(), seed=4)
    b = np_.train(params, small_config(), seed=4)
    assert a["rewards_csv"] == b["rewards_csv"]
    assert len(a["market_mean"]) == 2
    base = np_.train(params, small_config(), seed=4, baseline=True)
    assert base["turbo_calls"] == 0


def test_unknown_config_key_rejected():
    params = np_.find_scenario("2", 3, 3).params
    cfg = small_config()
    cfg["mystery"] = 1
    with pytest.raises(Exception):
        np_.train(params, cfg)


def test_commands_write_files(tmp_path):
    np_.surface("scenario2", 3, tmp_path / "surface")
    assert (tmp_path / "surface" / "surface.csv").read_text().startswith("x_mean,p_ref,epsilon,is_ne")
    report = np_.verify("scenario2", tmp_path / "verify", samples=50)
    assert report["all_required_pass"]
    summary = np_.train_seeds("scenario2", [1], tmp_path / "train", config=small_config())
    assert 0.0 <= summary["band_hit_rate"] <= 1.0
    manifest = json.loads((tmp_path / "train" / "seed_1" / "manifest.json").read_text())
    assert len(manifest["config_hash"]) == 40
