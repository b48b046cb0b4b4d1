"""Python access to the nashpricing core."""

import json

from ._core import (
    MarketParams,
    Scenario,
    epsilon_surface,
    expected_demand,
    expected_profits,
    find_scenario,
    optimal_deviation,
    scenario_names,
    small_game_delta_bound,
    turbo_optimize,
    win_probabilities,
)
from . import _core

__all__ = [
    "MarketParams",
    "Scenario",
    "default_config",
    "epsilon_surface",
    "expected_demand",
    "expected_profits",
    "find_scenario",
    "optimal_deviation",
    "scenario_names",
    "small_game_delta_bound",
    "surface",
    "train",
    "train_seeds",
    "turbo_optimize",
    "verify",
    "win_probabilities",
]


def default_config():
    return json.loads(_core.default_config_json())


def _config_text(config):
    return "" if config is None else json.dumps(config)


def train(params, config=None, seed=0, baseline=False):
    return _core.train(params, _config_text(config), seed, baseline)


def surface(scenario, resolution, out):
    _core.cmd_surface(scenario, resolution, str(out))


def verify(scenario, out, samples=1000):
    return json.loads(_core.cmd_verify(scenario, str(out), samples))


def train_seeds(scenario, seeds, out, config=None, mode="nash", jobs=1):
    text = _core.cmd_train(scenario, _config_text(config), list(seeds), mode, jobs, str(out))
    return json.loads(text)
