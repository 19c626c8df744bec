"""Scenario file grammar and error reporting."""

import pytest

from heatsteer.config import IterationMode
from heatsteer.errors import ScenarioError
from heatsteer.scenario import parse_scenario, parse_scenario_text

from conftest import SCENARIO_DIR

GOOD = """
# demo scenario
[grid]
width = 40
height = 30
north = 100.0
interior = 1.5

[sources]
hot = 10, 12, 99.0

[workers]
count = 3
skew = 2, 1, 1

[delays]
worker_1 = 0.012

[link]
latency = 0.001
mbps = 100
seed = 9

[run]
mode = async
tolerance = 1e-8
forced_iterations = 500
clock = virtual

[server]
snapshot_period = 0.25

[check]
async_max_undelayed_wall = 3.0
async_total_le_sync = true
"""


def test_parse_full_scenario():
    cfg, checks = parse_scenario_text(GOOD, name="good.cfg")
    assert (cfg.width, cfg.height) == (40, 30)
    assert cfg.north == 100.0 and cfg.interior == 1.5
    assert cfg.sources == [(10, 12, 99.0)]
    assert cfg.workers == 3 and cfg.skew == [2.0, 1.0, 1.0]
    assert cfg.delays == {1: 0.012}
    assert cfg.link.latency == 0.001
    assert cfg.link.bandwidth == 12_500_000.0
    assert cfg.link.seed == 9
    assert cfg.mode is IterationMode.ASYNC
    assert cfg.forced_iterations == 500
    assert cfg.clock == "virtual"
    assert cfg.snapshot_period == 0.25
    assert checks == {"async_max_undelayed_wall": 3.0, "async_total_le_sync": True}


@pytest.mark.parametrize(
    "text,lineno",
    [
        ("[grid]\nwidth = not_a_number\n", 2),
        ("[nosuch]\n", 1),
        ("width = 5\n", 1),  # directive before any section
        ("[grid]\nwidth 5\n", 2),  # missing =
        ("[delays]\nbadkey = 0.1\n", 2),
        ("[sources]\ns = 1, 2\n", 2),  # needs x, y, value
        ("[run]\nclock = sundial\n", 2),
        ("[check]\nwat = 1\n", 2),
    ],
)
def test_errors_carry_line_numbers(text, lineno):
    with pytest.raises(ScenarioError) as e:
        parse_scenario_text(text, name="bad.cfg")
    assert f"bad.cfg:{lineno}" in str(e.value)


def test_semantic_validation_wrapped():
    with pytest.raises(ScenarioError) as e:
        parse_scenario_text("[grid]\nwidth = 10\nheight = 4\n[workers]\ncount = 6\n")
    assert "workers" in str(e.value)


def test_bundled_scenarios_parse():
    for name in ("balanced.cfg", "commworker.cfg", "commworker_scaled.cfg",
                 "demo.cfg"):
        cfg, _ = parse_scenario(SCENARIO_DIR / name)
        cfg.validate()


def test_scaled_commworker_matches_experiment():
    cfg, checks = parse_scenario(SCENARIO_DIR / "commworker_scaled.cfg")
    assert (cfg.width, cfg.height, cfg.workers) == (200, 200, 8)
    assert cfg.delays == {1: 0.012}
    assert cfg.forced_iterations == 1000
    assert checks["sync_min_worker_wall"] == 12.0
    assert checks["async_max_undelayed_wall"] == 3.0
    assert checks["async_max_ratio"] == 0.25


def test_config_hash_stable_across_parses():
    c1, _ = parse_scenario_text(GOOD)
    c2, _ = parse_scenario_text(GOOD)
    assert c1.config_hash() == c2.config_hash()
    c3, _ = parse_scenario_text(GOOD.replace("north = 100.0", "north = 50.0"))
    assert c3.config_hash() != c1.config_hash()


def test_missing_file_reports_path(tmp_path):
    with pytest.raises(ScenarioError) as e:
        parse_scenario(tmp_path / "nope.cfg")
    assert "nope.cfg" in str(e.value)
