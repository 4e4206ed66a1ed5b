import pytest

from prp.analysis import delivery_prob_static, exit_probability
from prp.simulator import Mobility, ScenarioError
from prp.simulator.sweep import (
    SWEEP_COLUMNS, delivery_scenario, exit_prob_for, measure_delivery, sweep, with_axis,
)


def small(**kw):
    return delivery_scenario(k=5, density=2, messages=4, **kw)


def test_with_axis_fields():
    base = small()
    assert with_axis(base, "density", 3).nodes == 75
    assert with_axis(base, "loss", 0.25).loss == 0.25
    assert with_axis(base, "nodes", 30).nodes == 30
    assert with_axis(base, "mobility.speed_max", 4).mobility.speed_max == 4.0
    g = with_axis(base, "grid.k", 7).grid
    assert (g.k, g.delta) == (7, 700)


@pytest.mark.parametrize("axis,value", [
    ("placement", 1), ("queue_mode", 1), ("nodes", 2.5), ("grid.r", 1.0), ("traffic.m", 3), ("nope", 1),
])
def test_with_axis_rejects(axis, value):
    with pytest.raises(ScenarioError):
        with_axis(small(), axis, value)


def test_exit_prob_follows_mobility():
    assert exit_prob_for(small()) == 0.0
    mob = small(mobility=Mobility("random_waypoint", 1.0, 3.0, 0.0))
    assert exit_prob_for(mob) == pytest.approx(exit_probability(100, 2.0, 1.0))
    fast = small(mobility=Mobility("random_waypoint", 100.0, 200.0, 0.0))
    assert exit_prob_for(fast) is None


def test_measure_delivery_rows():
    rows = measure_delivery(small(), [0.5, 3], seeds=[1, 2])
    assert [r["value"] for r in rows] == [0.5, 3]
    for r in rows:
        assert list(r) == list(SWEEP_COLUMNS)
        assert r["seeds"] == 2
        assert r["bound_static"] == pytest.approx(delivery_prob_static(r["nodes"], 5))
        # with no mobility the mobile bound is the static one
        assert r["bound_mobile"] == r["bound_static"]
    assert rows[1]["message_ratio_mean"] >= rows[1]["bound_static"] - 0.05


def test_workers_do_not_change_results():
    a = sweep(small(), "loss", [0.0, 0.3], seeds=[1, 2])
    b = sweep(small(), "loss", [0.0, 0.3], seeds=[1, 2], workers=2)
    assert a == b
