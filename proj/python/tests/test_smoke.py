import json

import pytest

import cafo


def test_blinker_oscillates():
    g = cafo.place(cafo.Grid(8, 8), "blinker", 2, 3)
    assert g.population() == 3
    once = g.step()
    assert once.live_cells() != g.live_cells()
    assert g.step(2).live_cells() == g.live_cells()


def test_builtin_periods():
    assert cafo.period("blinker")[0] == 2
    assert cafo.period("block")[0] == 1
    assert cafo.period("glider") == (4, 1, 1)
    assert cafo.period("gosper_gun")[0] == 30
    assert cafo.period("p92_gun")[0] == 92


def test_unknown_pattern_raises():
    with pytest.raises(ValueError):
        cafo.builtin_cells("nope")


def test_rle_round_trip():
    g = cafo.place(cafo.Grid(20, 12), "glider", 5, 5)
    assert cafo.Grid.from_rle(g.to_rle()).live_cells() == g.live_cells()


def test_validate_all_pass():
    rows = cafo.validate()
    assert rows
    assert all(r["pass"] for r in rows), [r for r in rows if not r["pass"]]


def test_config_json_parses():
    cfg = json.loads(cafo.default_config_json())
    assert cfg["grid_width"] == 420 and cfg["grid_height"] == 200


def test_session_healthy_then_failover():
    s = cafo.Session()
    s.init()
    s.step(920)
    backup = [e["kind"] for e in s.events() if e["section"] == "backup"]
    assert "BlinkerActivated" not in backup
    assert s.backup_role == "Standby"
    s.kill_primary()
    s.step(500)
    kinds = [e["kind"] for e in s.events()]
    assert "FailoverComplete" in kinds
    assert s.backup_role == "ActingPrimary"


def test_reset_off_phase_rejected():
    s = cafo.Session()
    s.init()
    s.step(10)
    with pytest.raises(ValueError):
        s.reset_backup()


def test_run_scenario_is_deterministic():
    scenario = json.dumps(
        {"total": 1400, "actions": [{"generation": 920, "name": "KillPrimary"}]}
    )
    a = cafo.run_scenario(scenario)
    b = cafo.run_scenario(scenario)
    assert a["exit_code"] == 0
    assert a["final_hash"] == b["final_hash"]
    assert a["events"] == b["events"]
    (f,) = a["failovers"]
    assert 0 <= f["latency"] <= f["bound"]
