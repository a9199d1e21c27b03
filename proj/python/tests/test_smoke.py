import pytest

import culsim


def test_table_rows():
    assert culsim.flags_of_state("Modified") == (True, False, True)
    assert culsim.flags_of_state("SharedDirty") == (True, True, True)
    assert culsim.state_of_flags(True, False, False) == "Exclusive"
    assert culsim.state_of_flags(False, True, True) == "Invalid"


def test_config_roundtrip():
    cfg = culsim.SimConfig()
    cfg.set("latencies.snoop_hop", "6")
    assert cfg.to_dict()["latencies"]["snoop_hop"] == 6
    cfg.ways = 3
    with pytest.raises(ValueError):
        cfg.validate()


def test_trace_parse_errors():
    streams = culsim.parse_trace("0 W 0x40 0x1\n1 R 0x40\n")
    assert streams == [[("W", 0x40, 1)], [("R", 0x40, 0)]]
    with pytest.raises(ValueError, match=":1:9:"):
        culsim.parse_trace("0 W 0x40\n")


def test_both_models_agree():
    streams = culsim.gen_workload("producer_consumer", ops_per_core=2000)
    out = culsim.run(streams, model="both", check=True)
    assert out["exit_code"] == 0
    cmp = out["report"]["comparison"]
    assert cmp["images_equal"]
    assert cmp["snoop_cycles"] < cmp["directory_cycles"]


def test_deterministic_reports():
    streams = culsim.gen_workload("uniform_random", ops_per_core=500, seed=3)
    assert culsim.run(streams, model="both") == culsim.run(streams, model="both")


def test_verifier_entry_points():
    assert culsim.oracle_certified()
    verdict = culsim.check_mutation("snoopee:M:ReadUnique:keep")
    assert verdict["caught"] and verdict["trace"][0].startswith("1. ")
    assert not any(r["forbidden_seen"] for r in culsim.run_litmus(2, True))
