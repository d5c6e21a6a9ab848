import json

import pytest

from oneway import formats, runtime
from oneway.circuit import CNOT, ROT, Circuit, S
from oneway.compiler import compile, embed_rectangular
from oneway.scheduler import build_schedule


def test_pattern_round_trip():
    c = Circuit(2, (ROT(0, 0.3, 0.7, -1.1), S(1), CNOT(0, 1)))
    p = compile(c)
    q = formats.pattern_from_dict(json.loads(formats.dumps(formats.pattern_to_dict(p))))
    assert q.circuit == p.circuit
    assert q.cluster.edges == p.cluster.edges and q.cluster.sites == p.cluster.sites
    assert q.F == p.F and q.F_init == p.F_init
    assert q.fc == p.fc and q.bc == p.bc
    assert q.adaptive == p.adaptive and q.outputs == p.outputs and q.blocks == p.blocks
    for s in p.adaptive:
        assert q.phi_init[s] == pytest.approx(p.phi_init[s], abs=1e-14)
    assert build_schedule(q) == build_schedule(p)
    a, _ = runtime.run_experiment(p, 500, 2)
    b, _ = runtime.run_experiment(q, 500, 2)
    assert a == b


def test_fillers_survive_round_trip():
    p = embed_rectangular(compile(Circuit(2, (ROT(0, 0.3, 0.7, -1.1), CNOT(0, 1)))))
    q = formats.pattern_from_dict(formats.pattern_to_dict(p))
    assert q.fillers == p.fillers


def test_hex_images_are_little_endian_by_wire():
    p = compile(Circuit(3))
    doc = formats.pattern_to_dict(p)
    by_id = {sd["id"]: sd for sd in doc["sites"]}
    assert [by_id[o]["F"] for o in p.outputs] == ["1", "2", "4"]


def test_angles_are_rounded_to_15_digits():
    p = compile(Circuit(1, (ROT(0, 0.1234567890123456789, 0.2, 0.3),)))
    doc = formats.pattern_to_dict(p)
    angle = [sd["angle"] for sd in doc["sites"] if sd["adaptive"]][0]
    assert angle == float(f"{-0.1234567890123456789:.15g}")


def test_schedule_round_trip():
    s = build_schedule(compile(Circuit(1, (ROT(0, 0.3, 0.7, -1.1),))))
    doc = formats.schedule_to_dict(s)
    assert doc["t_max"] == 3
    assert formats.schedule_from_dict(doc) == s


def test_malformed_pattern(tmp_path):
    with pytest.raises(formats.FormatError):
        formats.pattern_from_dict({"version": 1})
    bad = tmp_path / "p.json"
    bad.write_text("{\n  \"version\": 1,\n  oops\n}")
    with pytest.raises(formats.FormatError, match="line 3"):
        formats.read_pattern(bad)
