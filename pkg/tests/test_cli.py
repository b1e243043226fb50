"""Command-line behavior: exit codes, files, and round trips."""

import json
from fractions import Fraction

import pytest

from andreev import angles, catalog, complexes, whitehead
from andreev.cli import main


@pytest.fixture
def paths(tmp_path):
    out = {}
    for name, ap in (("dodeca", catalog.dodecahedron()),
                     ("atc", catalog.alternately_truncated_cube()),
                     ("prism5", catalog.prism(5)),
                     ("cube", catalog.cube())):
        p = tmp_path / f"{name}.json"
        p.write_text(complexes.to_json(ap))
        out[name] = str(p)
    a = angles.AngleAssignment.uniform(30, Fraction(2, 5))
    p = tmp_path / "a25.json"
    p.write_text(angles.to_json(a))
    out["a25"] = str(p)
    out["dir"] = tmp_path
    return out


def test_validate(paths, capsys):
    assert main(["validate", "--input", paths["dodeca"]]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["valid"] and data["simple"]
    assert data["faces"] == 12


def test_validate_rejects_garbage(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "vertex_count": 5,
                               "faces": [[0, 1, 2, 3], [0, 4, 1], [1, 4, 2],
                                         [2, 4, 3], [3, 4, 0]]}))
    assert main(["validate", "--input", str(bad)]) == 1
    assert not json.loads(capsys.readouterr().out)["valid"]


def test_missing_file_is_usage_error(tmp_path):
    assert main(["validate", "--input", str(tmp_path / "nope.json")]) == 2


def test_circuits(paths, capsys):
    assert main(["circuits", "--input", paths["prism5"]]) == 0
    found = json.loads(capsys.readouterr().out)
    assert [c["kind"] for c in found] == ["prismatic3"]


def test_check_angles_verdicts(paths, capsys):
    assert main(["check-angles", "--input", paths["dodeca"],
                 "--angles", paths["a25"]]) == 0
    assert json.loads(capsys.readouterr().out)["member"]


def test_check_angles_size_mismatch(paths):
    assert main(["check-angles", "--input", paths["cube"],
                 "--angles", paths["a25"]]) == 2


def test_feasible_verdicts(paths, capsys):
    assert main(["feasible", "--input", paths["dodeca"]]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "nonempty"
    assert main(["feasible", "--input", paths["atc"]]) == 1
    assert json.loads(capsys.readouterr().out)["verdict"] == "empty"


def test_reduce_round_trip(paths, capsys):
    trace_path = str(paths["dir"] / "trace.json")
    assert main(["reduce", "--input", paths["dodeca"],
                 "--output", trace_path]) == 0
    trace = whitehead.trace_from_json(open(trace_path).read())
    assert whitehead.replay(trace).triangle_set == trace.end.triangle_set
    assert complexes.isomorphic(trace.end,
                                catalog.split_prism_dual(12)) is not None


def test_reduce_refuses_prisms(paths):
    assert main(["reduce", "--input", paths["prism5"]]) == 1


def test_realize_and_export(paths, capsys):
    off_path = str(paths["dir"] / "d.off")
    assert main(["realize", "--input", paths["dodeca"],
                 "--angles", paths["a25"], "--format", "off",
                 "--output", off_path]) == 0
    lines = open(off_path).read().splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = (int(x) for x in lines[1].split())
    assert (nv, nf) == (20, 12)
    faces = [[int(x) for x in ln.split()][1:] for ln in lines[2 + nv:2 + nv + nf]]
    assert faces == [list(f) for f in catalog.dodecahedron().faces]

    assert main(["export", "--input", paths["dodeca"],
                 "--angles", paths["a25"], "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["normals"]) == 12


def test_realize_infeasible(paths, capsys):
    bad = str(paths["dir"] / "bad_angles.json")
    ap = catalog.alternately_truncated_cube()
    open(bad, "w").write(angles.to_json(
        angles.AngleAssignment.uniform(ap.edge_count, Fraction(2, 5))))
    assert main(["realize", "--input", paths["atc"],
                 "--angles", bad]) == 1
    assert json.loads(capsys.readouterr().out)["error"] == "InfeasibleAngles"


def test_bad_tolerance(paths):
    assert main(["validate", "--input", paths["dodeca"],
                 "--tolerance", "-1"]) == 2


def test_deterministic_output(paths, capsys):
    main(["feasible", "--input", paths["dodeca"]])
    first = capsys.readouterr().out
    main(["feasible", "--input", paths["dodeca"]])
    assert capsys.readouterr().out == first
