import json
import subprocess
import sys

import numpy as np
import pytest

from covha.cli import main
from covha.funcspace import GroupFunction
from covha.groups import cyclic, dihedral, subgroup_closure, symmetric, whole_group
from covha.verify import REGISTRY, run_verification


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


# -- verification runner -----------------------------------------------------


def test_registry_ids_appear_once():
    g = cyclic(4)
    r = run_verification(g, [subgroup_closure(g, [2])], samples=10)
    assert list(r.entries) == list(REGISTRY)
    d = r.as_dict()
    assert set(d["entries"]) == set(REGISTRY)
    assert d["seed"] == 42 and d["samples"] == 10
    assert all("seconds" not in e for e in d["entries"].values())


def test_report_reproducible_and_parallel_safe():
    g = dihedral(4)
    h = subgroup_closure(g, [1])
    a = run_verification(g, [h], samples=10).as_dict()
    b = run_verification(g, [h], samples=10).as_dict()
    c = run_verification(g, [h], samples=10, jobs=4).as_dict()
    assert json.dumps(a) == json.dumps(b) == json.dumps(c)
    d = run_verification(g, [h], samples=10, seed=7).as_dict()
    assert d["seed"] == 7 and json.dumps(d) != json.dumps(a)


def test_verify_examples():
    g = cyclic(4)
    r = run_verification(g, [subgroup_closure(g, [2])])
    assert r.passed and len(r.contexts) == 2
    g = dihedral(4)
    r = run_verification(g, [subgroup_closure(g, [g.element_by_label("rot")])])
    assert r.passed and len(r.contexts) == 4
    s3 = symmetric(3)
    a3 = subgroup_closure(s3, [s3.element_by_label("120")])
    r = run_verification(s3, [a3], ps=[1.0])
    assert r.passed
    e = r.entries["quotient.isometry"]
    assert max(c["value"] for c in e.cases) <= 1e-6


def test_skipped_resolution_for_nonabelian():
    s3 = symmetric(3)
    r = run_verification(s3, [whole_group(s3)], samples=5, ps=[2.0])
    e = r.as_dict()["entries"]["resolution.abelian"]
    assert e["passed"] and e["skipped"] == 1


def test_failures_reported(monkeypatch):
    from covha import verify

    g = cyclic(4)
    h = subgroup_closure(g, [2])
    real = verify.cov.idempotence_check

    def broken(ctx, tol=1e-12):
        r = real(ctx, tol)
        r.value = 1.0
        return r

    monkeypatch.setattr(verify.cov, "idempotence_check", broken)
    r = run_verification(g, [h], samples=5, ps=[2.0])
    assert not r.passed and r.failures() == ["idempotent"]


# -- command line ------------------------------------------------------------


def test_group_json_spec(capsys):
    code, out, _ = run(capsys, "group", "--spec", '{"kind":"cyclic","n":4}')
    assert code == 0 and out["order"] == 4


def test_group_short_spec_with_subgroup(capsys):
    code, out, _ = run(capsys, "group", "--spec", "dihedral", "4", "--subgroup-gens", "rot")
    assert code == 0
    sub = out["subgroup"]
    assert sub["order"] == 4 and sub["index"] == 2 and sub["normal"]
    assert sub["cosets"] == [["e", "r", "r2", "r3"], ["s", "rs", "r2s", "r3s"]]


def test_group_list_subgroups(capsys):
    code, out, _ = run(capsys, "group", "--spec", "S3", "--list-subgroups")
    assert code == 0 and [s["order"] for s in out["cyclic_subgroups"]] == [1, 2, 2, 2, 3]


@pytest.mark.parametrize(
    "argv",
    [
        ["group", "--spec", '{"kind":"cyclic"'],
        ["group", "--spec", "nonsense"],
        ["group", "--spec", "Z4", "--subgroup", "0,1"],
        ["group", "--spec", "Z4", "--subgroup-gens", "9"],
        ["characters", "--spec", "Z4", "--subgroup", "0,2", "--subgroup-gens", "2"],
        ["apply", "--spec", "Z4", "--fn", "delta:0", "--char", "7"],
        ["apply", "--spec", "Z4", "--char", "0"],
        ["apply", "--spec", "Z4", "--fn", "/no/such/file.json"],
        ["apply", "--spec", "Z4", "--fn", "{bad"],
        ["verify", "--spec", "Z4", "--samples", "0"],
        ["verify", "--spec", "Z4", "--char", "x"],
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--spec", "Z4", "--p", "0.5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_order_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("COVHA_MAX_ORDER", "8")
    code, _, err = run(capsys, "group", "--spec", "S4")
    assert code == 2 and "cap" in err
    monkeypatch.setenv("COVHA_MAX_ORDER", "100")
    code, out, _ = run(capsys, "group", "--spec", "Z80")
    assert code == 0 and out["order"] == 80


@pytest.mark.parametrize(
    "argv, count",
    [
        (["--spec", "Z4", "--subgroup", "0,2"], 2),
        (["--spec", "q8"], 4),
        (["--spec", "symmetric", "4"], 2),
    ],
)
def test_characters_counts(capsys, argv, count):
    code, out, _ = run(capsys, "characters", *argv)
    assert code == 0 and out["count"] == count == len(out["characters"])
    assert out["characters"][0]["exponents"] == [0] * len(out["subgroup"])


def test_characters_deterministic(capsys):
    _, a, _ = run(capsys, "characters", "--spec", "D4")
    _, b, _ = run(capsys, "characters", "--spec", "D4")
    assert a == b
    assert [c["label"] for c in a["characters"]][0].startswith("xi[0 0")


def test_apply_delta(capsys, tmp_path):
    out_fn = tmp_path / "tf.json"
    code, out, _ = run(capsys, "apply", "--spec", "Z4", "--subgroup", "0,2", "--char", "1", "--fn", "delta:0", "--write", str(out_fn))
    assert code == 0 and out["p"] == 2.0
    vals = np.array([complex(*v) for v in out["values"]])
    assert np.allclose(vals, [0.5, 0, -0.5, 0], atol=1e-15)
    assert out["covariance_residual"] == 0.0
    assert out["norm_f"] == 1.0 and out["norm_Tf"] == pytest.approx(np.sqrt(0.5))
    back = GroupFunction.load(out_fn)
    assert np.allclose(back.values, vals)


def test_apply_covariant_input_unchanged(capsys, tmp_path):
    g = cyclic(4)
    f = GroupFunction(g, [0.5, 1j, -0.5, -1j])
    path = tmp_path / "f.json"
    f.save(path, {"kind": "cyclic", "n": 4})
    code, out, _ = run(capsys, "apply", "--spec", "Z4", "--subgroup", "0,2", "--char", "1", "--fn", str(path), "--p", "3")
    assert code == 0 and out["covariance_residual"] == 0.0
    assert np.allclose([complex(*v) for v in out["values"]], f.values, atol=0)
    assert out["norm_f"] == out["norm_Tf"]


def test_apply_rejects_other_group(capsys, tmp_path):
    path = tmp_path / "f.json"
    GroupFunction.zeros(cyclic(6)).save(path, {"kind": "cyclic", "n": 6})
    code, _, err = run(capsys, "apply", "--spec", "Z4", "--fn", str(path))
    assert code == 2 and "different group" in err


def test_group_spec_from_file(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"kind": "dihedral", "n": 3}))
    code, out, _ = run(capsys, "group", "--group", str(path))
    assert code == 0 and out["order"] == 6


@pytest.mark.parametrize("p", ["1", "1.5", "2", "3"])
def test_quotient_norm_cli(capsys, p):
    code, out, _ = run(
        capsys, "quotient-norm", "--spec", "dihedral", "4", "--subgroup-gens", "r", "--char", "2", "--fn", "delta:s", "--p", p
    )
    assert code == 0 and out["converged"]
    assert out["gap"] <= out["tolerance"]
    assert set(out) >= {"value", "norm_Tf", "gap", "iterations"}


def test_verify_cli(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--spec", "Z4", "--subgroup", "0,2", "--samples", "20")
    assert code == 0 and out["passed"] and out["p"] == [1.0, 1.5, 2.0, 3.0]
    assert set(out["entries"]) == set(REGISTRY)
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--spec", "S3", "--subgroup-gens", "120", "--p", "1", "--samples", "10", "--out", str(report), "--timing")
    assert code == 0 and out is None
    data = json.loads(report.read_text())
    assert data["passed"] and "seconds" in data["entries"]["idempotent"]
    assert data["entries"]["quotient.isometry"]["value"] <= 1e-6


def test_verify_cli_failure_exit_1(capsys, monkeypatch):
    from covha import verify

    real = verify.cov.left_ideal_check

    def broken(*a, **k):
        r = real(*a, **k)
        r.value = 1.0
        return r

    monkeypatch.setattr(verify.cov, "left_ideal_check", broken)
    code, out, err = run(capsys, "verify", "--spec", "Z4", "--samples", "5", "--p", "2")
    assert code == 1 and not out["passed"] and "left_ideal" in err


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "covha.cli", "characters", "--spec", "Z4", "--subgroup", "0,2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["count"] == 2
    proc = subprocess.run(
        [sys.executable, "-m", "covha.cli", "group", "--spec", "{oops"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 2
