import json
import subprocess
import sys
from pathlib import Path

import pytest

from ppreflect.cli import COMMANDS, main

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
FILES = sorted(CORPUS.glob("*.cat"))
EXIT = {"pass": 0, "fail": 1, "unknown": 2}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def argv_for(command, path):
    extra = []
    if path.name == "pairs.cat" and command == "normalize":
        extra = ["snd(pair(O1.a, O1.b))"]
    elif path.name == "pairs.cat" and command == "equal":
        extra = ["fst(pair(O1.a, O1.b))", "O1.a"]
    elif command in ("normalize", "equal"):
        return None
    return [command, path, *extra]


CASES = [(c, p) for c in COMMANDS for p in FILES if argv_for(c, p) is not None]


@pytest.mark.parametrize("command,path", CASES, ids=[f"{c}-{p.stem}" for c, p in CASES])
def test_exit_code_matches_verdict_and_output_is_stable(capsys, command, path):
    argv = argv_for(command, path) + ["--format", "structured", "--seed", "3"]
    code, out, err = run(capsys, *argv)
    if code == 64:
        assert out == "" and err.startswith("ppreflect:")
        return
    doc = json.loads(out)
    assert EXIT[doc["verdict"]] == code
    assert all(r["verdict"] != "fail" or r["witness"] is not None for r in doc["records"])
    assert [r["check"] for r in doc["records"]] == sorted(r["check"] for r in doc["records"])
    code2, out2, _ = run(capsys, *argv)
    assert (code2, out2) == (code, out)


def test_equal_example(capsys):
    code, out, _ = run(capsys, "equal", CORPUS / "pairs.cat", "fst(pair(O1.a, O1.b))", "O1.a", "--format", "structured")
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert rec["detail"]["result"] == "equal"
    assert rec["detail"]["normal_forms"] == ["O1.a", "O1.a"]


def test_distinct_exits_one_with_separator(capsys):
    code, out, _ = run(capsys, "equal", CORPUS / "pairs.cat", "O1.a", "O1.b", "--format", "structured")
    assert code == 1
    rec = json.loads(out)["records"][0]
    assert rec["witness"]["values"][0] != rec["witness"]["values"][1]


def test_counterexample_passes_on_delta(capsys):
    code, out, _ = run(capsys, "counterexample", CORPUS / "delta.cat")
    assert code == 0
    assert "candidate.0" in out and "candidate.1" in out


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", str(CORPUS / "delta.cat")])
    assert exc.value.code == 64
    assert run(capsys, "validate", tmp_path / "missing.cat")[0] == 64
    code, _, err = run(capsys, "equal", CORPUS / "pairs.cat", "fst(", "O1.a")
    assert code == 64 and "cannot read term" in err
    code, _, err = run(capsys, "equal", CORPUS / "pairs.cat", "O2.aa", "O1.a")
    assert code == 64
    code, _, _ = run(capsys, "validate", CORPUS / "delta.cat", "--budget-size", "0")
    assert code == 0  # validate ignores budgets


def test_parse_error_is_positioned(capsys, tmp_path):
    bad = tmp_path / "bad.cat"
    bad.write_text("category C {\n  objects: X;\n  morphisms:\n    f : X -> ;\n}\n")
    code, _, err = run(capsys, "validate", bad)
    assert code == 64
    assert err.startswith(f"{bad}:4:14:")


def test_invalid_category_fails(capsys, tmp_path):
    src = (CORPUS / "pairs.cat").read_text()
    bad = tmp_path / "broken.cat"
    bad.write_text(src.replace("diag . fst = c1;", "diag . fst = c2;"))
    code, out, _ = run(capsys, "validate", bad)
    assert code == 1
    assert "NonAssociative" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ppreflect", "validate", str(CORPUS / "delta.cat")],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("== validate")
