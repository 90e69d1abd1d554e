import subprocess
import sys

import numpy as np
import pytest

from chm.cli import EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main
from chm.equivalence import random_equivalent
from chm.hadamard import assemble, write_matrix

from conftest import DATA, occurrences


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_decomps(capsys):
    code, out, _ = run(["decomps", "13"], capsys)
    assert code == EXIT_OK
    assert out.splitlines() == ["1 1 1 7  64", "1 1 5 5  32", "1 5 1 5  32", "1 5 5 1  32", "3 3 3 5  64"]


@pytest.mark.parametrize("argv", [["decomps", "9"], ["decomps", "x"], ["classify", "1"], ["frobnicate"], []])
def test_invalid_input_exit_code(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == EXIT_INPUT


def test_classify_p5(tmp_path, capsys):
    out_path = tmp_path / "s.jsonl"
    code, out, err = run(["classify", "5", "--out", str(out_path)], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].split() == ["p", "decomp", "L111-tt", "L111-ti", "L110-tt", "L110-ti", "L110-ii", "#"]
    assert lines[4].split() == ["non-equiv", "1", "2", "0", "0", "1", "3"]
    assert "(a) classes in L110-tt: 0  in L110-ti: 0" in out
    assert "60/60 units" in out
    assert "W#" in err
    code, out, _ = run(["verify", str(out_path)], capsys)
    assert code == EXIT_OK and "3 classes" in out and "0 failures" in out
    code, out, _ = run(["report", str(out_path), "--csv"], capsys)
    assert out.splitlines()[-1] == ",non-equiv,1,2,0,0,1,3"


def test_classify_options(tmp_path, capsys):
    dump = tmp_path / "sys.txt"
    code, out, err = run(
        ["classify", "7", "--quiet", "--csv", "--affine-normalize", "--decomps", "1 3 3 3", "--dump-system", str(dump)],
        capsys,
    )
    assert code == EXIT_OK and err == ""
    assert ",non-equiv,1,3,3" in out
    text = dump.read_text()
    assert "# cell L111-tt" in text and "# cell L111-ti" in text


@pytest.mark.parametrize(
    "extra",
    [
        ["--shift-normalize", "--affine-normalize"],
        ["--jobs", "0"],
        ["--cells", "L999-tt"],
        ["--decomps", "1 2 3"],
        ["--resume", "/nonexistent/ckpt"],
        ["--solver", "magic"],
    ],
)
def test_classify_bad_options(extra, capsys):
    code, _, _ = run(["classify", "5", "--quiet"] + extra, capsys)
    assert code == EXIT_INPUT


def test_report_frozen_p11(capsys):
    code, out, _ = run(["report", str(DATA / "p11_default.jsonl")], capsys)
    assert code == EXIT_OK
    assert out.splitlines()[4].split() == ["non-equiv", "2", "63", "63"]
    assert "vacuous" in out


def test_verify_failure_exit_code(tmp_path, capsys):
    src = (DATA / "p11_default.jsonl").read_text().splitlines()
    k = next(i for i, l in enumerate(src) if not l.startswith("#"))
    parts = src[k].split()
    parts[7] = parts[7][::-1]
    src[k] = "  ".join(parts)
    path = tmp_path / "bad.jsonl"
    path.write_text("\n".join(src) + "\n")
    code, out, _ = run(["verify", str(path)], capsys)
    assert code == EXIT_VERIFY
    assert "FAIL" in out


def test_missing_store(capsys):
    code, _, err = run(["verify", "/nonexistent.jsonl"], capsys)
    assert code == EXIT_INPUT and "no such file" in err


def test_equiv_and_key(tmp_path, capsys, store11):
    occ = occurrences(store11)
    H = assemble(occ[0][0])
    other = next(assemble(q) for q, k in occ if k != occ[0][1])
    a, b, c = tmp_path / "a.mat", tmp_path / "b.mat", tmp_path / "c.mat"
    write_matrix(H, a)
    write_matrix(random_equivalent(H, np.random.default_rng(0)), b)
    write_matrix(other, c)
    code, out, _ = run(["equiv", str(a), str(b)], capsys)
    assert code == EXIT_OK and out.splitlines()[-1] == "equivalent"
    code, out, _ = run(["equiv", str(a), str(c)], capsys)
    assert code == EXIT_OK and out.splitlines()[-1] == "not equivalent"
    code, out, _ = run(["key", str(a)], capsys)
    assert out.strip() == occ[0][1].hex


def test_equiv_bad_files(tmp_path, capsys):
    a, b = tmp_path / "a.mat", tmp_path / "b.mat"
    write_matrix(np.array([[1, 1], [1, -1]]), a)
    write_matrix(np.ones((4, 4), dtype=int), b)
    assert run(["equiv", str(a), str(b)], capsys)[0] == EXIT_INPUT
    b.write_text("order 2\n+?\n++\n")
    assert run(["equiv", str(a), str(b)], capsys)[0] == EXIT_INPUT


def test_dump_system_command(capsys):
    code, out, _ = run(["dump-system", "--cell", "L111-ti", "++-+-", "+-+++", "+++-+", "1"], capsys)
    assert code == EXIT_OK and out.startswith("# cell L111-ti  p=5")
    assert run(["dump-system", "--cell", "L111-ti", "++-+-", "+-++", "+++-+", "1"], capsys)[0] == EXIT_INPUT
    assert run(["dump-system", "--cell", "X", "++-+-", "+-+++", "+++-+", "1"], capsys)[0] == EXIT_INPUT


def test_console_script_exit_code():
    r = subprocess.run([sys.executable, "-m", "chm.cli", "decomps", "4"], capture_output=True, text=True)
    assert r.returncode == EXIT_INPUT
    assert "error:" in r.stderr
