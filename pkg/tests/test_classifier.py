import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chm.classifier import (
    Cell,
    ClassifyOptions,
    _pack_quads,
    _unpack_quad,
    affine_normal_forms,
    classify,
    conjecture_scan,
    enumerate_blocks,
    format_conjecture_scan,
    index_maps,
    orbit_representatives,
    report,
    resolve_cells,
    tally,
    verify_store,
)
from chm.decompositions import Decomposition
from chm.equivalence import ClassStore
from chm.hadamard import StructureParams

P5_EXTENDED_CSV = """\
p,decomp,L111-tt,L111-ti,L111-it,L111-ii,L100-tt,L100-ti,L100-it,L100-ii,L010-tt,L010-ti,L010-it,L010-ii,L110-tt,L110-ti,L110-it,L110-ii,#
5,[±1,1,3,3],1,2,1,1,0,0,1,0,0,0,0,0,0,0,0,1,
,[±1,3,1,3],1,1,2,1,0,0,0,0,0,1,0,0,0,0,0,1,
,[±1,3,3,1],1,1,1,2,0,0,1,0,0,1,0,0,0,0,0,0,
,non-equiv,1,2,2,2,0,0,1,0,0,1,0,0,0,0,0,1,3
"""

P7_DEFAULT_CSV = """\
p,decomp,L111-tt,L111-ti,#
7,[±1,1,1,5],2,3,
,[±1,3,3,3],1,3,
,non-equiv,3,6,6
"""


@pytest.fixture(scope="module")
def default5():
    return classify(5)


# ---------------------------------------------------------------------------
# building blocks


@pytest.mark.parametrize("p,s", [(5, 1), (5, -3), (7, 5), (11, 3), (13, -1)])
def test_enumerate_blocks(p, s):
    R = enumerate_blocks(s, p)
    assert len(R) == comb(p, (p + s) // 2)
    assert np.all(R.sum(axis=1) == s)
    assert len({r.tobytes() for r in R}) == len(R)


@pytest.mark.parametrize("p,s", [(5, 2), (5, 5), (7, -7), (7, 9)])
def test_enumerate_blocks_rejects_bad_sums(p, s):
    with pytest.raises(ValueError):
        enumerate_blocks(s, p)


def test_index_maps_are_permutations():
    for group, size in (("shift", 7), ("affine", 42)):
        M = index_maps(7, group)
        assert M.shape == (size, 7)
        assert all(sorted(m) == list(range(7)) for m in M)


@pytest.mark.parametrize("group", ["shift", "affine"])
def test_orbit_representatives_cover_all_rows(group):
    R = enumerate_blocks(1, 7)
    reps = orbit_representatives(R, group)
    maps = index_maps(7, group)
    reached = {R[r][m].tobytes() for r in reps for m in maps}
    assert reached == {r.tobytes() for r in R}
    assert len(orbit_representatives(R, "none")) == len(R)
    if group == "shift":
        assert len(reps) == len(R) // 7


def test_resolve_cells():
    assert [c.name for c in resolve_cells("default", 7)] == ["L111-tt", "L111-ti"]
    assert [c.name for c in resolve_cells("default", 13)] == ["L111-tt", "L111-ti", "L110-tt", "L110-ti", "L110-ii"]
    assert len(resolve_cells("extended", 5)) == 16
    assert [c.name for c in resolve_cells("L110-ii, L100-it", 5)] == ["L110-ii", "L100-it"]
    with pytest.raises(ValueError):
        resolve_cells(",", 5)
    with pytest.raises(ValueError):
        resolve_cells("L112-tt", 5)


def test_110_cells_apply_to_admissible_decompositions_only():
    cell = Cell(StructureParams.parse("L110-ii"))
    assert cell.applies(13, Decomposition(1, 1, 5, 5))
    assert cell.applies(13, Decomposition(1, 5, 1, 5))
    assert not cell.applies(13, Decomposition(1, 5, 5, 1))
    assert not cell.applies(7, Decomposition(1, 1, 1, 5))
    assert Cell(StructureParams.parse("L111-tt")).applies(13, Decomposition(1, 5, 1, 5))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([5, 7, 11]))
def test_affine_normal_form_is_invariant(seed, p):
    rng = np.random.default_rng(seed)
    q = rng.choice(np.array([-1, 1], dtype=np.int8), size=(1, 4, p))
    a, s = int(rng.integers(1, p)), int(rng.integers(0, p))
    m = (a * np.arange(p) + s) % p
    assert affine_normal_forms(q)[0] == affine_normal_forms(q[:, :, m])[0]


def test_pack_round_trip():
    q = np.random.default_rng(0).choice(np.array([-1, 1], dtype=np.int8), size=(3, 4, 11))
    blobs = _pack_quads(q)
    for b, x in zip(blobs, q):
        assert np.array_equal(_unpack_quad(bytes.fromhex(b), 11), x)
    assert _pack_quads(q[:0]) == []
    assert len(affine_normal_forms(q[:0])) == 0


# ---------------------------------------------------------------------------
# full runs


def test_p5_default(default5):
    t = tally(default5.store, 5)
    assert t["total"] == 3
    assert t["non_equiv"] == {"L111-tt": 1, "L111-ti": 2, "L110-ii": 1}
    assert default5.complete


def test_p5_extended_table(extended5):
    assert report(extended5.store, 5, fmt="csv") == P5_EXTENDED_CSV


def test_p7_default_table(default7):
    assert report(default7.store, 7, fmt="csv") == P7_DEFAULT_CSV


def test_p7_extended_only_111_cells(extended7):
    t = tally(extended7.store, 7)
    assert t["total"] == 6
    assert all(c.startswith("L111") for c in t["non_equiv"])
    assert {k: v for k, v in t["cells"].items() if k[1] == "L111-tt"} == {
        ("[±1,1,1,5]", "L111-tt"): 2,
        ("[±1,3,3,3]", "L111-tt"): 1,
    }


def test_text_report_layout(default7):
    lines = report(default7.store, 7).splitlines()
    assert lines[0].split() == ["p", "decomp", "L111-tt", "L111-ti", "#"]
    assert lines[-1].split() == ["non-equiv", "3", "6", "6"]


def test_deterministic(default5):
    again = classify(5)
    assert again.store.lines() == default5.store.lines()


def test_no_prune_identical(default5):
    assert classify(5, ClassifyOptions(prune=False)).store.lines() == default5.store.lines()


def test_parallel_jobs_identical(default5):
    assert classify(5, ClassifyOptions(jobs=2)).store.lines() == default5.store.lines()


def test_exact_solver_identical(default5):
    assert classify(5, ClassifyOptions(solver="exact")).store.lines() == default5.store.lines()


@pytest.mark.parametrize("normalize", ["shift", "affine"])
@pytest.mark.parametrize("p", [5, 7])
def test_normalized_runs_find_the_same_classes(p, normalize, default5, default7):
    base = {5: default5, 7: default7}[p].store
    st_ = classify(p, ClassifyOptions(normalize=normalize)).store
    assert st_.keys() == base.keys()
    assert tally(st_, p) == tally(base, p)


def test_bad_options():
    with pytest.raises(ValueError):
        classify(5, ClassifyOptions(normalize="rotate"))
    with pytest.raises(ValueError):
        classify(5, ClassifyOptions(solver="fast"))
    with pytest.raises(ValueError):
        classify(9)


def test_decomposition_filter():
    r = classify(13, ClassifyOptions(cells="L111-tt", decompositions=[(1, 1, 1, 7)], stop_after=2))
    assert r.units_done == 2 and not r.complete


# ---------------------------------------------------------------------------
# checkpoints


def test_interrupted_run_resumes_to_the_same_store(tmp_path, default5):
    ck = tmp_path / "run.ckpt"
    part = classify(5, ClassifyOptions(checkpoint=str(ck), stop_after=23))
    assert not part.complete and part.units_done == 23
    # partial results only contain genuine classes
    assert set(part.store.keys()) <= set(default5.store.keys())
    assert verify_store(part.store) == []
    done = classify(5, ClassifyOptions(checkpoint=str(ck), resume=str(ck)))
    assert done.complete
    assert done.store.lines() == default5.store.lines()
    # resuming a finished checkpoint redoes nothing
    again = classify(5, ClassifyOptions(resume=str(ck)))
    assert again.store.lines() == default5.store.lines()


def test_resume_into_a_new_checkpoint(tmp_path, default5):
    a, b = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    classify(5, ClassifyOptions(checkpoint=str(a), stop_after=10))
    classify(5, ClassifyOptions(checkpoint=str(b), resume=str(a), stop_after=30))
    done = classify(5, ClassifyOptions(resume=str(b)))
    assert done.store.lines() == default5.store.lines()


def test_torn_checkpoint_line(tmp_path, default5):
    ck = tmp_path / "run.ckpt"
    classify(5, ClassifyOptions(checkpoint=str(ck), stop_after=15))
    text = ck.read_text()
    ck.write_text(text + '{"unit": [[1, 1, 3')
    done = classify(5, ClassifyOptions(checkpoint=str(ck), resume=str(ck)))
    assert done.store.lines() == default5.store.lines()
    for line in ck.read_text().splitlines():
        json.loads(line)


def test_checkpoint_header_mismatch(tmp_path):
    ck = tmp_path / "run.ckpt"
    classify(5, ClassifyOptions(checkpoint=str(ck), stop_after=1))
    with pytest.raises(ValueError):
        classify(5, ClassifyOptions(cells="extended", resume=str(ck)))


# ---------------------------------------------------------------------------
# verification and scans


def test_verify_passes(extended5, extended7):
    assert verify_store(extended5.store) == []
    assert verify_store(extended7.store) == []


def test_verify_empty_store():
    assert verify_store(ClassStore()) == []


def test_verify_reports_corrupted_row(tmp_path, default5):
    path = tmp_path / "s.jsonl"
    default5.store.save(path)
    lines = path.read_text().splitlines()
    k = next(i for i, l in enumerate(lines) if not l.startswith("#"))
    parts = lines[k].split()
    row = parts[6]
    parts[6] = ("-" if row[1] == "+" else "+").join([row[:1], row[2:]])
    lines[k] = "  ".join(parts)
    path.write_text("\n".join(lines) + "\n")
    failures = verify_store(ClassStore.load(path))
    assert failures and any("not Hadamard" in f for f in failures)


def test_conjecture_scan(extended5, default7):
    scan = conjecture_scan(extended5.store, 5)
    assert (scan["L110-tt"], scan["L110-ti"], scan["L110-ii new"]) == (0, 0, 1)
    assert "(b) L110-ii classes not met in any (1,1,1) cell: 1" in format_conjecture_scan(scan)
    scan7 = conjecture_scan(default7.store, 7)
    assert not scan7["applicable"]
    assert "vacuous" in format_conjecture_scan(scan7)


def test_conjecture_scan_flags_missing_cells():
    r = classify(5, ClassifyOptions(cells="L110-ii"))
    text = format_conjecture_scan(conjecture_scan(r.store, 5))
    assert "(a) not evaluated" in text and "(b) not evaluated" in text
