"""Acceptance gate: runs the built-in suite through the CLI and reports one line per criterion.

The suite is run once with ``--jobs 1``; every criterion selects its rows from
that run. Criterion 12 reruns ``sample`` and ``check`` with more jobs and
compares bytes.
"""
import csv
import io
import math

import numpy as np
import pytest

from genrmt import densities as D
from genrmt import verify as V
from genrmt.cli import main

SEED = 20240611


@pytest.fixture(scope="module")
def suite_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acc") / "default_j1.csv"
    code = main(["check", "--suite", "default", "--seed", str(SEED), "--jobs", "1", "--out", str(out)])
    text = out.read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    suite = V.default_suite()
    assert [r["name"] for r in rows] == [s.name for s in suite]
    return {"code": code, "text": text, "pairs": list(zip(suite, rows))}


def _select(run, pred):
    return [(s, r) for s, r in run["pairs"] if pred(s)]


def _report(capsys, number, label, picked, extra_ok=True, note=""):
    ok = bool(picked) and all(r["pass"] == "true" for _, r in picked) and extra_ok
    failed = [r["name"] for _, r in picked if r["pass"] != "true"]
    detail = f"{sum(r['pass'] == 'true' for _, r in picked)}/{len(picked)} checks"
    if note:
        detail += f"; {note}"
    if failed:
        detail += f"; failing: {', '.join(failed[:5])}"
    with capsys.disabled():
        print(f"\nACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'}  {label} ({detail})")
    assert ok, detail


def _pw(kinds, family=None):
    def pred(s):
        e = s.ensemble
        return (
            s.kind == "pointwise_equality"
            and e.kind in kinds
            and (family is None or e.params.family == family)
        )

    return pred


def _mc(kind, family=None):
    return lambda s: s.kind == "mc_vs_quad" and s.ensemble.kind == kind and (family is None or s.ensemble.params.family == family)


def test_criterion_01_nonlinear_dual_form(suite_run, capsys):
    picked = _select(suite_run, _pw(("nonlinear_noncompact",), "gl"))
    betas_ns = {(s.ensemble.params.beta, s.ensemble.params.n) for s, _ in picked}
    full = betas_ns >= {(b, n) for b in (1, 2, 4) for n in (2, 3, 5)}
    tight = all(s.tolerance.rel <= 1e-10 and s.num_points >= 1000 for s, _ in picked)
    _report(capsys, 1, "exp-chart gl density vs root engine, rel < 1e-10", picked, full and tight)


def test_criterion_02_bc_dual_forms(suite_run, capsys):
    picked = _select(suite_run, _pw(("nonlinear_noncompact", "compact"), "indefinite"))
    grid = {(s.ensemble.kind, s.ensemble.params.m, s.ensemble.params.n, s.ensemble.params.beta) for s, _ in picked}
    want = {(k, m, n, b) for k in ("nonlinear_noncompact", "compact") for m, n in ((1, 1), (2, 1), (3, 2)) for b in (1, 2, 4)}
    _report(capsys, 2, "cosh-chart and Jacobi closed forms vs BC engine, rel < 1e-10", picked, grid >= want)


def test_criterion_03_circular_dual_form(suite_run, capsys):
    picked = _select(suite_run, _pw(("compact",), "gl"))
    grid = {(s.ensemble.params.n, s.ensemble.params.beta) for s, _ in picked}
    want = {(n, b) for n in range(1, 6) for b in (1, 2, 4)}
    _report(capsys, 3, "circular closed form vs compact engine, n <= 5, rel < 1e-10", picked, grid >= want)


def test_criterion_04_group_and_algebra_closed_forms(suite_run, capsys):
    kinds = ("group_compact", "algebra_compact", "group_complex", "algebra_complex")
    picked = _select(suite_run, _pw(kinds))
    seen = {(s.ensemble.kind, s.ensemble.params.group) for s, _ in picked}
    groups = {"group_compact": ("u", "so_odd", "sp", "so_even"), "algebra_compact": ("u", "so_odd", "sp", "so_even"),
              "group_complex": ("sl", "sp", "so_even", "so_odd"), "algebra_complex": ("sl", "sp", "so_even", "so_odd")}
    want = {(k, g) for k, gs in groups.items() for g in gs}
    _report(capsys, 4, "compact and complex closed forms vs engines, rank <= 3", picked, seen >= want)


def test_criterion_05_sl2r_values(suite_run, capsys):
    picked = _select(suite_run, _pw(D.SL2R_KINDS))
    rng = np.random.default_rng(SEED)
    x = rng.uniform(0.2, 2.0, 100)
    direct = {
        "sl2r_alg1": 4 * x**2,
        "sl2r_alg2": 4 * x**2,
        "sl2r_grp1": (x - 1 / x) ** 2,
        "sl2r_grp2": 4 * np.sin(x) ** 2,
    }
    worst = max(float(np.max(np.abs(np.exp(D.log_J_sl2r(k, x[:, None])) / v - 1))) for k, v in direct.items())
    _report(capsys, 5, "SL(2,R) closed forms 4x^2, 4y^2, (a-1/a)^2, 4 sin^2 y", picked, worst <= 1e-15 and len(picked) == 4,
            f"literal max rel diff {worst:.2g}")


def test_criterion_06_gaussian_mc(suite_run, capsys):
    picked = _select(suite_run, _mc("linear", "gl"))
    _report(capsys, 6, "GOE/GUE/GSE n=2,3 matrix MC vs quadrature", picked, len(picked) == 18)


def test_criterion_07_circular_mc(suite_run, capsys):
    picked = _select(suite_run, _mc("compact", "gl"))
    refs = [s for s, _ in picked if s.reference == 1.0]
    _report(capsys, 7, "COE/CUE/CSE n=2,3 MC vs quadrature, CUE |tr U|^2 = 1", picked, len(picked) == 12 and len(refs) == 2)


def test_criterion_08_symspace_mc(suite_run, capsys):
    picked = _select(suite_run, _mc("sym_space_compact_delta"))
    _report(capsys, 8, "Grassmannian pushforward MC vs sine-density quadrature", picked, len(picked) == 2)


def test_criterion_09_chiral_mc(suite_run, capsys):
    picked = _select(suite_run, _mc("linear", "indefinite"))
    _report(capsys, 9, "chiral beta=1,2 MC vs quadrature", picked, len(picked) == 4)


def test_criterion_10_algebra_mc(suite_run, capsys):
    picked = _select(suite_run, _mc("algebra_compact"))
    rows = {r["name"]: r for _, r in suite_run["pairs"]}
    u2, gue = rows["algebra_u2_sum_sq"], rows["gue_n2_sum_sq"]
    same_mc = u2["lhs"] == gue["lhs"] and u2["stderr"] == gue["stderr"]
    same_quad = math.isclose(float(u2["rhs"]), float(gue["rhs"]), rel_tol=1e-12)
    _report(capsys, 10, "so(4) and u(2) algebra MC vs quadrature, u(2) equals GUE", picked, len(picked) == 2 and same_mc and same_quad,
            f"u(2) lhs {u2['lhs']} vs GUE lhs {gue['lhs']}")


def test_criterion_11_invariance_walls_structure(suite_run, capsys):
    picked = _select(suite_run, lambda s: s.kind in ("invariance", "wall_vanishing", "structure"))
    kinds = {s.ensemble.kind for s, _ in picked if s.kind == "invariance"}
    weyl_ok = all(s.tolerance.rel <= 1e-12 and s.num_points >= 1000 for s, _ in picked if s.kind == "invariance")
    quaternion = [s for s, _ in picked if s.kind == "structure" and s.ensemble.params.beta == 4]
    _report(capsys, 11, "Weyl invariance, wall vanishing, structure and beta=4 pairing", picked,
            kinds == set(D.KINDS) and weyl_ok and len(quaternion) > 0)


def test_criterion_12_determinism_across_jobs(suite_run, capsys, tmp_path):
    check4 = tmp_path / "default_j4.csv"
    main(["check", "--suite", "default", "--seed", str(SEED), "--jobs", "4", "--out", str(check4)])
    same_check = check4.read_text() == suite_run["text"]
    samples = {}
    for jobs in ("1", "3"):
        path = tmp_path / f"sample_j{jobs}.csv"
        code = main(["sample", "--kind", "gaussian", "--beta", "4", "--n", "3", "--count", "30000",
                     "--seed", str(SEED), "--jobs", jobs, "--out", str(path)])
        assert code == 0
        samples[jobs] = path.read_bytes()
    same_sample = samples["1"] == samples["3"]
    picked = [(None, {"name": "check", "pass": str(same_check).lower()}), (None, {"name": "sample", "pass": str(same_sample).lower()})]
    _report(capsys, 12, "check and sample byte-identical for --jobs 1 vs 3/4", picked)
