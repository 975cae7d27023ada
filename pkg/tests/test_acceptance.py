"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line; conftest prints them in the pytest
terminal summary.  Run ``python tests/test_acceptance.py`` to get the
lines without pytest.
"""

import itertools
import json
import os
import re
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from conftest import toy_spec, wide_spec  # noqa: E402
from oracles import gram_rank, hull_vertices, in_region, plus, profile_grid, random_pair  # noqa: E402
from sdof.analysis import (  # noqa: E402
    DEFAULT_SNR,
    achievable_rate_curve,
    adversarial_eve_search,
    converse_prelog,
    fit_prelog,
)
from sdof.channel import (  # noqa: E402
    channel_from_profile,
    observed_coordinates,
    reduce_to_parallel,
    save_channel,
    worst_case_eve_single,
    worst_case_eve_sum,
)
from sdof.cli import run  # noqa: E402
from sdof.linalg import RankProfile, gsvd  # noqa: E402
from sdof.region import (  # noqa: E402
    MUTUAL_PRIVACY,
    NO_PRIVACY,
    PENTAGON,
    build_region,
    classify_case,
    compare,
    enumerate_vertices,
)
from sdof.scheme import synthesize  # noqa: E402

RESULTS = []


def report(n, ok, text):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {n}: {text}"
    RESULTS.append(line)
    print(line)
    return ok


def _grid_with_ne(include_zero=True):
    for r1, r2, r0 in profile_grid(6, include_zero=include_zero):
        for n_e in range(5):
            yield RankProfile(r1, r2, r0), n_e


# 1 -----------------------------------------------------------------------------

def test_criterion_1_gsvd_property_suite():
    t0 = time.perf_counter()
    worst_res = worst_cs = 0.0
    rank_miss = []
    for i in range(200):
        rng = np.random.default_rng([1, i])
        h1, h2, built = random_pair(rng, max_dim=8)
        f = gsvd(h1, h2)
        worst_res = max(worst_res, *f.residuals(h1, h2))
        pr = f.profile
        gram = f.sigma1.conj().T @ f.sigma1 + f.sigma2.conj().T @ f.sigma2
        worst_cs = max(worst_cs, float(np.abs(gram - np.eye(pr.r0)).max()),
                       float(np.abs(f.s1**2 + f.s2**2 - 1).max(initial=0)))
        oracle = (gram_rank(h1), gram_rank(h2), gram_rank(np.vstack([h1, h2])))
        if (pr.r1, pr.r2, pr.r0) != oracle or oracle != built:
            rank_miss.append(i)
    dt = time.perf_counter() - t0
    ok = worst_res <= 1e-8 and worst_cs <= 1e-10 and not rank_miss and dt < 10
    report(1, ok, f"200 random pairs, max residual {worst_res:.1e}, CS error {worst_cs:.1e}, "
                  f"rank mismatches {len(rank_miss)}, {dt:.2f} s")
    assert ok


# 2 -----------------------------------------------------------------------------

def test_criterion_2_toy_fixture():
    spec = toy_spec()
    pc = reduce_to_parallel(spec)
    pr = pc.profile
    reg1 = build_region(pr, 1, NO_PRIVACY)
    reg2 = build_region(pr, 1, MUTUAL_PRIVACY)
    facets = sorted((c.coeffs, c.bound) for c in reg1.constraints)
    alloc = synthesize(pc, 1, (0, 1, 1))
    checks = {
        "profile": (pr.r1, pr.r2, pr.r0, pr.s) == (2, 2, 3, 1),
        "facets": facets == [((1, 0, 1), 1), ((1, 1, 0), 1), ((1, 1, 1), 2)],
        "vertex": (0, 1, 1) in enumerate_vertices(reg1).vertices,
        "regions equal": compare(reg1, reg2) == "equal",
        "case": alloc.case_id == "case1",
        "dims": (alloc.dims_a, alloc.dims_b, alloc.dims_c) == (1, 1, 1),
        "b_split": alloc.b_split == (0, 1, 0),
    }
    bad = [k for k, v in checks.items() if not v]
    ok = not bad
    report(2, ok, "fixture profile (2,2,3,1), facets, vertex (0,1,1), equal regions, Case 1 (1,1,1)/(0,1,0)"
           + (f"; failed {bad}" if bad else ""))
    assert ok


# 3 -----------------------------------------------------------------------------

def _lattice(pr, n_e, privacy):
    top = pr.r0 + 1
    return [p for p in itertools.product(range(top), repeat=3)
            if in_region(p, pr.r1, pr.r2, pr.r0, n_e, privacy)]


def test_criterion_3_region_oracle_equivalence():
    t0 = time.perf_counter()
    cases = mismatches = 0
    subset_fail, coincide_fail = [], []
    for pr, n_e in _grid_with_ne():
        slices = {}
        for privacy in (False, True):
            mode = MUTUAL_PRIVACY if privacy else NO_PRIVACY
            pts = _lattice(pr, n_e, privacy)
            vs = enumerate_vertices(build_region(pr, n_e, mode))
            cases += 1
            if set(vs.vertices) != hull_vertices(pts):
                mismatches += 1
            by_d0 = {}
            for p in pts:
                by_d0.setdefault(p[0], []).append((p[1], p[2]))
            for d0, poly in vs.fixed_d0_polygons.items():
                if set(poly) != hull_vertices(by_d0[d0]):
                    mismatches += 1
            slices[privacy] = {d0: set(v) for d0, v in by_d0.items()}
        if compare(build_region(pr, n_e, MUTUAL_PRIVACY), build_region(pr, n_e, NO_PRIVACY)) not in (
            "equal", "a_subset_b"
        ) or not all(slices[True][d0] <= slices[False].get(d0, set()) for d0 in slices[True]):
            subset_fail.append((pr, n_e))
        for d0 in slices[False]:
            same = slices[False][d0] == slices[True].get(d0)
            if same != (d0 + n_e >= pr.s):
                coincide_fail.append((pr, n_e, d0))
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and not subset_fail and not coincide_fail and dt < 30
    report(3, ok, f"{cases} regions vs lattice+hull oracle, {mismatches} mismatches, "
                  f"{len(subset_fail)} inclusion failures, {len(coincide_fail)} slice-coincidence failures, "
                  f"{dt:.2f} s")
    assert ok


# 4 -----------------------------------------------------------------------------

def test_criterion_4_corner_points():
    checked, missing = 0, []
    for pr, n_e in _grid_with_ne():
        reg = build_region(pr, n_e, NO_PRIVACY)
        polys = enumerate_vertices(reg).fixed_d0_polygons
        for d0, poly in polys.items():
            if classify_case(pr, n_e, d0) != PENTAGON:
                continue
            nep = n_e + d0
            checked += 1
            for corner in ((pr.r1 - nep, pr.r2 - pr.s), (pr.r1 - pr.s, pr.r2 - nep)):
                if corner not in poly:
                    missing.append((pr, n_e, d0, corner))
    ok = checked > 0 and not missing
    report(4, ok, f"{checked} pentagon slices, {len(missing)} missing corner points")
    assert ok


# 5 -----------------------------------------------------------------------------

def test_criterion_5_achievability_slopes():
    t0 = time.perf_counter()
    worst_msg = worst_re = 0.0
    for spec, target in ((toy_spec(), (0, 1, 1)), (wide_spec(), (0, 3, 1)), (wide_spec(), (0, 1, 3))):
        pc = reduce_to_parallel(spec)
        curves = achievable_rate_curve(synthesize(pc, spec.n_e, target), pc, DEFAULT_SNR)
        for k, d in zip(("R0", "R1", "R2"), target):
            worst_msg = max(worst_msg, abs(fit_prelog(curves.p_bar, curves.series(k)) - d))
        worst_re = max(worst_re, abs(fit_prelog(curves.p_bar, curves.RE) - spec.n_e))
    dt = time.perf_counter() - t0
    ok = worst_msg <= 0.05 and worst_re <= 0.02 and dt < 5
    report(5, ok, f"max message pre-log error {worst_msg:.4f}, RE error {worst_re:.4f}, {dt:.2f} s")
    assert ok


# 6 -----------------------------------------------------------------------------

def test_criterion_6_leakage_invariance():
    spread = err = 0.0
    for spec, target in ((toy_spec(), (0, 1, 1)), (wide_spec(), (0, 3, 1)), (wide_spec(n_e=2), (0, 2, 1))):
        pc = reduce_to_parallel(spec)
        alloc = synthesize(pc, spec.n_e, target)
        res = adversarial_eve_search(pc, alloc, trials=100, seed=0)
        spread = max(spread, res.spread)
        err = max(err, float(np.abs(res.prelogs - spec.n_e).max()))
    ok = spread <= 1e-9 and err <= 0.02
    report(6, ok, f"100 eavesdroppers per fixture, relative spread {spread:.1e}, "
                  f"max leakage pre-log error {err:.4f}")
    assert ok


# 7 -----------------------------------------------------------------------------

def test_criterion_7_converse():
    wrong = []
    n = 0
    for pr, n_e in _grid_with_ne():
        spec = channel_from_profile(pr, n_e, seed=pr.r1 * 100 + pr.r2 * 10 + pr.r0)
        got = (worst_case_eve_single(spec, 1).residual_rank,
               worst_case_eve_single(spec, 2).residual_rank,
               worst_case_eve_sum(spec).residual_rank)
        n += 1
        if got != (plus(pr.r1 - n_e), plus(pr.r2 - n_e), plus(pr.r0 - n_e)):
            wrong.append((pr, n_e, got))
    slope_err = 0.0
    for spec in (toy_spec(), wide_spec()):
        rep = converse_prelog(spec)
        slope_err = max(slope_err, max(abs(s - b) for s, b in zip(rep.slopes, rep.bounds)))
    ok = not wrong and slope_err <= 0.05
    report(7, ok, f"{n} grid channels, {len(wrong)} bound mismatches, fixture slope error {slope_err:.4f}")
    assert ok


# 8 -----------------------------------------------------------------------------

def test_criterion_8_privacy_disjointness():
    checked, overlaps = 0, []
    for r1, r2, r0 in profile_grid(6):
        pr = RankProfile(r1, r2, r0)
        pc = reduce_to_parallel(channel_from_profile(pr, 0, seed=r1 * 100 + r2 * 10 + r0))
        obs1, obs2 = observed_coordinates(pr, 1), observed_coordinates(pr, 2)
        for n_e in range(5):
            for target in _lattice(pr, n_e, True):
                scheme = synthesize(pc, n_e, target, MUTUAL_PRIVACY)
                for comp in scheme.components:
                    checked += 1
                    if comp.coords("A") & obs2 or comp.coords("C") & obs1:
                        overlaps.append((pr, n_e, target))
    ok = checked > 0 and not overlaps
    report(8, ok, f"{checked} privacy allocations, {len(overlaps)} overlapping codebooks")
    assert ok


# 9 -----------------------------------------------------------------------------

_STAMP = re.compile(r'^.*"?generated_at"?:.*$', re.MULTILINE)


def _strip(text):
    return _STAMP.sub("", text)


def test_criterion_9_cli_determinism(tmp_path):
    chan = tmp_path / "wide.json"
    save_channel(wide_spec(), chan)
    base = ["--input", str(chan)]
    cmds = [
        ["gsvd"] + base,
        ["region"] + base,
        ["region", "--privacy"] + base,
        ["scheme", "--target", "0,2,2"] + base,
        ["sweep", "--target", "0,3,1", "--trials", "20"] + base,
        ["certify", "--target", "0,1,3", "--trials", "20"] + base,
        ["converse"] + base,
        ["sweep", "--random", "4x3x3", "--seed", "9", "--target", "0,1,1", "--trials", "10"],
    ]
    diffs = []
    runs = 0
    for cmd in cmds:
        for fmt in ("json", "csv"):
            outs = []
            for k in range(2):
                out = tmp_path / f"o{k}"
                code = run(cmd + ["--format", fmt, "--out", str(out)])
                outs.append((code, _strip(out.read_text())))
                runs += 1
            if outs[0] != outs[1] or outs[0][0] != 0:
                diffs.append((cmd[0], fmt))
    # separate processes too, so nothing hides in interpreter state
    proc = [
        subprocess.run([sys.executable, "-m", "sdof", "certify", "--target", "0,3,1", "--trials", "10",
                        "--format", "json"] + base, capture_output=True, text=True)
        for _ in range(2)
    ]
    runs += 2
    if _strip(proc[0].stdout) != _strip(proc[1].stdout) or proc[0].returncode != 0:
        diffs.append(("subprocess", "json"))
    json.loads(proc[0].stdout)
    ok = not diffs
    report(9, ok, f"{runs} CLI runs in pairs, {len(diffs)} byte differences after removing the timestamp")
    assert ok


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            if "tmp_path" in t.__code__.co_varnames[: t.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    t(Path(d))
            else:
                t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
