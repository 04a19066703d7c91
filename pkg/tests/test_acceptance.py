"""Acceptance suite: each test prints one PASS/FAIL line and asserts at the stated tolerance.

Runs from criteria 1-4 are cached so criterion 5 can reuse their gaps.
"""

import functools
import math
import time

import numpy as np
import pytest

from deltaforge.catalog import FAMILIES, build_catalog, closed_form_lambda, closed_form_metric
from deltaforge.cli import default_partitions, main
from deltaforge.curvature import (christoffels_from_metric, codazzi_residual, curvature_data,
                                  gauss_residual, metric_match_residual)
from deltaforge.delta import (DeltaOptions, admissible_partitions, chen_rhs, delta_estimate,
                              delta_oracle, equality_structure_check, ideality_check,
                              validate_partition)
from deltaforge.extrinsic import extrinsic_data, shape_spectrum
from deltaforge.immersion import ImmersionSpec
from deltaforge.jets import jet2_hyperdual
from deltaforge.report import verify_point
from deltaforge.spaceform import sphere
from randspec import random_graph_spec
from test_extrinsic import unit_sphere_spec

GAP_TOL = 1e-6
LAMBDA_REL = 1e-9
SAFETY = -1e-9


@pytest.fixture
def verdict(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def _curv(spec, x):
    return curvature_data(extrinsic_data(spec.sf, jet2_hyperdual(spec, x)))


def _top_eig(spec, x):
    ext = extrinsic_data(spec.sf, jet2_hyperdual(spec, x))
    return float(np.max(np.abs(shape_spectrum(ext).eigenvalues)))


def _rel(num, ref):
    return abs(num - abs(ref)) / abs(ref)


def _interior(spec, count, rng):
    lo = np.array([a for a, _ in spec.domain])
    hi = np.array([b for _, b in spec.domain])
    pad = 0.05 * (hi - lo)
    return rng.uniform(lo + pad, hi - pad, size=(count, spec.n))


# -- criterion 1 ------------------------------------------------------------------------

@functools.cache
def _run_c1():
    t0 = time.perf_counter()
    gaps, lam_err, fails = [], 0.0, []
    for n in (3, 4, 5):
        parts = default_partitions(n)
        for a in (0.3, 0.6, 0.9):
            spec = build_catalog("EUCLID_T1", n, {"a": a})
            pts = _interior(spec, 25, np.random.default_rng([n, int(a * 10)]))
            pts[:, 0] = np.linspace(1.0, 3.0, 25)
            for x in pts:
                lam = closed_form_lambda("EUCLID_T1", n, {"a": a}, x)
                lam_err = max(lam_err, _rel(_top_eig(spec, x), lam))
                for part in parts:
                    rep = ideality_check(spec, x, part)
                    gaps.append(rep.gap)
                    if not rep.gap <= GAP_TOL:
                        fails.append((n, a, x.tolist(), part, rep.gap))
    return gaps, lam_err, fails, time.perf_counter() - t0


def test_criterion_1_euclid_t1_ideality(verdict):
    gaps, lam_err, fails, elapsed = _run_c1()
    spec = build_catalog("EUCLID_T1", 4, {"a": 0.6})
    x = np.array([2.0, 0.1, -0.4, 0.3])
    c = _curv(spec, x)
    rep = delta_estimate(c, (2, 2))
    oracle_delta = c.tau - delta_oracle(c, (2, 2))
    spot = (abs(closed_form_lambda("EUCLID_T1", 4, {"a": 0.6}, x) - 2 / 3) <= 1e-15
            and abs(_top_eig(spec, x) - 2 / 3) <= 1e-9
            and abs(rep.delta_lower - 4 / 9) <= GAP_TOL
            and abs(oracle_delta - 4 / 9) <= GAP_TOL)
    ok = not fails and lam_err <= LAMBDA_REL and spot
    verdict(1, ok, f"checks={len(gaps)} max_gap={max(gaps):.2e} lambda_rel={lam_err:.2e} "
                   f"spot={spot} delta(2,2)={rep.delta_lower:.15g} "
                   f"time={elapsed:.1f}s (target 60s)")


# -- criterion 2 ------------------------------------------------------------------------

@functools.cache
def _run_c2():
    t0 = time.perf_counter()
    recs = []
    for a in (0.3, 0.6, 0.9):
        spec = build_catalog("SPHERE_T2", 4, {"a": a})
        for x in _interior(spec, 25, np.random.default_rng([2, int(a * 10)])):
            recs.append(verify_point(spec, x, (2, 2)))
    return recs, time.perf_counter() - t0


def _sphere_t2_regular_chart(a):
    # same submanifold as SPHERE_T2 n=4 but regular at the equator x1 = pi/2
    w = f"{a}*cos(x1)*cos(x2)"
    coords = (f"sqrt(1-{a}^2)*cos(x1)*cos(x2)", "sin(x1)", "cos(x1)*sin(x2)",
              f"{w}*sin(x3)", f"{w}*cos(x3)*sin(x4)", f"{w}*cos(x3)*cos(x4)")
    return ImmersionSpec(sphere(5), 4, coords, {}, ((-1, 1),) * 4)


def test_criterion_2_sphere_t2_ideality(verdict):
    recs, elapsed = _run_c2()
    errors = [r for r in recs if "error" in r]
    quad = max(r["residuals"]["quadric"] for r in recs if "error" not in r)
    lam = max(r["lambda_rel_error"] for r in recs if "error" not in r)
    gap = max(r["gap"] for r in recs if "error" not in r)
    spec = _sphere_t2_regular_chart(0.6)
    rep = ideality_check(spec, np.zeros(4), (2, 2))
    spot_lam = _top_eig(spec, np.zeros(4))
    spot = abs(spot_lam - 4 / 3) <= 1e-9 and abs(rep.delta_lower - 52 / 9) <= GAP_TOL
    ok = not errors and quad <= 1e-12 and lam <= LAMBDA_REL and gap <= GAP_TOL and spot
    verdict(2, ok, f"points={len(recs)} errors={len(errors)} quadric={quad:.1e} "
                   f"lambda_rel={lam:.2e} max_gap={gap:.2e} spot_lambda={spot_lam:.15g} "
                   f"spot_delta={rep.delta_lower:.15g} time={elapsed:.1f}s (target 60s)")


# -- criterion 3 ------------------------------------------------------------------------

HYP_CASES = [("HYP_A", {"a": 0.0, "b": 1.0}, math.sqrt(2)),
             ("HYP_B", {"a": 0.0, "b": 1.0}, 1.0),
             ("HYP_C", {"a": 0.0, "b": math.sqrt(2)}, 1 / math.sqrt(2))]


@functools.cache
def _run_c3():
    t0 = time.perf_counter()
    recs, upper = [], True
    box = ((-1.0, 1.0),) * 4
    for k, (fam, params, _) in enumerate(HYP_CASES):
        spec = build_catalog(fam, 4, params, domain=box)
        for x in np.random.default_rng([3, k]).uniform(-1, 1, size=(25, 4)):
            recs.append(verify_point(spec, x, (2, 2)))
            upper &= bool(jet2_hyperdual(spec, x).point[0] > 0)
    return recs, upper, time.perf_counter() - t0


def test_criterion_3_hyperbolic_ideality(verdict):
    recs, upper, elapsed = _run_c3()
    errors = [r for r in recs if "error" in r]
    good = [r for r in recs if "error" not in r]
    quad = max(r["residuals"]["quadric"] for r in good)
    lam = max(r["lambda_rel_error"] for r in good)
    gap = max(r["gap"] for r in good)
    spots = [closed_form_lambda(f, 4, p, np.zeros(4)) for f, p, _ in HYP_CASES]
    spot_num = [_top_eig(build_catalog(f, 4, p), np.zeros(4)) for f, p, _ in HYP_CASES]
    spot_ok = all(abs(abs(s) - ref) <= 1e-12 and abs(v - ref) <= 1e-9 * ref
                  for s, v, (_, _, ref) in zip(spots, spot_num, HYP_CASES))
    d = ideality_check(build_catalog("HYP_A", 4, HYP_CASES[0][1]), np.zeros(4), (2, 2))
    spot_ok &= abs(d.delta_lower + 2) <= GAP_TOL
    ok = (not errors and upper and quad <= 1e-10 and lam <= LAMBDA_REL and gap <= GAP_TOL
          and spot_ok)
    verdict(3, ok, f"points={len(recs)} errors={len(errors)} u1>0={upper} quadric={quad:.1e} "
                   f"lambda_rel={lam:.2e} max_gap={gap:.2e} spot_ok={spot_ok} "
                   f"HYP_A delta(2,2)={d.delta_lower:.15g} time={elapsed:.1f}s (target 90s)")


# -- criterion 4 ------------------------------------------------------------------------

@functools.cache
def _run_c4():
    spec = unit_sphere_spec(4)
    x = np.array([0.1, 0.2, 0.3, 0.4])
    c = _curv(spec, x)
    rep = delta_estimate(c, (2,))
    gap = chen_rhs(rep.partition, c.ext.H_sq, c.c) - rep.delta_lower
    oracle_delta = c.tau - delta_oracle(c, (2,))
    return gap, rep.delta_lower, oracle_delta


def test_criterion_4_negative_control(verdict):
    gap, delta, oracle_delta = _run_c4()
    rejects = all(not equality_structure_check(np.full((1, 4), mu), (2,))[0]
                  for mu in (1.0, -0.5, 3e-4, 7.0))
    ok = abs(gap - 1 / 3) <= GAP_TOL and abs(oracle_delta - 5) <= GAP_TOL and rejects
    verdict(4, ok, f"gap={gap:.15g} delta={delta:.15g} oracle_delta={oracle_delta:.15g} "
                   f"structure_rejects={rejects}")


# -- criterion 5 ------------------------------------------------------------------------

def _random_gaps(count=200):
    gaps = []
    kinds = ("euclidean", "sphere", "hyperbolic")
    for i in range(count):
        rng = np.random.default_rng([5, i])
        n = 3 + i % 2
        spec = random_graph_spec(rng, n, 1 + (i // 2) % 2, kinds[(i // 4) % 3])
        c = _curv(spec, rng.uniform(-0.7, 0.7, n))
        for part in admissible_partitions(n):
            rep = delta_estimate(c, part, DeltaOptions(seed=i))
            gaps.append(chen_rhs(part, c.ext.H_sq, c.c) - rep.delta_lower)
    return gaps


def test_criterion_5_inequality_safety(verdict):
    t0 = time.perf_counter()
    gaps = list(_run_c1()[0])
    gaps += [r["gap"] for r in _run_c2()[0] + _run_c3()[0] if "error" not in r]
    gaps.append(_run_c4()[0])
    reused = len(gaps)
    fresh = _random_gaps()
    gaps += fresh
    elapsed = time.perf_counter() - t0
    worst = min(gaps)
    verdict(5, worst >= SAFETY, f"gaps={len(gaps)} (reused {reused}, random {len(fresh)}) "
                                f"min_gap={worst:.2e} time={elapsed:.1f}s (target 600s)")


# -- criterion 6 ------------------------------------------------------------------------

def test_criterion_6_structure_residuals(verdict):
    worst = {"gauss": 0.0, "codazzi": 0.0, "metric": 0.0}
    for k, fam in enumerate(FAMILIES.values()):
        spec = build_catalog(fam.id, max(fam.min_n, 4))
        for x in _interior(spec, 10, np.random.default_rng([6, k])):
            worst["gauss"] = max(worst["gauss"], gauss_residual(spec, x))
            worst["codazzi"] = max(worst["codazzi"], codazzi_residual(spec, x))
            worst["metric"] = max(worst["metric"], metric_match_residual(spec, x))
    chris = 0.0
    for x1 in (1.0, 1.7, 2.6):
        x = np.array([x1, 0.2, 0.1, -0.3])
        G = christoffels_from_metric(lambda p: closed_form_metric("EUCLID_T1", 4, {"a": 0.6}, p), x)
        chris = max(chris, abs(G[2, 0, 2] - 1 / x1))
        y = np.array([0.4 * x1, 0.2, 0.1, -0.3])
        G = christoffels_from_metric(lambda p: closed_form_metric("SPHERE_T2", 4, {"a": 0.6}, p), y)
        chris = max(chris, abs(G[2, 0, 2] - 1 / math.tan(y[0])))
    ok = (worst["gauss"] <= 1e-5 and worst["codazzi"] <= 1e-5 and worst["metric"] <= 1e-11
          and chris <= 1e-7)
    verdict(6, ok, f"families={len(FAMILIES)} gauss={worst['gauss']:.1e} "
                   f"codazzi={worst['codazzi']:.1e} metric={worst['metric']:.1e} "
                   f"christoffel={chris:.1e}")


# -- criterion 7 ------------------------------------------------------------------------

def test_criterion_7_oracle_agreement(verdict):
    t0 = time.perf_counter()
    kinds = ("euclidean", "sphere", "hyperbolic")
    worst = 0.0
    for i in range(50):
        rng = np.random.default_rng([7, i])
        n = 3 + i % 3
        spec = random_graph_spec(rng, n, 1 + (i // 3) % 2, kinds[(i // 6) % 3])
        c = _curv(spec, rng.uniform(-0.7, 0.7, n))
        parts = admissible_partitions(n)
        part = validate_partition(n, parts[i % len(parts)])
        est = delta_estimate(c, part, DeltaOptions(seed=i)).best_sum
        worst = max(worst, abs(est - delta_oracle(c, part, seed=i)))
    elapsed = time.perf_counter() - t0
    verdict(7, worst <= 1e-4, f"cases=50 max_diff={worst:.2e} time={elapsed:.1f}s (target 300s)")


# -- criterion 8 ------------------------------------------------------------------------

def test_criterion_8_determinism(verdict, tmp_path, monkeypatch):
    argv = ["verify", "--family", "EUCLID_T1", "--n", "4", "--param", "a=0.6",
            "--points", "random:6", "--seed", "3", "--starts", "8"]
    outputs, codes = [], []
    with open(tmp_path / "summary.log", "w") as log:
        for threads in ("1", "4", "8"):
            monkeypatch.setenv("DELTAFORGE_THREADS", threads)
            for rep in range(2):
                path = tmp_path / f"r{threads}_{rep}.json"
                codes.append(main(argv + ["--out", str(path)], out=log))
                outputs.append(path.read_bytes())
    same = all(o == outputs[0] for o in outputs)
    verdict(8, same and set(codes) == {0},
            f"runs={len(outputs)} byte_identical={same} exit_codes={sorted(set(codes))} "
            f"bytes={len(outputs[0])}")
