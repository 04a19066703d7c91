"""Per-point verification records, jobs over parameter grids, canonical JSON output."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import catalog
from .curvature import (DEFAULT_METRIC_STEP, codazzi_residual, curvature_data, gauss_residual,
                        metric_match_residual)
from .delta import (DeltaOptions, delta_from_curvature, equality_structure_check,
                    structure_spectrum, validate_partition)
from .errors import (ConfigError, ConstraintError, DegenerateMetricError, DeltaforgeError,
                     IoError, RankError, UnsupportedError)
from .extrinsic import extrinsic_data, shape_spectrum, type_number
from .immersion import ImmersionSpec, parse_spec
from .jets import jet2_finite_difference, jet2_hyperdual
from .spaceform import EUCLIDEAN, SPHERE, quadric_check

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
DEGENERATE_MARGIN = 1e-10


@dataclass(frozen=True)
class Tolerances:
    gap: float = 1e-6
    residual: float = 1e-5
    quadric: Optional[float] = None   # 1e-12 on spheres, 1e-10 otherwise
    lambda_rel: float = 1e-9
    metric: float = 1e-11
    zero: float = 1e-7
    fd_jet: float = 1e-5

    def quadric_for(self, kind):
        if self.quadric is not None:
            return self.quadric
        return 1e-12 if kind == SPHERE else 1e-10


# -- per point ----------------------------------------------------------------------

def _closed_lambda(spec, x):
    if spec.family is None:
        return None
    return catalog.closed_form_lambda(spec.family, spec.n, spec.params, x)


def _fd_discrepancy(spec, x, jet):
    fd = jet2_finite_difference(spec, x)
    scale = max(1.0, float(np.max(np.abs(jet.second))), float(np.max(np.abs(jet.first))))
    return max(float(np.max(np.abs(fd.first - jet.first))),
               float(np.max(np.abs(fd.second - jet.second)))) / scale


def _perturbed(spec, x):
    """Deterministic nudge toward the box centre, used after a degenerate metric."""
    c = spec.center()
    width = np.array([hi - lo for lo, hi in spec.domain])
    step = 1e-6 * width
    return x + np.where(c >= x, step, -step)


def _point_record(spec, x, partition, tol: Tolerances, opts: DeltaOptions, fd_check):
    rec = {"x": [float(v) for v in x], "warnings": []}
    try:
        jet = jet2_hyperdual(spec, x)
        ext = extrinsic_data(spec.sf, jet)
    except DegenerateMetricError as exc:
        if exc.margin is None or abs(exc.margin) >= DEGENERATE_MARGIN:
            raise
        x = _perturbed(spec, x)
        msg = f"degenerate metric at {rec['x']}; retried at a perturbed point"
        log.warning(msg)
        rec["warnings"].append(msg)
        rec["x"] = [float(v) for v in x]
        jet = jet2_hyperdual(spec, x)
        ext = extrinsic_data(spec.sf, jet)

    curv = curvature_data(ext)
    rep = delta_from_curvature(curv, partition, replace(opts, tol=tol.gap), point=x)
    spectrum = shape_spectrum(ext, tol.zero)
    rec.update(tau=curv.tau, H_sq=float(ext.H_sq),
               eigenvalues=[[float(v) for v in row] for row in spectrum.eigenvalues],
               type_number=type_number(ext, seed=opts.seed, tol_zero=tol.zero),
               delta_lower=rep.delta_lower, best_sum=rep.best_sum, rhs=rep.rhs, gap=rep.gap,
               optimizer={"starts": rep.starts, "iterations": rep.iterations,
                          "converged": rep.converged})
    checks = {"gap": bool(-tol.gap <= rep.gap <= tol.gap)}

    try:
        ok, witness = equality_structure_check(structure_spectrum(ext, tol.zero), partition,
                                               tol.zero)
        rec["structure"] = {"satisfiable": bool(ok), "witness": witness}
        checks["structure"] = ok
    except UnsupportedError as exc:
        rec["structure"] = {"satisfiable": None, "note": str(exc)}

    residuals = {"gauss": gauss_residual(spec, x, DEFAULT_METRIC_STEP)}
    try:
        residuals["codazzi"] = codazzi_residual(spec, x, DEFAULT_METRIC_STEP, tol.zero)
    except RankError:
        residuals["codazzi"] = None
    checks["gauss"] = bool(residuals["gauss"] <= tol.residual)
    if residuals["codazzi"] is not None:
        checks["codazzi"] = bool(residuals["codazzi"] <= tol.residual)
    if spec.sf.kind != EUCLIDEAN:
        q = quadric_check(spec.sf, jet.point, tol.quadric_for(spec.sf.kind))
        residuals["quadric"] = q.residual
        checks["quadric"] = bool(q.ok)
    else:
        residuals["quadric"] = None
    if spec.family is not None:
        residuals["metric_match"] = metric_match_residual(spec, x)
        checks["metric_match"] = bool(residuals["metric_match"] <= tol.metric)
        lam = _closed_lambda(spec, x)
        lam_num = float(np.max(np.abs(spectrum.eigenvalues)))
        rel = abs(lam_num - abs(lam)) / abs(lam)
        rec.update(lambda_closed_form=lam, lambda_numeric=lam_num, lambda_rel_error=rel)
        checks["lambda"] = bool(rel <= tol.lambda_rel)
    else:
        residuals["metric_match"] = None
    if fd_check:
        residuals["fd_jet"] = _fd_discrepancy(spec, x, jet)
        checks["fd_jet"] = bool(residuals["fd_jet"] <= tol.fd_jet)
    rec["residuals"] = residuals
    rec["checks"] = checks
    rec["pass"] = all(checks.values())
    return rec


def verify_point(spec: ImmersionSpec, x, partition, tolerances: Tolerances = None, seed=0,
                 starts=32, fd_check=False) -> dict:
    """Full verification bundle at one chart point; errors land in the record."""
    tol = tolerances or Tolerances()
    opts = DeltaOptions(starts=starts, seed=seed, tol=tol.gap)
    x = np.asarray(x, dtype=float)
    try:
        partition = validate_partition(spec.n, partition)
        return _point_record(spec, spec.check_point(x), partition, tol, opts, fd_check)
    except DeltaforgeError as exc:
        return {"x": [float(v) for v in x], "pass": False,
                "error": f"{type(exc).__name__}: {exc}", "warnings": []}


# -- jobs ---------------------------------------------------------------------------

@dataclass
class Job:
    family: Optional[str] = None
    spec_text: Optional[str] = None
    n: Optional[int] = None
    params: dict = field(default_factory=dict)
    param_grid: Optional[str] = None
    pad_to: Optional[int] = None
    partitions: list = field(default_factory=list)
    points: object = "grid:3"
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    starts: int = 32
    threads: int = 1
    fd_check: bool = False


def parse_param_grid(text):
    """``a=0.1:0.9:5,b=1`` -> list of parameter dicts (cartesian product)."""
    if not text:
        return [{}]
    axes = []
    for item in text.split(","):
        if "=" not in item:
            raise ConfigError(f"grid entry {item!r} must look like name=lo:hi:count or name=value")
        name, rhs = (s.strip() for s in item.split("=", 1))
        pieces = rhs.split(":")
        try:
            if len(pieces) == 1:
                values = [float(pieces[0])]
            elif len(pieces) == 3:
                lo, hi, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
                if count < 1:
                    raise ConfigError(f"grid count for {name} must be >= 1")
                # 12 significant digits keeps 0.3:0.9:3 at exactly 0.6
                values = ([float(f"{v:.12g}") for v in np.linspace(lo, hi, count)]
                          if count > 1 else [lo])
            else:
                raise ConfigError(f"grid entry {item!r} must be lo:hi:count or a single value")
        except ValueError:
            raise ConfigError(f"grid entry {item!r} has non-numeric fields") from None
        axes.append([(name, v) for v in values])
    return [dict(combo) for combo in itertools.product(*axes)]


def _inner_box(spec, margin=0.05):
    return [(lo + margin * (hi - lo), hi - margin * (hi - lo)) for lo, hi in spec.domain]


def sample_points(spec: ImmersionSpec, points, seed=0):
    """grid:K (K per axis inside a 5% margin), random:C, file:<path>, or an explicit list."""
    if isinstance(points, str):
        kind, _, arg = points.partition(":")
        if kind == "grid":
            k = _positive_int(arg, points)
            axes = [np.linspace(lo, hi, k) if k > 1 else np.array([(lo + hi) / 2])
                    for lo, hi in _inner_box(spec)]
            return [np.array(p) for p in itertools.product(*axes)]
        if kind == "random":
            count = _positive_int(arg, points, allow_zero=True)
            rng = np.random.default_rng([seed, 3])
            box = np.array(_inner_box(spec))
            return [box[:, 0] + rng.random(spec.n) * (box[:, 1] - box[:, 0]) for _ in range(count)]
        if kind == "file":
            return _read_points(arg)
        raise ConfigError(f"unknown point sampling {points!r}; use grid:K, random:C or file:PATH")
    return [np.asarray(p, dtype=float) for p in points]


def _positive_int(arg, text, allow_zero=False):
    try:
        k = int(arg)
    except ValueError:
        raise ConfigError(f"bad sampling count in {text!r}") from None
    if k < (0 if allow_zero else 1):
        raise ConfigError(f"sampling count must be positive in {text!r}")
    return k


def _read_points(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read points file {path}: {exc}") from None
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(np.array([float(v) for v in line.replace(",", " ").split()]))
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: point must be a list of numbers") from None
    return out


def _build_spec(job: Job, params):
    if job.family is not None:
        merged = dict(catalog.get_family(job.family).defaults)
        merged.update(job.params)
        merged.update(params)
        return catalog.build_catalog(job.family, job.n, merged, pad_to=job.pad_to)
    spec = parse_spec(job.spec_text)
    if job.params or params:
        merged = dict(spec.params)
        merged.update(job.params)
        merged.update(params)
        spec = ImmersionSpec(spec.sf, spec.n, spec.coords, merged, spec.domain)
    return spec


def _check_job(job: Job):
    if (job.family is None) == (job.spec_text is None):
        raise ConfigError("exactly one of a catalog family or a spec document is required")
    if job.family is not None and job.n is None:
        raise ConfigError("catalog jobs need n")
    if not job.partitions:
        raise ConfigError("at least one partition is required")


def _spec_summary(job: Job):
    if job.family is not None:
        return {"family": catalog.get_family(job.family).id, "n": job.n,
                "params": dict(job.params), "pad_to": job.pad_to}
    spec = parse_spec(job.spec_text)
    return {"spec_hash": spec.digest(), "n": spec.n, "params": dict(spec.params),
            "spaceform": {"kind": spec.sf.kind, "m": spec.sf.m}}


def _run_cell(task):
    spec, x, partition, tol, seed, starts, fd_check, params = task
    rec = verify_point(spec, x, partition, tol, seed, starts, fd_check)
    rec["params"] = params
    rec["partition"] = list(partition)
    return rec


def resolve_threads(requested):
    env = os.environ.get("DELTAFORGE_THREADS")
    if env:
        try:
            requested = int(env)
        except ValueError:
            raise ConfigError(f"DELTAFORGE_THREADS must be an integer, got {env!r}") from None
    return max(1, int(requested or 1))


def run_job(job: Job) -> dict:
    """Evaluate every (parameter, point, partition) cell; output is order-independent."""
    _check_job(job)
    grid = parse_param_grid(job.param_grid)
    tasks, records, warnings = [], [], []
    base_n = None
    for params in grid:
        try:
            spec = _build_spec(job, params)
        except ConstraintError as exc:
            records.append({"params": params, "pass": False, "x": None, "partition": None,
                            "error": f"ConstraintError: {exc}", "warnings": []})
            continue
        base_n = spec.n
        parts = [validate_partition(spec.n, p).parts for p in job.partitions]
        pts = sample_points(spec, job.points, job.seed)
        if not pts:
            warnings.append(f"no points sampled for params {params}")
        for x, part in itertools.product(pts, parts):
            tasks.append((spec, x, part, job.tolerances, job.seed, job.starts, job.fd_check,
                          params))
    for w in warnings:
        log.warning(w)

    threads = resolve_threads(job.threads)
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records.extend(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        records.extend(_run_cell(t) for t in tasks)

    records.sort(key=_record_key)
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": _spec_summary(job),
        "n": base_n if base_n is not None else job.n,
        "partitions": [list(validate_partition(base_n, p).parts) if base_n else list(p)
                       for p in job.partitions],
        "points": job.points if isinstance(job.points, str) else "explicit",
        "param_grid": job.param_grid,
        "records": records,
        "summary": summarize(records),
        "seed": job.seed,
        "starts": job.starts,
        "tolerances": asdict(job.tolerances),
        "warnings": warnings,
    }


def _record_key(rec):
    return (json.dumps(rec.get("params"), sort_keys=True), rec.get("x") or [],
            rec.get("partition") or [])


def summarize(records) -> dict:
    gaps = [r["gap"] for r in records if r.get("gap") is not None]
    res = [v for r in records for v in (r.get("residuals") or {}).values() if v is not None]
    return {
        "points": len(records),
        "failures": sum(1 for r in records if not r.get("pass")),
        "errors": sum(1 for r in records if "error" in r),
        "max_gap": max(gaps) if gaps else None,
        "min_gap": min(gaps) if gaps else None,
        "max_residual": max(res) if res else None,
        "all_pass": all(r.get("pass") for r in records),
    }


# -- output -------------------------------------------------------------------------

def _fmt(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return "%.17g" % v if math.isfinite(v) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_fmt(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_fmt(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _fmt(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_json(report) -> str:
    return _fmt(report, 1, 0) + "\n"


def emit_report(report, destination):
    """Write canonical JSON (sorted keys, 17 significant digits, LF) to a path or '-'."""
    text = canonical_json(report)
    if destination in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write report to {destination}: {exc}") from None


CSV_COLUMNS = ["params", "partition", "x", "gap", "lambda_numeric", "lambda_closed_form",
               "gauss", "codazzi", "quadric", "metric_match", "pass", "error"]


def emit_csv(report, destination):
    """Tidy CSV: one row per record."""
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in report["records"]:
                res = r.get("residuals") or {}
                row = [json.dumps(r.get("params"), sort_keys=True),
                       ";".join(str(p) for p in r.get("partition") or []),
                       ";".join("%.17g" % v for v in r.get("x") or []),
                       r.get("gap"), r.get("lambda_numeric"), r.get("lambda_closed_form"),
                       res.get("gauss"), res.get("codazzi"), res.get("quadric"),
                       res.get("metric_match"), r.get("pass"), r.get("error", "")]
                w.writerow(["" if v is None else ("%.17g" % v if isinstance(v, float) else v)
                            for v in row])
    except OSError as exc:
        raise IoError(f"cannot write CSV to {destination}: {exc}") from None
