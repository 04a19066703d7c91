"""Intrinsic curvature via the Gauss equation, plus metric-side residual checks.

Production curvature only needs the second fundamental form:

    K(u, v) = sum_r h_r(u,u) h_r(v,v) - h_r(u,v)^2 + c      (u, v orthonormal)

The metric route (Christoffel symbols and Riemann tensor from central
differences of a metric function) exists to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import family_metric_fn
from .errors import DegenerateMetricError, DegeneratePlaneError, NonOrthonormalError, RankError
from .extrinsic import (DEFAULT_TOL_ZERO, ExtrinsicData, extrinsic_data, first_normal_rank,
                        principal_normal)
from .jets import jet2_hyperdual
from .spaceform import ambient_inner, ambient_inner_many

DEFAULT_METRIC_STEP = 1e-4


@dataclass(frozen=True)
class CurvatureData:
    c: float
    ext: ExtrinsicData
    K: np.ndarray   # (n, n) sectional curvatures of frame planes, zero diagonal
    tau: float

    @property
    def n(self):
        return self.ext.n

    @property
    def h(self):
        return self.ext.h


@dataclass(frozen=True)
class ResidualReport:
    gauss_residual: float
    codazzi_residual: float
    metric_match_residual: float


def frame_sectional_matrix(h, c):
    """K[i, j] for the frame planes e_i ^ e_j (diagonal set to zero)."""
    d = np.einsum("rii->ri", h)
    K = np.einsum("ri,rj->ij", d, d) - np.einsum("rij,rij->ij", h, h) + c
    np.fill_diagonal(K, 0.0)
    return K


def curvature_data(ext: ExtrinsicData) -> CurvatureData:
    c = float(ext.sf.c)
    K = frame_sectional_matrix(ext.h, c)
    return CurvatureData(c, ext, K, float(np.sum(np.triu(K, 1))))


def _pair_curvature(h, c, u, v):
    hu = np.einsum("rab,a,b->r", h, u, u)
    hv = np.einsum("rab,a,b->r", h, v, v)
    huv = np.einsum("rab,a,b->r", h, u, v)
    return float(np.dot(hu, hv) - np.dot(huv, huv) + c)


def sectional_curvature(curv: CurvatureData, u, v) -> float:
    """Sectional curvature of span(u, v); u, v given in the orthonormal tangent frame."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegeneratePlaneError("zero vector does not span a plane")
    u = u / nu
    w = v / nv - np.dot(v / nv, u) * u
    sin_angle = np.linalg.norm(w)
    if sin_angle < 1e-10:
        raise DegeneratePlaneError("vectors are linearly dependent")
    return _pair_curvature(curv.h, curv.c, u, w / sin_angle)


def scalar_curvature_total(curv: CurvatureData) -> float:
    return curv.tau


def scalar_curvature_subspace(curv: CurvatureData, basis) -> float:
    """Sum of sectional curvatures over pairs of an orthonormal basis (rows of ``basis``)."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.shape[1] != curv.n:
        raise NonOrthonormalError(f"basis vectors must have length {curv.n}")
    if np.max(np.abs(B @ B.T - np.eye(B.shape[0]))) > 1e-10:
        raise NonOrthonormalError("basis is not orthonormal within 1e-10")
    r = B.shape[0]
    if r == 2:
        return sectional_curvature(curv, B[0], B[1])
    return float(sum(_pair_curvature(curv.h, curv.c, B[a], B[b])
                     for a in range(r) for b in range(a + 1, r)))


# -- metric-side route ----------------------------------------------------------------

def _steps(x, h_step):
    if h_step is None:
        h_step = DEFAULT_METRIC_STEP
    return h_step * np.maximum(1.0, np.abs(x))


def central_difference(fn, x, steps):
    """Fourth-order central differences: out[l] = d fn / d x_l (array-valued fn)."""
    out = []
    for l in range(x.shape[0]):
        e = np.zeros(x.shape[0])
        e[l] = steps[l]
        f = [np.asarray(fn(x + k * e), dtype=float) for k in (2, 1, -1, -2)]
        out.append((-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * steps[l]))
    return np.array(out)


def christoffels_from_metric(metric_fn, x, h_step=None) -> np.ndarray:
    """Gamma[k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij) by central differences."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(metric_fn(x), dtype=float)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DegenerateMetricError(f"metric is not positive definite at {x.tolist()}") from None
    dg = central_difference(metric_fn, x, _steps(x, h_step))  # dg[l, i, j] = d_l g_ij
    # lower[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lower = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", np.linalg.inv(g), lower)


def riemann_from_metric(metric_fn, x, h_step=None) -> np.ndarray:
    """R[l, i, j, k] with R(d_i, d_j) d_k = R[l, i, j, k] d_l."""
    x = np.asarray(x, dtype=float)
    steps = _steps(x, h_step)
    G = christoffels_from_metric(metric_fn, x, h_step)
    # dG[m, l, j, k] = d_m Gamma^l_jk
    dG = central_difference(lambda p: christoffels_from_metric(metric_fn, p, h_step), x, steps)
    R = (np.einsum("iljk->lijk", dG) - np.einsum("jlik->lijk", dG)
         + np.einsum("lim,mjk->lijk", G, G) - np.einsum("ljm,mik->lijk", G, G))
    return R


def _induced_metric_fn(spec):
    def metric(x):
        jet = jet2_hyperdual(spec, x, check_domain=False)
        return ambient_inner_many(spec.sf, jet.first, jet.first)
    return metric


def metric_function(spec):
    """Closed-form metric for catalog specs, hyper-dual induced metric otherwise."""
    return family_metric_fn(spec) or _induced_metric_fn(spec)


def _coordinate_h(spec, jet, normals):
    return np.einsum("Nij,N,Nr->rij", jet.second, spec.sf.signature, normals)


def gauss_residual(spec, x, h_step=None) -> float:
    """Max |<R(d_i,d_j)d_j,d_i>| discrepancy between metric-side and Gauss-equation routes."""
    x = spec.check_point(x)
    n = spec.n
    jet = jet2_hyperdual(spec, x)
    ext = extrinsic_data(spec.sf, jet)
    R = riemann_from_metric(metric_function(spec), x, h_step)
    g_ref = np.asarray(metric_function(spec)(x))
    intrinsic = np.einsum("il,lijj->ij", g_ref, R)
    hc = _coordinate_h(spec, jet, ext.normal_frame)
    d = np.einsum("rii->ri", hc)
    g = ext.g
    extrinsic = (np.einsum("ri,rj->ij", d, d) - np.einsum("rij,rij->ij", hc, hc)
                 + spec.sf.c * (np.outer(np.diag(g), np.diag(g)) - g * g))
    iu = np.triu_indices(n, 1)
    return float(np.max(np.abs(intrinsic - extrinsic)[iu]))


def metric_match_residual(spec, x) -> float:
    """Max entrywise |induced metric - closed-form metric|; 0.0 for user specs."""
    fn = family_metric_fn(spec)
    if fn is None:
        return 0.0
    jet = jet2_hyperdual(spec, x)
    g = ambient_inner_many(spec.sf, jet.first, jet.first)
    return float(np.max(np.abs(g - fn(np.asarray(x, dtype=float)))))


def codazzi_residual(spec, x, h_step=None, tol_zero=DEFAULT_TOL_ZERO) -> float:
    """Max |nabla_i h_jk - nabla_j h_ik| for the scalar second fundamental form along xi.

    Requires first normal rank <= 1: then h = h_xi * xi and the xi-component
    of the Codazzi equation reduces to symmetry of nabla h_xi.
    """
    x = spec.check_point(x)
    n = spec.n
    ext0 = extrinsic_data(spec.sf, jet2_hyperdual(spec, x))
    rank = first_normal_rank(ext0, tol_zero)
    if rank >= 2:
        raise RankError(f"first normal rank {rank} >= 2; Codazzi check needs rank <= 1")
    if rank == 0:
        xi0 = ext0.normal_frame[:, 0] if ext0.q else np.zeros(spec.flat_dim)
    else:
        xi0 = principal_normal(ext0)[0]

    def scalar_h(p):
        jet = jet2_hyperdual(spec, p, check_domain=False)
        ext = extrinsic_data(spec.sf, jet)
        if ext.q == 0:
            return np.zeros((n, n))
        if ext.q == 1:
            xi = ext.normal_frame[:, 0]
        else:
            xi = principal_normal(ext)[0]
        if ambient_inner(spec.sf, xi, xi0) < 0:
            xi = -xi
        return _coordinate_h(spec, jet, xi[:, None])[0]

    steps = _steps(x, h_step)
    hx = scalar_h(x)
    dh = central_difference(scalar_h, x, steps)  # dh[i, j, k] = d_i h_jk
    G = christoffels_from_metric(metric_function(spec), x, h_step)
    # (nabla_i h)_jk = d_i h_jk - Gamma^m_ij h_mk - Gamma^m_ik h_jm
    nab = dh - np.einsum("mij,mk->ijk", G, hx) - np.einsum("mik,jm->ijk", G, hx)
    return float(np.max(np.abs(nab - np.transpose(nab, (1, 0, 2)))))


def residual_report(spec, x, h_step=None) -> ResidualReport:
    return ResidualReport(gauss_residual(spec, x, h_step), codazzi_residual(spec, x, h_step),
                          metric_match_residual(spec, x))
