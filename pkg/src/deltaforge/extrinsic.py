"""First and second fundamental forms from a 2-jet.

All flat-model vectors are columns of (N, k) arrays and every inner product
goes through the space form's signature, so the same code serves Euclidean,
spherical and Minkowski (hyperbolic) ambients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetricError, SignatureError
from .jets import Jet2
from .spaceform import SpaceForm, ambient_inner, ambient_inner_many

DEFAULT_TOL_ZERO = 1e-7


@dataclass(frozen=True)
class ExtrinsicData:
    sf: SpaceForm
    point: np.ndarray           # (N,)
    g: np.ndarray               # (n, n) induced metric
    frame_coeffs: np.ndarray    # (n, n): tangent_frame = jet.first @ frame_coeffs
    tangent_frame: np.ndarray   # (N, n)
    normal_frame: np.ndarray    # (N, q)
    h: np.ndarray               # (q, n, n) in the orthonormal frames
    H_vec: np.ndarray           # (N,)
    H_sq: float

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def q(self):
        return self.normal_frame.shape[1]

    def rotated(self, Q) -> "ExtrinsicData":
        """Same data expressed in the tangent frame ``tangent_frame @ Q`` (Q orthogonal)."""
        Q = np.asarray(Q, dtype=float)
        return ExtrinsicData(
            self.sf, self.point, self.g, self.frame_coeffs @ Q, self.tangent_frame @ Q,
            self.normal_frame, np.einsum("ai,rab,bj->rij", Q, self.h, Q),
            self.H_vec, self.H_sq)


@dataclass(frozen=True)
class ShapeSpectrum:
    eigenvalues: np.ndarray  # (q, n), each row descending
    zero_tolerance: float


def induced_metric(sf: SpaceForm, jet: Jet2) -> np.ndarray:
    g = ambient_inner_many(sf, jet.first, jet.first)
    g = 0.5 * (g + g.T)
    _cholesky(g)
    return g


def _cholesky(g):
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        margin = float(np.linalg.eigvalsh(g)[0]) if np.all(np.isfinite(g)) else None
        raise DegenerateMetricError(
            f"induced metric is not positive definite (smallest eigenvalue {margin})",
            margin=margin) from None


def tangent_orthonormal_frame(sf: SpaceForm, jet: Jet2, g) -> tuple:
    """Gram-Schmidt of the coordinate tangents; returns (frame, coefficients).

    Gram-Schmidt under ``g`` is the inverse transpose Cholesky factor, so
    ``frame[:, a] = sum_i coeffs[i, a] * dL/dx_i`` with ``coeffs`` upper triangular.
    """
    L = _cholesky(g)
    coeffs = np.linalg.solve(L.T, np.eye(g.shape[0]))
    coeffs = np.triu(coeffs)
    return jet.first @ coeffs, coeffs


def normal_frame(sf: SpaceForm, jet: Jet2, tangent_frame) -> np.ndarray:
    """Orthonormal normal vectors inside the space form's tangent space.

    Standard basis vectors are completed against the tangent frame (and the
    position vector when c != 0) by signature-aware Gram-Schmidt, always
    taking the candidate with the largest remaining norm (ties -> lowest index).
    """
    N = sf.flat_dim
    n = tangent_frame.shape[1]
    basis = [tangent_frame[:, a] for a in range(n)]
    signs = [1.0] * n
    if sf.c != 0:
        p = jet.point
        pp = ambient_inner(sf, p, p)
        basis.append(p / np.sqrt(abs(pp)))
        signs.append(float(np.sign(pp)))
    q = N - len(basis)
    sig = sf.signature
    W = np.array(basis).T if basis else np.zeros((N, 0))
    eps_w = np.array(signs)

    def project(V):
        # remove components along kept vectors: v - sum eps_w <v,w> w
        coeff = (W.T * sig) @ V
        return V - W @ (eps_w[:, None] * coeff)

    normals = []
    candidates = np.eye(N)
    for _ in range(q):
        R = project(project(candidates))
        norms = np.sum(sig[:, None] * R * R, axis=0)
        k = int(np.argmax(norms))
        if not norms[k] > 1e-12:
            raise SignatureError(
                f"normal completion found no spacelike candidate (best norm {norms[k]:.3e})")
        v = R[:, k] / np.sqrt(norms[k])
        normals.append(v)
        W = np.column_stack([W, v])
        eps_w = np.append(eps_w, 1.0)
    return np.array(normals).T if normals else np.zeros((N, 0))


def second_fundamental_form(sf: SpaceForm, jet: Jet2, tangent_frame, frame_coeffs, normals):
    """Returns (normals, h, H_vec, H_sq); each normal is oriented so trace(h_r) >= 0."""
    n = frame_coeffs.shape[0]
    q = normals.shape[1]
    sig = sf.signature
    # coordinate components <d2L/dx_i dx_j, xi_r>, then change to the orthonormal frame
    hc = np.einsum("Nij,N,Nr->rij", jet.second, sig, normals)
    h = np.einsum("ia,rij,jb->rab", frame_coeffs, hc, frame_coeffs)
    h = 0.5 * (h + np.transpose(h, (0, 2, 1)))
    normals = normals.copy()
    for r in range(q):
        if np.trace(h[r]) < 0.0:
            h[r] = -h[r]
            normals[:, r] = -normals[:, r]
    traces = np.trace(h, axis1=1, axis2=2) if q else np.zeros(0)
    H_vec = normals @ (traces / n) if q else np.zeros(sf.flat_dim)
    H_sq = ambient_inner(sf, H_vec, H_vec)
    return normals, h, H_vec, H_sq


def extrinsic_data(sf: SpaceForm, jet: Jet2) -> ExtrinsicData:
    g = induced_metric(sf, jet)
    frame, coeffs = tangent_orthonormal_frame(sf, jet, g)
    nf = normal_frame(sf, jet, frame)
    nf, h, H_vec, H_sq = second_fundamental_form(sf, jet, frame, coeffs, nf)
    return ExtrinsicData(sf, jet.point, g, coeffs, frame, nf, h, H_vec, H_sq)


def shape_spectrum(ext: ExtrinsicData, zero_tolerance: float = DEFAULT_TOL_ZERO) -> ShapeSpectrum:
    if ext.q == 0:
        return ShapeSpectrum(np.zeros((0, ext.n)), zero_tolerance)
    eig = np.linalg.eigvalsh(ext.h)[:, ::-1]
    return ShapeSpectrum(eig, zero_tolerance)


def _count_nonzero(eigs, tol_zero):
    scale = max(1.0, float(np.max(np.abs(eigs))) if eigs.size else 1.0)
    return int(np.sum(np.abs(eigs) > tol_zero * scale))


def _h_matrix(ext):
    I, J = np.triu_indices(ext.n)
    return ext.h[:, I, J]


def first_normal_rank(ext: ExtrinsicData, tol: float = DEFAULT_TOL_ZERO) -> int:
    """Numerical rank of the q x n(n+1)/2 matrix of second fundamental form components."""
    if ext.q == 0:
        return 0
    s = np.linalg.svd(_h_matrix(ext), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, float(s[0]))))


def principal_normal(ext: ExtrinsicData):
    """Dominant first-normal direction: (flat vector xi, coefficients in normal_frame, h_xi)."""
    U, _, _ = np.linalg.svd(_h_matrix(ext), full_matrices=False)
    w = U[:, 0]
    h_xi = np.einsum("r,rab->ab", w, ext.h)
    if np.trace(h_xi) < 0 or (np.trace(h_xi) == 0 and w[np.argmax(np.abs(w))] < 0):
        w, h_xi = -w, -h_xi
    return ext.normal_frame @ w, w, h_xi


def type_number(ext: ExtrinsicData, samples: int = 64, seed: int = 0,
                tol_zero: float = DEFAULT_TOL_ZERO) -> int:
    """Max count of nonzero principal curvatures over sampled unit normals.

    Exact when the first normal space has rank <= 1 (every A_xi is then a
    multiple of one operator); otherwise the frame normals plus ``samples``
    random unit combinations are scanned.
    """
    if ext.q == 0:
        return 0
    rank = first_normal_rank(ext, tol_zero)
    if rank == 0:
        return 0
    if ext.q == 1 or rank == 1:
        _, _, h_xi = principal_normal(ext)
        return _count_nonzero(np.linalg.eigvalsh(h_xi), tol_zero)
    rng = np.random.default_rng(seed)
    W = np.vstack([np.eye(ext.q), rng.standard_normal((samples, ext.q))])
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    A = np.einsum("sr,rab->sab", W, ext.h)
    eigs = np.linalg.eigvalsh(A)
    return max(_count_nonzero(e, tol_zero) for e in eigs)
