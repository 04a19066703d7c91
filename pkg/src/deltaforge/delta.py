"""Partitions, inequality constants and the delta-invariant.

``delta_estimate`` minimises f(Q) = sum_j tau(L_j(Q)) over orthonormal
frames Q, where L_j is spanned by the j-th consecutive block of columns.
Every feasible frame gives an upper bound on the infimum, hence a lower
bound ``delta_lower = tau - best_sum`` on delta itself.

Local descent sweeps over Givens planes (i, j) whose columns lie in
different blocks (rotations inside a block, or inside the residual, leave
f unchanged).  Along a Givens rotation by angle t the objective is a
trigonometric polynomial of degree two in 2t, so five samples determine it
exactly and the line search is solved on the fitted polynomial.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize
from scipy.stats import ortho_group

from .curvature import CurvatureData, curvature_data
from .errors import InequalityViolation, PartitionError, UnsupportedError
from .extrinsic import (DEFAULT_TOL_ZERO, ExtrinsicData, ShapeSpectrum, extrinsic_data,
                        first_normal_rank, principal_normal)
from .jets import jet2_hyperdual

MAX_ASSIGNMENTS = 10_000


@dataclass(frozen=True)
class Partition:
    n: int
    parts: tuple

    @property
    def k(self):
        return len(self.parts)

    @property
    def total(self):
        return sum(self.parts)

    @property
    def residual(self):
        return self.n - self.total

    def label(self):
        return ",".join(str(p) for p in self.parts)


def validate_partition(n, parts) -> Partition:
    if isinstance(parts, Partition):
        parts = parts.parts
    if isinstance(parts, str):
        try:
            parts = [int(p) for p in parts.replace(" ", "").split(",") if p]
        except ValueError:
            raise PartitionError(f"partition {parts!r} is not a comma-separated list of integers")
    parts = tuple(parts)
    if len(parts) == 0:
        raise PartitionError("partition needs at least one part (k >= 1)")
    for p in parts:
        if int(p) != p:
            raise PartitionError(f"part {p!r} is not an integer")
    parts = tuple(sorted((int(p) for p in parts), reverse=True))
    if parts[-1] < 2:
        raise PartitionError(f"every part must satisfy 2 <= n_j; got {parts[-1]}")
    if parts[0] >= n:
        raise PartitionError(f"every part must satisfy n_j < n = {n}; got {parts[0]}")
    if sum(parts) > n:
        raise PartitionError(f"parts must satisfy n_1+...+n_k <= n; sum {sum(parts)} > {n}")
    return Partition(int(n), parts)


def admissible_partitions(n):
    """Every partition in S(n), canonical order."""
    out = []

    def rec(prefix, largest, budget):
        if prefix:
            out.append(Partition(n, tuple(prefix)))
        for p in range(min(largest, budget, n - 1), 1, -1):
            rec(prefix + [p], p, budget - p)

    rec([], n - 1, n)
    return sorted(out, key=lambda p: (p.k, [-x for x in p.parts]))


def chen_coefficients(partition: Partition) -> tuple:
    n, k, s = partition.n, partition.k, partition.total
    c_coeff = n * n * (n + k - 1 - s) / (2.0 * (n + k - s))
    b_coeff = n * (n - 1) / 2.0 - sum(p * (p - 1) for p in partition.parts) / 2.0
    return c_coeff, b_coeff


def chen_rhs(partition: Partition, H_sq, c) -> float:
    c_coeff, b_coeff = chen_coefficients(partition)
    return c_coeff * float(H_sq) + b_coeff * float(c)


# -- objective ----------------------------------------------------------------------

def _labels(partition: Partition):
    lab = np.full(partition.n, -1)
    start = 0
    for j, p in enumerate(partition.parts):
        lab[start:start + p] = j
        start += p
    return lab


def _pair_mask(lab):
    M = (lab[:, None] == lab[None, :]) & (lab[:, None] >= 0)
    return np.triu(M, 1).astype(float)


def _objective_batch(H, mask, c):
    """f for a stack of second fundamental forms H (B, q, n, n)."""
    d = np.einsum("Brii->Bri", H)
    K = np.einsum("Bri,Brj->Bij", d, d) - np.einsum("Brij,Brij->Bij", H, H)
    return np.einsum("Bij,ij->B", K, mask) + c * mask.sum()


def _objective(h, mask, c):
    return float(_objective_batch(h[None], mask, c)[0])


def _rotate(h, Q):
    return np.einsum("ai,rab,bj->rij", Q, h, Q)


def _givens(n, i, j, t):
    G = np.eye(n)
    ct, st = math.cos(t), math.sin(t)
    G[i, i] = G[j, j] = ct
    G[j, i] = st
    G[i, j] = -st
    return G


_SAMPLE_T = np.pi * np.arange(5) / 5.0
_GRID = np.linspace(0.0, 2 * np.pi, 48, endpoint=False)


def _plane_samples(h, i, j):
    """h rotated in plane (i, j) at the five sample angles: (5, q, n, n)."""
    ct, st = np.cos(_SAMPLE_T), np.sin(_SAMPLE_T)
    H = np.repeat(h[None], 5, axis=0)
    hi, hj = h[:, i, :], h[:, j, :]
    # rows
    ri = ct[:, None, None] * hi + st[:, None, None] * hj
    rj = -st[:, None, None] * hi + ct[:, None, None] * hj
    H[:, :, i, :] = ri
    H[:, :, j, :] = rj
    ci, cj = H[:, :, :, i].copy(), H[:, :, :, j].copy()
    H[:, :, :, i] = ct[:, None, None] * ci + st[:, None, None] * cj
    H[:, :, :, j] = -st[:, None, None] * ci + ct[:, None, None] * cj
    return H


def _trig_fit(samples):
    F = np.fft.fft(samples) / 5.0
    return (F[0].real, 2 * F[1].real, -2 * F[1].imag, 2 * F[2].real, -2 * F[2].imag)


def _trig_min(coef):
    a0, a1, b1, a2, b2 = coef
    g = a0 + a1 * np.cos(_GRID) + b1 * np.sin(_GRID) + a2 * np.cos(2 * _GRID) + b2 * np.sin(2 * _GRID)
    th = float(_GRID[int(np.argmin(g))])
    for _ in range(6):
        c1, s1, c2, s2 = math.cos(th), math.sin(th), math.cos(2 * th), math.sin(2 * th)
        d1 = -a1 * s1 + b1 * c1 - 2 * a2 * s2 + 2 * b2 * c2
        d2 = -a1 * c1 - b1 * s1 - 4 * a2 * c2 - 4 * b2 * s2
        if d2 <= 0:
            break
        step = d1 / d2
        th -= step
        if abs(step) < 1e-15:
            break
    return th


def _descend(h, lab, mask, c, max_iter, ftol, bound=math.inf):
    """Givens-plane descent from frame h; returns (f, Q, sweeps, converged).

    Sweeps converge linearly, so the limit is extrapolated geometrically from
    the last two decreases; a start whose extrapolated limit stays clearly
    above ``bound`` is abandoned (reported as not converged).
    """
    n = h.shape[1]
    Q = np.eye(n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)
             if lab[i] != lab[j] and (lab[i] >= 0 or lab[j] >= 0)]
    f = _objective(h, mask, c)
    if not pairs:
        return f, Q, 0, True
    prev_drop = None
    for sweep in range(1, max_iter + 1):
        f_start = f
        for i, j in pairs:
            samples = _objective_batch(_plane_samples(h, i, j), mask, c)
            t = 0.5 * _trig_min(_trig_fit(samples))
            G = _givens(n, i, j, t)
            h_new = _rotate(h, G)
            f_new = _objective(h_new, mask, c)
            if f_new < f:
                h, f, Q = h_new, f_new, Q @ G
        drop = f_start - f
        if drop <= ftol * max(1.0, abs(f)):
            return f, Q, sweep, True
        if prev_drop and drop < prev_drop and sweep >= 3:
            rate = drop / prev_drop
            remaining = drop * rate / (1.0 - rate)
            if f - 10.0 * remaining > bound + 1e-8 * max(1.0, abs(bound)):
                return f, Q, sweep, False
        prev_drop = drop
    return f, Q, max_iter, False


# -- starts -------------------------------------------------------------------------

def assignment_count(partition: Partition) -> int:
    count = math.factorial(partition.n) // math.factorial(partition.residual)
    for p in partition.parts:
        count //= math.factorial(p)
    for size in set(partition.parts):
        count //= math.factorial(partition.parts.count(size))
    return count


def block_assignments(partition: Partition):
    """Column orderings realising each way of splitting the axes into the blocks.

    Blocks of equal size are unordered, so the block with the smaller
    minimum index comes first.
    """
    n, parts = partition.n, partition.parts

    def rec(j, remaining, prev_min):
        if j == len(parts):
            yield tuple(sorted(remaining))
            return
        for combo in itertools.combinations(sorted(remaining), parts[j]):
            if j > 0 and parts[j] == parts[j - 1] and combo[0] < prev_min:
                continue
            rest = remaining - set(combo)
            for tail in rec(j + 1, rest, combo[0]):
                yield combo + tail

    yield from rec(0, set(range(n)), -1)


def _assignment_perms(partition, cap, seed):
    if assignment_count(partition) <= cap:
        return [np.array(p) for p in block_assignments(partition)]
    rng = np.random.default_rng([seed, 2])
    return [rng.permutation(partition.n) for _ in range(cap)]


def _is_signed_permutation(V, tol=1e-12):
    return bool(np.all(np.max(np.abs(V), axis=0) > 1.0 - tol))


def _start_frames(curv, partition, starts, seed, cap):
    n = partition.n
    perms = _assignment_perms(partition, cap, seed)
    frames = [np.eye(n)[:, p] for p in perms]
    if curv.ext.q:
        _, _, h_xi = principal_normal(curv.ext)
        _, V = np.linalg.eigh(h_xi)
        V = V[:, ::-1]
        if not _is_signed_permutation(V):
            frames += [V[:, p] for p in perms]
    for i in range(starts):
        rng = np.random.default_rng([seed, 0, i])
        frames.append(ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1))
    return frames


# -- reports ------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaOptions:
    starts: int = 32
    seed: int = 0
    max_iter: int = 200
    ftol: float = 1e-12
    tol: float = 1e-6
    max_assignments: int = MAX_ASSIGNMENTS


@dataclass(frozen=True)
class DeltaReport:
    point: Optional[np.ndarray]
    partition: Partition
    tau: float
    best_sum: float
    delta_lower: float
    rhs: Optional[float] = None
    gap: Optional[float] = None
    starts: int = 0
    iterations: int = 0
    converged: bool = True
    seed: int = 0
    best_frame: np.ndarray = field(default=None, repr=False, compare=False)

    def ideal(self, tol=1e-6) -> bool:
        return self.gap is not None and -tol <= self.gap <= tol


def delta_estimate(curv: CurvatureData, partition: Partition, opts: DeltaOptions = None,
                   point=None, **overrides) -> DeltaReport:
    """Best feasible sum of block scalar curvatures over multi-start local descent."""
    opts = replace(opts or DeltaOptions(), **overrides)
    partition = validate_partition(curv.n, partition)
    lab = _labels(partition)
    mask = _pair_mask(lab)
    h = curv.h
    best = (math.inf, None, False)
    frames = _start_frames(curv, partition, opts.starts, opts.seed, opts.max_assignments)
    sweeps = 0
    for Q0 in frames:
        f, Q, it, conv = _descend(_rotate(h, Q0), lab, mask, curv.c, opts.max_iter, opts.ftol,
                                  best[0])
        sweeps += it
        if f < best[0]:
            best = (f, Q0 @ Q, conv)
    best_sum, frame, converged = best
    return DeltaReport(point, partition, curv.tau, best_sum, curv.tau - best_sum,
                       starts=len(frames), iterations=sweeps, converged=converged,
                       seed=opts.seed, best_frame=frame)


def _haar_batch(rng, count, n):
    Z = rng.standard_normal((count, n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.einsum("Bii->Bi", R))[:, None, :]


def delta_oracle(curv: CurvatureData, partition: Partition, samples: int = 100_000,
                 seed: int = 0, polish: int = 10) -> float:
    """Brute-force best_sum: axis assignments, Haar sampling, then simplex polish."""
    partition = validate_partition(curv.n, partition)
    n, h, c = curv.n, curv.h, curv.c
    mask = _pair_mask(_labels(partition))
    cands = [np.eye(n)[:, list(p)] for p in itertools.islice(block_assignments(partition),
                                                             MAX_ASSIGNMENTS)]
    frames = np.array(cands)
    values = _objective_batch(np.einsum("Bai,rab,Bbj->Brij", frames, h, frames), mask, c)
    rng = np.random.default_rng([seed, 1])
    pool_f, pool_v = [frames], [values]
    left = samples
    while left > 0:
        b = min(left, 10_000)
        Q = _haar_batch(rng, b, n)
        pool_f.append(Q)
        pool_v.append(_objective_batch(np.einsum("Bai,rab,Bbj->Brij", Q, h, Q), mask, c))
        left -= b
    F = np.concatenate(pool_f)
    V = np.concatenate(pool_v)
    order = np.argsort(V, kind="stable")[:polish]
    best = float(V[order[0]])
    iu = np.triu_indices(n, 1)

    for idx in order:
        Q0 = F[idx]

        def fun(s, Q0=Q0):
            S = np.zeros((n, n))
            S[iu] = s
            Q, R = np.linalg.qr(Q0 @ expm(S - S.T))
            Q = Q * np.sign(np.diag(R))
            return _objective(_rotate(h, Q), mask, c)

        k = len(iu[0])
        res = minimize(fun, np.zeros(k), method="Powell", bounds=[(-np.pi, np.pi)] * k,
                       options={"xtol": 1e-10, "ftol": 1e-15, "maxfev": 20_000})
        best = min(best, float(res.fun), float(V[idx]))
    return best


def delta_from_curvature(curv: CurvatureData, partition, opts: DeltaOptions = None,
                         point=None) -> DeltaReport:
    """delta_estimate plus the upper bound; raises when the bound is violated beyond tol."""
    opts = opts or DeltaOptions()
    rep = delta_estimate(curv, partition, opts, point=point)
    rhs = chen_rhs(rep.partition, curv.ext.H_sq, curv.c)
    rep = replace(rep, rhs=rhs, gap=rhs - rep.delta_lower)
    if rep.gap < -opts.tol:
        raise InequalityViolation(
            f"delta lower bound {rep.delta_lower:.12g} exceeds upper bound {rhs:.12g} "
            f"(gap {rep.gap:.3e}) for partition {rep.partition.parts}")
    return rep


def ideality_check(spec, x, partition, opts: DeltaOptions = None) -> DeltaReport:
    x = spec.check_point(x)
    curv = curvature_data(extrinsic_data(spec.sf, jet2_hyperdual(spec, x)))
    return delta_from_curvature(curv, validate_partition(spec.n, partition), opts, point=x)


# -- equality structure -------------------------------------------------------------

def structure_spectrum(ext: ExtrinsicData, tol_zero=DEFAULT_TOL_ZERO) -> ShapeSpectrum:
    """Spectrum of the shape operator along the principal normal (rank <= 1 only)."""
    rank = first_normal_rank(ext, tol_zero)
    if rank >= 2:
        raise UnsupportedError(f"first normal rank {rank} >= 2; structure check needs rank <= 1")
    if ext.q == 0:
        return ShapeSpectrum(np.zeros((1, ext.n)), tol_zero)
    _, _, h_xi = principal_normal(ext)
    return ShapeSpectrum(np.linalg.eigvalsh(h_xi)[::-1][None, :], tol_zero)


def _single_row(spectrum):
    if isinstance(spectrum, ShapeSpectrum):
        eig = np.atleast_2d(np.asarray(spectrum.eigenvalues, dtype=float))
    else:
        eig = np.atleast_2d(np.asarray(spectrum, dtype=float))
    if eig.shape[0] == 1:
        return eig[0]
    scale = np.max(np.abs(eig)) if eig.size else 0.0
    live = [row for row in eig if np.max(np.abs(row)) > 1e-12 * max(scale, 1e-300)]
    if len(live) > 1:
        raise UnsupportedError("more than one normal carries a nonzero shape operator")
    return live[0] if live else eig[0]


def equality_structure_check(spectrum, partition, tol: float = 1e-9):
    """Can eigenvector-aligned blocks realise the equality form?

    Needs an eigenvalue assignment to blocks of sizes n_1..n_k plus a residual
    block on which the shape operator is mu*I, with every block trace equal to
    mu.  Returns (ok, witness) where witness holds eigenvalue indices per
    block, the residual indices and mu.  Tolerance is relative to max |eig|,
    so the answer is unchanged when the spectrum is rescaled.
    """
    eig = _single_row(spectrum)
    partition = validate_partition(eig.shape[0], partition)
    scale = float(np.max(np.abs(eig))) if eig.size else 0.0
    if scale == 0.0:
        perm = next(block_assignments(partition))
        return True, _witness(perm, partition, 0.0)
    thr = tol * scale
    for perm in block_assignments(partition):
        traces = []
        start = 0
        for p in partition.parts:
            traces.append(float(np.sum(eig[list(perm[start:start + p])])))
            start += p
        resid = eig[list(perm[start:])]
        if resid.size:
            mu = float(np.mean(resid))
            if np.max(np.abs(resid - mu)) > thr:
                continue
        else:
            mu = float(np.mean(traces))
        if max(abs(t - mu) for t in traces) <= thr:
            return True, _witness(perm, partition, mu)
    return False, None


def _witness(perm, partition, mu):
    blocks, start = [], 0
    for p in partition.parts:
        blocks.append(tuple(int(i) for i in perm[start:start + p]))
        start += p
    return {"blocks": blocks, "residual": tuple(int(i) for i in perm[start:]), "mu": mu}
