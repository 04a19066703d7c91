"""Second-order jets of immersion maps.

``jet2_hyperdual`` is the production path: one hyper-dual evaluation per
coordinate, with every seed pair (i <= j) packed into array-valued
sensitivities.  ``jet2_finite_difference`` is an independent central
difference oracle used only for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hyperdual import HyperDual

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Jet2:
    point: np.ndarray   # (N,)
    first: np.ndarray   # (N, n), d L / d x_i
    second: np.ndarray  # (N, n, n), d2 L / d x_i d x_j

    @property
    def n(self):
        return self.first.shape[1]

    @property
    def flat_dim(self):
        return self.point.shape[0]


def jet2_hyperdual_fn(fn, x) -> Jet2:
    """2-jet of ``fn`` (list of variables -> list of coordinates) at ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    I, J = np.triu_indices(n)
    variables = [
        HyperDual(x[k], (I == k).astype(float), (J == k).astype(float), np.zeros(I.size))
        for k in range(n)
    ]
    outputs = fn(variables)
    N = len(outputs)
    point = np.empty(N)
    first = np.zeros((N, n))
    second = np.zeros((N, n, n))
    diag = np.flatnonzero(I == J)
    for a, y in enumerate(outputs):
        if not isinstance(y, HyperDual):
            point[a] = float(y)
            continue
        point[a] = y.value
        d1 = np.broadcast_to(y.d1, I.shape)
        d12 = np.broadcast_to(y.d12, I.shape)
        first[a, I[diag]] = d1[diag]
        second[a, I, J] = d12
        second[a, J, I] = d12
    return Jet2(point, first, second)


def jet2_hyperdual(spec, x, check_domain: bool = True) -> Jet2:
    """Exact 2-jet of an ``ImmersionSpec`` at chart point ``x``."""
    if check_domain:
        x = spec.check_point(x)
    return jet2_hyperdual_fn(spec.evaluate_generic, x)


def default_fd_steps(x):
    """(first-derivative step, second-derivative step) per coordinate."""
    scale = np.maximum(1.0, np.abs(x))
    return EPS ** (1.0 / 3.0) * scale, EPS ** 0.25 * scale


def jet2_finite_difference(spec, x, h=None) -> Jet2:
    """Central-difference 2-jet; test oracle only.

    ``h`` (scalar or per-coordinate) fixes both steps and the stencil must stay
    inside the domain box.  By default first derivatives use ``cbrt(eps)`` and
    second derivatives ``eps**0.25`` (relative to ``max(1, |x_i|)``), and both
    shrink to fit near the boundary.
    """
    x = spec.check_point(x)
    n = spec.n
    lo = np.array([b[0] for b in spec.domain])
    hi = np.array([b[1] for b in spec.domain])
    room = np.minimum(x - lo, hi - x)
    if h is None:
        h1, h2 = default_fd_steps(x)
        h1 = np.minimum(h1, room)
        h2 = np.minimum(h2, room)
        if np.any(h1 <= 1e-3 * default_fd_steps(x)[0]):
            raise DomainError(f"point {x.tolist()} is on the domain boundary; no stencil fits")
    else:
        h1 = h2 = np.broadcast_to(np.asarray(h, dtype=float), (n,)).copy()
        if np.any(h1 <= 0):
            raise ValueError("finite-difference step must be positive")
        if np.any(h1 > room):
            raise DomainError("finite-difference stencil leaves the domain box")

    f = lambda p: spec.evaluate(p, check_domain=False)  # noqa: E731
    f0 = f(x)
    N = f0.shape[0]
    first = np.empty((N, n))
    second = np.empty((N, n, n))
    E = np.eye(n)
    for i in range(n):
        first[:, i] = (f(x + h1[i] * E[i]) - f(x - h1[i] * E[i])) / (2 * h1[i])
        second[:, i, i] = (f(x + h2[i] * E[i]) - 2 * f0 + f(x - h2[i] * E[i])) / h2[i] ** 2
        for j in range(i + 1, n):
            di, dj = h2[i] * E[i], h2[j] * E[j]
            mixed = (f(x + di + dj) - f(x + di - dj) - f(x - di + dj) + f(x - di - dj)) / (
                4 * h2[i] * h2[j])
            second[:, i, j] = mixed
            second[:, j, i] = mixed
    return Jet2(f0, first, second)
