"""Ambient real space forms and their flat models.

* Euclidean ``E^m``: flat model is ``E^m`` itself.
* Sphere ``S^m(1)``: unit quadric in ``E^{m+1}``.
* Hyperbolic ``H^m(-1)``: upper sheet of ``<u,u> = -1`` in Minkowski ``E^{m+1}_1``,
  with the timelike axis first (``u[0] > 0`` on the sheet).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, KindError

EUCLIDEAN = "euclidean"
SPHERE = "sphere"
HYPERBOLIC = "hyperbolic"

_CURVATURE = {EUCLIDEAN: 0, SPHERE: 1, HYPERBOLIC: -1}


@dataclass(frozen=True)
class SpaceForm:
    kind: str
    m: int

    def __post_init__(self):
        if self.kind not in _CURVATURE:
            raise KindError(f"unknown space form kind {self.kind!r}")
        if int(self.m) != self.m or self.m < 3:
            raise DimensionError(f"space form dimension must be an integer >= 3, got {self.m}")

    @property
    def c(self) -> int:
        return _CURVATURE[self.kind]

    @property
    def flat_dim(self) -> int:
        return self.m if self.kind == EUCLIDEAN else self.m + 1

    @property
    def signature(self) -> np.ndarray:
        sig = np.ones(self.flat_dim)
        if self.kind == HYPERBOLIC:
            sig[0] = -1.0
        return sig

    def label(self) -> str:
        return {EUCLIDEAN: "E", SPHERE: "S", HYPERBOLIC: "H"}[self.kind] + f"^{self.m}({self.c})"


def euclidean(m):
    return SpaceForm(EUCLIDEAN, m)


def sphere(m):
    return SpaceForm(SPHERE, m)


def hyperbolic(m):
    return SpaceForm(HYPERBOLIC, m)


def ambient_inner(sf: SpaceForm, u, v) -> float:
    """Flat-model inner product ``sum_i sig_i u_i v_i``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != sf.flat_dim or v.shape[-1] != sf.flat_dim:
        raise DimensionError(
            f"expected vectors of length {sf.flat_dim}, got {u.shape[-1]} and {v.shape[-1]}")
    return float(np.sum(sf.signature * u * v))


def ambient_inner_many(sf: SpaceForm, U, V):
    """Inner products between the columns of two (N, k) arrays -> (k_U, k_V)."""
    return (np.asarray(U).T * sf.signature) @ np.asarray(V)


class QuadricCheck(NamedTuple):
    residual: float
    ok: bool


def quadric_check(sf: SpaceForm, p, tol: float = 1e-10) -> QuadricCheck:
    """Distance of ``<p,p>`` from the model quadric value, plus a pass flag.

    For hyperbolic space the point must also sit on the upper sheet.
    """
    if sf.kind == EUCLIDEAN:
        raise KindError("quadric_check is undefined for Euclidean space")
    p = np.asarray(p, dtype=float)
    residual = abs(ambient_inner(sf, p, p) - sf.c)
    ok = residual <= tol
    if sf.kind == HYPERBOLIC and not p[0] > 0.0:
        ok = False
    return QuadricCheck(residual, ok)
