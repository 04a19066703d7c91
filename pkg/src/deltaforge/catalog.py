"""Built-in catalog of the classified non-minimal ideal families with type number <= 2.

Each family is stored in its effective codimension-one form: ``E^{n+1}`` for
EUCLID_T1, ``S^{n+1}(1) in E^{n+2}`` for SPHERE_T2, ``H^{n+1}(-1) in E^{n+2}_1``
for the hyperbolic families.  ``pad_to`` appends zero coordinates.

Conventions shared by the formulas below (empty products are 1):

* ``C = prod_{j<=n-3} cosh x_j`` and ``F = a sinh x_{n-2} + b cosh x_{n-2}``
  for the hyperbolic families, whose warping function is ``F*C``;
* the unit-sphere / hyperbolic chains ``sin x_k prod_{j<k} cos x_j`` and
  ``sinh x_k prod_{j<k} cosh x_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, RangeError, SingularPointError
from .immersion import ImmersionSpec, pad_coords
from .spaceform import EUCLIDEAN, HYPERBOLIC, SPHERE, SpaceForm

EUCLID_T1 = "EUCLID_T1"
SPHERE_T2 = "SPHERE_T2"
HYP_A = "HYP_A"
HYP_B = "HYP_B"
HYP_C = "HYP_C"


@dataclass(frozen=True)
class CatalogFamily:
    id: str
    kind: str
    min_n: int
    params: tuple
    defaults: dict
    constraint: str
    description: str

    def check(self, params):
        missing = [p for p in self.params if p not in params]
        if missing:
            raise ConstraintError(f"{self.id} requires parameters {missing}")
        extra = set(params) - set(self.params)
        if extra:
            raise ConstraintError(f"{self.id} does not take parameters {sorted(extra)}")
        a = params["a"]
        b = params.get("b", 0.0)
        ok = {
            EUCLID_T1: 0.0 < a < 1.0,
            SPHERE_T2: 0.0 < a < 1.0,
            HYP_A: a * a < 1.0 + b * b,
            HYP_B: a * a < b * b,
            HYP_C: 1.0 + a * a < b * b,
        }[self.id]
        if not ok:
            raise ConstraintError(f"{self.id} requires {self.constraint}; got {params}")


FAMILIES = {
    EUCLID_T1: CatalogFamily(
        EUCLID_T1, EUCLIDEAN, 3, ("a",), {"a": 0.6}, "0<a<1",
        "warped product E^{n-2} x_{a x1} S^2 in E^{n+1}"),
    SPHERE_T2: CatalogFamily(
        SPHERE_T2, SPHERE, 3, ("a",), {"a": 0.6}, "0<a<1",
        "warped product S^{n-2} x_{a sin x1} S^2 in S^{n+1}(1)"),
    HYP_A: CatalogFamily(
        HYP_A, HYPERBOLIC, 4, ("a", "b"), {"a": 0.0, "b": 1.0}, "a^2<1+b^2",
        "warped product with round 2-sphere fibre in H^{n+1}(-1)"),
    HYP_B: CatalogFamily(
        HYP_B, HYPERBOLIC, 4, ("a", "b"), {"a": 0.0, "b": 1.0}, "a^2<b^2",
        "warped product with flat fibre in H^{n+1}(-1)"),
    HYP_C: CatalogFamily(
        HYP_C, HYPERBOLIC, 4, ("a", "b"), {"a": 0.0, "b": math.sqrt(2.0)}, "1+a^2<b^2",
        "warped product with hyperbolic-plane fibre in H^{n+1}(-1)"),
}


def get_family(family_id) -> CatalogFamily:
    try:
        return FAMILIES[str(family_id).upper()]
    except KeyError:
        raise ConstraintError(
            f"unknown catalog family {family_id!r}; choose from {sorted(FAMILIES)}") from None


def _validate(family_id, n, params):
    fam = get_family(family_id)
    if int(n) != n or n < fam.min_n:
        raise RangeError(f"{fam.id} requires n >= {fam.min_n}, got {n}")
    params = {k: float(v) for k, v in params.items()}
    fam.check(params)
    return fam, params


def _prod(factors):
    return "*".join(factors) if factors else "1"


def _cos_chain(n):
    """sqrt(1-a^2) sin x1, sin x_k prod_{j<k} cos x_j (k=2..n-2), prod_{j<=n-2} cos x_j."""
    out = ["sqrt(1-a^2)*sin(x1)"]
    for k in range(2, n - 1):
        out.append(_prod([f"sin(x{k})"] + [f"cos(x{j})" for j in range(1, k)]))
    out.append(_prod([f"cos(x{j})" for j in range(1, n - 1)]))
    return out


def _sinh_chain(n):
    """sinh x_k prod_{j<k} cosh x_j for k = 1..n-3."""
    return [_prod([f"sinh(x{k})"] + [f"cosh(x{j})" for j in range(1, k)])
            for k in range(1, n - 2)]


def _coordinates(family_id, n):
    p, q = f"x{n - 1}", f"x{n}"
    if family_id == EUCLID_T1:
        return (["sqrt(1-a^2)*x1"] + [f"x{k}" for k in range(2, n - 1)]
                + [f"a*x1*sin({p})", f"a*x1*cos({p})*sin({q})", f"a*x1*cos({p})*cos({q})"])
    if family_id == SPHERE_T2:
        return _cos_chain(n) + [f"a*sin(x1)*sin({p})", f"a*sin(x1)*cos({p})*sin({q})",
                                f"a*sin(x1)*cos({p})*cos({q})"]
    s = f"x{n - 2}"
    C = _prod([f"cosh(x{j})" for j in range(1, n - 2)])
    F = f"(a*sinh({s})+b*cosh({s}))"
    chain = _sinh_chain(n)
    if family_id == HYP_A:
        return ([f"(a*b*sinh({s})+(1+b^2)*cosh({s}))/sqrt(1+b^2)*{C}"] + chain
                + [f"sqrt(1-a^2+b^2)/sqrt(1+b^2)*sinh({s})*{C}",
                   f"{F}*cos({p})*cos({q})*{C}",
                   f"{F}*cos({p})*sin({q})*{C}",
                   f"{F}*sin({p})*{C}"])
    if family_id == HYP_B:
        r2 = f"({p}^2+{q}^2)"
        return ([f"(a*(b^4-4+4*b^2*{r2})*sinh({s})+b*(b^4+4+4*b^2*{r2})*cosh({s}))/(4*b^3)*{C}",
                 f"(a*(b^4+4-4*b^2*{r2})*sinh({s})+b*(b^4-4-4*b^2*{r2})*cosh({s}))/(4*b^3)*{C}"]
                + chain
                + [f"sqrt(b^2-a^2)/b*sinh({s})*{C}",
                   f"{F}*{p}*{C}",
                   f"{F}*{q}*{C}"])
    if family_id == HYP_C:
        return ([f"{F}*cosh({p})*cosh({q})*{C}",
                 f"{F}*cosh({p})*sinh({q})*{C}",
                 f"{F}*sinh({p})*{C}"]
                + chain
                + [f"sqrt(b^2-a^2-1)/sqrt(1+a^2)*{C}*cosh({s})",
                   f"(a*b*cosh({s})+(1+a^2)*sinh({s}))/sqrt(1+a^2)*{C}"])
    raise ConstraintError(f"unknown family {family_id!r}")


def default_domain(family_id, n):
    """Sampling box that keeps clear of chart and curvature singularities."""
    fam = get_family(family_id)
    if fam.id == EUCLID_T1:
        box = [(0.5, 3.0)] + [(-1.5, 1.5)] * (n - 3) + [(-1.2, 1.2), (-1.5, 1.5)]
    elif fam.id == SPHERE_T2:
        # for n >= 4 the cos x1 factor of the S^{n-2} chart vanishes at x1 = pi/2
        first = (0.3, math.pi - 0.3) if n == 3 else (0.3, math.pi / 2 - 0.3)
        box = [first] + [(-1.2, 1.2)] * (n - 4) + [(-1.5, 1.5)] * min(1, n - 3) \
            + [(-1.2, 1.2), (-1.5, 1.5)]
    else:
        box = [(-1.5, 1.5)] * n
    return tuple(box)


def build_catalog(family_id, n, params=None, pad_to=None, domain=None) -> ImmersionSpec:
    fam = get_family(family_id)
    params = dict(fam.defaults if params is None else params)
    fam, params = _validate(fam.id, n, params)
    m = n + 1
    sf = SpaceForm(fam.kind, m)
    coords = tuple(_coordinates(fam.id, n))
    if pad_to is not None:
        coords, sf = pad_coords(coords, sf, pad_to)
    return ImmersionSpec(sf, n, coords, params, domain or default_domain(fam.id, n), fam.id)


# -- closed forms -------------------------------------------------------------------

def _hyp_parts(n, params, x):
    a, b = params["a"], params["b"]
    s = x[n - 3]
    C = math.prod(math.cosh(x[j]) for j in range(n - 3))
    F = a * math.sinh(s) + b * math.cosh(s)
    return a, b, C, F


def closed_form_metric(family_id, n, params, x) -> np.ndarray:
    """Diagonal warped-product metric of the family at chart point x."""
    fam, params = _validate(family_id, n, params)
    x = np.asarray(x, dtype=float)
    a = params["a"]
    d = np.empty(n)
    if fam.id == EUCLID_T1:
        d[: n - 2] = 1.0
        w = (a * x[0]) ** 2
        d[n - 2] = w
        d[n - 1] = w * math.cos(x[n - 2]) ** 2
    elif fam.id == SPHERE_T2:
        acc = 1.0
        for k in range(n - 2):
            d[k] = acc
            acc *= math.cos(x[k]) ** 2
        w = (a * math.sin(x[0])) ** 2
        d[n - 2] = w
        d[n - 1] = w * math.cos(x[n - 2]) ** 2
    else:
        acc = 1.0
        for k in range(n - 2):
            d[k] = acc
            acc *= math.cosh(x[k]) ** 2
        _, _, C, F = _hyp_parts(n, params, x)
        w = (F * C) ** 2
        d[n - 2] = w
        fibre = {HYP_A: math.cos(x[n - 2]) ** 2, HYP_B: 1.0, HYP_C: math.cosh(x[n - 2]) ** 2}
        d[n - 1] = w * fibre[fam.id]
    return np.diag(d)


def closed_form_lambda(family_id, n, params, x) -> float:
    """The nonzero principal curvature (multiplicity two) of the family at x."""
    fam, params = _validate(family_id, n, params)
    x = np.asarray(x, dtype=float)
    a = params["a"]
    if fam.id == EUCLID_T1:
        den = a * x[0]
        num = math.sqrt(1.0 - a * a)
    elif fam.id == SPHERE_T2:
        den = a * math.sin(x[0])
        num = math.sqrt(1.0 - a * a)
    else:
        _, b, C, F = _hyp_parts(n, params, x)
        den = F * C
        num = math.sqrt({HYP_A: 1.0 - a * a + b * b,
                         HYP_B: b * b - a * a,
                         HYP_C: b * b - a * a - 1.0}[fam.id])
    if abs(den) < 1e-12:
        raise SingularPointError(f"{fam.id} principal curvature is singular at x={x.tolist()}")
    return num / den


def family_metric_fn(spec: ImmersionSpec):
    """x -> closed-form metric for a catalog spec, or None for user specs."""
    if spec.family is None:
        return None
    fam_id, n, params = spec.family, spec.n, dict(spec.params)
    return lambda x: closed_form_metric(fam_id, n, params, x)
