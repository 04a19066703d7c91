"""Immersion specifications and the spec document format.

A spec document is UTF-8 text made of ``[section]`` headers followed by
``key=value`` pairs (same line or following lines, whitespace separated,
values optionally double-quoted)::

    [spaceform] kind=euclidean m=4
    [domain]    n=3  x1=0.5:3  x2=-1.2:1.2  x3=-1.5:1.5
    [params]    a=0.6
    [map]       u1="sqrt(1-a^2)*x1"  u2="a*x1*sin(x2)"
                u3="a*x1*cos(x2)*sin(x3)"  u4="a*x1*cos(x2)*cos(x3)"

``[spaceform]`` may also carry ``pad_to=<m'>``, which appends constant-zero
coordinates so the map lands in the larger space form of dimension ``m'``.
Comments start with ``#``.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import ConstraintError, DomainError, ParseError
from .spaceform import SpaceForm

_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")
_COORD_RE = re.compile(r"^u([1-9][0-9]*)$")
_RESERVED = {"pi"} | set(ex.FUNCTION_NAMES)


def variable_names(n):
    return [f"x{i}" for i in range(1, n + 1)]


@dataclass(frozen=True, eq=False)
class ImmersionSpec:
    sf: SpaceForm
    n: int
    coords: tuple
    params: dict
    domain: tuple
    family: Optional[str] = None
    trees: tuple = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n
        if int(n) != n or n < 3:
            raise ConstraintError(f"intrinsic dimension must be an integer >= 3, got {n}")
        if n > self.sf.m:
            raise ConstraintError(f"intrinsic dimension {n} exceeds ambient dimension {self.sf.m}")
        if len(self.coords) != self.sf.flat_dim:
            raise ConstraintError(
                f"{self.sf.kind} space form of dimension {self.sf.m} needs "
                f"{self.sf.flat_dim} coordinates, got {len(self.coords)}")
        if len(self.domain) != n:
            raise ConstraintError(f"domain box has {len(self.domain)} intervals, expected {n}")
        for i, (lo, hi) in enumerate(self.domain):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConstraintError(f"invalid interval for x{i + 1}: {lo}:{hi}")
        for name in self.params:
            if name in _RESERVED or _VAR_RE.match(name):
                raise ConstraintError(f"parameter name {name!r} is reserved")
        names = set(variable_names(n)) | set(self.params)
        trees = []
        for text in self.coords:
            node = text if not isinstance(text, str) else ex.parse_expression(text, names)
            trees.append(node)
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "domain", tuple((float(lo), float(hi)) for lo, hi in self.domain))
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})
        object.__setattr__(self, "trees", tuple(trees))

    @property
    def flat_dim(self):
        return self.sf.flat_dim

    def contains(self, x) -> bool:
        return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, self.domain))

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DomainError(f"chart point must have {self.n} coordinates, got shape {x.shape}")
        if not self.contains(x):
            raise DomainError(f"point {x.tolist()} lies outside the domain box")
        return x

    def evaluate_generic(self, values):
        """Evaluate every coordinate with variables bound to ``values``."""
        env = dict(self.params)
        env.update(zip(variable_names(self.n), values))
        return [ex.evaluate(t, env) for t in self.trees]

    def evaluate(self, x, check_domain=True) -> np.ndarray:
        if check_domain:
            x = self.check_point(x)
        return np.array(self.evaluate_generic([float(v) for v in x]), dtype=float)

    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2 for lo, hi in self.domain])

    def digest(self) -> str:
        return hashlib.sha256(serialize_spec(self).encode()).hexdigest()[:16]


def pad_coords(coords, sf: SpaceForm, pad_to: int):
    """Append zero coordinates so the map lands in the same-kind space form of dimension pad_to."""
    target = SpaceForm(sf.kind, pad_to)
    if pad_to < sf.m:
        raise ConstraintError(f"pad_to={pad_to} is smaller than m={sf.m}")
    return tuple(coords) + ("0",) * (target.flat_dim - sf.flat_dim), target


# -- document format ------------------------------------------------------------

_PAIR_RE = re.compile(r'([A-Za-z_][A-Za-z_0-9]*)\s*=\s*("([^"]*)"|\'([^\']*)\'|[^\s"\']+)')
_SECTIONS = ("spaceform", "domain", "params", "map")


def _strip_comment(line):
    out = []
    quote = None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out)


def _scan(text):
    """Yield (section, key, value, line, value_column) entries."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        pos = 0
        m = re.match(r"\s*\[([A-Za-z_]+)\]", line)
        if m:
            section = m.group(1).lower()
            if section not in _SECTIONS:
                raise ParseError(f"unknown section [{section}]", lineno, m.start(1) + 1)
            pos = m.end()
        while pos < len(line):
            ws = re.match(r"\s*", line[pos:])
            pos += ws.end()
            if pos >= len(line):
                break
            m = _PAIR_RE.match(line, pos)
            if m is None:
                raise ParseError("expected key=value", lineno, pos + 1)
            if section is None:
                raise ParseError("key=value before any [section]", lineno, pos + 1)
            if m.group(3) is not None:
                value, col = m.group(3), m.start(3) + 1
            elif m.group(4) is not None:
                value, col = m.group(4), m.start(4) + 1
            else:
                value, col = m.group(2), m.start(2) + 1
            yield section, m.group(1), value, lineno, col
            pos = m.end()


def _const(text, line, col):
    node = ex.parse_expression(text, names=set(), line=line, column=col)
    return float(ex.evaluate(node, {}))


def parse_spec(text: str) -> ImmersionSpec:
    """Parse a spec document into a fully resolved ``ImmersionSpec``."""
    entries = {s: {} for s in _SECTIONS}
    where = {}
    for section, key, value, line, col in _scan(text):
        if key in entries[section]:
            raise ParseError(f"duplicate key {key!r} in [{section}]", line, col)
        entries[section][key] = value
        where[(section, key)] = (line, col)

    sfe = entries["spaceform"]
    if "kind" not in sfe or "m" not in sfe:
        raise ConstraintError("[spaceform] requires kind= and m=")
    try:
        m = int(sfe["m"])
        n = int(entries["domain"]["n"])
    except KeyError:
        raise ConstraintError("[domain] requires n=") from None
    except ValueError as exc:
        raise ConstraintError(f"dimensions must be integers: {exc}") from None
    extra = set(sfe) - {"kind", "m", "pad_to"}
    if extra:
        raise ConstraintError(f"unknown [spaceform] keys: {sorted(extra)}")
    sf = SpaceForm(sfe["kind"].lower(), m)

    params = {}
    for key, value in entries["params"].items():
        params[key] = _const(value, *where[("params", key)])

    domain = []
    for i in range(1, n + 1):
        key = f"x{i}"
        if key not in entries["domain"]:
            raise ConstraintError(f"[domain] is missing bounds for {key}")
        raw = entries["domain"][key]
        line, col = where[("domain", key)]
        if raw.count(":") != 1:
            raise ParseError(f"bounds for {key} must be lo:hi", line, col)
        lo, hi = raw.split(":")
        domain.append((_const(lo, line, col), _const(hi, line, col + len(lo) + 1)))
    extra = set(entries["domain"]) - {"n"} - set(variable_names(n))
    if extra:
        raise ConstraintError(f"unknown [domain] keys: {sorted(extra)}")

    coords = {}
    for key, value in entries["map"].items():
        cm = _COORD_RE.match(key)
        if cm is None:
            raise ParseError(f"map keys must be u1..uN, got {key!r}", *where[("map", key)])
        coords[int(cm.group(1))] = (value, where[("map", key)])
    if sorted(coords) != list(range(1, len(coords) + 1)):
        raise ConstraintError("map coordinates must be numbered u1..uN without gaps")
    if len(coords) != sf.flat_dim:
        raise ConstraintError(
            f"{sf.kind} m={m} needs {sf.flat_dim} map coordinates, got {len(coords)}")
    names = set(variable_names(n)) | set(params)
    trees = []
    texts = []
    for i in range(1, len(coords) + 1):
        value, (line, col) = coords[i]
        trees.append(ex.parse_expression(value, names, line, col))
        texts.append(value)

    spec = ImmersionSpec(sf, n, tuple(texts), params, tuple(domain))
    if "pad_to" in sfe:
        padded, target = pad_coords(spec.coords, sf, int(sfe["pad_to"]))
        spec = ImmersionSpec(target, n, padded, params, tuple(domain))
    return spec


def _num(v):
    return repr(float(v))


def serialize_spec(spec: ImmersionSpec) -> str:
    """Render a spec as a document that ``parse_spec`` reads back exactly."""
    lines = [f"[spaceform] kind={spec.sf.kind} m={spec.sf.m}"]
    bounds = "  ".join(f"x{i}={_num(lo)}:{_num(hi)}"
                       for i, (lo, hi) in enumerate(spec.domain, start=1))
    lines.append(f"[domain] n={spec.n}  {bounds}")
    lines.append("[params]" + "".join(f" {k}={_num(v)}" for k, v in sorted(spec.params.items())))
    lines.append("[map]")
    for i, text in enumerate(spec.coords, start=1):
        lines.append(f'  u{i}="{text}"')
    return "\n".join(lines) + "\n"
