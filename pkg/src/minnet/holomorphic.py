"""Discrete holomorphic functions with cross-ratio type conformality.

A grid g : domain -> C ∪ {∞} is discrete holomorphic for edge labels
(alpha, beta) when every elementary quad satisfies
cr(g_i, g_j, g_k, g_l) = alpha(m)/beta(n).

The discrete power function z^gamma is built here for gamma in (0,2) from
the axis recurrence

    gamma * g_m = 2m * (g_{m+1}-g_m)(g_m-g_{m-1}) / (g_{m+1}-g_{m-1})

with seeds g_{0,0}=0, g_{1,0}=1, g_{0,1}=exp(i*gamma*pi/2), the interior
filled by cross-ratio -1 propagation.  For gamma in (2,4) the grid is the
scalar Christoffel dual of the inverted conjugate power grid of exponent
gamma-2, which lives on the quadrant minus the origin.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import (AtInfinity, ClosureFailure, DegenerateQuad, PoleOnGrid,
                     UnsupportedGamma, ZeroDg)
from .mobius import CNum, INF, cross_ratio_complex, is_inf, sphere_distinct
from .net import CheckReport, EdgeLabels, LatticeDomain, Quad, Vertex


@dataclass
class HoloGrid:
    """Discrete holomorphic function candidate with its edge labels."""

    domain: LatticeDomain
    values: dict[Vertex, CNum]
    labels: EdgeLabels

    def __post_init__(self):
        self.values = {tuple(v): (val if is_inf(val) else complex(val))
                       for v, val in self.values.items()}
        for v in self.domain.vertices:
            if v not in self.values:
                raise ValueError(f"missing value at vertex {v}")
        for a, b in self.domain.edges():
            if not sphere_distinct(self.values[a], self.values[b], 1e-14 * self.scale()):
                raise ValueError(f"coincident neighboring values on edge {a}-{b}")

    def __getitem__(self, v: Vertex) -> CNum:
        return self.values[v]

    def quad_values(self, q: Quad) -> list[CNum]:
        return [self.values[v] for v in self.domain.quad_vertices(q)]

    def scale(self) -> float:
        finite = [abs(v) for v in self.values.values() if not is_inf(v)]
        return max(max(finite), 1.0) if finite else 1.0

    def infinity_vertices(self) -> list[Vertex]:
        return [v for v in self.domain.vertices if is_inf(self.values[v])]

    def transformed(self, fn) -> "HoloGrid":
        return HoloGrid(self.domain, {v: fn(val) for v, val in self.values.items()},
                        self.labels)


def validate_holomorphic(grid: HoloGrid, tol: float = 1e-9) -> CheckReport:
    """Per-quad residual |cr - alpha/beta| relative to max(1, |alpha/beta|)."""
    max_res, worst = 0.0, None
    for q in grid.domain.quads:
        target = grid.labels.ratio(q)
        vals = grid.quad_values(q)
        # shift by a finite value for conditioning; cr is translation invariant
        shift = next((v for v in vals if not is_inf(v)), 0j)
        vals = [v if is_inf(v) else v - shift for v in vals]
        try:
            cr = cross_ratio_complex(*vals)
        except DegenerateQuad:
            cr = INF
        res = float("inf") if is_inf(cr) else abs(cr - target) / max(1.0, abs(target))
        if res > max_res:
            max_res, worst = res, q
    return CheckReport(max_res <= tol, max_res, worst)


def propagate_fourth(g1: CNum, g2: CNum, g4: CNum, q: float,
                     allow_infinity: bool = True) -> CNum:
    """Solve cr(g1, g2, g3, g4) = q for g3.

    For finite inputs g3 = (q*B*g2 + A*g4) / (A + q*B) with A = g1-g2,
    B = g4-g1.  A vanishing denominator puts g3 at infinity: returned as
    INF, or raised as AtInfinity when allow_infinity is false.
    """
    if q == 0:
        raise DegenerateQuad("cross ratio target must be nonzero")
    for a, b in ((g1, g2), (g1, g4), (g2, g4)):
        if not sphere_distinct(a, b):
            raise DegenerateQuad("propagation inputs coincide")

    if is_inf(g1):
        # cr -> -(g2-g3)^-1 (g3-g4) = q
        if q == 1.0:
            result = INF
        else:
            result = (g4 - q * g2) / (1.0 - q)
    elif is_inf(g2):
        # cr -> -(g3-g4)(g4-g1)^-1 = q
        result = g4 - q * (g4 - g1)
    elif is_inf(g4):
        # cr -> -(g1-g2)(g2-g3)^-1 = q
        result = g2 + (g1 - g2) / q
    else:
        a = g1 - g2
        b = g4 - g1
        den = a + q * b
        if abs(den) <= 1e-15 * max(abs(a), abs(q * b), 1e-300):
            result = INF
        else:
            result = (q * b * g2 + a * g4) / den

    if is_inf(result) and not allow_infinity:
        raise AtInfinity("propagated vertex at infinity")
    return result


# ---------------------------------------------------------------------------
# Discrete power function
# ---------------------------------------------------------------------------

def _axis_radii(gamma: float, count: int) -> list[float]:
    """Radii 0=rho_0 < rho_1=1 < ... from the power-function axis recurrence."""
    rho = [0.0, 1.0]
    for m in range(1, count):
        num = gamma * rho[m - 1] - 2 * m * (rho[m] - rho[m - 1])
        den = gamma * rho[m] - 2 * m * (rho[m] - rho[m - 1])
        if abs(den) < 1e-300:
            raise UnsupportedGamma(f"axis recurrence degenerate at m={m}")
        rho.append(rho[m] * num / den)
    return rho


def _sweep_interior(domain: LatticeDomain, values: dict[Vertex, CNum]) -> None:
    """Fill unset vertices by cr=-1 propagation, sweeping m+n, ties by m."""
    todo = sorted((v for v in domain.vertices if v not in values),
                  key=lambda v: (v[0] + v[1], v[0]))
    for (m, n) in todo:
        src = ((m - 1, n - 1), (m, n - 1), (m - 1, n))
        if not all(s in values for s in src):
            raise ValueError(f"cannot propagate value at {(m, n)}")
        values[(m, n)] = propagate_fourth(values[src[0]], values[src[1]],
                                          values[src[2]], -1.0)


def _power_small(gamma: float, m_extent: int, n_extent: int) -> HoloGrid:
    domain = LatticeDomain((0, m_extent), (0, n_extent))
    rho = _axis_radii(gamma, max(m_extent, n_extent))
    # exact quarter turn keeps z^1 the integer lattice
    seed_dir = 1j if gamma == 1.0 else cmath.exp(1j * gamma * math.pi / 2)
    values: dict[Vertex, CNum] = {(0, 0): 0j}
    for m in range(1, m_extent + 1):
        values[(m, 0)] = complex(rho[m])
    for n in range(1, n_extent + 1):
        values[(0, n)] = rho[n] * seed_dir
    _sweep_interior(domain, values)
    return HoloGrid(domain, values, EdgeLabels.constant(domain))


def _scalar_dual(domain: LatticeDomain, values: dict[Vertex, CNum],
                 labels: EdgeLabels, root: Vertex,
                 tol: float = 1e-9) -> dict[Vertex, complex]:
    """Planar Christoffel dual: integrate d(g*) = label / conj(dg) from root."""
    def increment(a: Vertex, b: Vertex) -> complex:
        dg = values[b] - values[a]
        if abs(dg) < 1e-300:
            raise ZeroDg(f"zero difference on edge {a}-{b}")
        lab = labels.alpha_at(min(a[0], b[0])) if a[1] == b[1] \
            else labels.beta_at(min(a[1], b[1]))
        return lab / dg.conjugate()

    dual: dict[Vertex, complex] = {root: 0j}
    queue = [root]
    while queue:
        v = queue.pop(0)
        for w in domain.neighbors(v):
            if w not in dual:
                dual[w] = dual[v] + increment(v, w)
                queue.append(w)
    # loop closure around every quad
    scale = max(abs(x) for x in dual.values()) or 1.0
    for q in domain.quads:
        i, j, k, l = domain.quad_vertices(q)
        loop = increment(i, j) + increment(j, k) - increment(l, k) - increment(i, l)
        if abs(loop) > tol * scale:
            raise ClosureFailure(f"dual integration fails to close on quad {q}")
    return dual


def _power_large(gamma: float, m_extent: int, n_extent: int) -> HoloGrid:
    """z^gamma for gamma in (2,4): dual of 1/conj(z^(gamma-2)), origin masked."""
    base = _power_small(gamma - 2.0, m_extent, n_extent)
    domain = LatticeDomain((0, m_extent), (0, n_extent), frozenset({(0, 0)}))
    inverted = {v: 1.0 / base.values[v].conjugate() for v in domain.vertices}
    labels = EdgeLabels.constant(domain)
    dual = _scalar_dual(domain, inverted, labels, root=(1, 0))
    values: dict[Vertex, CNum] = {v: -dual[v] for v in domain.vertices}
    return HoloGrid(domain, values, labels)


def power_function(gamma: float, m_extent: int, n_extent: int) -> HoloGrid:
    """Discrete z^gamma on [0,m_extent] x [0,n_extent] with cr = -1 quads.

    Boundary rows satisfy g_{m,0} real nonnegative increasing and g_{0,n}
    on the ray arg = gamma*pi/2.  For gamma in (2,4) the origin vertex is
    masked and the grid starts immersed at (1,0)/(0,1).
    """
    if m_extent < 2 or n_extent < 2:
        raise ValueError("grid extents must be at least 2")
    if gamma <= 0.0 or gamma == 2.0 or gamma >= 4.0:
        raise UnsupportedGamma(f"gamma={gamma} outside (0,2) ∪ (2,4)")
    if gamma < 2.0:
        return _power_small(gamma, m_extent, n_extent)
    return _power_large(gamma, m_extent, n_extent)


# ---------------------------------------------------------------------------
# Möbius maps on grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MobiusSimilarity:
    """z ↦ a*z + b with a nonzero."""

    a: complex
    b: complex = 0j

    def __call__(self, z: CNum) -> CNum:
        if is_inf(z):
            return INF
        return self.a * z + self.b


@dataclass(frozen=True)
class MobiusInversion:
    """z ↦ 1/z; swaps 0 and ∞."""

    def __call__(self, z: CNum) -> CNum:
        if is_inf(z):
            return 0j
        if z == 0:
            return INF
        return 1.0 / z


def mobius_apply(grid: HoloGrid, mapping) -> HoloGrid:
    """Apply a similarity or inversion; labels and cross ratios are unchanged.

    Raises PoleOnGrid when the image has coincident neighboring values
    (e.g. two neighbors both sent to infinity).
    """
    if isinstance(mapping, MobiusSimilarity) and mapping.a == 0:
        raise ValueError("similarity must be invertible")
    new_values = {v: mapping(val) for v, val in grid.values.items()}
    scale = max([abs(v) for v in new_values.values() if not is_inf(v)], default=1.0)
    for a, b in grid.domain.edges():
        if not sphere_distinct(new_values[a], new_values[b], 1e-14 * max(scale, 1.0)):
            raise PoleOnGrid(f"image values coincide on edge {a}-{b}")
    return HoloGrid(grid.domain, new_values, grid.labels)


# ---------------------------------------------------------------------------
# Serialization (values as planar points plus an infinity tag list)
# ---------------------------------------------------------------------------

def write_grid(path, grid: HoloGrid) -> None:
    from .net import Net3, net_to_json, _dump
    positions = {}
    for v in grid.domain.vertices:
        val = grid.values[v]
        positions[v] = (0.0, 0.0, 0.0) if is_inf(val) else (val.real, val.imag, 0.0)
    import numpy as np
    carrier = Net3(grid.domain, {v: np.array(p) for v, p in positions.items()},
                   check_edges=False)
    doc = net_to_json(carrier, grid.labels, infinity=grid.infinity_vertices())
    with open(path, "w") as fh:
        fh.write(_dump(doc))
        fh.write("\n")


def read_grid(path) -> HoloGrid:
    import json

    from .errors import ParseError
    from .net import json_to_bundle
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    bundle = json_to_bundle(doc, check_edges=False)
    if bundle.labels is None:
        raise ParseError("grid file must carry alpha/beta labels")
    infinity = {tuple(v) for v in doc.get("infinity", [])}
    values: dict[Vertex, CNum] = {}
    for v in bundle.net.domain.vertices:
        if v in infinity:
            values[v] = INF
        else:
            p = bundle.net.positions[v]
            values[v] = complex(p[0], p[1])
    return HoloGrid(bundle.net.domain, values, bundle.labels)
