"""Boundary-value solver for cross-ratio -1 holomorphic grids.

The k-noid problem prescribes, on [0,m_max] x [0,n_max]:

  - g_{0,0} = 0 and g_{0,n_max} = exp(i(k-1)pi/k),
  - g_{m,0} in [0,1) strictly increasing,
  - g_{0,n} = r_n exp(i(k-1)pi/k) with r_n in [0,1] strictly increasing,
  - g_{m,n_max} = exp(i theta_m) with theta_m strictly decreasing,
  - cross ratio -1 on every quad, and g inside the pie wedge D_k.

The target region is a circular-arc triangle: two straight sides through
the origin meeting at (k-1)pi/k, closed by the unit circle, with the
puncture 1 (the catenoidal end) excluded.  Monotone boundary sequences are
encoded through cumulative exponentials so that every unconstrained
parameter vector is feasible.

knoid_residual implements the shooting form: the interior is propagated
from the m=0 column and n=0 row, and the residual compares the
reconstructed top row against the unit circle plus containment penalties.
Shooting alone turns out to be badly conditioned (propagation across the
grid amplifies boundary perturbations and drags optimizers into collapsed
configurations), so solve_knoid minimizes the equivalent collocation
system instead: all interior vertices are unknowns and every quad
contributes its cross-ratio deviation directly.  Both reach the same
solutions; the shooting residual remains the verification surface.

Platonic presets replace the wedge/circle data by the Möbius-triangle data
of the rotation group: sides meeting at (pi/2, pi/3, pi/3) for the
tetrahedral group and (pi/2, pi/3, pi/4) for the octahedral group, again
with one corner serving as the catenoidal-end puncture on the real axis.
They are solved by continuation in the corner angles starting from the
(pi/2, pi/2, pi/2) catenoid triangle, re-seeding each stage through the
Möbius map that matches the corner points (which preserves cross ratios).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (AtInfinity, DegenerateQuad, InfeasibleSpec, NoConvergence,
                     PropagationBlowup)
from .holomorphic import HoloGrid, propagate_fourth, validate_holomorphic
from .net import EdgeLabels, LatticeDomain, Vertex

EXP_CLIP = 300.0


# ---------------------------------------------------------------------------
# Specs and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundarySpec:
    """k-noid boundary data: symmetry order k and grid truncation."""

    k: int
    n_max: int
    m_max: int

    def __post_init__(self):
        if self.k < 3:
            raise InfeasibleSpec("k must be at least 3")
        if self.n_max < 1:
            raise InfeasibleSpec("n_max must be at least 1")
        if self.m_max < self.n_max:
            raise InfeasibleSpec("m_max must be at least n_max")

    @property
    def ray_angle(self) -> float:
        return (self.k - 1) * math.pi / self.k

    @property
    def corner_value(self) -> complex:
        return cmath.exp(1j * self.ray_angle)

    def region_distance(self, z: complex) -> float:
        """Penalty distance to the wedge {r <= 1, 0 <= arg <= ray_angle}."""
        r = abs(z)
        radial = max(0.0, r - 1.0)
        ang = math.atan2(z.imag, z.real)
        angular = max(0.0, -ang, ang - self.ray_angle) * max(r, 1e-12)
        return max(radial, angular)


@dataclass
class SolveResult:
    """Solved grid with residual maxima and total iteration count."""

    grid: HoloGrid
    residuals: dict[str, float]
    iterations: int
    converged: bool
    params: np.ndarray | None = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# Monotone encodings (total: every real vector decodes to a valid sequence)
# ---------------------------------------------------------------------------

def _increasing_open(u: np.ndarray, upper: float) -> np.ndarray:
    """Strictly increasing sequence in (0, upper), never reaching upper."""
    s = np.cumsum(np.exp(np.clip(u, -EXP_CLIP, EXP_CLIP)))
    return upper * s / (s[-1] + 1.0)


def _increasing_open_inverse(r: np.ndarray, upper: float) -> np.ndarray:
    r = np.minimum(np.asarray(r, dtype=float), upper * (1.0 - 1e-12))
    s_last = r[-1] / (upper - r[-1])
    s = r / upper * (s_last + 1.0)
    return np.log(np.maximum(np.diff(np.concatenate(([0.0], s))), 1e-300))


def _increasing_closed(v: np.ndarray, upper: float) -> np.ndarray:
    """Strictly increasing interior points of (0, upper); the successor of
    the last point is pinned at upper."""
    if len(v) == 0:
        return np.empty(0)
    s = np.cumsum(np.exp(np.clip(v, -EXP_CLIP, EXP_CLIP)))
    return upper * s / (s[-1] + 1.0)


def _increasing_closed_inverse(r: np.ndarray, upper: float) -> np.ndarray:
    if len(r) == 0:
        return np.empty(0)
    r = np.minimum(np.asarray(r, dtype=float), upper * (1.0 - 1e-12))
    total = 1.0 / (1.0 - r[-1] / upper)
    s = r / upper * total
    return np.log(np.maximum(np.diff(np.concatenate(([0.0], s))), 1e-300))


def _decreasing_from(w: np.ndarray, top: float) -> np.ndarray:
    """Strictly decreasing sequence in (0, top) starting below top."""
    s = np.cumsum(np.exp(np.clip(w, -EXP_CLIP, EXP_CLIP)))
    return top * (1.0 - s / (s[-1] + 1.0))


def _decreasing_from_inverse(theta: np.ndarray, top: float) -> np.ndarray:
    frac = np.clip(1.0 - np.asarray(theta, dtype=float) / top, 1e-12, 1 - 1e-12)
    s_last = frac[-1] / (1.0 - frac[-1])
    s = frac * (s_last + 1.0)
    return np.log(np.maximum(np.diff(np.concatenate(([0.0], s))), 1e-300))


def _monotone_floor(r) -> np.ndarray:
    """Nudge a nearly-monotone sequence to be strictly increasing."""
    out = np.maximum.accumulate(np.asarray(r, dtype=float))
    for i in range(1, len(out)):
        if out[i] <= out[i - 1]:
            out[i] = out[i - 1] * (1 + 1e-9) + 1e-12
    return out


# ---------------------------------------------------------------------------
# k-noid parameters and shooting residual
# ---------------------------------------------------------------------------

def _split_params(params: np.ndarray, spec: BoundarySpec):
    m, n = spec.m_max, spec.n_max
    if len(params) != 2 * m + n - 1:
        raise ValueError(f"expected {2 * m + n - 1} parameters, got {len(params)}")
    return params[:m], params[m:m + n - 1], params[m + n - 1:]


def decode_knoid_params(params: np.ndarray, spec: BoundarySpec):
    """Parameter vector -> (row radii, column radii, arc angles), monotone."""
    u, v, w = _split_params(np.asarray(params, dtype=float), spec)
    return (_increasing_open(u, 1.0), _increasing_closed(v, 1.0),
            _decreasing_from(w, spec.ray_angle))


def encode_knoid_params(row: np.ndarray, col: np.ndarray, thetas: np.ndarray,
                        spec: BoundarySpec) -> np.ndarray:
    return np.concatenate([
        _increasing_open_inverse(row, 1.0),
        _increasing_closed_inverse(col, 1.0),
        _decreasing_from_inverse(thetas, spec.ray_angle),
    ])


def _propagate_grid(spec: BoundarySpec, row: np.ndarray, col: np.ndarray
                    ) -> dict[Vertex, complex]:
    """Interior fill by cr=-1 propagation from the m=0 column and n=0 row."""
    values: dict[Vertex, complex] = {(0, 0): 0j}
    direction = cmath.exp(1j * spec.ray_angle)
    for m in range(1, spec.m_max + 1):
        values[(m, 0)] = complex(row[m - 1])
    for n in range(1, spec.n_max):
        values[(0, n)] = col[n - 1] * direction
    values[(0, spec.n_max)] = spec.corner_value
    for n in range(1, spec.n_max + 1):
        for m in range(1, spec.m_max + 1):
            try:
                g3 = propagate_fourth(values[(m - 1, n - 1)], values[(m, n - 1)],
                                      values[(m - 1, n)], -1.0, allow_infinity=False)
            except (AtInfinity, DegenerateQuad) as exc:
                raise PropagationBlowup(f"propagation failed at {(m, n)}: {exc}") from exc
            if not (np.isfinite(g3.real) and np.isfinite(g3.imag)):
                raise PropagationBlowup(f"non-finite value at {(m, n)}")
            values[(m, n)] = g3
    return values


def knoid_residual(params: np.ndarray, spec: BoundarySpec) -> np.ndarray:
    """Shooting residual of the k-noid problem.

    Components: per-quad cross-ratio deviations from -1 (zero up to
    roundoff since the interior is the exact propagation), the deviation
    |g_{m,n_max}| - 1 of the reconstructed top row from the unit circle,
    and the wedge containment penalty of every vertex.  The arc-angle
    block of the parameter vector determines no residual component; the
    realized angles are the arguments of the reconstructed top row.
    """
    row, col, _ = decode_knoid_params(params, spec)
    values = _propagate_grid(spec, row, col)
    out = []
    for q_m in range(spec.m_max):
        for q_n in range(spec.n_max):
            cr = _cr4(values[(q_m, q_n)], values[(q_m + 1, q_n)],
                      values[(q_m + 1, q_n + 1)], values[(q_m, q_n + 1)])
            out.append(abs(cr + 1.0))
    for m in range(1, spec.m_max + 1):
        out.append(abs(values[(m, spec.n_max)]) - 1.0)
    for v in sorted(values):
        out.append(spec.region_distance(values[v]))
    return np.array(out)


def knoid_metrics(params: np.ndarray, spec: BoundarySpec) -> dict[str, float]:
    """Max residuals of the shooting reconstruction for given parameters."""
    row, col, _ = decode_knoid_params(params, spec)
    values = _propagate_grid(spec, row, col)
    boundary = max(abs(abs(values[(m, spec.n_max)]) - 1.0)
                   for m in range(1, spec.m_max + 1))
    containment = max(spec.region_distance(values[v]) for v in values)
    return {"boundary": boundary, "containment": containment}


def smooth_knoid_seed(spec: BoundarySpec) -> np.ndarray:
    """Seed from g(w) = (tanh w)^((2k-2)/k) on a uniform square w-grid."""
    g = _smooth_knoid_map(spec)
    h = (math.pi / 4.0) / spec.n_max
    row = np.array([g(m * h).real for m in range(1, spec.m_max + 1)])
    col = np.array([abs(g(1j * n * h)) for n in range(1, spec.n_max)])
    thetas = np.array([cmath.phase(g(m * h + 1j * math.pi / 4.0))
                       for m in range(1, spec.m_max + 1)])
    return encode_knoid_params(row, col, thetas, spec)


def _smooth_knoid_map(spec: BoundarySpec):
    power = (2.0 * spec.k - 2.0) / spec.k

    def g(w: complex) -> complex:
        t = cmath.tanh(w)
        if t == 0:
            return 0j
        return cmath.exp(power * cmath.log(t))

    return g


# ---------------------------------------------------------------------------
# Damped least squares
# ---------------------------------------------------------------------------

def _cr4(a: complex, b: complex, c: complex, d: complex) -> complex:
    den = (b - c) * (d - a)
    if den == 0:
        return complex(1e9, 0.0)
    return ((a - b) * (c - d)) / den


def _jacobian(fun, x: np.ndarray, r0: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian, tolerant of blowups at trial points."""
    jac = np.empty((len(r0), len(x)))
    for i in range(len(x)):
        step = 1e-6 * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += step
        xm = x.copy()
        xm[i] -= step
        try:
            jac[:, i] = (fun(xp) - fun(xm)) / (2.0 * step)
        except PropagationBlowup:
            try:
                jac[:, i] = (fun(xp) - r0) / step
            except PropagationBlowup:
                try:
                    jac[:, i] = (r0 - fun(xm)) / step
                except PropagationBlowup:
                    jac[:, i] = 0.0
    return jac


def levenberg_marquardt(fun, x0: np.ndarray, converged, max_iter: int = 500,
                        lam0: float = 1e-3, lam_down: float = 0.5,
                        lam_up: float = 4.0, lam_cap: float = 1e14):
    """Damped Gauss-Newton with multiplicative damping schedule.

    fun may raise PropagationBlowup at a trial point; the step is rejected
    like any non-decreasing step.  Returns (x, iterations, success).
    """
    x = np.asarray(x0, dtype=float).copy()
    r = fun(x)
    cost = float(r @ r)
    lam = lam0
    for it in range(1, max_iter + 1):
        if converged(x):
            return x, it - 1, True
        jac = _jacobian(fun, x, r)
        a = jac.T @ jac
        g = jac.T @ r
        stepped = False
        while lam <= lam_cap:
            m = a + lam * (np.diag(np.diag(a)) + 1e-12 * np.eye(len(x)))
            try:
                delta = np.linalg.solve(m, -g)
            except np.linalg.LinAlgError:
                lam *= lam_up
                continue
            try:
                r_new = fun(x + delta)
                c_new = float(r_new @ r_new)
            except PropagationBlowup:
                c_new = math.inf
            if c_new < cost:
                x = x + delta
                r, cost = r_new, c_new
                lam = max(lam * lam_down, 1e-14)
                stepped = True
                break
            lam *= lam_up
        if not stepped:
            return x, it, converged(x)
    return x, max_iter, converged(x)


# ---------------------------------------------------------------------------
# Collocation solve for circular-arc triangles with an end puncture
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Triangle:
    """Circular-arc triangle: real-axis side, ray side at angle `wedge`,
    and the circle closing them.  corner = apex on the ray, puncture = the
    excluded end corner on the real axis."""

    wedge: float
    corner: complex
    puncture: float
    center: complex
    radius: float
    arc_start: float      # circle angle of corner
    arc_span: float       # signed angle from corner to puncture

    def region_distance(self, z: complex) -> float:
        ang = math.atan2(z.imag, z.real)
        angular = max(0.0, -ang, ang - self.wedge) * max(abs(z), 1e-12)
        radial = max(0.0, abs(z - self.center) - self.radius)
        return max(angular, radial)

    def arc_point(self, frac: float) -> complex:
        return self.center + self.radius * cmath.exp(
            1j * (self.arc_start + self.arc_span * frac))


def _spherical_triangle(theta0: float, theta1: float, theta_end: float) -> _Triangle:
    """Stereographic circular-arc triangle with prescribed corner angles.

    theta0 sits at the origin between the real axis and the ray; theta1 at
    the ray corner; theta_end at the puncture on the real axis.
    """
    cos_c = (math.cos(theta_end) + math.cos(theta0) * math.cos(theta1)) / (
        math.sin(theta0) * math.sin(theta1))
    cos_b = (math.cos(theta1) + math.cos(theta0) * math.cos(theta_end)) / (
        math.sin(theta0) * math.sin(theta_end))
    side_c = math.acos(max(-1.0, min(1.0, cos_c)))   # origin -> ray corner
    side_b = math.acos(max(-1.0, min(1.0, cos_b)))   # origin -> puncture
    corner = cmath.exp(1j * theta0) * math.tan(side_c / 2.0)
    puncture = math.tan(side_b / 2.0)
    p_corner = np.array([math.sin(side_c) * math.cos(theta0),
                         math.sin(side_c) * math.sin(theta0), -math.cos(side_c)])
    p_end = np.array([math.sin(side_b), 0.0, -math.cos(side_b)])
    normal = np.cross(p_end, p_corner)
    if abs(normal[2]) < 1e-14:
        raise InfeasibleSpec("arc side degenerates to a straight line")
    center = complex(-normal[0] / normal[2], -normal[1] / normal[2])
    radius = math.sqrt((normal[0] ** 2 + normal[1] ** 2) / normal[2] ** 2 + 1.0)
    arc_start = cmath.phase(corner - center)
    span = cmath.phase(puncture - center) - arc_start
    if span > math.pi:
        span -= 2.0 * math.pi
    if span < -math.pi:
        span += 2.0 * math.pi
    return _Triangle(theta0, corner, puncture, center, radius, arc_start, span)


class _TriangleCollocation:
    """Least-squares system: boundary sequences on the triangle sides plus
    free interior values, with per-quad cross-ratio -1 residuals."""

    def __init__(self, tri: _Triangle, m_max: int, n_max: int):
        self.tri = tri
        self.m_max = m_max
        self.n_max = n_max
        self.interior = [(m, n) for n in range(1, n_max)
                         for m in range(1, m_max + 1)]
        self.n_params = 2 * m_max + (n_max - 1) + 2 * len(self.interior)

    def values(self, x: np.ndarray) -> dict[Vertex, complex]:
        m_max, n_max, tri = self.m_max, self.n_max, self.tri
        i = 0
        bottom = _increasing_open(x[i:i + m_max], tri.puncture)
        i += m_max
        left = _increasing_closed(x[i:i + n_max - 1], abs(tri.corner))
        i += n_max - 1
        arc = _increasing_open(x[i:i + m_max], 1.0)
        i += m_max
        vals: dict[Vertex, complex] = {(0, 0): 0j, (0, n_max): tri.corner}
        for m in range(1, m_max + 1):
            vals[(m, 0)] = complex(bottom[m - 1])
        ray = cmath.exp(1j * tri.wedge)
        for n in range(1, n_max):
            vals[(0, n)] = left[n - 1] * ray
        for m in range(1, m_max + 1):
            vals[(m, n_max)] = tri.arc_point(arc[m - 1])
        for v in self.interior:
            vals[v] = complex(x[i], x[i + 1])
            i += 2
        return vals

    def encode(self, bottom, left, arc, interior_vals) -> np.ndarray:
        parts = [_increasing_open_inverse(bottom, self.tri.puncture),
                 _increasing_closed_inverse(left, abs(self.tri.corner)),
                 _increasing_open_inverse(arc, 1.0)]
        flat = []
        for v in self.interior:
            z = interior_vals[v]
            flat.extend((z.real, z.imag))
        return np.concatenate(parts + [np.array(flat)])

    def boundary_data(self, x: np.ndarray):
        m_max, n_max = self.m_max, self.n_max
        bottom = _increasing_open(x[:m_max], self.tri.puncture)
        left = _increasing_closed(x[m_max:m_max + n_max - 1], abs(self.tri.corner))
        arc = _increasing_open(x[m_max + n_max - 1:2 * m_max + n_max - 1], 1.0)
        return bottom, left, arc

    def residual(self, x: np.ndarray, reg_weight: float,
                 left_ref: np.ndarray) -> np.ndarray:
        vals = self.values(x)
        out = []
        for n in range(self.n_max):
            for m in range(self.m_max):
                q = _cr4(vals[(m, n)], vals[(m + 1, n)],
                         vals[(m + 1, n + 1)], vals[(m, n + 1)])
                out.extend(((q + 1.0).real, (q + 1.0).imag))
        for v in sorted(vals):
            out.append(self.tri.region_distance(vals[v]))
        _, left, _ = self.boundary_data(x)
        out.extend(reg_weight * (left - left_ref))
        return np.array(out)

    def cr_max(self, x: np.ndarray) -> float:
        vals = self.values(x)
        return max(abs(_cr4(vals[(m, n)], vals[(m + 1, n)],
                            vals[(m + 1, n + 1)], vals[(m, n + 1)]) + 1.0)
                   for n in range(self.n_max) for m in range(self.m_max))

    def containment_max(self, x: np.ndarray) -> float:
        vals = self.values(x)
        return max(self.tri.region_distance(v) for v in vals.values())

    def solve(self, x0: np.ndarray, tol: float, max_iter: int):
        """Two stages: regularized to pin the free left-column directions,
        then with the regularization released for the final polish."""
        left_ref, iterations = self.boundary_data(x0)[1], 0
        x = x0
        for reg, target in ((1e-3, max(1e-7, tol * 10.0)), (1e-9, tol)):
            def fun(xx, reg=reg):
                return self.residual(xx, reg, left_ref)

            def done(xx, target=target):
                return (self.cr_max(xx) <= target
                        and self.containment_max(xx) <= max(target, 1e-9))

            x, it, ok = levenberg_marquardt(fun, x, done, max_iter - iterations)
            iterations += it
            if iterations >= max_iter:
                break
        return x, iterations, ok


# ---------------------------------------------------------------------------
# k-noid solve
# ---------------------------------------------------------------------------

def _knoid_triangle(spec: BoundarySpec) -> _Triangle:
    """D_k as a circular-arc triangle: angles ((k-1)pi/k, pi/2, pi/2)."""
    return _Triangle(wedge=spec.ray_angle, corner=spec.corner_value,
                     puncture=1.0, center=0j, radius=1.0,
                     arc_start=spec.ray_angle, arc_span=-spec.ray_angle)


def _knoid_collocation_seed(spec: BoundarySpec, system: _TriangleCollocation
                            ) -> np.ndarray:
    g = _smooth_knoid_map(spec)
    h = (math.pi / 4.0) / spec.n_max
    bottom = np.array([g(m * h).real for m in range(1, spec.m_max + 1)])
    left = np.array([abs(g(1j * n * h)) for n in range(1, spec.n_max)])
    arc = np.array([1.0 - cmath.phase(g(m * h + 1j * math.pi / 4.0)) / spec.ray_angle
                    for m in range(1, spec.m_max + 1)])
    interior = {v: g(v[0] * h + 1j * v[1] * h) for v in system.interior}
    return system.encode(bottom, left, arc, interior)


def solve_knoid(spec: BoundarySpec, tol: float = 1e-10, max_iter: int = 500,
                seed_params: np.ndarray | None = None,
                strict: bool = False) -> SolveResult:
    """Solve the k-noid boundary-value problem by damped least squares.

    The result grid satisfies the straight-side and arc conditions exactly
    by construction; the reported cross-ratio residual is the max |cr+1|
    over quads.  With strict=True a NoConvergence carrying the best
    iterate is raised when the tolerance is not met.
    """
    system = _TriangleCollocation(_knoid_triangle(spec), spec.m_max, spec.n_max)
    if seed_params is None:
        x0 = _knoid_collocation_seed(spec, system)
    else:
        x0 = np.asarray(seed_params, dtype=float)
        if len(x0) != system.n_params:
            raise InfeasibleSpec(
                f"seed has {len(x0)} parameters, expected {system.n_params}")
    x, iterations, ok = system.solve(x0, tol, max_iter)
    return _finish_solve(spec, system, x, iterations, ok, tol, strict)


def _finish_solve(spec, system: _TriangleCollocation, x, iterations, ok,
                  tol, strict) -> SolveResult:
    vals = system.values(x)
    domain = LatticeDomain((0, system.m_max), (0, system.n_max))
    grid = HoloGrid(domain, vals, EdgeLabels.constant(domain))
    metrics = {
        "cross_ratio": validate_holomorphic(grid).max_residual,
        "boundary": _bullet_deviation(grid, system.tri),
        "containment": system.containment_max(x),
    }
    converged = bool(ok) and metrics["cross_ratio"] <= max(tol, 1e-9)
    bottom, left, arc = system.boundary_data(x)
    if isinstance(spec, BoundarySpec):
        thetas = np.array([cmath.phase(vals[(m, spec.n_max)])
                           for m in range(1, spec.m_max + 1)])
        params = encode_knoid_params(bottom, left, np.clip(
            thetas, 1e-12, spec.ray_angle * (1 - 1e-12)), spec)
    else:
        params = x
    result = SolveResult(grid, metrics, iterations, converged, params=params)
    if strict and not converged:
        raise NoConvergence(f"residuals {metrics} after {iterations} iterations",
                            result)
    return result


def _bullet_deviation(grid: HoloGrid, tri: _Triangle) -> float:
    """Max deviation of the grid boundary from the three triangle sides."""
    dom = grid.domain
    worst = 0.0
    for m in range(dom.m0, dom.m1 + 1):
        worst = max(worst, abs(grid.values[(m, dom.n0)].imag))
        worst = max(worst, abs(abs(grid.values[(m, dom.n1)] - tri.center) - tri.radius))
    ray = cmath.exp(1j * tri.wedge)
    for n in range(dom.n0, dom.n1 + 1):
        z = grid.values[(0, n)]
        worst = max(worst, abs((z * ray.conjugate()).imag))
    return worst


# ---------------------------------------------------------------------------
# Platonic presets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlatonicPreset:
    """Möbius-triangle angles of a Platonic rotation group, with the
    catenoidal-end puncture placed at the last corner."""

    name: str
    angles: tuple[float, float, float]
    rotation_order: int


PLATONIC_PRESETS = {
    "tetrahedral": PlatonicPreset("tetrahedral",
                                  (math.pi / 2, math.pi / 3, math.pi / 3), 12),
    "octahedral": PlatonicPreset("octahedral",
                                 (math.pi / 2, math.pi / 3, math.pi / 4), 24),
}


def platonic_preset(name: str) -> PlatonicPreset:
    if name not in PLATONIC_PRESETS:
        raise InfeasibleSpec(f"unknown preset {name!r}; "
                             f"choose from {sorted(PLATONIC_PRESETS)}")
    return PLATONIC_PRESETS[name]


def _reencode_between(system_old: _TriangleCollocation,
                      system_new: _TriangleCollocation,
                      x: np.ndarray) -> np.ndarray:
    """Transfer a solution between triangles by the corner-matching Möbius
    map z -> z/(az+b); cross ratios are preserved exactly, so only the
    projections of boundary values onto the new sides perturb the seed."""
    tri_o, tri_n = system_old.tri, system_new.tri
    a = (tri_o.corner / tri_n.corner - tri_o.puncture / tri_n.puncture) / (
        tri_o.corner - tri_o.puncture)
    b = tri_o.corner / tri_n.corner - a * tri_o.corner

    def mob(z: complex) -> complex:
        return z / (a * z + b)

    vals = {v: mob(z) for v, z in system_old.values(x).items()}
    m_max, n_max = system_new.m_max, system_new.n_max
    bottom = _monotone_floor([abs(vals[(m, 0)]) for m in range(1, m_max + 1)])
    left = _monotone_floor([abs(vals[(0, n)]) for n in range(1, n_max)])
    arc = _monotone_floor(np.clip(
        [(cmath.phase(vals[(m, n_max)] - tri_n.center) - tri_n.arc_start)
         / tri_n.arc_span for m in range(1, m_max + 1)], 1e-9, 1 - 1e-9))
    return system_new.encode(bottom, left, np.asarray(arc),
                             {v: vals[v] for v in system_new.interior})


def solve_platonic(preset: str | PlatonicPreset, resolution: int,
                   tol: float = 1e-10, max_iter: int = 500,
                   strict: bool = False) -> SolveResult:
    """Solve the Platonic-symmetry boundary problem at the given resolution.

    resolution is the number of rows n_max (the grid is
    (2*resolution+2) x resolution); at least 2 so interior vertices exist.
    Continuation starts from the (pi/2, pi/2, pi/2) catenoid triangle and
    deforms the corner angles to the preset in a few stages.
    """
    if isinstance(preset, str):
        preset = platonic_preset(preset)
    if resolution < 2:
        raise InfeasibleSpec("resolution must give at least one interior vertex")
    n_max = resolution
    m_max = 2 * resolution + 2

    start = (math.pi / 2, math.pi / 2, math.pi / 2)
    catenoid_spec = _CatenoidSeedSpec(n_max, m_max)
    system = _TriangleCollocation(_spherical_triangle(*start), m_max, n_max)
    x = _knoid_collocation_seed(catenoid_spec, system)
    x, it, ok = system.solve(x, max(tol, 1e-7), min(max_iter, 100))
    iterations = it

    steps = max(2, int(math.ceil(
        max(abs(a - b) for a, b in zip(start, preset.angles)) / 0.15)))
    for s in range(1, steps + 1):
        t = s / steps
        angles = tuple(a + (b - a) * t for a, b in zip(start, preset.angles))
        system_new = _TriangleCollocation(_spherical_triangle(*angles), m_max, n_max)
        x = _reencode_between(system, system_new, x)
        system = system_new
        stage_tol = tol if s == steps else max(tol, 1e-7)
        x, it, ok = system.solve(x, stage_tol, max(1, max_iter - iterations))
        iterations += it
        if iterations >= max_iter:
            break
    return _finish_solve(preset, system, x, iterations, ok, tol, strict)


class _CatenoidSeedSpec:
    """Just enough of a BoundarySpec for the (pi/2)^3 catenoid seed: the
    smooth data is g(w) = tanh(w) (the k=2 case of the end formula)."""

    def __init__(self, n_max: int, m_max: int):
        self.k = 2
        self.n_max = n_max
        self.m_max = m_max
        self.ray_angle = math.pi / 2
