"""Reflectable boundaries, Schwarz-type extensions and symmetry orbits.

A boundary row of an isothermic minimal net is reflectable when the row
and its normal line congruence lie in one plane; equivalently the Gauss
image of the row lies in a great circle.  The conjugate asymptotic net is
extendable across a boundary row exactly when that row is a straight
line; there the extension is the 180-degree rotation about it.

Orbits close the group generated by boundary isometries breadth-first and
weld the transformed copies into a single quad mesh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateFit, InconsistentBundle, NotPlanarBoundary,
                     NotReflectable, OrbitExplosion)
from .mobius import (Isometry, LineR3, PlaneR3, fit_line, fit_plane,
                     fit_plane_through_origin)
from .minimal import propagate_normals, tangent_normals
from .net import EdgeLabels, LatticeDomain, Net3, Vertex


# ---------------------------------------------------------------------------
# Boundary analyses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryAnalysis:
    """Classification of one boundary lattice line."""

    axis: str                 # 'row' or 'col'
    index: int
    kind: str                 # 'planar_curvature_line' | 'straight_asymptotic_line' | 'none'
    plane: PlaneR3 | None = None
    line: LineR3 | None = None
    gauss_circle: str = "none"   # 'great_circle' | 'small_circle' | 'none'
    gauss_plane: PlaneR3 | None = None
    residuals: dict = field(default_factory=dict)


def boundary_vertices(domain: LatticeDomain, index: int, axis: str = "row") -> list[Vertex]:
    if axis == "row":
        verts = [(m, index) for m in range(domain.m0, domain.m1 + 1) if (m, index) in domain]
    elif axis == "col":
        verts = [(index, n) for n in range(domain.n0, domain.n1 + 1) if (index, n) in domain]
    else:
        raise ValueError("axis must be 'row' or 'col'")
    if len(verts) < 2:
        raise ValueError(f"boundary {axis} {index} has fewer than 2 vertices")
    return verts


def analyze_boundary_isothermic(net: Net3, normals: Net3, index: int,
                                axis: str = "row", tol: float = 1e-9) -> BoundaryAnalysis:
    """Planarity of a curvature line together with its normal congruence.

    kind is 'planar_curvature_line' only when the points F and F+N along
    the line fit one plane; the independent great-circle test on N is
    cross-checked and recorded.
    """
    verts = boundary_vertices(net.domain, index, axis)
    f_pts = np.array([net.positions[v] for v in verts])
    n_pts = np.array([normals.positions[v] for v in verts])
    joint = np.vstack([f_pts, f_pts + n_pts])
    scale = max(float(np.linalg.norm(f_pts.max(axis=0) - f_pts.min(axis=0))), 1e-300)

    residuals: dict = {}
    plane = None
    try:
        plane_fit, r_joint = fit_plane(joint)
    except DegenerateFit:
        plane_fit, r_joint = None, float("inf")
    residuals["congruence_plane"] = r_joint
    try:
        _, r_row = fit_plane(f_pts) if len(f_pts) >= 3 else (None, 0.0)
    except DegenerateFit:
        r_row = 0.0  # collinear row is trivially planar
    residuals["row_plane"] = r_row

    # independent Gauss-image circle tests (unit vectors: absolute tolerance)
    try:
        gauss_plane, r_great = fit_plane_through_origin(n_pts)
    except DegenerateFit:
        gauss_plane, r_great = None, float("inf")
    residuals["gauss_great_circle"] = r_great
    try:
        _, r_small = fit_plane(n_pts) if len(n_pts) >= 3 else (None, float("inf"))
    except DegenerateFit:
        r_small = float("inf")
    residuals["gauss_circle"] = r_small

    planar = r_joint <= tol * scale
    great = r_great <= tol
    residuals["tests_agree"] = planar == great

    if planar:
        kind = "planar_curvature_line"
        plane = plane_fit
        gauss_circle = "great_circle"
    else:
        kind = "none"
        gauss_circle = "great_circle" if great else (
            "small_circle" if r_small <= tol else "none")
    return BoundaryAnalysis(axis, index, kind, plane=plane,
                            gauss_circle=gauss_circle, gauss_plane=gauss_plane,
                            residuals=residuals)


def analyze_boundary_asymptotic(net: Net3, index: int, axis: str = "row",
                                tol: float = 1e-9) -> BoundaryAnalysis:
    """Straight-line test of an asymptotic lattice line.

    Cross-checks that the tangent-plane normals along the line lie in the
    plane perpendicular to it (the great-circle condition).
    """
    verts = boundary_vertices(net.domain, index, axis)
    pts = np.array([net.positions[v] for v in verts])
    scale = max(float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))), 1e-300)
    line, r_line = fit_line(pts)
    residuals = {"line": r_line}

    normals = tangent_normals(net)
    r_perp = max(abs(float(normals[v] @ line.direction)) for v in verts)
    residuals["gauss_perpendicular"] = r_perp

    straight = r_line <= tol * scale
    residuals["tests_agree"] = straight == (r_perp <= max(tol, 1e3 * r_line / scale))
    if straight:
        return BoundaryAnalysis(axis, index, "straight_asymptotic_line", line=line,
                                gauss_circle="great_circle", residuals=residuals)
    return BoundaryAnalysis(axis, index, "none", line=line, residuals=residuals)


# ---------------------------------------------------------------------------
# Extensions
# ---------------------------------------------------------------------------

def _check_extreme_row(domain: LatticeDomain, index: int) -> int:
    """Returns +1 when index is the top row, -1 when the bottom row."""
    if index == domain.n1:
        return 1
    if index == domain.n0:
        return -1
    raise NotReflectable(f"row {index} is not a boundary row of the domain")


def _extend_rows(domain: LatticeDomain, index: int) -> tuple[LatticeDomain, int]:
    side = _check_extreme_row(domain, index)
    depth = (index - domain.n0) if side > 0 else (domain.n1 - index)
    if depth == 0:
        raise NotReflectable("nothing to reflect: domain is a single row")
    new_range = (domain.n0, index + depth) if side > 0 else (index - depth, domain.n1)
    mask = set(domain.mask)
    for (m, n) in domain.mask:
        mask.add((m, 2 * index - n))
    return LatticeDomain(domain.m_range, new_range, frozenset(mask)), side


def _mirror_labels(labels: EdgeLabels, domain_new: LatticeDomain,
                   index: int) -> EdgeLabels:
    beta = dict(labels.beta)
    for n in range(domain_new.n0, domain_new.n1):
        if n not in beta:
            beta[n] = labels.beta[2 * index - 1 - n]
    return EdgeLabels(labels.alpha, beta)


def reflect_isothermic(net: Net3, normals: Net3, index: int,
                       axis: str = "row", tol: float = 1e-9,
                       labels: EdgeLabels | None = None
                       ) -> tuple[Net3, Net3, EdgeLabels | None]:
    """Extend an isothermic minimal (or cmc) net by plane reflection.

    The boundary line at index must be a planar curvature line whose
    normal congruence lies in the same plane.  Returns the extended net,
    the mirrored Gauss map (cross-validated against normal propagation)
    and, when labels are given, the extended edge labels.
    """
    if axis == "col":
        f, n, lab = reflect_isothermic(net.transpose(), normals.transpose(),
                                       index, "row", tol,
                                       labels.transpose() if labels else None)
        return f.transpose(), n.transpose(), lab.transpose() if lab else None

    analysis = analyze_boundary_isothermic(net, normals, index, "row", tol)
    if analysis.kind != "planar_curvature_line":
        raise NotReflectable(
            f"row {index}: congruence-plane residual "
            f"{analysis.residuals['congruence_plane']:.3e}")
    iso = Isometry.plane_reflection(analysis.plane)

    new_domain, _ = _extend_rows(net.domain, index)
    positions = dict(net.positions)
    nrm = dict(normals.positions)
    for (m, n) in new_domain.vertices:
        if (m, n) not in positions:
            src = (m, 2 * index - n)
            positions[(m, n)] = iso.apply(net.positions[src])
            nrm[(m, n)] = iso.apply_direction(normals.positions[src])
    net_ext = Net3(new_domain, positions)
    normals_ext = Net3(new_domain, nrm, check_edges=False)

    # the reflected Gauss map must agree with the uniquely propagated one
    seed = min(net.domain.vertices)
    propagated = propagate_normals(net_ext, normals.positions[seed], root=seed,
                                   tol=max(tol, 1e-9))
    worst = max(float(np.linalg.norm(propagated.positions[v] - nrm[v]))
                for v in new_domain.vertices)
    if worst > max(tol, 1e-9) * 10:
        raise InconsistentBundle(
            f"mirrored normals deviate from propagation by {worst:.3e}")

    labels_ext = (_mirror_labels(labels, new_domain, index)
                  if labels is not None else None)
    return net_ext, normals_ext, labels_ext


def rotate_extend_asymptotic(net: Net3, index: int, axis: str = "row",
                             tol: float = 1e-9,
                             labels: EdgeLabels | None = None
                             ) -> tuple[Net3, EdgeLabels | None]:
    """Extend an asymptotic minimal net by 180-degree rotation.

    The boundary line at index must be straight; the new rows are the
    rotation images of the mirrored rows.
    """
    if axis == "col":
        f, lab = rotate_extend_asymptotic(net.transpose(), index, "row", tol,
                                          labels.transpose() if labels else None)
        return f.transpose(), lab.transpose() if lab else None

    analysis = analyze_boundary_asymptotic(net, index, "row", tol)
    if analysis.kind != "straight_asymptotic_line":
        raise NotReflectable(
            f"row {index}: line residual {analysis.residuals['line']:.3e}")
    iso = Isometry.line_rotation_180(analysis.line)

    new_domain, _ = _extend_rows(net.domain, index)
    positions = dict(net.positions)
    for (m, n) in new_domain.vertices:
        if (m, n) not in positions:
            positions[(m, n)] = iso.apply(net.positions[(m, 2 * index - n)])
    labels_ext = (_mirror_labels(labels, new_domain, index)
                  if labels is not None else None)
    return Net3(new_domain, positions), labels_ext


# ---------------------------------------------------------------------------
# Corner angles
# ---------------------------------------------------------------------------

def _wedge_angle(u1: np.ndarray, u2: np.ndarray, axis_dir: np.ndarray,
                 apex: np.ndarray, probe: np.ndarray) -> float:
    """Dihedral angle between planes with normals u1, u2 on the probe's side.

    axis_dir spans the intersection line through apex; probe selects which
    of the four wedges to measure.
    """
    e = axis_dir / np.linalg.norm(axis_dir)
    w1 = np.cross(e, u1)
    w1 /= np.linalg.norm(w1)
    w2 = np.cross(e, u2)
    w2 /= np.linalg.norm(w2)
    v = probe - apex
    v = v - (v @ e) * e
    nv = np.linalg.norm(v)
    if nv < 1e-14:
        raise NotPlanarBoundary("probe point sits on the intersection line")
    v /= nv
    # decompose v = x*w1 + y*w2 and flip signs until both coefficients >= 0
    basis = np.column_stack([w1, w2])
    coeff, *_ = np.linalg.lstsq(basis, v, rcond=None)
    if coeff[0] < 0:
        w1 = -w1
    if coeff[1] < 0:
        w2 = -w2
    return float(math.acos(max(-1.0, min(1.0, float(w1 @ w2)))))


def _nearest_quad(domain: LatticeDomain, corner: Vertex):
    best = None
    for q in domain.quads:
        d = abs(q[0] - corner[0]) + abs(q[1] - corner[1])
        if best is None or (d, q) < best:
            best = (d, q)
    if best is None:
        raise NotPlanarBoundary("domain has no quads")
    return best[1]


def corner_angles(net: Net3, normals: Net3, corner: Vertex,
                  tol: float = 1e-9) -> tuple[float, float]:
    """Angles between the two boundary planes at a domain corner.

    Returns (angleP, angleQ): the dihedral angle of the curvature-line
    planes measured on the side of the adjacent surface quad, and the
    angle of the corresponding great-circle planes on the side of the
    adjacent Gauss quad.  The two are supplementary.
    """
    m0, n0 = corner
    dom = net.domain
    if m0 not in (dom.m0, dom.m1) or n0 not in (dom.n0, dom.n1):
        raise NotPlanarBoundary(f"{corner} is not a domain corner")
    row = analyze_boundary_isothermic(net, normals, n0, "row", tol)
    col = analyze_boundary_isothermic(net, normals, m0, "col", tol)
    for a in (row, col):
        if a.kind != "planar_curvature_line":
            raise NotPlanarBoundary(
                f"{a.axis} {a.index} residual {a.residuals['congruence_plane']:.3e}")

    quad = _nearest_quad(dom, corner)
    f_probe = np.mean(net.quad_points(quad), axis=0)
    n_probe = np.mean(normals.quad_points(quad), axis=0)

    u1, u2 = row.plane.normal, col.plane.normal
    axis_dir = np.cross(u1, u2)
    if np.linalg.norm(axis_dir) < 1e-12:
        raise NotPlanarBoundary("boundary planes are parallel")

    # apex of the surface wedge: the corner vertex if present, otherwise
    # any point on the intersection line of the two fitted planes
    if corner in dom:
        apex = net.positions[corner]
    else:
        a_mat = np.vstack([u1, u2])
        b_vec = np.array([row.plane.offset, col.plane.offset])
        apex, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)

    angle_p = _wedge_angle(u1, u2, axis_dir, apex, f_probe)
    angle_q = _wedge_angle(row.gauss_plane.normal, col.gauss_plane.normal,
                           axis_dir, np.zeros(3), n_probe)
    return angle_p, angle_q


# ---------------------------------------------------------------------------
# Symmetry orbits
# ---------------------------------------------------------------------------

@dataclass
class SymmetryOrbit:
    """Closed isometry group applied to a fundamental piece, welded."""

    fundamental: Net3
    generators: list[Isometry]
    elements: list[Isometry]
    vertices: np.ndarray
    faces: list[tuple[int, int, int, int]]
    weld_residual: float      # max weld distance relative to the mesh scale
    weld_tol: float

    def scale(self) -> float:
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def closure_residual(self) -> float:
        """Max distance from any product of two elements to the nearest element."""
        worst = 0.0
        for a in self.elements:
            for b in self.elements:
                prod = a.compose(b)
                worst = max(worst, min(prod.distance(e) for e in self.elements))
        return worst

    def invariance_residual(self, iso: Isometry) -> float:
        """Max distance from transformed welded vertices to the vertex set."""
        moved = iso.apply_many(self.vertices)
        grid = _VertexGrid(self.vertices, max(self.weld_tol * self.scale(), 1e-12))
        worst = 0.0
        for p in moved:
            idx = grid.nearest(p)
            d = float(np.linalg.norm(self.vertices[idx] - p)) if idx is not None else float("inf")
            worst = max(worst, d)
        return worst


class _VertexGrid:
    """Uniform hash grid for near-duplicate vertex lookup."""

    def __init__(self, points, cell: float):
        self.cell = max(cell, 1e-300)
        self.table: dict[tuple[int, int, int], list[int]] = {}
        self.points: list[np.ndarray] = []
        for p in points:
            self.add(np.asarray(p, dtype=float))

    def _key(self, p) -> tuple[int, int, int]:
        return tuple(int(math.floor(c / self.cell)) for c in p)

    def add(self, p) -> int:
        idx = len(self.points)
        self.points.append(p)
        self.table.setdefault(self._key(p), []).append(idx)
        return idx

    def nearest(self, p, within: float | None = None) -> int | None:
        within = self.cell if within is None else within
        kx, ky, kz = self._key(p)
        best, best_d = None, within
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    for idx in self.table.get((kx + dx, ky + dy, kz + dz), ()):
                        d = float(np.linalg.norm(self.points[idx] - p))
                        if d <= best_d:
                            best, best_d = idx, d
        return best


def close_group(generators: list[Isometry], max_word: int = 16,
                max_elements: int = 10000, dedup_tol: float = 1e-9) -> list[Isometry]:
    """Breadth-first closure of the generated group.

    Raises OrbitExplosion when new elements keep appearing past max_word
    or the count exceeds max_elements (the group is likely infinite).
    """
    elements = [Isometry.identity()]
    frontier = [Isometry.identity()]
    for word in range(1, max_word + 1):
        new_frontier = []
        for e in frontier:
            for gen in generators:
                cand = gen.compose(e)
                if all(cand.distance(known) > dedup_tol for known in elements):
                    elements.append(cand)
                    new_frontier.append(cand)
                    if len(elements) > max_elements:
                        raise OrbitExplosion(
                            f"more than {max_elements} elements at word length {word}")
        if not new_frontier:
            return elements
        frontier = new_frontier
    raise OrbitExplosion(f"group did not close within word length {max_word}")


def build_orbit(piece: Net3, generators: list[Isometry], max_word: int = 16,
                max_elements: int = 10000, dedup_tol: float = 1e-9,
                weld_tol: float = 1e-9) -> SymmetryOrbit:
    """Apply the closed group to the piece and weld coincident vertices.

    Copies are emitted in group-element discovery order; faces of copies
    with negative determinant are reversed to keep orientations usable.
    """
    elements = close_group(generators, max_word, max_elements, dedup_tol)
    verts = piece.domain.vertices
    vidx = {v: i for i, v in enumerate(verts)}
    base = np.array([piece.positions[v] for v in verts])
    scale = max(piece.scale(), 1e-300)

    grid = _VertexGrid([], weld_tol * scale)
    faces: list[tuple[int, int, int, int]] = []
    face_set = set()
    weld_residual = 0.0
    for element in elements:
        moved = element.apply_many(base)
        local = []
        for p in moved:
            found = grid.nearest(p, within=weld_tol * scale)
            if found is None:
                local.append(grid.add(p))
            else:
                weld_residual = max(weld_residual,
                                    float(np.linalg.norm(grid.points[found] - p)))
                local.append(found)
        flip = element.det() < 0
        for q in piece.domain.quads:
            i, j, k, l = (local[vidx[v]] for v in piece.domain.quad_vertices(q))
            face = (i, l, k, j) if flip else (i, j, k, l)
            key = tuple(sorted(face))
            if key not in face_set:
                face_set.add(key)
                faces.append(face)
    return SymmetryOrbit(piece, list(generators), elements,
                         np.array(grid.points), faces,
                         weld_residual / scale, weld_tol)
