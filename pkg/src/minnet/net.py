"""Z^2-indexed nets on masked rectangular domains and their predicates.

A LatticeDomain is an inclusive integer box minus a mask of excluded
vertices.  Elementary quads are indexed by their lower-left corner (m, n)
and enumerate the vertex cycle (m,n), (m+1,n), (m+1,n+1), (m,n+1).

Edge labels are the cross-ratio factorizing functions: the label of a
horizontal edge (m,n)-(m+1,n) depends only on m (alpha), the label of a
vertical edge (m,n)-(m,n+1) only on n (beta).  Storing them as sequences
makes the opposite-edge relation structural.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateFit, DomainMismatch, NotCircular, ParseError
from .mobius import cross_ratio_quat, fit_plane

Vertex = tuple[int, int]
Quad = tuple[int, int]

MIN_EDGE = 1e-12


@dataclass(frozen=True)
class LatticeDomain:
    """Masked rectangular subset of Z^2; ranges are inclusive."""

    m_range: tuple[int, int]
    n_range: tuple[int, int]
    mask: frozenset[Vertex] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "mask", frozenset(tuple(v) for v in self.mask))
        if self.m_range[0] > self.m_range[1] or self.n_range[0] > self.n_range[1]:
            raise ValueError("empty lattice range")
        for v in self.mask:
            if not (self.m_range[0] <= v[0] <= self.m_range[1]
                    and self.n_range[0] <= v[1] <= self.n_range[1]):
                raise ValueError(f"mask entry {v} outside range")
        if not self._edge_connected():
            raise ValueError("domain is not edge-connected")

    @property
    def m0(self) -> int:
        return self.m_range[0]

    @property
    def m1(self) -> int:
        return self.m_range[1]

    @property
    def n0(self) -> int:
        return self.n_range[0]

    @property
    def n1(self) -> int:
        return self.n_range[1]

    def __contains__(self, v) -> bool:
        m, n = v
        return (self.m0 <= m <= self.m1 and self.n0 <= n <= self.n1
                and (m, n) not in self.mask)

    @cached_property
    def vertices(self) -> tuple[Vertex, ...]:
        return tuple((m, n)
                     for m in range(self.m0, self.m1 + 1)
                     for n in range(self.n0, self.n1 + 1)
                     if (m, n) not in self.mask)

    @cached_property
    def quads(self) -> tuple[Quad, ...]:
        """Lower-left corners of quads whose four vertices are all present."""
        out = []
        for m in range(self.m0, self.m1):
            for n in range(self.n0, self.n1):
                if all(v in self for v in ((m, n), (m + 1, n), (m + 1, n + 1), (m, n + 1))):
                    out.append((m, n))
        return tuple(out)

    def quad_vertices(self, q: Quad) -> tuple[Vertex, Vertex, Vertex, Vertex]:
        m, n = q
        return (m, n), (m + 1, n), (m + 1, n + 1), (m, n + 1)

    def edges(self):
        """All lattice edges between present vertices, horizontal then vertical."""
        for m, n in self.vertices:
            if (m + 1, n) in self:
                yield ((m, n), (m + 1, n))
        for m, n in self.vertices:
            if (m, n + 1) in self:
                yield ((m, n), (m, n + 1))

    def neighbors(self, v: Vertex):
        m, n = v
        for w in ((m + 1, n), (m - 1, n), (m, n + 1), (m, n - 1)):
            if w in self:
                yield w

    def _edge_connected(self) -> bool:
        verts = [
            (m, n)
            for m in range(self.m0, self.m1 + 1)
            for n in range(self.n0, self.n1 + 1)
            if (m, n) not in self.mask
        ]
        if not verts:
            return False
        seen = {verts[0]}
        stack = [verts[0]]
        while stack:
            v = stack.pop()
            for w in self.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(verts)

    def transpose(self) -> "LatticeDomain":
        return LatticeDomain(self.n_range, self.m_range,
                             frozenset((n, m) for m, n in self.mask))


@dataclass(frozen=True)
class EdgeLabels:
    """Cross-ratio factorizing functions stored per column (alpha) and row (beta).

    alpha[m] labels horizontal edges (m,n)-(m+1,n); beta[n] labels vertical
    edges (m,n)-(m,n+1).  The quad relation a_ij = a_lk, a_il = a_jk holds
    by construction.
    """

    alpha: dict[int, float]
    beta: dict[int, float]

    def __post_init__(self):
        object.__setattr__(self, "alpha", dict(self.alpha))
        object.__setattr__(self, "beta", dict(self.beta))

    @staticmethod
    def constant(domain: LatticeDomain, alpha: float = 1.0, beta: float = -1.0) -> "EdgeLabels":
        return EdgeLabels({m: float(alpha) for m in range(domain.m0, domain.m1)},
                          {n: float(beta) for n in range(domain.n0, domain.n1)})

    def alpha_at(self, m: int) -> float:
        return self.alpha[m]

    def beta_at(self, n: int) -> float:
        return self.beta[n]

    def ratio(self, q: Quad) -> float:
        """Target cross ratio alpha(m)/beta(n) of the quad at (m, n)."""
        return self.alpha[q[0]] / self.beta[q[1]]

    def check_negative(self, domain: LatticeDomain) -> None:
        for q in domain.quads:
            if self.ratio(q) >= 0.0:
                raise ValueError(f"cross-ratio label ratio not negative on quad {q}")

    def transpose(self) -> "EdgeLabels":
        return EdgeLabels(dict(self.beta), dict(self.alpha))


@dataclass
class Net3:
    """Discrete net: per-vertex positions in R^3 over a lattice domain.

    Surface nets must be immersed (no zero edges); normal fields may set
    check_edges=False since parallel Gauss maps can have vanishing edges.
    """

    domain: LatticeDomain
    positions: dict[Vertex, np.ndarray]
    check_edges: bool = True

    def __post_init__(self):
        self.positions = {tuple(v): np.asarray(p, dtype=float)
                          for v, p in self.positions.items()}
        for v in self.domain.vertices:
            if v not in self.positions:
                raise ValueError(f"missing position for vertex {v}")
            if not np.all(np.isfinite(self.positions[v])):
                raise ValueError(f"non-finite position at vertex {v}")
        if self.check_edges:
            for a, b in self.domain.edges():
                if np.linalg.norm(self.positions[a] - self.positions[b]) <= MIN_EDGE:
                    raise ValueError(f"degenerate edge {a}-{b}")

    def __getitem__(self, v: Vertex) -> np.ndarray:
        return self.positions[v]

    def quad_points(self, q: Quad) -> list[np.ndarray]:
        return [self.positions[v] for v in self.domain.quad_vertices(q)]

    def edge_vector(self, a: Vertex, b: Vertex) -> np.ndarray:
        return self.positions[b] - self.positions[a]

    def as_array(self) -> np.ndarray:
        return np.array([self.positions[v] for v in self.domain.vertices])

    def scale(self) -> float:
        pts = self.as_array()
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def transformed(self, fn) -> "Net3":
        return Net3(self.domain, {v: fn(p) for v, p in self.positions.items()})

    def transpose(self) -> "Net3":
        return Net3(self.domain.transpose(),
                    {(n, m): p for (m, n), p in self.positions.items()})


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a per-quad or per-vertex verification pass."""

    ok: bool
    max_residual: float
    worst: object = None
    extra: dict = field(default_factory=dict)


def _quad_scale(pts) -> float:
    pts = np.asarray(pts)
    d = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = max(d, float(np.linalg.norm(pts[i] - pts[j])))
    return d


def circularity_residual(pts) -> float:
    """Raw residual: max(coplanarity distance, circumradius spread)."""
    pts = np.asarray(pts, dtype=float)
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    coplanar = float(np.abs(centered @ vt[2]).max()) if s[0] > 0 else 0.0
    # circumcenter in the fitted plane: solve 2(p_i - p_0)·c = |p_i|^2 - |p_0|^2
    basis = vt[:2]
    uv = centered @ basis.T
    a = 2.0 * (uv[1:] - uv[0])
    b = (uv[1:] ** 2).sum(axis=1) - (uv[0] ** 2).sum()
    try:
        center, *_ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError:
        return float("inf")
    radii = np.linalg.norm(uv - center, axis=1)
    spread = float(radii.max() - radii.min())
    return max(coplanar, spread)


def is_circular(net: Net3, quad: Quad, tol: float = 1e-9) -> tuple[bool, float]:
    """Concircularity of one elementary quad.

    Returns (ok, raw residual); ok compares the residual against
    tol times the quad diameter.
    """
    pts = net.quad_points(quad)
    res = circularity_residual(pts)
    return res <= tol * max(_quad_scale(pts), MIN_EDGE), res


def is_isothermic(net: Net3, labels: EdgeLabels, tol: float = 1e-9) -> CheckReport:
    """Check cr(F_i,F_j,F_k,F_l) = alpha(m)/beta(n) on every quad.

    Raises NotCircular if some quad fails concircularity at tol first.
    """
    worst_circ = (None, 0.0)
    for q in net.domain.quads:
        ok, res = is_circular(net, q, tol)
        rel = res / max(_quad_scale(net.quad_points(q)), MIN_EDGE)
        if not ok and rel > worst_circ[1]:
            worst_circ = (q, rel)
    if worst_circ[0] is not None:
        raise NotCircular(f"quad {worst_circ[0]} non-circular (relative residual {worst_circ[1]:.3e})")

    max_res, worst = 0.0, None
    for q in net.domain.quads:
        cr = cross_ratio_quat(*net.quad_points(q))
        res = abs(cr.re - labels.ratio(q))
        if res > max_res:
            max_res, worst = res, q
    return CheckReport(max_res <= tol, max_res, worst)


def are_parallel_meshes(f: Net3, g: Net3, tol: float = 1e-9) -> tuple[bool, float]:
    """Whether corresponding edges of f and g are parallel (sign-free).

    Zero edges of either net are skipped.  Returns (ok, worst angle in
    radians measured as asin of the normalized cross product).
    """
    if f.domain != g.domain:
        raise DomainMismatch("nets live on different domains")
    worst = 0.0
    for a, b in f.domain.edges():
        u = f.edge_vector(a, b)
        v = g.edge_vector(a, b)
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu <= MIN_EDGE or nv <= MIN_EDGE:
            continue
        s = np.linalg.norm(np.cross(u, v)) / (nu * nv)
        worst = max(worst, float(np.arcsin(min(1.0, s))))
    return worst <= tol, worst


def planarity_residual(pts) -> float:
    """Max distance to the best plane; 0 if points span less than a plane."""
    pts = np.asarray(pts, dtype=float)
    try:
        _, res = fit_plane(pts)
    except DegenerateFit:
        return 0.0
    return res


# ---------------------------------------------------------------------------
# Serialization (.dnet.json)
# ---------------------------------------------------------------------------

@dataclass
class NetBundle:
    """Contents of a net file: positions plus optional labels and normals."""

    net: Net3
    labels: EdgeLabels | None = None
    normals: dict[Vertex, np.ndarray] | None = None


def _fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError("non-finite float in output")
    return format(float(x), ".17g")


def _dump(obj) -> str:
    """Minimal deterministic JSON writer with 17-significant-digit floats."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj)}")


def net_to_json(net: Net3, labels: EdgeLabels | None = None,
                normals: dict[Vertex, np.ndarray] | None = None,
                infinity: list[Vertex] | None = None) -> dict:
    dom = net.domain
    doc = {
        "domain": {"m0": dom.m0, "m1": dom.m1, "n0": dom.n0, "n1": dom.n1,
                   "mask": [list(v) for v in sorted(dom.mask)]},
        "vertices": [{"m": m, "n": n, "p": [float(c) for c in net.positions[(m, n)]]}
                     for (m, n) in dom.vertices],
    }
    if labels is not None:
        doc["alpha"] = [labels.alpha_at(m) for m in range(dom.m0, dom.m1)]
        doc["beta"] = [labels.beta_at(n) for n in range(dom.n0, dom.n1)]
    if normals is not None:
        doc["normals"] = [[float(c) for c in normals[v]] for v in dom.vertices]
    if infinity is not None:
        doc["infinity"] = [list(v) for v in sorted(infinity)]
    return doc


def write_net(path, net: Net3, labels: EdgeLabels | None = None,
              normals: dict[Vertex, np.ndarray] | None = None) -> None:
    """Write a net (with optional labels and Gauss map) as .dnet.json."""
    doc = net_to_json(net, labels, normals)
    with open(path, "w") as fh:
        fh.write(_dump(doc))
        fh.write("\n")


def _parse_domain(doc: dict) -> LatticeDomain:
    try:
        d = doc["domain"]
        mask = frozenset(tuple(v) for v in d.get("mask", []))
        return LatticeDomain((int(d["m0"]), int(d["m1"])),
                             (int(d["n0"]), int(d["n1"])), mask)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad domain record: {exc}") from exc


def json_to_bundle(doc: dict, check_edges: bool = True) -> NetBundle:
    dom = _parse_domain(doc)
    positions = {}
    try:
        for rec in doc["vertices"]:
            positions[(int(rec["m"]), int(rec["n"]))] = np.array(rec["p"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad vertex record: {exc}") from exc
    for v in dom.vertices:
        if v not in positions:
            raise ParseError(f"vertex {v} required by domain but missing from file")
    try:
        net = Net3(dom, positions, check_edges=check_edges)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc

    labels = None
    if "alpha" in doc or "beta" in doc:
        alpha = doc.get("alpha", [])
        beta = doc.get("beta", [])
        if len(alpha) != dom.m1 - dom.m0 or len(beta) != dom.n1 - dom.n0:
            raise ParseError("alpha/beta length does not match domain ranges")
        labels = EdgeLabels({dom.m0 + i: float(a) for i, a in enumerate(alpha)},
                            {dom.n0 + i: float(b) for i, b in enumerate(beta)})
    normals = None
    if "normals" in doc:
        rows = doc["normals"]
        if len(rows) != len(dom.vertices):
            raise ParseError("normals length does not match vertex count")
        normals = {v: np.array(rows[i], dtype=float) for i, v in enumerate(dom.vertices)}
    return NetBundle(net, labels, normals)


def read_net(path) -> NetBundle:
    """Read a .dnet.json file; raises ParseError with context on failure."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    return json_to_bundle(doc)
