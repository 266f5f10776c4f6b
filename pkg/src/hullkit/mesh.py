"""Watertight triangle meshes: construction, checks, STL IO, hydrostatics.

Meshes are built from envelope-following station grids, mirrored about the
centerplane with exact vertex sharing along y = 0, and closed by deck,
bottom, transom, and (for degenerate zero-length tapers) bow caps.  The
builder guarantees every edge is shared by exactly two triangles; the checks
here are independent oracles over arbitrary meshes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError
from .surface import HullSurface


@dataclass
class TriangleMesh:
    vertices: np.ndarray          # (V, 3) float64
    faces: np.ndarray             # (F, 3) int32, outward-oriented
    lid_faces: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise DomainError("face indices out of range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def triangle_corners(self):
        return self.vertices[self.faces]

    def signed_volume(self) -> float:
        """Divergence-theorem volume; positive for outward orientation."""
        t = self.triangle_corners()
        return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)

    def area(self, exclude_lid: bool = False) -> float:
        t = self.triangle_corners()
        if exclude_lid and self.lid_faces.size:
            keep = np.ones(len(t), dtype=bool)
            keep[self.lid_faces] = False
            t = t[keep]
        n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        return float(0.5 * np.linalg.norm(n, axis=1).sum())

    def edge_counts(self):
        """Unique undirected edges and their incidence counts."""
        f = self.faces
        edges = np.vstack([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        edges = np.sort(edges, axis=1)
        keys = edges[:, 0].astype(np.int64) * self.n_vertices + edges[:, 1]
        _, counts = np.unique(keys, return_counts=True)
        return counts


def is_watertight(mesh: TriangleMesh) -> bool:
    """True iff every edge is shared by exactly two triangles."""
    if mesh.n_faces == 0:
        return False
    counts = mesh.edge_counts()
    return bool(np.all(counts == 2))


# --------------------------------------------------------------------------- #
# mesh construction
# --------------------------------------------------------------------------- #

def _quad_strip(ids_a, ids_b, flip=False):
    """Triangulate between two index rows, dropping degenerate triangles."""
    v00, v10 = ids_a[:-1], ids_a[1:]
    v01, v11 = ids_b[:-1], ids_b[1:]
    if flip:
        t1 = np.stack([v00, v10, v11], axis=1)
        t2 = np.stack([v00, v11, v01], axis=1)
    else:
        t1 = np.stack([v00, v11, v10], axis=1)
        t2 = np.stack([v00, v01, v11], axis=1)
    tris = np.vstack([t1, t2])
    ok = (tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) & (tris[:, 0] != tris[:, 2])
    return tris[ok]


def _build_closed_mesh(surface, nx: int, nz: int, z_top: float | None,
                       lid: bool) -> TriangleMesh:
    x, z, y = surface.station_grid(nx, nz, z_top=z_top)
    nzr, nxs = y.shape

    # starboard vertices laid out row-major; port shares all y == 0 vertices
    sb_ids = np.arange(nzr * nxs).reshape(nzr, nxs)
    verts_sb = np.column_stack([
        x.ravel(), y.ravel(), np.repeat(z, nxs),
    ])
    on_plane = (y.ravel() == 0.0)
    port_new = ~on_plane
    new_idx = np.cumsum(port_new) - 1
    port_ids_flat = np.where(port_new, nzr * nxs + new_idx, sb_ids.ravel())
    port_ids = port_ids_flat.reshape(nzr, nxs)
    verts_port = verts_sb[port_new] * np.array([1.0, -1.0, 1.0])
    vertices = np.vstack([verts_sb, verts_port])

    tris = []
    for j in range(nzr - 1):
        tris.append(_quad_strip(sb_ids[j], sb_ids[j + 1]))
        tris.append(_quad_strip(port_ids[j], port_ids[j + 1], flip=True))
    # bottom closure (flat-bottom sections have y(z=0) > 0)
    tris.append(_quad_strip(sb_ids[0], port_ids[0], flip=True))
    # top closure: deck cap, or waterplane lid for draft-clipped meshes
    lid_start = sum(len(t) for t in tris)
    top = _quad_strip(sb_ids[-1], port_ids[-1])
    tris.append(top)
    lid_faces = np.arange(lid_start, lid_start + len(top)) if lid else np.empty(0, dtype=np.int64)
    # aft closure (transom) and forward closure (degenerate zero-length taper)
    tris.append(_quad_strip(sb_ids[:, 0], port_ids[:, 0]))
    tris.append(_quad_strip(sb_ids[:, -1], port_ids[:, -1], flip=True))

    faces = np.vstack([t for t in tris if len(t)])
    # triangles lying entirely in the centerplane (three y == 0 corners) are
    # duplicated by the mirrored side and enclose nothing; drop them, keeping
    # track of surviving top-cap rows for the lid bookkeeping
    wall = np.all(vertices[faces][:, :, 1] == 0.0, axis=1)
    if np.any(wall):
        old_to_new = np.cumsum(~wall) - 1
        lid_faces = old_to_new[lid_faces[~wall[lid_faces]]] if lid_faces.size else lid_faces
        faces = faces[~wall]
    mesh = TriangleMesh(vertices=vertices, faces=faces, lid_faces=lid_faces)
    if mesh.signed_volume() < 0:
        mesh.faces = mesh.faces[:, ::-1].copy()
    return mesh


def generate_mesh(surface, nx: int = 120, nz: int = 60) -> TriangleMesh:
    """Watertight closed hull mesh (deck cap and transom included).

    `surface` is a HullSurface (already feasibility-gated at construction)
    or any object with the same station-grid protocol.
    """
    return _build_closed_mesh(surface, nx, nz, z_top=None, lid=False)


def submerged_mesh(surface, draft: float, nx: int = 160, nz: int = 80) -> TriangleMesh:
    """Closed mesh of the hull below `draft`, lidded at the waterplane."""
    if not 0.0 < draft <= surface.depth:
        raise DomainError(f"draft {draft} outside (0, depth]")
    return _build_closed_mesh(surface, nx, nz, z_top=draft, lid=True)


def displaced_volume(surface, draft: float, nx: int = 160, nz: int = 80) -> float:
    """Submerged volume at the given draft via the divergence theorem."""
    return submerged_mesh(surface, draft, nx, nz).signed_volume()


def wetted_surface_area(surface, draft: float, nx: int = 160, nz: int = 80) -> float:
    """Submerged surface area (both sides, waterplane lid excluded)."""
    return submerged_mesh(surface, draft, nx, nz).area(exclude_lid=True)


def scale_to_displacement(params, target_volume: float, draft_frac: float,
                          nx: int = 160, nz: int = 80):
    """Return params with loa rescaled so the displaced volume matches.

    All terms except loa are loa-relative, so volume scales with loa**3 and
    one measurement fixes the answer.
    """
    from .params import HullParameters  # local import keeps module deps one-way

    if target_volume <= 0:
        raise DomainError("target volume must be positive")
    if not isinstance(params, HullParameters):
        params = HullParameters(params)
    surf = HullSurface(params)
    draft = draft_frac * surf.depth
    v_now = displaced_volume(surf, draft, nx, nz)
    if v_now <= 0:
        raise DomainError("hull has no displaced volume at this draft")
    return params.replace(loa=params.loa * (target_volume / v_now) ** (1.0 / 3.0))


# --------------------------------------------------------------------------- #
# self-intersection test: AABB tree + triangle-triangle overlap
# --------------------------------------------------------------------------- #

class _AabbTree:
    """Median-split bounding-volume hierarchy stored in flat arrays."""

    __slots__ = ("lo", "hi", "left", "right", "start", "count", "order")

    def __init__(self, box_lo, box_hi, leaf_size=8):
        n = len(box_lo)
        max_nodes = max(2 * n, 1)
        self.lo = np.empty((max_nodes, 3))
        self.hi = np.empty((max_nodes, 3))
        self.left = np.full(max_nodes, -1, dtype=np.int64)
        self.right = np.full(max_nodes, -1, dtype=np.int64)
        self.start = np.full(max_nodes, -1, dtype=np.int64)
        self.count = np.zeros(max_nodes, dtype=np.int64)
        self.order = np.arange(n)
        centers = 0.5 * (box_lo + box_hi)
        n_nodes = 0
        stack = [(0, n)]
        spans = []
        while stack:
            s, e = stack.pop()
            node = n_nodes
            n_nodes += 1
            idx = self.order[s:e]
            self.lo[node] = box_lo[idx].min(axis=0)
            self.hi[node] = box_hi[idx].max(axis=0)
            spans.append((node, s, e))
            if e - s <= leaf_size:
                self.start[node] = s
                self.count[node] = e - s
                continue
            axis = int(np.argmax(self.hi[node] - self.lo[node]))
            local = np.argsort(centers[idx, axis], kind="stable")
            self.order[s:e] = idx[local]
            mid = (s + e) // 2
            # children are pushed right-then-left so the left child is
            # processed next and receives index node+1
            self.left[node] = n_nodes
            stack.append((mid, e))
            stack.append((s, mid))
        # second pass fixes right-child links from the traversal order
        self._fix_links(spans)
        self.lo = self.lo[:n_nodes]
        self.hi = self.hi[:n_nodes]
        self.left = self.left[:n_nodes]
        self.right = self.right[:n_nodes]
        self.start = self.start[:n_nodes]
        self.count = self.count[:n_nodes]

    def _fix_links(self, spans):
        span_to_node = {(s, e): node for node, s, e in spans}
        for node, s, e in spans:
            if self.start[node] >= 0:
                continue
            mid = (s + e) // 2
            self.left[node] = span_to_node[(s, mid)]
            self.right[node] = span_to_node[(mid, e)]

    def query_boxes(self, q_lo, q_hi):
        """All (query, item) index pairs with overlapping boxes, batched."""
        nq = len(q_lo)
        if self.count.sum() == 0 or nq == 0:
            return np.empty((0, 2), dtype=np.int64)
        frontier_q = np.arange(nq)
        frontier_n = np.zeros(nq, dtype=np.int64)
        pairs_q = []
        pairs_t = []
        while len(frontier_q):
            q, nodes = frontier_q, frontier_n
            overlap = np.all(q_lo[q] <= self.hi[nodes], axis=1) & \
                np.all(q_hi[q] >= self.lo[nodes], axis=1)
            q, nodes = q[overlap], nodes[overlap]
            if not len(q):
                break
            leaf = self.start[nodes] >= 0
            if np.any(leaf):
                lq, ln = q[leaf], nodes[leaf]
                reps = self.count[ln]
                qq = np.repeat(lq, reps)
                offs = np.concatenate([np.arange(c) for c in reps]) if len(reps) else np.empty(0, int)
                tt = self.order[np.repeat(self.start[ln], reps) + offs]
                pairs_q.append(qq)
                pairs_t.append(tt)
            inner_q, inner_n = q[~leaf], nodes[~leaf]
            frontier_q = np.concatenate([inner_q, inner_q])
            frontier_n = np.concatenate([self.left[inner_n], self.right[inner_n]])
        if not pairs_q:
            return np.empty((0, 2), dtype=np.int64)
        return np.stack([np.concatenate(pairs_q), np.concatenate(pairs_t)], axis=1)


def _tri_tri_overlap(t1, t2, eps):
    """Vectorized Moller-style test with absolute tolerance `eps` (length
    units); pairs that merely touch within eps are not intersections."""
    n = len(t1)
    if n == 0:
        return np.zeros(0, dtype=bool)
    n2 = np.cross(t2[:, 1] - t2[:, 0], t2[:, 2] - t2[:, 0])
    d2 = -np.einsum("ij,ij->i", n2, t2[:, 0])
    dv1 = np.einsum("ijk,ik->ij", t1, n2) + d2[:, None]
    n1 = np.cross(t1[:, 1] - t1[:, 0], t1[:, 2] - t1[:, 0])
    d1 = -np.einsum("ij,ij->i", n1, t1[:, 0])
    dv2 = np.einsum("ijk,ik->ij", t2, n1) + d1[:, None]

    scale1 = np.linalg.norm(n2, axis=1)[:, None] + 1e-300
    scale2 = np.linalg.norm(n1, axis=1)[:, None] + 1e-300
    sv1 = dv1 / scale1
    sv2 = dv2 / scale2

    separated = (np.all(sv1 > eps, axis=1) | np.all(sv1 < -eps, axis=1) |
                 np.all(sv2 > eps, axis=1) | np.all(sv2 < -eps, axis=1))
    coplanar = np.all(np.abs(sv1) <= eps, axis=1)
    cross_mask = ~separated & ~coplanar

    result = np.zeros(n, dtype=bool)
    if np.any(cross_mask):
        idx = np.flatnonzero(cross_mask)
        direction = np.cross(n1[idx], n2[idx])
        i1 = _interval_on_line(t1[idx], dv1[idx], direction, eps)
        i2 = _interval_on_line(t2[idx], dv2[idx], direction, eps)
        lo = np.maximum(i1[0], i2[0])
        hi = np.minimum(i1[1], i2[1])
        dirlen = np.linalg.norm(direction, axis=1) + 1e-300
        result[idx] = (hi - lo) > eps * dirlen
    if np.any(coplanar):
        idx = np.flatnonzero(coplanar)
        result[idx] = _coplanar_overlap(t1[idx], t2[idx], n1[idx], eps)
    return result


def _interval_on_line(tri, dv, direction, eps):
    """Parametric interval of each triangle's plane-crossing segment."""
    proj = np.einsum("ijk,ik->ij", tri, direction)
    n = len(tri)
    lo = np.full(n, np.inf)
    hi = np.full(n, -np.inf)
    for a in range(3):
        for b in range(3):
            if a >= b:
                continue
            da, db = dv[:, a], dv[:, b]
            crossing = (da * db) < 0
            same_zero = (np.abs(da) < 1e-300) & (np.abs(db) < 1e-300)
            denom = np.where(np.abs(da - db) > 1e-300, da - db, 1.0)
            t = proj[:, a] + (proj[:, b] - proj[:, a]) * np.where(crossing, da / denom, 0.0)
            lo = np.where(crossing, np.minimum(lo, t), lo)
            hi = np.where(crossing, np.maximum(hi, t), hi)
            del same_zero
    # vertices lying on the plane also bound the segment
    on_plane = np.abs(dv) < 1e-300
    for a in range(3):
        mask = on_plane[:, a]
        lo = np.where(mask, np.minimum(lo, proj[:, a]), lo)
        hi = np.where(mask, np.maximum(hi, proj[:, a]), hi)
    empty = ~np.isfinite(lo)
    lo = np.where(empty, 0.0, lo)
    hi = np.where(empty, 0.0, hi)
    return lo, hi


def _coplanar_overlap(t1, t2, n1, eps):
    """2D separating-axis test for coplanar triangle pairs."""
    axis = np.argmax(np.abs(n1), axis=1)
    keep = np.stack([(axis + 1) % 3, (axis + 2) % 3], axis=1)
    rows = np.arange(len(t1))[:, None, None]
    p1 = t1[rows, np.arange(3)[None, :, None], keep[:, None, :]]
    p2 = t2[rows, np.arange(3)[None, :, None], keep[:, None, :]]
    out = np.ones(len(t1), dtype=bool)
    for poly_a, poly_b in ((p1, p2), (p2, p1)):
        edges = np.roll(poly_a, -1, axis=1) - poly_a
        normals = np.stack([-edges[..., 1], edges[..., 0]], axis=-1)
        for e in range(3):
            ax = normals[:, e, :]
            axlen = np.linalg.norm(ax, axis=1) + 1e-300
            proj_a = np.einsum("ijk,ik->ij", poly_a, ax)
            proj_b = np.einsum("ijk,ik->ij", poly_b, ax)
            gap = (proj_b.min(axis=1) >= proj_a.max(axis=1) - eps * axlen) | \
                  (proj_a.min(axis=1) >= proj_b.max(axis=1) - eps * axlen)
            out &= ~gap
    return out


def self_intersects(mesh: TriangleMesh, eps_frac: float = 1e-9) -> bool:
    """True iff any two non-adjacent triangles interpenetrate."""
    if mesh.n_faces < 2:
        return False
    tris = mesh.triangle_corners()
    box_lo = tris.min(axis=1)
    box_hi = tris.max(axis=1)
    diag = float(np.linalg.norm(mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)))
    eps = eps_frac * diag
    tree = _AabbTree(box_lo - eps, box_hi + eps)
    pairs = tree.query_boxes(box_lo - eps, box_hi + eps)
    if not len(pairs):
        return False
    pairs = pairs[pairs[:, 0] < pairs[:, 1]]
    f = mesh.faces
    fa, fb = f[pairs[:, 0]], f[pairs[:, 1]]
    shared = np.zeros(len(pairs), dtype=bool)
    for a in range(3):
        for b in range(3):
            shared |= fa[:, a] == fb[:, b]
    pairs = pairs[~shared]
    if not len(pairs):
        return False
    hits = _tri_tri_overlap(tris[pairs[:, 0]], tris[pairs[:, 1]], eps)
    return bool(np.any(hits))


# --------------------------------------------------------------------------- #
# STL and OBJ IO
# --------------------------------------------------------------------------- #

_STL_HEADER = b"hullkit binary STL" + b" " * 62


def export_stl(mesh: TriangleMesh, path, format: str = "binary") -> None:
    if mesh.n_faces == 0:
        raise DomainError("refusing to export an empty mesh")
    tris = mesh.triangle_corners().astype(np.float32)
    normals = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    lens = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = np.where(lens > 0, normals / np.where(lens > 0, lens, 1), 0.0).astype(np.float32)
    if format == "binary":
        record = np.zeros(len(tris), dtype=np.dtype([
            ("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2"),
        ]))
        record["normal"] = normals
        record["v"] = tris
        with open(path, "wb") as fh:
            fh.write(_STL_HEADER)
            fh.write(struct.pack("<I", len(tris)))
            fh.write(record.tobytes())
    elif format == "ascii":
        lines = ["solid hull"]
        for nrm, tri in zip(normals, tris):
            lines.append(f"  facet normal {nrm[0]:.9e} {nrm[1]:.9e} {nrm[2]:.9e}")
            lines.append("    outer loop")
            for v in tri:
                lines.append(f"      vertex {v[0]:.9e} {v[1]:.9e} {v[2]:.9e}")
            lines.append("    endloop")
            lines.append("  endfacet")
        lines.append("endsolid hull")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        raise DomainError(f"unknown STL format '{format}'")


def _weld(points: np.ndarray):
    """Merge exactly-equal vertices; returns (vertices, faces)."""
    flat = np.ascontiguousarray(points.reshape(-1, 3))
    uniq, inverse = np.unique(flat.view([("x", float), ("y", float), ("z", float)]),
                              return_inverse=True)
    vertices = uniq.view(float).reshape(-1, 3)
    faces = inverse.reshape(-1, 3).astype(np.int64)
    return vertices, faces


def load_stl(path) -> TriangleMesh:
    with open(path, "rb") as fh:
        head = fh.read(5)
    if head == b"solid":
        try:
            return _load_stl_ascii(path)
        except ParseError:
            pass  # some binary files start with "solid"; fall through
    return _load_stl_binary(path)


def _load_stl_binary(path) -> TriangleMesh:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 84:
        raise ParseError(f"{path}: too short for binary STL")
    (count,) = struct.unpack_from("<I", data, 80)
    expect = 84 + 50 * count
    if len(data) < expect:
        raise ParseError(f"{path}: binary STL truncated ({len(data)} < {expect} bytes)")
    record = np.frombuffer(data, offset=84, count=count, dtype=np.dtype([
        ("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2"),
    ]))
    tris = record["v"].astype(np.float64)
    vertices, faces = _weld(tris)
    return TriangleMesh(vertices=vertices, faces=faces)


def _load_stl_ascii(path) -> TriangleMesh:
    tris = []
    current: list[list[float]] = []
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "vertex":
                if len(parts) != 4:
                    raise ParseError(f"{path}:{lineno}: malformed vertex line")
                try:
                    current.append([float(p) for p in parts[1:]])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: non-numeric vertex") from None
            elif parts[0] == "endfacet":
                if len(current) != 3:
                    raise ParseError(f"{path}:{lineno}: facet with {len(current)} vertices")
                tris.append(current)
                current = []
    if not tris:
        raise ParseError(f"{path}: no facets found")
    arr = np.array(tris, dtype=float)
    # mimic the f32 quantization of the binary path so both round-trip alike
    vertices, faces = _weld(arr.astype(np.float32).astype(np.float64))
    return TriangleMesh(vertices=vertices, faces=faces)


def load_obj(path) -> TriangleMesh:
    """Triangle-only OBJ reader (v/f records; polygon faces are an error)."""
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ParseError(f"{path}:{lineno}: malformed vertex")
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                idx = [p.split("/")[0] for p in parts[1:]]
                if len(idx) != 3:
                    raise ParseError(
                        f"{path}:{lineno}: face with {len(idx)} vertices (triangles only)")
                try:
                    face = [int(i) for i in idx]
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: non-integer face index") from None
                faces.append([i - 1 if i > 0 else len(verts) + i for i in face])
    if not faces:
        raise ParseError(f"{path}: no triangular faces found")
    v = np.array(verts, dtype=float)
    f = np.array(faces, dtype=np.int64)
    if f.min() < 0 or f.max() >= len(v):
        raise ParseError(f"{path}: face index out of range")
    return TriangleMesh(vertices=v, faces=f)


def load_mesh(path) -> TriangleMesh:
    """Load STL (binary or ascii) or triangle-only OBJ by extension."""
    p = str(path)
    if p.lower().endswith(".obj"):
        return load_obj(p)
    return load_stl(p)
