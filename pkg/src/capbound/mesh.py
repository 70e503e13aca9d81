"""Closed triangulated surfaces in R^3 and their integral invariants.

Curvature convention
--------------------
Throughout this package the mean curvature is the *sum* of the principal
curvatures, H = k1 + k2, so the unit sphere has H = 2, int H dmu = 8*pi and
Willmore energy int H^2 dmu = 16*pi.  Every capacity bound in this package is
normalized against 16*pi; a half-trace convention would silently break all of
them, so do not change this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import MeshError

# A face is degenerate when its area is below this fraction of the squared
# mesh diameter.  Degenerate faces would poison the BEM conditioning.
DEGENERATE_AREA_FACTOR = 1e-12

_PHI = (1.0 + math.sqrt(5.0)) / 2.0

# Regular icosahedron on the unit sphere, consistently outward oriented.
# Vertex order matches _icosahedron_vertices() below.
_ICOSA_FACES = (
    (0, 1, 2), (0, 2, 5), (0, 3, 1), (0, 5, 7), (0, 7, 3),
    (1, 3, 8), (1, 4, 2), (1, 8, 4), (2, 4, 6), (2, 6, 5),
    (3, 7, 11), (3, 11, 8), (4, 8, 9), (4, 9, 6), (5, 6, 10),
    (5, 10, 7), (6, 9, 10), (7, 10, 11), (8, 11, 9), (9, 11, 10),
)


@dataclass(frozen=True)
class TriMesh:
    """Closed, consistently oriented triangle mesh embedded in R^3.

    Invariants (checked at construction):
      * every edge is shared by exactly two faces, traversed in opposite
        directions (closed manifold, consistent orientation);
      * no degenerate faces;
      * Euler characteristic is even and at most 2.
    """

    vertices: np.ndarray  # (n, 3) float64
    faces: np.ndarray     # (m, 3) int64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        _validate_mesh(v, f)
        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @property
    def num_edges(self) -> int:
        return 3 * len(self.faces) // 2

    @property
    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    @cached_property
    def face_corners(self) -> np.ndarray:
        """Vertex positions per face, shape (m, 3, 3)."""
        return self.vertices[self.faces]

    @cached_property
    def face_areas(self) -> np.ndarray:
        t = self.face_corners
        n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        return 0.5 * np.linalg.norm(n, axis=1)

    @cached_property
    def face_normals(self) -> np.ndarray:
        """Unit face normals in face winding order."""
        t = self.face_corners
        n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        return n / np.linalg.norm(n, axis=1)[:, None]

    @cached_property
    def face_centroids(self) -> np.ndarray:
        return self.face_corners.mean(axis=1)

    @cached_property
    def max_edge_length(self) -> float:
        t = self.face_corners
        e = np.stack([t[:, 1] - t[:, 0], t[:, 2] - t[:, 1], t[:, 0] - t[:, 2]])
        return float(np.linalg.norm(e, axis=2).max())

    @cached_property
    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def scaled(self, factor: float) -> "TriMesh":
        """Uniformly rescaled copy (same topology)."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return TriMesh(self.vertices * factor, self.faces.copy())


@dataclass(frozen=True)
class SurfaceMeasures:
    """Integral invariants of a closed surface.

    ``hawking_mass`` is tied to ``area`` and ``willmore`` by the definitional
    identity m_H = sqrt(area/16 pi) * (1 - willmore/16 pi); it is computed
    exactly that way.  ``min_h``/``max_h`` are the extreme signed vertex mean
    curvatures (diagnostic: the convexity-sensitive bounds require H >= 0).
    ``orientation_sign`` is +1 for outward, -1 for inward face winding.
    """

    area: float
    total_mean_curvature: float
    willmore: float
    volume: float
    hawking_mass: float
    genus: int
    min_h: float
    max_h: float
    orientation_sign: int


def _validate_mesh(v: np.ndarray, f: np.ndarray) -> None:
    if v.ndim != 2 or v.shape[1] != 3 or len(v) < 4:
        raise MeshError(f"vertex array must be (n>=4, 3), got {v.shape}")
    if f.ndim != 2 or f.shape[1] != 3 or len(f) < 4:
        raise MeshError(f"face array must be (m>=4, 3), got {f.shape}")
    if not np.isfinite(v).all():
        raise MeshError("non-finite vertex coordinates")
    if f.min() < 0 or f.max() >= len(v):
        raise MeshError("face index out of range")
    if (np.diff(np.sort(f, axis=1), axis=1) == 0).any():
        raise MeshError("face with a repeated vertex")
    used = np.zeros(len(v), dtype=bool)
    used[f.ravel()] = True
    if not used.all():
        raise MeshError(f"{int((~used).sum())} unreferenced vertices")

    # Directed half-edges: consistent orientation means each undirected edge
    # appears exactly once in each direction.
    he = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    directed, counts = np.unique(he, axis=0, return_counts=True)
    if (counts > 1).any():
        a, b = directed[np.argmax(counts > 1)]
        raise MeshError(
            f"inconsistent orientation: directed edge ({a}, {b}) traversed "
            f"the same way by more than one face"
        )
    undirected, counts = np.unique(np.sort(he, axis=1), axis=0, return_counts=True)
    if (counts != 2).any():
        k = int(np.argmax(counts != 2))
        a, b = undirected[k]
        if counts[k] == 1:
            raise MeshError(f"open mesh: boundary edge ({a}, {b})")
        raise MeshError(f"non-manifold edge ({a}, {b}) shared by {counts[k]} faces")

    lo = v.min(axis=0)
    hi = v.max(axis=0)
    diam2 = float(np.sum((hi - lo) ** 2))
    t = v[f]
    areas = 0.5 * np.linalg.norm(np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]), axis=1)
    bad = areas <= DEGENERATE_AREA_FACTOR * diam2
    if bad.any():
        raise MeshError(f"degenerate face {int(np.argmax(bad))} (area ~ 0)")

    chi = len(v) - len(undirected) + len(f)
    if chi % 2 != 0 or chi > 2:
        raise MeshError(f"Euler characteristic {chi} (must be even and <= 2)")


# ---------------------------------------------------------------------------
# Primitive generators
# ---------------------------------------------------------------------------


def _icosahedron_vertices() -> np.ndarray:
    v = []
    for a, b in ((1.0, _PHI), (-1.0, _PHI), (1.0, -_PHI), (-1.0, -_PHI)):
        v += [(a, b, 0.0), (0.0, a, b), (b, 0.0, a)]
    v = np.array(v)
    return v / np.linalg.norm(v[0])


def _subdivide_tris(v: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One 4:1 loop-style split with shared midpoints (no smoothing)."""
    verts = [tuple(p) for p in v]
    cache: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            cache[key] = len(verts)
            p = (np.asarray(verts[i]) + np.asarray(verts[j])) / 2.0
            verts.append(tuple(p))
        return cache[key]

    out = []
    for a, b, c in f:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return np.array(verts), np.array(out, dtype=np.int64)


def make_sphere(radius: float, subdivisions: int) -> TriMesh:
    """Icosphere of the given radius; 20 * 4**subdivisions faces."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if subdivisions < 1:
        raise ValueError("subdivisions must be >= 1")
    v = _icosahedron_vertices()
    f = np.array(_ICOSA_FACES, dtype=np.int64)
    for _ in range(subdivisions):
        v, f = _subdivide_tris(v, f)
        v = v / np.linalg.norm(v, axis=1)[:, None]
    return TriMesh(v * radius, f)


def make_spheroid(a: float, b: float, subdivisions: int) -> TriMesh:
    """Spheroid with polar semi-axis ``a`` (z) and equatorial radius ``b``."""
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    s = make_sphere(1.0, subdivisions)
    return TriMesh(s.vertices * np.array([b, b, a]), s.faces.copy())


def make_torus(major_radius: float, minor_radius: float, subdivisions: int) -> TriMesh:
    """Ring torus; requires major_radius > minor_radius > 0."""
    if minor_radius <= 0 or major_radius <= minor_radius:
        raise ValueError("torus requires major_radius > minor_radius > 0")
    if subdivisions < 1:
        raise ValueError("subdivisions must be >= 1")
    nu = 12 * 2 ** (subdivisions - 1)   # around the ring
    nv = 6 * 2 ** (subdivisions - 1)    # around the tube
    theta = 2.0 * np.pi * np.arange(nu) / nu
    phi = 2.0 * np.pi * np.arange(nv) / nv
    ring = major_radius + minor_radius * np.cos(phi)[None, :]
    x = ring * np.cos(theta)[:, None]
    y = ring * np.sin(theta)[:, None]
    z = np.broadcast_to(minor_radius * np.sin(phi)[None, :], x.shape)
    v = np.stack([x, y, z], axis=2).reshape(-1, 3)
    faces = []
    for i in range(nu):
        for j in range(nv):
            q00 = i * nv + j
            q10 = ((i + 1) % nu) * nv + j
            q11 = ((i + 1) % nu) * nv + (j + 1) % nv
            q01 = i * nv + (j + 1) % nv
            faces += [(q00, q10, q11), (q00, q11, q01)]
    f = np.array(faces, dtype=np.int64)
    if _signed_volume(v, f) < 0:
        f = f[:, ::-1]
    return TriMesh(v, f)


def make_box(lx: float, ly: float, lz: float, rounding: float,
             subdivisions: int) -> TriMesh:
    """Box with rounded edges/corners (rounding radius > 0).

    The surface is the offset of the inner box [l/2 - rounding] by the
    rounding radius; a sharp box is excluded because its Willmore energy is
    not mesh-convergent.
    """
    half = np.array([lx, ly, lz]) / 2.0
    if (half <= 0).any():
        raise ValueError("box side lengths must be positive")
    if not 0 < rounding < half.min():
        raise ValueError("rounding must satisfy 0 < rounding < min(side)/2")
    if subdivisions < 1:
        raise ValueError("subdivisions must be >= 1")
    inner = half - rounding

    v, f = _cube_grid(4 * 2 ** (subdivisions - 1))

    def sdf(p: np.ndarray) -> float:
        q = np.abs(p) - inner
        return float(np.linalg.norm(np.maximum(q, 0.0)) + min(q.max(), 0.0) - rounding)

    from scipy.optimize import brentq

    t_hi = float(np.linalg.norm(half)) + rounding
    out = np.empty_like(v)
    for i, p in enumerate(v):
        u = p / np.linalg.norm(p)
        t = brentq(lambda s: sdf(s * u), 1e-9, t_hi, xtol=1e-15, rtol=8.9e-16)
        out[i] = t * u
    return TriMesh(out, f)


def _cube_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Surface of [-1,1]^3 as a welded n x n-per-face triangle grid."""
    g = np.linspace(-1.0, 1.0, n + 1)
    verts: list[tuple[float, float, float]] = []
    vid: dict[tuple[float, float, float], int] = {}

    def add(p: tuple[float, float, float]) -> int:
        if p not in vid:
            vid[p] = len(verts)
            verts.append(p)
        return vid[p]

    faces = []
    for axis in range(3):
        u, w = (axis + 1) % 3, (axis + 2) % 3
        for sgn in (-1.0, 1.0):
            for i in range(n):
                for j in range(n):
                    corner = []
                    for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        p = [0.0, 0.0, 0.0]
                        p[axis] = sgn
                        p[u] = g[i + di]
                        p[w] = g[j + dj]
                        corner.append(add(tuple(p)))
                    a, b, c, d = corner
                    if sgn > 0:
                        faces += [(a, b, c), (a, c, d)]
                    else:
                        faces += [(a, c, b), (a, d, c)]
    return np.array(verts), np.array(faces, dtype=np.int64)


def make_primitive(kind: str, *params: float) -> TriMesh:
    """Dispatch on kind: sphere(r, n), spheroid(a, b, n), box(lx, ly, lz,
    rounding, n), torus(R, r, n).  The trailing parameter is always the
    subdivision count."""
    builders = {
        "sphere": (make_sphere, 2),
        "spheroid": (make_spheroid, 3),
        "box": (make_box, 5),
        "torus": (make_torus, 3),
    }
    if kind not in builders:
        raise ValueError(f"unknown primitive kind {kind!r}")
    fn, nargs = builders[kind]
    if len(params) != nargs:
        raise ValueError(f"{kind} takes {nargs} parameters, got {len(params)}")
    *dims, sub = params
    return fn(*dims, int(sub))


def _signed_volume(v: np.ndarray, f: np.ndarray) -> float:
    t = v[f]
    return float(np.einsum("ij,ij->i", np.cross(t[:, 0], t[:, 1]), t[:, 2]).sum() / 6.0)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


def vertex_curvature_data(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray]:
    """Signed vertex mean curvature (H = k1 + k2) and vertex areas.

    Cotangent mean-curvature vector with mixed Voronoi areas; obtuse
    triangles fall back to barycentric (area/3) weights.  The sign comes
    from the dot product with the outward vertex normal; the vertex areas
    tile the surface exactly (their sum equals the total face area).
    """
    v, f = mesh.vertices, mesh.faces
    nv = len(v)
    t = mesh.face_corners
    e0 = t[:, 2] - t[:, 1]
    e1 = t[:, 0] - t[:, 2]
    e2 = t[:, 1] - t[:, 0]
    raw_normal = np.cross(e2, -e1)
    double_area = np.linalg.norm(raw_normal, axis=1)

    # cot of the interior angle at corner k (opposite edge e_k)
    cot = np.empty((len(f), 3))
    cot[:, 0] = np.einsum("ij,ij->i", e2, -e1) / double_area
    cot[:, 1] = np.einsum("ij,ij->i", -e2, e0) / double_area
    cot[:, 2] = np.einsum("ij,ij->i", e1, -e0) / double_area

    sq = np.stack([np.sum(e0**2, 1), np.sum(e1**2, 1), np.sum(e2**2, 1)], axis=1)
    obtuse = (cot < 0).any(axis=1)
    face_area = double_area / 2.0

    vertex_area = np.zeros(nv)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        voronoi = (sq[:, i] * cot[:, i] + sq[:, j] * cot[:, j]) / 8.0
        contrib = np.where(obtuse, face_area / 3.0, voronoi)
        np.add.at(vertex_area, f[:, k], contrib)
    if (vertex_area <= 0).any():
        raise MeshError("nonpositive mixed vertex area")

    kvec = np.zeros((nv, 3))
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        w = cot[:, k][:, None]
        np.add.at(kvec, f[:, i], w * (v[f[:, i]] - v[f[:, j]]))
        np.add.at(kvec, f[:, j], w * (v[f[:, j]] - v[f[:, i]]))
    kvec /= 2.0 * vertex_area[:, None]

    # outward vertex normal: area-weighted face normals, flipped if the
    # winding encloses negative volume
    orient = 1.0 if _signed_volume(v, f) >= 0 else -1.0
    vnormal = np.zeros((nv, 3))
    for k in range(3):
        np.add.at(vnormal, f[:, k], raw_normal)
    vnormal *= orient

    h_mag = np.linalg.norm(kvec, axis=1)
    sign = np.sign(np.einsum("ij,ij->i", kvec, vnormal))
    sign[sign == 0] = 1.0
    return sign * h_mag, vertex_area


def measure(mesh: TriMesh) -> SurfaceMeasures:
    """All integral invariants of a mesh.

    Quadrature is vertex-lumped: int H^k dmu = sum_i H_i^k A_i, which matches
    the accuracy order of the discrete curvature itself.  int H dmu uses the
    signed curvature, the Willmore energy uses |H| (sign-free).
    """
    area = float(mesh.face_areas.sum())
    signed_vol = _signed_volume(mesh.vertices, mesh.faces)
    h_signed, vertex_area = vertex_curvature_data(mesh)
    total_h = float(np.sum(h_signed * vertex_area))
    willmore = float(np.sum(h_signed**2 * vertex_area))
    hawking = math.sqrt(area / (16.0 * math.pi)) * (1.0 - willmore / (16.0 * math.pi))
    return SurfaceMeasures(
        area=area,
        total_mean_curvature=total_h,
        willmore=willmore,
        volume=abs(signed_vol),
        hawking_mass=hawking,
        genus=mesh.genus,
        min_h=float(h_signed.min()),
        max_h=float(h_signed.max()),
        orientation_sign=1 if signed_vol >= 0 else -1,
    )


# ---------------------------------------------------------------------------
# File I/O (ASCII OBJ and PLY)
# ---------------------------------------------------------------------------


def load_mesh(path: str | Path, fmt: str | None = None) -> TriMesh:
    """Load a closed triangle mesh from an ASCII OBJ or PLY file.

    The format is inferred from the extension unless given explicitly.
    Raises MeshError on parse failures and on any mesh-invariant violation
    (open mesh, inconsistent orientation, degenerate face, ...).
    """
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    fmt = fmt.lower()
    try:
        text = path.read_text()
    except OSError as exc:
        raise MeshError(f"cannot read {path}: {exc}") from exc
    if fmt == "obj":
        v, f = _parse_obj(text, str(path))
    elif fmt == "ply":
        v, f = _parse_ply(text, str(path))
    else:
        raise MeshError(f"unsupported mesh format {fmt!r} (expected obj or ply)")
    return TriMesh(v, f)


def save_mesh(mesh: TriMesh, path: str | Path, fmt: str | None = None) -> None:
    """Write a mesh as ASCII OBJ or PLY (vertex order preserved)."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    fmt = fmt.lower()
    verts = [(float(x), float(y), float(z)) for x, y, z in mesh.vertices]
    if fmt == "obj":
        lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in verts]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    elif fmt == "ply":
        lines = [
            "ply", "format ascii 1.0",
            f"element vertex {mesh.num_vertices}",
            "property double x", "property double y", "property double z",
            f"element face {mesh.num_faces}",
            "property list uchar int vertex_indices",
            "end_header",
        ]
        lines += [f"{x!r} {y!r} {z!r}" for x, y, z in verts]
        lines += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    else:
        raise ValueError(f"unsupported mesh format {fmt!r}")
    path.write_text("\n".join(lines) + "\n")


def _parse_obj(text: str, name: str) -> tuple[np.ndarray, np.ndarray]:
    verts: list[tuple[float, ...]] = []
    faces: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if tok[0] == "v":
            if len(tok) < 4:
                raise MeshError(f"{name}:{lineno}: malformed vertex record")
            try:
                verts.append(tuple(float(x) for x in tok[1:4]))
            except ValueError as exc:
                raise MeshError(f"{name}:{lineno}: bad vertex coordinate") from exc
        elif tok[0] == "f":
            if len(tok) != 4:
                raise MeshError(
                    f"{name}:{lineno}: only triangular faces are supported"
                )
            idx = []
            for t in tok[1:]:
                try:
                    i = int(t.split("/")[0])
                except ValueError as exc:
                    raise MeshError(f"{name}:{lineno}: bad face index {t!r}") from exc
                if i < 0:
                    i = len(verts) + 1 + i
                idx.append(i - 1)
            faces.append(tuple(idx))
        # other record types (vn, vt, o, g, s, usemtl, ...) are ignored
    if not verts or not faces:
        raise MeshError(f"{name}: no vertices or no faces")
    return np.array(verts), np.array(faces, dtype=np.int64)


def _parse_ply(text: str, name: str) -> tuple[np.ndarray, np.ndarray]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshError(f"{name}: missing 'ply' magic")
    n_vert = n_face = -1
    vert_props: list[str] = []
    in_vertex_element = False
    body_start = None
    for k, raw in enumerate(lines[1:], start=1):
        line = raw.strip()
        if line.startswith("comment") or not line:
            continue
        if line.startswith("format"):
            if "ascii" not in line:
                raise MeshError(f"{name}: only ASCII PLY is supported")
        elif line.startswith("element vertex"):
            n_vert = int(line.split()[2])
            in_vertex_element = True
        elif line.startswith("element face"):
            n_face = int(line.split()[2])
            in_vertex_element = False
        elif line.startswith("element"):
            in_vertex_element = False
        elif line.startswith("property") and in_vertex_element:
            vert_props.append(line.split()[-1])
        elif line == "end_header":
            body_start = k + 1
            break
    if body_start is None or n_vert < 0 or n_face < 0:
        raise MeshError(f"{name}: incomplete PLY header")
    try:
        cols = [vert_props.index(ax) for ax in ("x", "y", "z")]
    except ValueError as exc:
        raise MeshError(f"{name}: vertex element lacks x/y/z properties") from exc

    body = [ln.split() for ln in lines[body_start:] if ln.strip()]
    if len(body) < n_vert + n_face:
        raise MeshError(f"{name}: truncated PLY body")
    try:
        verts = np.array(
            [[float(row[c]) for c in cols] for row in body[:n_vert]]
        )
    except (ValueError, IndexError) as exc:
        raise MeshError(f"{name}: bad vertex row") from exc
    faces = []
    for row in body[n_vert:n_vert + n_face]:
        try:
            if int(row[0]) != 3:
                raise MeshError(f"{name}: only triangular faces are supported")
            faces.append((int(row[1]), int(row[2]), int(row[3])))
        except (ValueError, IndexError) as exc:
            raise MeshError(f"{name}: bad face row") from exc
    return verts, np.array(faces, dtype=np.int64)
