"""Indexed triangle meshes: loading, saving, normalization, content hashing.

Readers cover the ASCII OBJ v/f subset (polygons fan-triangulated) and binary
STL. Degenerate triangles (area below 1e-12) are dropped at load time with a
warning. Meshes are immutable after construction; the axis-aligned bounding
box and the collision BVH are cached lazily.
"""

import hashlib
import struct
import warnings

import numpy as np

_DEGENERATE_AREA = 1e-12


class MeshError(ValueError):
    """Invalid mesh content or operation."""


class MeshLoadError(MeshError):
    """Malformed or unsupported mesh file."""


def _triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


class TriMesh:
    """Immutable indexed triangle mesh in map units."""

    __slots__ = ("vertices", "triangles", "source_path", "_aabb", "_bvh", "_areas")

    def __init__(self, vertices, triangles, source_path: str | None = None,
                 _drop_degenerate: bool = True):
        v = np.asarray(vertices, dtype=np.float64)
        t = np.asarray(triangles, dtype=np.int32)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must be an (m, 3) array of vertex indices")
        if v.shape[0] == 0 or t.shape[0] == 0:
            raise MeshError("mesh must have at least one vertex and one triangle")
        if not np.all(np.isfinite(v)):
            raise MeshError("vertex coordinates must be finite")
        if t.min() < 0 or t.max() >= v.shape[0]:
            raise MeshError("triangle index out of range")
        if _drop_degenerate:
            areas = _triangle_areas(v, t)
            bad = areas <= _DEGENERATE_AREA
            if bad.any():
                warnings.warn(
                    f"dropping {int(bad.sum())} degenerate triangle(s)",
                    stacklevel=2,
                )
                t = t[~bad]
                if t.shape[0] == 0:
                    raise MeshError("all triangles are degenerate")
        v = v.copy()
        t = t.copy()
        v.setflags(write=False)
        t.setflags(write=False)
        self.vertices = v
        self.triangles = t
        self.source_path = source_path
        self._aabb = None
        self._bvh = None
        self._areas = None

    @property
    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        if self._aabb is None:
            self._aabb = (self.vertices.min(axis=0), self.vertices.max(axis=0))
        return self._aabb

    @property
    def bvh(self):
        if self._bvh is None:
            from .collision import Bvh

            self._bvh = Bvh.build(self.vertices, self.triangles)
        return self._bvh

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @property
    def triangle_areas(self) -> np.ndarray:
        if self._areas is None:
            self._areas = _triangle_areas(self.vertices, self.triangles)
        return self._areas

    @property
    def bounding_radius(self) -> float:
        """Max vertex distance from the AABB center."""
        lo, hi = self.aabb
        c = 0.5 * (lo + hi)
        return float(np.linalg.norm(self.vertices - c, axis=1).max())

    @property
    def content_hash(self) -> str:
        """Order-independent digest of the vertex/face data."""
        v = np.ascontiguousarray(self.vertices)
        v_sorted = v[np.lexsort(v.T[::-1])]
        t = np.sort(self.triangles, axis=1).astype(np.int64)
        t_sorted = t[np.lexsort(t.T[::-1])]
        h = hashlib.sha256()
        h.update(v_sorted.tobytes())
        h.update(t_sorted.tobytes())
        return h.hexdigest()

    def __repr__(self):
        return f"TriMesh({self.vertices.shape[0]} vertices, {self.triangles.shape[0]} triangles)"


def _parse_obj(path: str) -> TriMesh:
    vertices = []
    faces = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshLoadError(f"{path}:{lineno}: vertex needs 3 coordinates")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshLoadError(f"{path}:{lineno}: bad vertex: {exc}") from exc
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshLoadError(f"{path}:{lineno}: face needs at least 3 vertices")
                idx = []
                for token in parts[1:]:
                    head = token.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError as exc:
                        raise MeshLoadError(f"{path}:{lineno}: bad face index {head!r}") from exc
                    if i < 1:
                        raise MeshLoadError(
                            f"{path}:{lineno}: face index {i} (OBJ indices are 1-based)"
                        )
                    idx.append(i - 1)
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
            # other line types (vn, vt, o, g, s, usemtl, ...) are ignored
    if not vertices or not faces:
        raise MeshLoadError(f"{path}: no geometry found")
    faces_arr = np.asarray(faces, dtype=np.int64)
    if faces_arr.max() >= len(vertices):
        raise MeshLoadError(f"{path}: face index out of range")
    try:
        return TriMesh(vertices, faces_arr, source_path=path)
    except MeshError as exc:
        raise MeshLoadError(f"{path}: {exc}") from exc


def _parse_stl_binary(path: str) -> TriMesh:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 84:
        raise MeshLoadError(f"{path}: truncated STL file")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) != expected:
        if data[:5] == b"solid":
            raise MeshLoadError(f"{path}: ASCII STL is not supported (binary only)")
        raise MeshLoadError(
            f"{path}: STL size mismatch (expected {expected} bytes, got {len(data)})"
        )
    if count == 0:
        raise MeshLoadError(f"{path}: empty STL file")
    records = np.frombuffer(data, dtype=np.uint8, count=50 * count, offset=84)
    records = records.reshape(count, 50)
    tris = records[:, 12:48].copy().view("<f4").reshape(count, 3, 3).astype(np.float64)
    flat = tris.reshape(-1, 3)
    # weld exactly equal vertices so the mesh is indexed
    unique, inverse = np.unique(flat, axis=0, return_inverse=True)
    faces = inverse.reshape(count, 3)
    try:
        return TriMesh(unique, faces, source_path=path)
    except MeshError as exc:
        raise MeshLoadError(f"{path}: {exc}") from exc


def load_mesh(path: str) -> TriMesh:
    """Load an ASCII OBJ (v/f subset) or binary STL file."""
    lower = str(path).lower()
    if lower.endswith(".obj"):
        return _parse_obj(str(path))
    if lower.endswith(".stl"):
        return _parse_stl_binary(str(path))
    raise MeshLoadError(f"{path}: unsupported mesh format (expected .obj or .stl)")


def save_obj(mesh: TriMesh, path: str) -> None:
    """Write an ASCII OBJ file; floats round-trip exactly through load_mesh."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def normalize_to_cube(mesh: TriMesh, edge: float = 2.0) -> TriMesh:
    """Uniformly scale and center so the AABB fits an origin-centered cube.

    The longest AABB extent becomes exactly ``edge``; aspect ratios are
    preserved.
    """
    if edge <= 0.0:
        raise MeshError("cube edge must be positive")
    lo, hi = mesh.aabb
    extents = hi - lo
    longest = float(extents.max())
    if longest <= 0.0:
        raise MeshError("mesh has zero extent; cannot normalize")
    scale = edge / longest
    center = 0.5 * (lo + hi)
    return TriMesh((mesh.vertices - center) * scale, mesh.triangles,
                   source_path=mesh.source_path, _drop_degenerate=False)


def scale_about_centroid(mesh: TriMesh, factor: float) -> TriMesh:
    """Scale vertices about the vertex centroid; the centroid stays fixed."""
    if factor <= 0.0:
        raise MeshError("scale factor must be positive")
    c = mesh.centroid
    return TriMesh(c + (mesh.vertices - c) * factor, mesh.triangles,
                   source_path=mesh.source_path, _drop_degenerate=False)
