"""Shape similarity and correspondence finding.

The default matcher is a shape-distribution descriptor (histogram of
mean-normalized pairwise surface distances, so rotation- and
scale-invariant) plus nearest-neighbor correspondences in a PCA-canonical
frame. Both live behind small functions so a different matcher can be
substituted without touching the planning pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .mesh import TriMesh

N_BINS = 64
HIST_RANGE = 3.0  # mean-normalized distances above this land in the last bin
DEFAULT_N_PAIRS = 4096
DEFAULT_SEED = 0
DEFAULT_N_CORRESPONDENCES = 64
_EIG_GAP_TOL = 1e-9

# The four right-handed sign assignments of PCA axes.
_FLIPS = (
    (1.0, 1.0, 1.0),
    (1.0, -1.0, -1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
)


@dataclass(frozen=True)
class ShapeDescriptor:
    """Normalized histogram of mean-normalized pairwise surface distances."""

    bins: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "bins", arr)
        if arr.ndim != 1:
            raise ValueError("descriptor bins must be a 1-d array")
        if (arr < 0).any() or abs(float(arr.sum()) - 1.0) > 1e-9:
            raise ValueError("descriptor bins must be a normalized distribution")

    def to_list(self) -> list[float]:
        return [float(b) for b in self.bins]


@dataclass(frozen=True)
class CorrespondenceSet:
    """Index pairs (source vertex, target vertex) into the original meshes."""

    pairs: np.ndarray
    pca_degenerate: bool = False

    def __post_init__(self):
        arr = np.asarray(self.pairs, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "pairs", arr)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
            raise ValueError("need at least 3 (source, target) index pairs")

    def __len__(self) -> int:
        return self.pairs.shape[0]


def _surface_points(mesh: TriMesh, n: int, rng: np.random.Generator) -> np.ndarray:
    areas = mesh.triangle_areas
    total = float(areas.sum())
    if total <= 0.0:
        raise ValueError("mesh has zero surface area")
    cum = np.cumsum(areas)
    cum /= cum[-1]
    pick = np.searchsorted(cum, rng.random(n), side="right")
    pick = np.minimum(pick, len(areas) - 1)
    tri = mesh.triangles[pick]
    a = mesh.vertices[tri[:, 0]]
    b = mesh.vertices[tri[:, 1]]
    c = mesh.vertices[tri[:, 2]]
    su = np.sqrt(rng.random(n))[:, None]
    v = rng.random(n)[:, None]
    return (1.0 - su) * a + su * (1.0 - v) * b + su * v * c


def descriptor(mesh: TriMesh, n_pairs: int = DEFAULT_N_PAIRS,
               seed: int = DEFAULT_SEED) -> ShapeDescriptor:
    """Sample point pairs on the surface and histogram their distances.

    Distances are divided by their sample mean before binning, which cancels
    uniform scale; distances themselves are rotation-invariant. Deterministic
    for a given seed. The seed and pair count must match between library
    construction and query time for the histograms to be comparable, so
    callers should normally leave the defaults alone.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be positive")
    rng = np.random.default_rng(seed)
    p = _surface_points(mesh, n_pairs, rng)
    q = _surface_points(mesh, n_pairs, rng)
    d = np.linalg.norm(p - q, axis=1)
    mean = float(d.mean())
    if mean <= 0.0:
        raise ValueError("mesh has zero extent")
    x = np.minimum(d / mean, HIST_RANGE)
    hist, _ = np.histogram(x, bins=N_BINS, range=(0.0, HIST_RANGE))
    return ShapeDescriptor(hist / float(n_pairs))


def similarity(a: ShapeDescriptor, b: ShapeDescriptor) -> float:
    """L1 distance between descriptors; lower means more similar."""
    if a.bins.shape != b.bins.shape:
        raise ValueError("descriptor bin counts differ")
    return float(np.abs(a.bins - b.bins).sum())


def _canonical(mesh: TriMesh) -> tuple[np.ndarray, bool]:
    """Vertices centered, scaled to unit mean norm, rotated to PCA axes."""
    x = mesh.vertices - mesh.vertices.mean(axis=0)
    scale = float(np.linalg.norm(x, axis=1).mean())
    if scale <= 0.0:
        raise ValueError("mesh has zero extent")
    x = x / scale
    cov = x.T @ x / x.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    degenerate = bool(eigvals[0] - eigvals[1] < _EIG_GAP_TOL
                      or eigvals[1] - eigvals[2] < _EIG_GAP_TOL)
    if degenerate:
        return x, True
    if np.linalg.det(eigvecs) < 0.0:
        eigvecs = eigvecs.copy()
        eigvecs[:, 2] = -eigvecs[:, 2]
    return x @ eigvecs, False


def _best_flip(query_canon: np.ndarray, template_canon: np.ndarray,
               template_tree: cKDTree) -> np.ndarray:
    """Resolve PCA sign ambiguity: the right-handed axis-sign assignment of
    the query frame minimizing symmetric nearest-vertex RMSD."""
    best = None
    best_rmsd = np.inf
    n = query_canon.shape[0] + template_canon.shape[0]
    for f in _FLIPS:
        flipped = query_canon * f
        d_qt, _ = template_tree.query(flipped)
        d_tq, _ = cKDTree(flipped).query(template_canon)
        rmsd = float(np.sqrt(((d_qt ** 2).sum() + (d_tq ** 2).sum()) / n))
        if rmsd < best_rmsd:
            best_rmsd = rmsd
            best = flipped
    return best


def _farthest_point_indices(pts: np.ndarray, k: int,
                            rng: np.random.Generator) -> np.ndarray:
    n = pts.shape[0]
    k = min(k, n)
    first = int(rng.integers(n))
    chosen = [first]
    dist = np.linalg.norm(pts - pts[first], axis=1)
    for _ in range(k - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(pts - pts[nxt], axis=1))
    return np.asarray(chosen, dtype=np.int64)


def correspondences(query: TriMesh, template: TriMesh,
                    l: int = DEFAULT_N_CORRESPONDENCES,
                    seed: int = DEFAULT_SEED) -> CorrespondenceSet:
    """Match subsampled query vertices to nearest template vertices.

    Both meshes are canonicalized (centroid-centered, unit mean vertex norm,
    PCA axes, sign ambiguity resolved over the four right-handed flips by
    symmetric nearest-vertex RMSD), so the returned index pairs do not change
    when either mesh is rotated or uniformly scaled. Query vertices are
    chosen by seeded farthest-point subsampling. If PCA cannot orient a mesh
    (near-equal covariance eigenvalues) its canonical frame falls back to the
    input axes and the result is flagged.
    """
    if l < 3:
        raise ValueError("need at least 3 correspondences")
    q_canon, q_degen = _canonical(query)
    t_canon, t_degen = _canonical(template)
    t_tree = cKDTree(t_canon)
    q_best = _best_flip(q_canon, t_canon, t_tree)
    src = _farthest_point_indices(q_best, l, np.random.default_rng(seed))
    _, tgt = t_tree.query(q_best[src])
    pairs = np.stack([src, np.asarray(tgt, dtype=np.int64)], axis=1)
    return CorrespondenceSet(pairs, pca_degenerate=q_degen or t_degen)


def select_template(query: TriMesh, library, env_id: str,
                    l: int = DEFAULT_N_CORRESPONDENCES):
    """Pick the library record most similar to the query for an environment.

    Returns (record, correspondences between query and the record's mesh).
    Ties in descriptor distance break by ascending object id. Raises
    LookupError when the library holds nothing for env_id, which callers
    treat as "plan unguided".
    """
    records = [r for r in library.records if r.env_id == env_id]
    if not records:
        raise LookupError(f"library has no entries for environment {env_id!r}")
    qd = descriptor(query)
    best = min(records, key=lambda r: (similarity(qd, r.descriptor), r.object_id))
    return best, correspondences(query, best.mesh, l=l)
