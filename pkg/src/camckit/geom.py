"""Shared planar/point-set numerics used by the frontier and curve machinery."""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

TWO_PI = 2.0 * np.pi


def wrap_angle(t):
    """Map angles into [0, 2*pi)."""
    return np.mod(t, TWO_PI)


def signed_area(points: np.ndarray) -> float:
    """Signed area of a closed polygon given as an (N, 2) ring (no repeated endpoint)."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polyline_point_distances(query: np.ndarray, ring: np.ndarray, closed: bool = True) -> np.ndarray:
    """Distance from each query point to a polyline (treated as segments)."""
    a = ring
    b = np.roll(ring, -1, axis=0) if closed else ring[1:]
    if not closed:
        a = ring[:-1]
    ab = b - a
    ab2 = np.maximum((ab * ab).sum(axis=1), 1e-300)
    out = np.empty(len(query))
    # chunk the quadratic pairing to keep memory bounded
    step = max(1, int(4e6 / max(len(a), 1)))
    for i in range(0, len(query), step):
        q = query[i : i + step]
        t = ((q[:, None, :] - a[None]) * ab[None]).sum(axis=-1) / ab2[None]
        t = np.clip(t, 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        d2 = ((q[:, None, :] - proj) ** 2).sum(axis=-1)
        out[i : i + step] = np.sqrt(d2.min(axis=1))
    return out


def hausdorff(ring_a: np.ndarray, ring_b: np.ndarray, closed: bool = True) -> float:
    """Symmetric Hausdorff distance between two polylines."""
    d1 = polyline_point_distances(ring_a, ring_b, closed).max()
    d2 = polyline_point_distances(ring_b, ring_a, closed).max()
    return float(max(d1, d2))


def pointset_hausdorff(pts_a: np.ndarray, pts_b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point clouds (KD-tree accelerated)."""
    ta, tb = cKDTree(pts_a), cKDTree(pts_b)
    return float(max(tb.query(pts_a)[0].max(), ta.query(pts_b)[0].max()))


def dihedral_group() -> list[np.ndarray]:
    """The 8 isometries fixing the builtin hexic frontiers: rotations by k*pi/2 times optional x-axis flip."""
    mats = []
    for k in range(4):
        c, s = np.cos(k * np.pi / 2.0), np.sin(k * np.pi / 2.0)
        rot = np.array([[c, -s], [s, c]])
        mats.append(rot)
        mats.append(rot @ np.diag([1.0, -1.0]))
    return mats


def _orient(p, q, r):
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])


def segment_pairs_intersecting(points: np.ndarray, skip_adjacent: int = 1, eps: float = 1e-12):
    """All transversally crossing segment pairs of a closed polyline.

    Candidate pairs come from a uniform spatial hash; crossings are confirmed with
    orientation predicates at tolerance `eps`. Pairs closer than `skip_adjacent`
    along the ring are ignored (shared endpoints are not crossings).
    """
    n = len(points)
    seg_a = points
    seg_b = np.roll(points, -1, axis=0)
    lo = np.minimum(seg_a, seg_b)
    hi = np.maximum(seg_a, seg_b)
    cell = float(np.linalg.norm(seg_b - seg_a, axis=1).max()) + 1e-12
    buckets: dict[tuple[int, int], list[int]] = {}
    key_lo = np.floor(lo / cell).astype(np.int64)
    key_hi = np.floor(hi / cell).astype(np.int64)
    for i in range(n):
        for kx in range(key_lo[i, 0], key_hi[i, 0] + 1):
            for ky in range(key_lo[i, 1], key_hi[i, 1] + 1):
                buckets.setdefault((kx, ky), []).append(i)
    cand = set()
    for idxs in buckets.values():
        for ii in range(len(idxs)):
            for jj in range(ii + 1, len(idxs)):
                i, j = idxs[ii], idxs[jj]
                d = min((j - i) % n, (i - j) % n)
                if d > skip_adjacent:
                    cand.add((min(i, j), max(i, j)))
    hits = []
    for i, j in sorted(cand):
        p1, p2 = seg_a[i], seg_b[i]
        q1, q2 = seg_a[j], seg_b[j]
        if max(min(p1[0], p2[0]), min(q1[0], q2[0])) > min(max(p1[0], p2[0]), max(q1[0], q2[0])) + eps:
            continue
        if max(min(p1[1], p2[1]), min(q1[1], q2[1])) > min(max(p1[1], p2[1]), max(q1[1], q2[1])) + eps:
            continue
        o1, o2 = _orient(p1, p2, q1), _orient(p1, p2, q2)
        o3, o4 = _orient(q1, q2, p1), _orient(q1, q2, p2)
        if (o1 * o2 < -eps * eps) and (o3 * o4 < -eps * eps):
            hits.append((i, j))
    return hits


def segment_intersection_point(p1, p2, q1, q2):
    """Intersection point of two properly crossing segments."""
    r = p2 - p1
    s = q2 - q1
    denom = r[0] * s[1] - r[1] * s[0]
    t = ((q1 - p1)[0] * s[1] - (q1 - p1)[1] * s[0]) / denom
    return p1 + t * r
