"""Oriented-box and convex-polygon primitives.

All lengths are meters, all angles radians, everything double precision.
Rotations follow the Rz(yaw) @ Ry(pitch) @ Rx(roll) convention.  Convex
polygons are counter-clockwise vertex lists in the z = 0 plane; a box
footprint is the convex hull of its eight corners projected to that plane.
Touching polygons count as intersecting (closed-set semantics), so
``polygon_min_distance(a, b) == 0`` exactly when ``polygons_intersect(a, b)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHullError, InvalidTransformError

COLLINEAR_TOL = 1e-9
ORTHO_TOL = 1e-9


def normalize_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    x = (a + np.pi) % (2.0 * np.pi)
    if x == 0.0:
        return np.pi
    return float(x - np.pi)


def rotation_from_rpy(rpy) -> np.ndarray:
    """3x3 rotation matrix Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    roll, pitch, yaw = (float(v) for v in rpy)
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


def rpy_from_rotation(r: np.ndarray) -> np.ndarray:
    """Extract (roll, pitch, yaw) from a rotation matrix.

    Inverse of :func:`rotation_from_rpy` for pitch in (-pi/2, pi/2).  At the
    gimbal singularity (|pitch| = pi/2) roll is fixed to 0 by convention.
    """
    sp = -float(r[2, 0])
    sp = min(1.0, max(-1.0, sp))
    pitch = float(np.arcsin(sp))
    if abs(sp) > 1.0 - 1e-12:
        roll = 0.0
        yaw = float(np.arctan2(-r[0, 1], r[1, 1]))
    else:
        roll = float(np.arctan2(r[2, 1], r[2, 2]))
        yaw = float(np.arctan2(r[1, 0], r[0, 0]))
    return np.array([normalize_angle(roll), normalize_angle(pitch), normalize_angle(yaw)])


@dataclass
class Pose:
    """Position plus roll/pitch/yaw orientation."""

    center: np.ndarray
    rpy: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).reshape(3)
        rpy = np.asarray(self.rpy, dtype=float).reshape(3)
        if not (np.all(np.isfinite(self.center)) and np.all(np.isfinite(rpy))):
            raise ValueError("pose entries must be finite")
        self.rpy = np.array([normalize_angle(a) for a in rpy])

    def rotation(self) -> np.ndarray:
        return rotation_from_rpy(self.rpy)


@dataclass
class HomTransform:
    """4x4 homogeneous transform with an orthonormal rotation block."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float).reshape(4, 4)
        self.validate()

    def validate(self):
        m = self.matrix
        if not np.all(np.isfinite(m)):
            raise InvalidTransformError("non-finite transform entries")
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=ORTHO_TOL, rtol=0.0):
            raise InvalidTransformError("last row must be [0, 0, 0, 1]")
        r = m[:3, :3]
        if not np.allclose(r.T @ r, np.eye(3), atol=ORTHO_TOL, rtol=0.0):
            raise InvalidTransformError("rotation block is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > ORTHO_TOL:
            raise InvalidTransformError("rotation block must be proper (det = +1)")

    @classmethod
    def identity(cls) -> "HomTransform":
        return cls(np.eye(4))

    @classmethod
    def from_parts(cls, rotation, translation) -> "HomTransform":
        m = np.eye(4)
        m[:3, :3] = np.asarray(rotation, dtype=float)
        m[:3, 3] = np.asarray(translation, dtype=float).reshape(3)
        return cls(m)

    @classmethod
    def from_rpy(cls, rpy, translation=(0.0, 0.0, 0.0)) -> "HomTransform":
        return cls.from_parts(rotation_from_rpy(rpy), translation)

    def inverse(self) -> "HomTransform":
        r = self.matrix[:3, :3]
        t = self.matrix[:3, 3]
        return HomTransform.from_parts(r.T, -r.T @ t)

    def apply_point(self, p) -> np.ndarray:
        return self.matrix[:3, :3] @ np.asarray(p, dtype=float).reshape(3) + self.matrix[:3, 3]


def transform_pose(t: HomTransform, p: Pose) -> Pose:
    """Apply `t` to a pose: center mapped, orientation composed with t's rotation."""
    t.validate()
    center = t.apply_point(p.center)
    rot = t.matrix[:3, :3] @ p.rotation()
    return Pose(center, rpy_from_rotation(rot))


# Corner sign order: itertools.product semantics over (x, y, z), i.e.
# (-,-,-), (-,-,+), (-,+,-), (-,+,+), (+,-,-), (+,-,+), (+,+,-), (+,+,+).
_CORNER_SIGNS = np.array(
    [[sx, sy, sz] for sx in (-1.0, 1.0) for sy in (-1.0, 1.0) for sz in (-1.0, 1.0)]
)


@dataclass
class Obb:
    """Oriented 3D box: pose plus full side lengths."""

    pose: Pose
    extent: np.ndarray

    def __post_init__(self):
        self.extent = np.asarray(self.extent, dtype=float).reshape(3)
        if not np.all(self.extent > 0.0):
            raise ValueError("all box extents must be positive")


def obb_corners(b: Obb) -> np.ndarray:
    """The 8 corners of the box in world coordinates, deterministic order."""
    local = _CORNER_SIGNS * (b.extent / 2.0)
    return b.pose.center + local @ b.pose.rotation().T


def obb_top(b: Obb) -> float:
    """Height of the topmost corner."""
    return float(np.max(obb_corners(b)[:, 2]))


def obb_bottom(b: Obb) -> float:
    return float(np.min(obb_corners(b)[:, 2]))


@dataclass
class ConvexPolygon:
    """CCW convex polygon in the horizontal plane."""

    vertices: np.ndarray
    _area: float = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs an (m, 2) array with m >= 3")
        area = _signed_area(v)
        if area <= 0.0:
            raise ValueError("vertices must be counter-clockwise with positive area")
        nxt = np.roll(v, -1, axis=0)
        prv = np.roll(v, 1, axis=0)
        cross = np.cross(v - prv, nxt - v)
        if np.any(cross < -COLLINEAR_TOL):
            raise ValueError("polygon is not convex")
        self.vertices = v
        self._area = float(area)

    @property
    def area(self) -> float:
        return self._area

    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d * d).sum(-1)).max())

    def edges(self):
        return zip(self.vertices, np.roll(self.vertices, -1, axis=0))


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def convex_hull_2d(points) -> ConvexPolygon:
    """Convex hull (Andrew's monotone chain) of >= 3 non-collinear points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise DegenerateHullError("need at least 3 points")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 0.0, axis=1)
    pts = pts[keep]
    if len(pts) < 3:
        raise DegenerateHullError("all points coincide or pair up")

    def half(chain_pts):
        chain = []
        for p in chain_pts:
            while len(chain) >= 2:
                cross = np.cross(chain[-1] - chain[-2], p - chain[-2])
                if cross <= COLLINEAR_TOL:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise DegenerateHullError("points are collinear")
    return ConvexPolygon(hull)


def obb_footprint(b: Obb) -> ConvexPolygon:
    """Projection of the box onto the support plane z = 0."""
    return convex_hull_2d(obb_corners(b)[:, :2])


def _projection_interval(vertices: np.ndarray, axis: np.ndarray):
    d = vertices @ axis
    return d.min(), d.max()


def polygons_intersect(a: ConvexPolygon, b: ConvexPolygon) -> bool:
    """Separating-axis test over both polygons' edge normals; touching counts."""
    for poly in (a, b):
        v = poly.vertices
        edges = np.roll(v, -1, axis=0) - v
        normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1)
        for axis in normals:
            amin, amax = _projection_interval(a.vertices, axis)
            bmin, bmax = _projection_interval(b.vertices, axis)
            if amax < bmin or bmax < amin:
                return False
    return True


def _segment_distance(p1, p2, q1, q2) -> float:
    """Min distance between 2D segments [p1,p2] and [q1,q2]."""
    best = np.inf
    for (a1, a2), bs in (((p1, p2), (q1, q2)), ((q1, q2), (p1, p2))):
        d = a2 - a1
        dd = float(d @ d)
        for q in bs:
            if dd == 0.0:
                t = 0.0
            else:
                t = min(1.0, max(0.0, float((q - a1) @ d) / dd))
            diff = q - (a1 + t * d)
            best = min(best, float(np.sqrt(diff @ diff)))
    return best


def polygon_min_distance(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Exact min Euclidean distance between two convex polygons (0 if they meet)."""
    if polygons_intersect(a, b):
        return 0.0
    best = np.inf
    for p1, p2 in a.edges():
        for q1, q2 in b.edges():
            best = min(best, _segment_distance(p1, p2, q1, q2))
    return best


def convex_clip(subject: ConvexPolygon, clip: ConvexPolygon) -> np.ndarray:
    """Sutherland-Hodgman clip of `subject` against convex `clip`.

    Returns the vertex array of the intersection region (possibly empty or
    degenerate, in which case fewer than 3 vertices come back).
    """
    out = list(subject.vertices)
    cv = clip.vertices
    for i in range(len(cv)):
        if not out:
            break
        e1, e2 = cv[i], cv[(i + 1) % len(cv)]
        edge = e2 - e1
        inside = [float(np.cross(edge, p - e1)) >= 0.0 for p in out]
        nxt = []
        for j, p in enumerate(out):
            k = (j + 1) % len(out)
            q = out[k]
            if inside[j]:
                nxt.append(p)
            if inside[j] != inside[k]:
                denom = float(np.cross(edge, q - p))
                if denom != 0.0:
                    t = float(np.cross(edge, e1 - p)) / denom
                    nxt.append(p + t * (q - p))
        out = nxt
    return np.array(out) if out else np.zeros((0, 2))


def intersection_area(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Area of the intersection of two convex polygons."""
    region = convex_clip(a, b)
    if len(region) < 3:
        return 0.0
    return abs(_signed_area(region))
