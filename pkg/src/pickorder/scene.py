"""Cluttered-scene generation, settling, and the scene file format.

Scenes live on a 1.0 x 1.0 m workspace centered at the origin with the table
surface at z = 0 and the effector home at (0.7, -0.7, 0.5).  Three difficulty
levels fix the object count and how often a new box is dropped on top of an
existing one:

    easy      24 objects, stack probability 0.2
    moderate  36 objects, stack probability 0.4
    hard      60 objects, stack probability 0.6

Generation is a pure function of (seed, difficulty): one Philox stream is
derived per scene and consumed in a fixed order, so equal inputs give
byte-identical scenes.  Generated poses are yaw-only; the rest of the package
still accepts full roll/pitch/yaw states.
"""

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import MissingObjectError, NotSettledError, SceneGenerationError
from .geometry import (
    ConvexPolygon,
    Obb,
    Pose,
    intersection_area,
    obb_bottom,
    obb_corners,
    obb_footprint,
    obb_top,
    polygons_intersect,
)

DIFFICULTIES = ("easy", "moderate", "hard")
OBJECT_COUNTS = {"easy": 24, "moderate": 36, "hard": 60}
STACK_PROBABILITY = {"easy": 0.2, "moderate": 0.4, "hard": 0.6}

WORKSPACE_MIN = (-0.5, -0.5)
WORKSPACE_MAX = (0.5, 0.5)
EFFECTOR_HOME = (0.7, -0.7, 0.5)

# Flat-lying grocery-box extents (lx, ly, lz ranges, meters), sampled uniformly.
CATEGORY_TEMPLATES = {
    "cracker_box": ((0.140, 0.170), (0.170, 0.210), (0.060, 0.075)),
    "sugar_box": ((0.085, 0.100), (0.160, 0.180), (0.045, 0.055)),
    "pudding_box": ((0.095, 0.120), (0.080, 0.095), (0.032, 0.040)),
    "gelatin_box": ((0.075, 0.090), (0.068, 0.080), (0.026, 0.032)),
    "potted_meat_can": ((0.095, 0.105), (0.055, 0.062), (0.078, 0.086)),
}
CATEGORIES = tuple(sorted(CATEGORY_TEMPLATES))

Z_OVERLAP_TOL = 1e-6
MIN_STACK_OVERLAP = 0.3
PLACEMENT_RETRIES = 400
SETTLE_SNAP_TOL = 1e-12
SUPPORT_TOL = 1e-6


@dataclass
class ObjectState:
    """One oriented box with identity and category."""

    id: int
    category: str
    extent: np.ndarray
    pose: Pose

    def __post_init__(self):
        self.extent = np.asarray(self.extent, dtype=float).reshape(3)

    @property
    def obb(self) -> Obb:
        return Obb(self.pose, self.extent)

    def footprint(self) -> ConvexPolygon:
        return obb_footprint(self.obb)


@dataclass
class Scene:
    """Workspace, effector home, and a set of object states."""

    seed: int
    difficulty: str
    workspace_min: np.ndarray
    workspace_max: np.ndarray
    effector_home: np.ndarray
    objects: list

    def __post_init__(self):
        self.workspace_min = np.asarray(self.workspace_min, dtype=float).reshape(2)
        self.workspace_max = np.asarray(self.workspace_max, dtype=float).reshape(2)
        self.effector_home = np.asarray(self.effector_home, dtype=float).reshape(3)

    def ids(self) -> list:
        return [o.id for o in self.objects]

    def get(self, object_id: int) -> ObjectState:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise MissingObjectError(object_id)

    def in_workspace(self, xy) -> bool:
        xy = np.asarray(xy, dtype=float).reshape(-1)[:2]
        return bool(np.all(xy >= self.workspace_min) and np.all(xy <= self.workspace_max))

    def copy(self) -> "Scene":
        return copy.deepcopy(self)


@dataclass
class SupportGraph:
    """Directed supporter -> supported edges of a settled scene."""

    edges: list = field(default_factory=list)

    def supported_by(self, supporter_id: int) -> list:
        return [i for (k, i) in self.edges if k == supporter_id]

    def supporters_of(self, supported_id: int) -> list:
        return [k for (k, i) in self.edges if i == supported_id]


def _interpenetrates(candidate: Obb, cand_fp, others) -> bool:
    cb, ct = obb_bottom(candidate), obb_top(candidate)
    for fp, bottom, top in others:
        if min(ct, top) - max(cb, bottom) > Z_OVERLAP_TOL and polygons_intersect(cand_fp, fp):
            return True
    return False


def generate_scene(seed: int, difficulty: str) -> Scene:
    """Deterministically generate a non-interpenetrating cluttered scene."""
    if difficulty not in DIFFICULTIES:
        raise ValueError(f"unknown difficulty {difficulty!r}; expected one of {DIFFICULTIES}")
    gen = rng.stream(seed, "scene", difficulty)
    count = OBJECT_COUNTS[difficulty]
    p_stack = STACK_PROBABILITY[difficulty]
    wmin, wmax = np.array(WORKSPACE_MIN), np.array(WORKSPACE_MAX)

    objects = []
    cached = []  # (footprint, bottom, top) per placed object
    for oid in range(count):
        category = CATEGORIES[gen.integers(len(CATEGORIES))]
        ranges = CATEGORY_TEMPLATES[category]
        extent = np.array([gen.uniform(lo, hi) for lo, hi in ranges])
        yaw = gen.uniform(-np.pi, np.pi)
        placed = False
        for _ in range(PLACEMENT_RETRIES):
            stack = bool(objects) and gen.random() < p_stack
            if stack:
                base_idx = int(gen.integers(len(objects)))
                base = objects[base_idx]
                radius = 0.5 * float(np.hypot(*base.extent[:2]))
                offset = gen.uniform(-radius, radius, size=2)
                center_xy = base.pose.center[:2] + offset
                z = cached[base_idx][2] + extent[2] / 2.0
            else:
                center_xy = gen.uniform(wmin, wmax)
                z = extent[2] / 2.0
            if not (np.all(center_xy >= wmin) and np.all(center_xy <= wmax)):
                continue
            pose = Pose(np.array([center_xy[0], center_xy[1], z]), np.array([0.0, 0.0, yaw]))
            obb = Obb(pose, extent)
            fp = obb_footprint(obb)
            if stack:
                base_fp = cached[base_idx][0]
                if intersection_area(fp, base_fp) < MIN_STACK_OVERLAP * fp.area:
                    continue
            if _interpenetrates(obb, fp, cached):
                continue
            objects.append(ObjectState(oid, category, extent, pose))
            cached.append((fp, obb_bottom(obb), obb_top(obb)))
            placed = True
            break
        if not placed:
            raise SceneGenerationError(seed, difficulty, f"could not place object {oid}")

    return Scene(seed, difficulty, wmin, wmax, np.array(EFFECTOR_HOME), objects)


def settle(scene: Scene) -> Scene:
    """Drop every box onto the table or the highest overlapping box below it.

    Boxes are processed in ascending-bottom order (ties by id) and only moved
    when their bottom is more than SETTLE_SNAP_TOL away from the computed
    support height, so settling an already-settled scene is the identity.
    """
    out = scene.copy()
    items = []
    for o in out.objects:
        items.append((obb_bottom(o.obb), o.id, o))
    items.sort(key=lambda t: (t[0], t[1]))
    placed = []  # (footprint, top)
    for bottom, _, obj in items:
        support = 0.0
        fp = obj.footprint()
        for pfp, ptop in placed:
            if ptop > support and polygons_intersect(fp, pfp):
                support = max(support, ptop)
        if abs(bottom - support) > SETTLE_SNAP_TOL:
            obj.pose.center[2] += support - bottom
        placed.append((fp, obb_top(obj.obb)))
    return out


def _support_heights(scene: Scene):
    """Per-object (bottom, support) using only boxes lying below each box."""
    data = [(o.id, o.footprint(), obb_bottom(o.obb), obb_top(o.obb)) for o in scene.objects]
    result = {}
    for oid, fp, bottom, _ in data:
        support = 0.0
        for kid, kfp, _, ktop in data:
            if kid == oid or ktop > bottom + SUPPORT_TOL:
                continue
            if ktop > support and polygons_intersect(fp, kfp):
                support = ktop
        result[oid] = (bottom, support)
    return result


def is_settled(scene: Scene) -> bool:
    return all(abs(b - s) <= SUPPORT_TOL for b, s in _support_heights(scene).values())


def support_graph(scene: Scene) -> SupportGraph:
    """Supporter -> supported edges; raises NotSettledError on floating boxes."""
    if not is_settled(scene):
        raise NotSettledError("settle the scene before extracting supports")
    data = [(o.id, o.footprint(), obb_bottom(o.obb), obb_top(o.obb)) for o in scene.objects]
    edges = []
    for kid, kfp, _, ktop in data:
        for oid, ofp, obottom, _ in data:
            if kid == oid:
                continue
            if abs(obottom - ktop) <= SUPPORT_TOL and polygons_intersect(kfp, ofp):
                edges.append((kid, oid))
    return SupportGraph(edges)


# ---------------------------------------------------------------------------
# Scene file format: JSON with fields seed, difficulty, workspace {min, max},
# effector_home, objects [{id, category, extent, center, rpy}].  Meters and
# radians throughout.  This is the contract between generator, labeler,
# trainer, and simulator.

def scene_to_dict(scene: Scene) -> dict:
    return {
        "seed": int(scene.seed),
        "difficulty": scene.difficulty,
        "workspace": {
            "min": [float(v) for v in scene.workspace_min],
            "max": [float(v) for v in scene.workspace_max],
        },
        "effector_home": [float(v) for v in scene.effector_home],
        "objects": [
            {
                "id": int(o.id),
                "category": o.category,
                "extent": [float(v) for v in o.extent],
                "center": [float(v) for v in o.pose.center],
                "rpy": [float(v) for v in o.pose.rpy],
            }
            for o in scene.objects
        ],
    }


def scene_from_dict(data: dict) -> Scene:
    objects = [
        ObjectState(
            int(o["id"]),
            o["category"],
            np.array(o["extent"], dtype=float),
            Pose(np.array(o["center"], dtype=float), np.array(o["rpy"], dtype=float)),
        )
        for o in data["objects"]
    ]
    return Scene(
        int(data["seed"]),
        data["difficulty"],
        np.array(data["workspace"]["min"], dtype=float),
        np.array(data["workspace"]["max"], dtype=float),
        np.array(data["effector_home"], dtype=float),
        objects,
    )


def save_scene(scene: Scene, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_dict(scene), fh, indent=1)
        fh.write("\n")


def load_scene(path) -> Scene:
    with open(path, encoding="utf-8") as fh:
        return scene_from_dict(json.load(fh))
