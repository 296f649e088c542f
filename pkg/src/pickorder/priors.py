"""Spatial priors and the heuristic ordering built from them.

An object is *independent* when its footprint keeps at least `tau` clearance
from every other footprint, and *topmost* when no other box both overlaps its
footprint and reaches higher than its top.  The heuristic order (SPH) ranks
objects in three tiers:

    1. independent objects with footprint area at or above the scene's
       `large_area_quantile` area, largest first;
    2. topmost objects among the rest, nearest to the effector home first;
    3. everything else by |yaw|, then distance to home.

Ties always break by ascending object id, which makes the order a pure
function of the scene.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptySceneError, MissingObjectError
from .geometry import obb_top, polygon_min_distance, polygons_intersect

SINGLE_OBJECT_DISTANCE = 1e6  # stand-in for +inf when nothing else is around
HEIGHT_EPS = 1e-6  # guards against coplanar-top false positives


@dataclass
class PriorFlags:
    independent: bool
    topmost: bool
    min_neighbor_distance: float
    footprint_area: float


@dataclass
class SphConfig:
    tau: float = 0.05
    large_area_quantile: float = 0.5
    distance_weight: float = 1.0

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if not 0.0 <= self.large_area_quantile <= 1.0:
            raise ValueError("large_area_quantile must lie in [0, 1]")


def footprint_distance_matrix(scene) -> np.ndarray:
    """Symmetric matrix of pairwise footprint distances; diagonal is 0."""
    fps = [o.footprint() for o in scene.objects]
    n = len(fps)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = polygon_min_distance(fps[i], fps[j])
    return d


def independence(object_id: int, scene, tau: float) -> bool:
    """True when every other footprint is at least `tau` away."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    target = scene.get(object_id)
    fp = target.footprint()
    for other in scene.objects:
        if other.id == object_id:
            continue
        if polygon_min_distance(fp, other.footprint()) < tau:
            return False
    return True


def local_optimality(object_id: int, scene) -> bool:
    """True when no other box overlaps this footprint and reaches higher."""
    target = scene.get(object_id)
    fp = target.footprint()
    top = obb_top(target.obb)
    for other in scene.objects:
        if other.id == object_id:
            continue
        if obb_top(other.obb) > top + HEIGHT_EPS and polygons_intersect(other.footprint(), fp):
            return False
    return True


def compute_flags(scene, tau: float) -> dict:
    """PriorFlags for every object, consistent with the per-object calls."""
    objs = scene.objects
    fps = [o.footprint() for o in objs]
    tops = [obb_top(o.obb) for o in objs]
    dmat = footprint_distance_matrix(scene)
    flags = {}
    for i, o in enumerate(objs):
        others = np.delete(dmat[i], i)
        min_d = float(others.min()) if len(others) else SINGLE_OBJECT_DISTANCE
        topmost = True
        for j in range(len(objs)):
            if j == i:
                continue
            if tops[j] > tops[i] + HEIGHT_EPS and polygons_intersect(fps[j], fps[i]):
                topmost = False
                break
        flags[o.id] = PriorFlags(
            independent=min_d >= tau,
            topmost=topmost,
            min_neighbor_distance=min_d,
            footprint_area=fps[i].area,
        )
    return flags


def _sph_entries(scene, cfg: SphConfig, flags=None):
    """Per-object (tier, raw sort keys) used by sph_order and the jittered oracle."""
    if not scene.objects:
        raise EmptySceneError("cannot order an empty scene")
    if flags is None:
        flags = compute_flags(scene, cfg.tau)
    areas = np.array([flags[o.id].footprint_area for o in scene.objects])
    area_cut = float(np.quantile(areas, cfg.large_area_quantile))
    entries = []
    for o in scene.objects:
        f = flags[o.id]
        dist = float(np.linalg.norm(o.pose.center - scene.effector_home))
        if f.independent and f.footprint_area >= area_cut:
            tier, keys = 1, (f.footprint_area,)  # descending
        elif f.topmost:
            tier, keys = 2, (cfg.distance_weight * dist,)  # ascending
        else:
            tier, keys = 3, (abs(float(o.pose.rpy[2])), cfg.distance_weight * dist)
        entries.append((o.id, tier, keys))
    return entries


def _sort_entries(entries, factors=None):
    """Sort (id, tier, keys) records; `factors` multiplies each raw key."""
    decorated = []
    for idx, (oid, tier, keys) in enumerate(entries):
        f = factors[idx] if factors is not None else (1.0,) * len(keys)
        scaled = tuple(k * f[m] for m, k in enumerate(keys))
        if tier == 1:
            decorated.append((tier, (-scaled[0],), oid))
        else:
            decorated.append((tier, scaled, oid))
    decorated.sort(key=lambda t: (t[0], t[1], t[2]))
    return [oid for _, _, oid in decorated]


def sph_order(scene, cfg: SphConfig = None) -> list:
    """Full pick order: tiered priors with deterministic tie-breaking."""
    cfg = cfg or SphConfig()
    return _sort_entries(_sph_entries(scene, cfg))
