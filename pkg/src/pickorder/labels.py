"""Synthetic order labels: oracle rankings, pairwise noise, rank aggregation.

A ranking is a list of object ids, first entry manipulated first, and is
always a permutation of the scene's ids.  The oracle samples rankings by
multiplicatively jittering the heuristic order's tier-internal sort keys;
`perturb_pairs` injects controlled pairwise-order noise; and
`plackett_luce_aggregate` fuses several noisy rankings into one consensus
order by maximum likelihood.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import ConvergenceError, EmptySceneError
from .priors import SphConfig, _sort_entries, _sph_entries

_REPAIR_SWEEP_FACTOR = 8


def validate_ranking(ranking, ids) -> None:
    if sorted(ranking) != sorted(ids):
        raise ValueError("ranking is not a permutation of the given ids")


def oracle_rankings(scene, k: int, jitter: float, seed: int, cfg: SphConfig = None) -> list:
    """Sample `k` rankings by jittering the heuristic order's sort keys.

    Each key is scaled by an independent U(1 - jitter, 1 + jitter) factor, so
    jitter 0 reproduces the heuristic order exactly and larger jitter lets
    near-equal keys swap.  Deterministic given (scene, k, jitter, seed).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.0 <= jitter <= 1.0:
        raise ValueError("jitter must lie in [0, 1]")
    if not scene.objects:
        raise EmptySceneError("cannot label an empty scene")
    cfg = cfg or SphConfig()
    entries = _sph_entries(scene, cfg)
    rankings = []
    for sample in range(k):
        gen = rng.stream(seed, "oracle", sample)
        # Two factors drawn per object regardless of tier keeps the stream layout fixed.
        draws = gen.uniform(1.0 - jitter, 1.0 + jitter, size=(len(entries), 2))
        factors = [tuple(row) for row in draws]
        rankings.append(_sort_entries(entries, factors))
    return rankings


def perturb_pairs(ranking: list, ratio: float, seed: int) -> list:
    """Invert a sampled fraction of pairwise orders.

    floor(ratio * n(n-1)/2) unordered id pairs are drawn uniformly without
    replacement; each is forced into the opposite of its original relative
    order by transposing the two elements (the net effect of an
    adjacent-transposition repair).  Sweeps repeat until every sampled pair is
    inverted, which always terminates in practice; the result is a valid
    permutation by construction.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("ratio must lie in [0, 1]")
    n = len(ranking)
    total = n * (n - 1) // 2
    m = int(np.floor(ratio * total))
    if m == 0 or n < 2:
        return list(ranking)
    gen = rng.stream(seed, "perturb")
    flat = gen.choice(total, size=m, replace=False)
    all_pairs = [(ranking[i], ranking[j]) for i in range(n) for j in range(i + 1, n)]
    sampled = [all_pairs[int(f)] for f in flat]

    original_pos = {oid: i for i, oid in enumerate(ranking)}
    current = list(ranking)
    pos = dict(original_pos)
    for _ in range(_REPAIR_SWEEP_FACTOR * m + 8):
        changed = False
        for u, v in sampled:
            same_as_original = (pos[u] < pos[v]) == (original_pos[u] < original_pos[v])
            if same_as_original:
                pu, pv = pos[u], pos[v]
                current[pu], current[pv] = current[pv], current[pu]
                pos[u], pos[v] = pv, pu
                changed = True
        if not changed:
            return current
    raise RuntimeError("pair-inversion repair did not stabilize")  # pragma: no cover


@dataclass
class LabelSet:
    """Raw rankings for one scene plus their aggregated consensus."""

    scene_file: str
    rankings: list
    aggregated: list
    noise_ratio: float
    k: int
    seed: int


def _ranking_loglik(rank_idx: np.ndarray, worths: np.ndarray) -> float:
    """Log-likelihood of one full ranking (item indices, first picked first)."""
    w = worths[rank_idx]
    tail = np.cumsum(w[::-1])[::-1]
    stages = slice(0, len(w) - 1)
    return float(np.sum(np.log(w[stages]) - np.log(tail[stages])))


def plackett_luce_aggregate(rankings: list, tol: float = 1e-8, max_iter: int = 10000):
    """Fuse rankings into one consensus order via the MM maximum-likelihood fit.

    Item worths start uniform and are updated with the classical
    minorize-maximize rule, renormalized to sum 1 each iteration; the fit
    stops when the largest relative worth change drops below `tol`, or when
    the mean per-ranking log-likelihood improves by less than `tol` (the
    degenerate boundary directions, e.g. identical input rankings, keep
    drifting in worth space long after the order and likelihood have
    stabilized).  Raises ConvergenceError with the last iterate otherwise.

    Returns the ids sorted by descending fitted worth, ties by ascending id.
    """
    if not rankings:
        raise ValueError("need at least one ranking")
    ids = sorted(rankings[0])
    for r in rankings[1:]:
        validate_ranking(r, ids)
    index = {oid: i for i, oid in enumerate(ids)}
    n = len(ids)
    if n == 1:
        return list(rankings[0])
    rank_idx = [np.array([index[oid] for oid in r]) for r in rankings]

    # chosen[i] counts the stages where item i wins; items only ever ranked
    # last are never chosen and get worth exactly 0 from the first update.
    chosen = np.zeros(n)
    for ri in rank_idx:
        chosen[ri[:-1]] += 1.0

    worths = np.full(n, 1.0 / n)
    loglik = sum(_ranking_loglik(ri, worths) for ri in rank_idx)
    for _ in range(max_iter):
        denom = np.zeros(n)
        for ri in rank_idx:
            w = worths[ri]
            tail = np.cumsum(w[::-1])[::-1]
            inv = 1.0 / tail[:-1]
            # item at position p sits in stages 0..min(p, n-2)
            contrib = np.concatenate([np.cumsum(inv), [np.sum(inv)]])[: len(ri)]
            denom[ri] += contrib
        new = np.where(chosen > 0.0, chosen / denom, 0.0)
        new /= new.sum()
        new_loglik = sum(_ranking_loglik(ri, new) for ri in rank_idx)
        assert new_loglik >= loglik - 1e-9, "MM step decreased the likelihood"
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(
                new == worths, 0.0, np.abs(new - worths) / np.maximum(worths, 1e-300)
            )
        mean_gain = (new_loglik - loglik) / len(rankings)
        worths, loglik = new, new_loglik
        if float(np.max(rel)) < tol or mean_gain < tol:
            order = sorted(ids, key=lambda oid: (-worths[index[oid]], oid))
            return order
    raise ConvergenceError(
        f"Plackett-Luce MM did not converge in {max_iter} iterations",
        last_iterate={oid: float(worths[index[oid]]) for oid in ids},
    )


def fitted_worths(rankings: list, tol: float = 1e-8, max_iter: int = 10000) -> dict:
    """Run the same MM fit but expose the worth of each id (testing hook)."""
    order = plackett_luce_aggregate(rankings, tol=tol, max_iter=max_iter)
    # Re-fit capture: aggregate returns order only, so redo the loop cheaply.
    ids = sorted(rankings[0])
    index = {oid: i for i, oid in enumerate(ids)}
    rank_idx = [np.array([index[oid] for oid in r]) for r in rankings]
    n = len(ids)
    if n == 1:
        return {ids[0]: 1.0}
    chosen = np.zeros(n)
    for ri in rank_idx:
        chosen[ri[:-1]] += 1.0
    worths = np.full(n, 1.0 / n)
    loglik = sum(_ranking_loglik(ri, worths) for ri in rank_idx)
    for _ in range(max_iter):
        denom = np.zeros(n)
        for ri in rank_idx:
            w = worths[ri]
            tail = np.cumsum(w[::-1])[::-1]
            inv = 1.0 / tail[:-1]
            contrib = np.concatenate([np.cumsum(inv), [np.sum(inv)]])[: len(ri)]
            denom[ri] += contrib
        new = np.where(chosen > 0.0, chosen / denom, 0.0)
        new /= new.sum()
        new_loglik = sum(_ranking_loglik(ri, new) for ri in rank_idx)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(
                new == worths, 0.0, np.abs(new - worths) / np.maximum(worths, 1e-300)
            )
        mean_gain = (new_loglik - loglik) / len(rankings)
        worths, loglik = new, new_loglik
        if float(np.max(rel)) < tol or mean_gain < tol:
            break
    del order
    return {oid: float(worths[index[oid]]) for oid in ids}


def make_label_set(scene, scene_file: str, k: int, jitter: float, noise_ratio: float, seed: int) -> LabelSet:
    """Label one scene: sample k oracle rankings, aggregate, then add noise."""
    rankings = oracle_rankings(scene, k, jitter, seed)
    aggregated = plackett_luce_aggregate(rankings)
    noisy = perturb_pairs(aggregated, noise_ratio, rng_seed_for(seed, scene.seed))
    return LabelSet(scene_file, rankings, noisy, noise_ratio, k, seed)


def rng_seed_for(seed: int, scene_seed: int) -> int:
    # Distinct perturbation stream per scene under one labeling seed.
    return (seed * 1_000_003 + scene_seed) % (2**63)


# ---------------------------------------------------------------------------
# Dataset file format: one JSON record per line with fields scene_file,
# ranking, noise_ratio, k, seed.  Consumed by training.

def write_dataset(records: list, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "scene_file": rec.scene_file,
                        "ranking": [int(v) for v in rec.aggregated],
                        "noise_ratio": float(rec.noise_ratio),
                        "k": int(rec.k),
                        "seed": int(rec.seed),
                    }
                )
            )
            fh.write("\n")


def read_dataset(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: malformed dataset record: {exc}") from exc
            for key in ("scene_file", "ranking", "noise_ratio", "k", "seed"):
                if key not in rec:
                    raise ValueError(f"{path}:{line_no}: missing field {key!r}")
            out.append(rec)
    return out
