"""Similar-trajectory extraction via cluster-label sequences and containment."""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .clustering import ClusterModel, predict_labels
from .geodesy import EARTH, GeoConstants
from .segmentation import Trajectory

MODES = ("subsequence", "set")


@dataclass
class LabelSequence:
    """A trajectory rewritten as the cluster labels it visits, in order.

    Adjacent duplicate labels are collapsed; ``length`` is the source
    trajectory's great-circle length in meters.
    """

    trajectory_id: str
    labels: tuple[int, ...]
    length: float


@dataclass
class MatchGroup:
    """Label sequences sharing (first label, last label), plus matched pairs."""

    key: tuple[int, int]
    members: list[LabelSequence]
    pattern_pairs: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class MatchConfig:
    epsilon: float = 1000.0      # max pairwise length difference within a group, meters
    mode: str = "subsequence"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


def dedup_adjacent(labels) -> tuple[int, ...]:
    """Collapse runs of equal adjacent labels to a single label."""
    out = []
    for label in labels:
        if not out or out[-1] != label:
            out.append(int(label))
    return tuple(out)


def to_label_sequence(traj: Trajectory, model: ClusterModel,
                      c: GeoConstants = EARTH) -> LabelSequence:
    """Map each trajectory point to its nearest centroid and collapse repeats."""
    if not traj.points:
        raise ValueError("trajectory has no points")
    lats = np.array([p.coord.lat for p in traj.points])
    lngs = np.array([p.coord.lng for p in traj.points])
    labels = predict_labels(lats, lngs, model, c)
    return LabelSequence(traj.trajectory_id, dedup_adjacent(labels), traj.length)


def group_by_endpoints(seqs: list[LabelSequence]) -> list[MatchGroup]:
    """One group per distinct (first, last) label pair, ordered by key.

    Single-label sequences key as (label, label); loops group like any
    other key. Members keep their input order.
    """
    groups: dict[tuple[int, int], list[LabelSequence]] = {}
    for seq in seqs:
        key = (seq.labels[0], seq.labels[-1])
        groups.setdefault(key, []).append(seq)
    return [MatchGroup(key, groups[key]) for key in sorted(groups)]


def enforce_spread(group: MatchGroup, epsilon: float) -> MatchGroup:
    """Prune a group until its pairwise length spread is below epsilon.

    While the max pairwise length difference is >= epsilon, the member
    whose length sits farthest from the current median length is removed;
    ties prefer the longer member, then the lexicographically smaller id.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    members = list(group.members)
    while len(members) > 1:
        lengths = [m.length for m in members]
        if max(lengths) - min(lengths) < epsilon:
            break
        mid = median(lengths)
        victim = min(members, key=lambda m: (-abs(m.length - mid), -m.length, m.trajectory_id))
        members.remove(victim)
    return MatchGroup(group.key, members, list(group.pattern_pairs))


def is_subsequence(small: tuple[int, ...], big: tuple[int, ...]) -> bool:
    """True when ``small`` appears in ``big`` in order (not necessarily contiguous)."""
    it = iter(big)
    return all(any(label == x for x in it) for label in small)


def _contains(big: LabelSequence, small: LabelSequence, mode: str) -> bool:
    if mode == "subsequence":
        return len(small.labels) <= len(big.labels) and is_subsequence(small.labels, big.labels)
    return set(small.labels) <= set(big.labels)


def find_similar(group: MatchGroup, mode: str = "subsequence") -> list[tuple[str, str]]:
    """Containment-matched (container id, contained id) pairs within a group.

    Every ordered pair of distinct members is tested; self-pairs are
    excluded. Members with identical label sequences pair once, with the
    lexicographically smaller id as the container. Pairs come back sorted.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    pairs = set()
    members = group.members
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if a.labels == b.labels:
                lo, hi = sorted((a.trajectory_id, b.trajectory_id))
                pairs.add((lo, hi))
                continue
            if _contains(a, b, mode):
                pairs.add((a.trajectory_id, b.trajectory_id))
            if _contains(b, a, mode):
                pairs.add((b.trajectory_id, a.trajectory_id))
    return sorted(pairs)


def extract_patterns(trajs: list[Trajectory], model: ClusterModel,
                     cfg: MatchConfig | None = None,
                     c: GeoConstants = EARTH) -> list[MatchGroup]:
    """Full matching pipeline: label, group, prune spread, find containments.

    Groups that end up with no pattern pairs are kept with empty pair
    lists so callers can report unmatched endpoint groups.
    """
    cfg = cfg or MatchConfig()
    seqs = [to_label_sequence(t, model, c) for t in trajs]
    groups = []
    for group in group_by_endpoints(seqs):
        pruned = enforce_spread(group, cfg.epsilon)
        pruned.pattern_pairs = find_similar(pruned, cfg.mode)
        groups.append(pruned)
    return groups
