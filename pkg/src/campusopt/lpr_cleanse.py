"""
License-plate record cleansing: deduplication, OCR filtering, entry/exit
matching, hourly rate profiles and k-means clustering of car park users.

Timestamps are seconds since the epoch of *naive local time*; no timezone
arithmetic is performed. Calendar days are ``int(timestamp // 86400)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

SECONDS_PER_DAY = 86400
SECONDS_PER_HOUR = 3600


class ReadFlag(enum.Enum):
    READ = "READ"
    NOTREAD = "NOTREAD"


class Direction(enum.Enum):
    ENTRY = "ENTRY"
    EXIT = "EXIT"


@dataclass(frozen=True)
class PlateRecord:
    timestamp: float
    plate_string: str
    ocr_score: int
    read_flag: ReadFlag = ReadFlag.READ
    direction: Direction = Direction.ENTRY

    def __post_init__(self):
        if not 0 <= self.ocr_score <= 100:
            raise ValueError(f"ocr_score {self.ocr_score} outside [0, 100]")

    @property
    def usable(self) -> bool:
        return self.read_flag is ReadFlag.READ

    @property
    def day(self) -> int:
        return int(self.timestamp // SECONDS_PER_DAY)


@dataclass(frozen=True)
class CleanseConfig:
    dedup_lookahead: int = 5
    dedup_distance: int = 2
    ocr_threshold_entry: int = 75
    ocr_threshold_exit: int = 65
    match_distance: int = 2

    def __post_init__(self):
        for name in ("ocr_threshold_entry", "ocr_threshold_exit"):
            v = getattr(self, name)
            if not 0 <= v <= 100:
                raise ValueError(f"{name}={v} outside [0, 100]")
        for name in ("dedup_lookahead", "dedup_distance", "match_distance"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def threshold_for(self, direction: Direction) -> int:
        if direction is Direction.ENTRY:
            return self.ocr_threshold_entry
        return self.ocr_threshold_exit


@dataclass(frozen=True)
class StayRecord:
    entry_time: float
    exit_time: float
    entry_score: int
    exit_score: int
    plate_string: str = ""

    def __post_init__(self):
        if self.exit_time < self.entry_time:
            raise ValueError("exit_time precedes entry_time")

    @property
    def stay_duration(self) -> float:
        """Stay length in hours."""
        return (self.exit_time - self.entry_time) / SECONDS_PER_HOUR


@dataclass
class RateProfile:
    values: np.ndarray
    slot_duration: float = 1.0
    start: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValueError("rate profile must be one-dimensional")
        if np.any(self.values < 0):
            raise ValueError("rates must be non-negative")

    def __len__(self):
        return len(self.values)


@dataclass
class UserCluster:
    center: tuple[float, float, float]
    members: list[int] = field(default_factory=list)
    inertia: float = 0.0


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions and
    substitutions turning ``a`` into ``b``."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _dedup_pass(records, cfg):
    removed = [False] * len(records)
    for i, anchor in enumerate(records):
        if removed[i] or not anchor.usable:
            continue
        group = [i]
        for j in range(i + 1, min(len(records), i + 1 + cfg.dedup_lookahead)):
            rec = records[j]
            if removed[j] or not rec.usable:
                continue
            if levenshtein(anchor.plate_string, rec.plate_string) <= cfg.dedup_distance:
                group.append(j)
        if len(group) == 1:
            continue
        # highest score wins, earliest record on ties
        keep = max(group, key=lambda k: (records[k].ocr_score, -k))
        for k in group:
            if k != keep:
                removed[k] = True
    kept = [r for r, gone in zip(records, removed) if not gone]
    dropped = [r for r, gone in zip(records, removed) if gone]
    return kept, dropped


def dedup_partition(records, cfg: CleanseConfig = CleanseConfig()):
    """Split ``records`` into (kept, removed) multiple-recognition groups.

    A single forward pass anchors on each surviving record and groups it
    with the surviving records among the next ``dedup_lookahead`` positions
    whose plate lies within ``dedup_distance`` edits of the anchor. Passes
    repeat until nothing more is removed, so the result is a fixed point.
    NOTREAD records are never grouped; they are left for the OCR filter.
    """
    kept = list(records)
    dropped = []
    while True:
        kept, gone = _dedup_pass(kept, cfg)
        if not gone:
            return kept, dropped
        dropped.extend(gone)


def dedup_multiple_recognitions(records, cfg: CleanseConfig = CleanseConfig()):
    return dedup_partition(records, cfg)[0]


def filter_low_ocr(records, threshold: int):
    """Keep READ records whose score is at least ``threshold`` (inclusive)."""
    return [r for r in records if r.usable and r.ocr_score >= threshold]


def match_entries_exits(entries, exits, cfg: CleanseConfig = CleanseConfig()):
    """Pair exits with earlier same-day entries.

    Exits are processed in time order; each takes the unmatched candidate
    entry with the smallest edit distance, then the highest entry OCR score,
    then the latest entry time. Returns ``(stays, unmatched_entries,
    unmatched_exits)``.
    """
    by_day: dict[int, list[int]] = {}
    for idx, e in enumerate(entries):
        by_day.setdefault(e.day, []).append(idx)
    taken = [False] * len(entries)
    stays, unmatched_exits = [], []

    for x in sorted(exits, key=lambda r: r.timestamp):
        best, best_key = None, None
        for idx in by_day.get(x.day, ()):
            e = entries[idx]
            if taken[idx] or e.timestamp > x.timestamp:
                continue
            d = levenshtein(e.plate_string, x.plate_string)
            if d > cfg.match_distance:
                continue
            key = (d, -e.ocr_score, -e.timestamp)
            if best_key is None or key < best_key:
                best, best_key = idx, key
        if best is None:
            unmatched_exits.append(x)
            continue
        taken[best] = True
        e = entries[best]
        stays.append(StayRecord(e.timestamp, x.timestamp, e.ocr_score, x.ocr_score, e.plate_string))

    unmatched_entries = [e for e, t in zip(entries, taken) if not t]
    stays.sort(key=lambda s: (s.entry_time, s.exit_time))
    return stays, unmatched_entries, unmatched_exits


def hourly_rates(timestamps, horizon_start: float, horizon_hours: int) -> RateProfile:
    ts = np.asarray(list(timestamps), dtype=float)
    counts = np.zeros(horizon_hours)
    if ts.size:
        slot = np.floor((ts - horizon_start) / SECONDS_PER_HOUR).astype(int)
        bad = (slot < 0) | (slot >= horizon_hours)
        if bad.any():
            raise ValueError(
                f"{int(bad.sum())} timestamp(s) outside the {horizon_hours}-hour horizon "
                f"starting at {horizon_start}"
            )
        counts = np.bincount(slot, minlength=horizon_hours).astype(float)
    return RateProfile(counts, 1.0, horizon_start)


def stay_features(stays) -> np.ndarray:
    """Rows of (arrival hour-of-day, departure hour-of-day, stay hours)."""
    rows = []
    for s in stays:
        arr = (s.entry_time % SECONDS_PER_DAY) / SECONDS_PER_HOUR
        dep = (s.exit_time % SECONDS_PER_DAY) / SECONDS_PER_HOUR
        rows.append((arr, dep, s.stay_duration))
    return np.array(rows, dtype=float).reshape(-1, 3)


def standardize(X: np.ndarray) -> np.ndarray:
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - mu) / sd


def _kmeans_pp(X, k, rng):
    n = len(X)
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


def kmeans(X, k: int, seed: int = 0, max_iter: int = 300):
    """Lloyd's algorithm with k-means++ seeding.

    Returns ``(labels, centers, history)`` where ``history`` holds the
    inertia after every centre update. An empty cluster is re-seeded with
    the point farthest from its current centre.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(X, k, rng)
    labels = None
    history = []
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = d2.argmin(axis=1)
        counts = np.bincount(new, minlength=k)
        for c in np.flatnonzero(counts == 0):
            own = d2[np.arange(n), new]
            donors = counts[new] > 1
            if not donors.any():
                break
            far = int(np.argmax(np.where(donors, own, -1.0)))
            counts[new[far]] -= 1
            new[far] = c
            counts[c] = 1
        for c in range(k):
            if counts[c]:
                centers[c] = X[new == c].mean(axis=0)
        history.append(float(((X - centers[new]) ** 2).sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
    return new, centers, history


def kmeans_users(stays, k: int, seed: int = 0, max_iter: int = 300) -> list[UserCluster]:
    """Cluster stays on standardised (arrival, departure, stay) features.

    Cluster centres are reported in original units (hours); inertia is the
    within-cluster sum of squares in the standardised space.
    """
    raw = stay_features(stays)
    X = standardize(raw)
    labels, centers, _ = kmeans(X, k, seed, max_iter)
    clusters = []
    for c in range(k):
        members = np.flatnonzero(labels == c)
        center = tuple(float(v) for v in raw[members].mean(axis=0)) if members.size else (np.nan,) * 3
        inertia = float(((X[members] - centers[c]) ** 2).sum())
        clusters.append(UserCluster(center, members.tolist(), inertia))
    return clusters


def elbow_curve(stays, ks, seed: int = 0) -> list[tuple[int, float]]:
    return [(k, sum(c.inertia for c in kmeans_users(stays, k, seed))) for k in ks]
