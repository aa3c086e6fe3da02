"""
Queue length inference from a line of ultrasonic people-detector units.

Sensor 1 sits at the head of the queue. Each time bin yields one detection
bit per sensor; the bit vector is snapped to the nearest contiguous-prefix
code and the number of ones, times the people standing between two
sensors, gives the queue length.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

NO_ECHO = None
MAX_DISTANCE_CM = 510.0


@dataclass(frozen=True)
class PduRecord:
    timestamp: float
    sensor_position: int
    distance: float | None  # None means no echo


@dataclass(frozen=True)
class QueueConfig:
    bin_minutes: float = 2.0
    detect_threshold: float = 0.2
    positive_band: tuple[float, float] = (200.0, 300.0)
    persons_per_segment: int = 10
    sensor_count: int = 10
    tie_break: str = "shorter"

    def __post_init__(self):
        if not 0 < self.detect_threshold <= 1:
            raise ValueError("detect_threshold must lie in (0, 1]")
        lo, hi = self.positive_band
        if not 0 <= lo <= hi <= MAX_DISTANCE_CM:
            raise ValueError(f"positive band must lie within [0, {MAX_DISTANCE_CM:g}] cm")
        if self.bin_minutes <= 0:
            raise ValueError("bin_minutes must be positive")
        if self.tie_break not in ("shorter", "longer"):
            raise ValueError("tie_break must be 'shorter' or 'longer'")


@dataclass(frozen=True)
class QueueEstimate:
    bin_start: float
    length: int
    bits: tuple[int, ...]

    @property
    def bits_string(self) -> str:
        return "".join(str(b) for b in self.bits)


def bin_measurements(records, cfg: QueueConfig = QueueConfig()):
    """Group records into left-closed bins of ``bin_minutes`` aligned to midnight.

    Returns ``{bin_start: {sensor_position: [distances]}}`` ordered by bin.
    """
    width = cfg.bin_minutes * 60.0
    bins: dict[float, dict[int, list]] = defaultdict(lambda: defaultdict(list))
    for r in sorted(records, key=lambda r: (r.timestamp, r.sensor_position)):
        if not 1 <= r.sensor_position <= cfg.sensor_count:
            raise ValueError(f"sensor position {r.sensor_position} outside 1..{cfg.sensor_count}")
        start = (r.timestamp // width) * width
        bins[start][r.sensor_position].append(r.distance)
    return {b: dict(per) for b, per in sorted(bins.items())}


def detect_vector(measurements, cfg: QueueConfig = QueueConfig()) -> tuple[int, ...]:
    """One bit per sensor: the in-band share of its readings exceeds the threshold.

    No-echo readings count towards the denominator only; a sensor without
    readings reports 0.
    """
    lo, hi = cfg.positive_band
    bits = []
    for pos in range(1, cfg.sensor_count + 1):
        readings = measurements.get(pos, ())
        if not readings:
            bits.append(0)
            continue
        hits = sum(1 for d in readings if d is not None and lo <= d <= hi)
        bits.append(int(hits / len(readings) > cfg.detect_threshold))
    return tuple(bits)


def valid_codes(n: int) -> list[tuple[int, ...]]:
    return [tuple([1] * k + [0] * (n - k)) for k in range(n + 1)]


def is_valid_code(bits) -> bool:
    k = sum(bits)
    return all(b == 1 for b in bits[:k]) and all(b == 0 for b in bits[k:])


def correct_code(bits, tie_break: str = "shorter") -> tuple[int, ...]:
    """Nearest ones-prefix code in Hamming distance.

    Ties go to the code with fewer ones unless ``tie_break="longer"``.
    """
    bits = tuple(int(b) for b in bits)
    n = len(bits)
    # distance to prefix-k code = zeros among the first k + ones after position k
    ones_total = sum(bits)
    best_k, best_d = 0, ones_total
    zeros_before = ones_before = 0
    for k in range(1, n + 1):
        if bits[k - 1]:
            ones_before += 1
        else:
            zeros_before += 1
        d = zeros_before + (ones_total - ones_before)
        if d < best_d or (d == best_d and tie_break == "longer"):
            best_k, best_d = k, d
    return tuple([1] * best_k + [0] * (n - best_k))


def queue_length(code, cfg: QueueConfig = QueueConfig()) -> int:
    if not is_valid_code(code):
        raise ValueError(f"{''.join(map(str, code))} is not a valid prefix code; correct it first")
    return sum(code) * cfg.persons_per_segment


def infer_queue(records, cfg: QueueConfig = QueueConfig()) -> list[QueueEstimate]:
    """Queue length per bin, from the first to the last bin holding data.

    Bins inside that span without any readings report an empty queue.
    """
    binned = bin_measurements(records, cfg)
    if not binned:
        return []
    width = cfg.bin_minutes * 60.0
    first, last = min(binned), max(binned)
    out = []
    n_bins = int(round((last - first) / width)) + 1
    for i in range(n_bins):
        start = first + i * width
        meas = binned.get(start, {})
        code = correct_code(detect_vector(meas, cfg), cfg.tie_break)
        out.append(QueueEstimate(start, queue_length(code, cfg), code))
    return out


def coverage(records, cfg: QueueConfig = QueueConfig()) -> dict[float, list[int]]:
    """Sensors that reported at least once, per bin."""
    return {b: sorted(per) for b, per in bin_measurements(records, cfg).items()}
