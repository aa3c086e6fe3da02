"""
Classroom occupancy from doorway counters and cost-optimal assignment of
course meetings to rooms for one day.

A day has ``n_slots`` one-hour timeslots; slot 1 starts at ``first_hour``
(9 am by default). Room cost equals capacity, so the cost of a plan is the
sum over meetings of ``duration * capacity`` of the room it occupies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, TimetableConflict

SECONDS_PER_DAY = 86400
SPARE_ROOM_SEATS = 100


@dataclass(frozen=True)
class CountRecord:
    timestamp: float
    room: str
    count_in: int = 0
    count_out: int = 0

    def __post_init__(self):
        if self.count_in < 0 or self.count_out < 0:
            raise ValueError("counts must be non-negative")


@dataclass(frozen=True)
class CourseMeeting:
    course_id: str
    day: int
    start_slot: int
    duration: int
    attendance: float = 0.0
    enrolment: int = 0
    room: str | None = None
    n_slots: int = 12
    first_hour: int = 9

    def __post_init__(self):
        if self.start_slot < 1 or self.duration < 1:
            raise ValueError(f"{self.course_id}: start_slot and duration must be >= 1")
        if self.start_slot + self.duration - 1 > self.n_slots:
            raise ValueError(f"{self.course_id}: meeting runs past slot {self.n_slots}")
        if self.attendance < 0:
            raise ValueError(f"{self.course_id}: attendance must be non-negative")

    @property
    def slots(self) -> range:
        return range(self.start_slot, self.start_slot + self.duration)

    @property
    def start_time(self) -> float:
        return self.day * SECONDS_PER_DAY + (self.first_hour + self.start_slot - 1) * 3600.0

    @property
    def end_time(self) -> float:
        return self.start_time + self.duration * 3600.0


@dataclass(frozen=True)
class Room:
    id: str
    capacity: int

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"room {self.id}: capacity must be positive")

    @property
    def cost(self) -> int:
        return self.capacity


@dataclass
class OccupancySeries:
    times: np.ndarray
    values: np.ndarray
    clamp_events: int = 0


@dataclass
class AllocationPlan:
    meetings: list[CourseMeeting]
    rooms: list[Room]
    assignment: list[int]
    demands: list[int]
    total_cost: int
    overflow: list[str] = field(default_factory=list)

    @property
    def by_course(self) -> dict[str, str]:
        return {m.course_id: self.rooms[j].id for m, j in zip(self.meetings, self.assignment)}

    def grid(self) -> dict[int, dict[str, str]]:
        """slot -> {room id -> course id}."""
        out: dict[int, dict[str, str]] = {}
        for m, j in zip(self.meetings, self.assignment):
            for s in m.slots:
                out.setdefault(s, {})[self.rooms[j].id] = m.course_id
        return dict(sorted(out.items()))

    def to_dict(self) -> dict:
        return {
            "total_cost": self.total_cost,
            "assignment": [
                {"course_id": m.course_id, "day": m.day, "room_id": self.rooms[j].id,
                 "capacity": self.rooms[j].capacity, "demand": d,
                 "start_slot": m.start_slot, "duration_slots": m.duration}
                for m, j, d in zip(self.meetings, self.assignment, self.demands)
            ],
            "grid": {str(s): row for s, row in self.grid().items()},
        }


def with_spare_room(rooms, seats: int = SPARE_ROOM_SEATS, room_id: str = "SPARE"):
    """Append the single spare room assumed available for reallocation."""
    rooms = list(rooms)
    if seats > 0:
        rooms.append(Room(room_id, seats))
    return rooms


def room_occupancy(records, day: int) -> OccupancySeries:
    """Cumulative entries minus exits over one day, clamped at zero.

    Only records timestamped on ``day`` count, which resets the running sum
    at midnight. ``clamp_events`` counts how often the naive sum would have
    gone negative.
    """
    lo, hi = day * SECONDS_PER_DAY, (day + 1) * SECONDS_PER_DAY
    recs = sorted((r for r in records if lo <= r.timestamp < hi), key=lambda r: r.timestamp)
    occ, clamps, vals = 0, 0, []
    for r in recs:
        occ += r.count_in - r.count_out
        if occ < 0:
            occ, clamps = 0, clamps + 1
        vals.append(occ)
    return OccupancySeries(np.array([r.timestamp for r in recs], dtype=float),
                           np.array(vals, dtype=int), clamps)


def _overlaps(a: CourseMeeting, b: CourseMeeting) -> bool:
    return a.start_time < b.end_time and b.start_time < a.end_time


def course_attendance(records, meeting: CourseMeeting, slack_minutes: float = 10.0,
                      neighbours=()) -> int:
    """Peak occupancy attributed to one meeting.

    Entries count over ``[start - slack, end)`` and exits over
    ``[start, end + slack)``. Where those windows run into an adjacent
    meeting from ``neighbours``, entries before the next meeting belong to
    it and exits after the previous meeting belong to that one, so
    counting errors are not carried from one lecture to the next.
    """
    slack = slack_minutes * 60.0
    for other in neighbours:
        if other is not meeting and _overlaps(meeting, other):
            raise TimetableConflict(f"meetings {meeting.course_id} and {other.course_id} overlap")
    in_lo, in_hi = meeting.start_time - slack, meeting.end_time
    out_lo, out_hi = meeting.start_time, meeting.end_time + slack
    for other in neighbours:
        if other is meeting:
            continue
        if other.start_time >= meeting.end_time:
            in_hi = min(in_hi, other.start_time - slack)
            out_hi = min(out_hi, other.end_time)
        elif other.end_time <= meeting.start_time:
            out_lo = max(out_lo, other.end_time + slack)
            in_lo = max(in_lo, other.start_time)
    occ = peak = 0
    for r in sorted(records, key=lambda r: r.timestamp):
        t = r.timestamp
        delta = 0
        if in_lo <= t < in_hi:
            delta += r.count_in
        if out_lo <= t < out_hi:
            delta -= r.count_out
        if delta:
            occ = max(0, occ + delta)
            peak = max(peak, occ)
    return peak


def timetable_attendance(records, meetings, slack_minutes: float = 10.0) -> dict[str, int]:
    """Attendance of every meeting held in one room."""
    meetings = list(meetings)
    return {m.course_id: course_attendance(records, m, slack_minutes, meetings) for m in meetings}


def normalize_attendance(attendance: float, enrolment: float, max_ratio: float = 1.5):
    """Attendance over enrolment capped at 1, or ``None`` when the class is dropped
    (no attendance, or ratio above ``max_ratio``)."""
    if enrolment <= 0:
        raise ValueError("enrolment must be positive")
    ratio = attendance / enrolment
    if ratio == 0 or ratio > max_ratio:
        return None
    return min(ratio, 1.0)


def demand_with_margin(attendance: float, margin: float) -> int:
    # rounding guards against 100 * 1.1 = 110.00000000000001
    return int(math.ceil(round(attendance * (1.0 + margin), 9)))


class _Search:
    def __init__(self, meetings, rooms, demands):
        self.meetings = meetings
        self.rooms = rooms
        self.caps = [r.capacity for r in rooms]
        self.demands = demands
        self.n = len(meetings)
        self.fits = [[j for j in range(len(rooms)) if self.caps[j] >= d] for d in demands]
        self.conflicts = [
            [k for k in range(self.n) if k != i and set(meetings[i].slots) & set(meetings[k].slots)]
            for i in range(self.n)
        ]

    def bound(self, assign, free_mask):
        # cheapest still-free fitting room per unassigned meeting; None if one has none
        total = 0
        for i in range(self.n):
            if assign[i] >= 0:
                continue
            best = None
            for j in self.fits[i]:
                if free_mask[i][j] and (best is None or self.caps[j] < best):
                    best = self.caps[j]
            if best is None:
                return None
            total += best * self.meetings[i].duration
        return total

    def run(self, order, room_order, limit, strict):
        """DFS over meetings in ``order``; rooms tried per ``room_order(i)``.

        Returns the first assignment whose cost beats ``limit`` (strictly when
        ``strict``), continuing to improve the limit when ``strict``.
        """
        assign = [-1] * self.n
        free_mask = [[True] * len(self.rooms) for _ in range(self.n)]
        best = {"cost": limit, "assign": None}
        self.deepest = (0, None)

        def dfs(depth, cost):
            if depth == self.n:
                if cost < best["cost"] or (not strict and cost == best["cost"]):
                    best["cost"], best["assign"] = cost, list(assign)
                    return not strict
                return False
            i = order[depth]
            if depth >= self.deepest[0]:
                self.deepest = (depth, i)
            for j in room_order(i):
                if not free_mask[i][j]:
                    continue
                c = cost + self.caps[j] * self.meetings[i].duration
                assign[i] = j
                touched = [k for k in self.conflicts[i] if assign[k] < 0 and free_mask[k][j]]
                for k in touched:
                    free_mask[k][j] = False
                lb = self.bound(assign, free_mask)
                ok = lb is not None and (c + lb < best["cost"] or (not strict and c + lb <= best["cost"]))
                if ok and dfs(depth + 1, c):
                    return True
                for k in touched:
                    free_mask[k][j] = True
                assign[i] = -1
            return False

        dfs(0, 0)
        return best["cost"], best["assign"]


def allocate(meetings, rooms, margin: float = 0.0, demands=None) -> AllocationPlan:
    """Exact minimum-cost allocation of one day's meetings to rooms.

    Demands default to ``ceil(attendance * (1 + margin))``. Every meeting
    gets one room for all of its slots, no room hosts two meetings in the
    same slot, and each room holds its meeting's demand. Among equal-cost
    optima the lexicographically smallest room-index vector (in input
    order) is returned.
    """
    meetings, rooms = list(meetings), list(rooms)
    if demands is None:
        demands = [demand_with_margin(m.attendance, margin) for m in meetings]
    demands = [int(d) for d in demands]
    if not meetings:
        return AllocationPlan([], rooms, [], [], 0)
    max_cap = max((r.capacity for r in rooms), default=0)
    for m, d in zip(meetings, demands):
        if d > max_cap:
            raise InfeasibleError(
                f"meeting {m.course_id} (day {m.day}, slot {m.start_slot}) needs {d} seats; "
                f"largest room holds {max_cap}"
            )
    search = _Search(meetings, rooms, demands)
    # phase 1: cheapest-room-first over a slot-ordered meeting sequence finds the optimum
    order = sorted(range(len(meetings)), key=lambda i: (meetings[i].start_slot, -demands[i], i))
    by_cost = {i: sorted(search.fits[i], key=lambda j: (search.caps[j], j)) for i in range(len(meetings))}
    opt, _ = search.run(order, lambda i: by_cost[i], math.inf, strict=True)
    if opt == math.inf:
        _, blocker = search.deepest
        m = meetings[blocker] if blocker is not None else meetings[0]
        raise InfeasibleError(
            f"no conflict-free room for meeting {m.course_id} (day {m.day}, slot "
            f"{m.start_slot}, demand {demands[meetings.index(m)]})"
        )
    # phase 2: lexicographic walk in input order, accepting the first optimum
    _, assign = search.run(list(range(len(meetings))), lambda i: search.fits[i], opt, strict=False)
    return AllocationPlan(meetings, rooms, assign, demands, int(opt))


def check_plan(plan: AllocationPlan) -> list[str]:
    """Constraint violations of a plan, independent of the solver."""
    problems = []
    if len(plan.assignment) != len(plan.meetings):
        return ["assignment length differs from the meeting list"]
    occupied: dict[tuple[int, int], str] = {}
    cost = 0
    for m, j, d in zip(plan.meetings, plan.assignment, plan.demands):
        if not 0 <= j < len(plan.rooms):
            problems.append(f"{m.course_id}: no room assigned")
            continue
        room = plan.rooms[j]
        if d > room.capacity:
            problems.append(f"{m.course_id}: demand {d} exceeds {room.id} capacity {room.capacity}")
        for s in range(m.start_slot, m.start_slot + m.duration):
            key = (j, s)
            if key in occupied:
                problems.append(f"room {room.id} slot {s}: {occupied[key]} and {m.course_id}")
            occupied[key] = m.course_id
            cost += room.capacity
    if cost != plan.total_cost:
        problems.append(f"reported cost {plan.total_cost} differs from recomputed {cost}")
    return problems


def overflow_report(plan: AllocationPlan, actuals: dict):
    """Fraction of meetings whose actual attendance exceeds the room capacity.

    Returns ``(fraction, overflowing course ids, course ids lacking actuals)``;
    meetings without actuals are excluded from the fraction.
    """
    over, missing, counted = [], [], 0
    for m, j in zip(plan.meetings, plan.assignment):
        if m.course_id not in actuals:
            missing.append(m.course_id)
            continue
        counted += 1
        if actuals[m.course_id] > plan.rooms[j].capacity:
            over.append(m.course_id)
    return (len(over) / counted if counted else 0.0), over, missing


def margin_sweep(meetings, rooms, actuals: dict, margins=(0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30)):
    """Allocation cost and overflow for each prediction margin."""
    rows = []
    for mg in margins:
        plan = allocate(meetings, rooms, mg)
        frac, over, _ = overflow_report(plan, actuals)
        rows.append({"margin": mg, "cost": plan.total_cost, "overflow_fraction": frac,
                     "overflow_count": len(over)})
    return rows
