"""Independent reference implementations used to check the solvers."""
import itertools

import numpy as np
from scipy.integrate import solve_ivp


# --- birth-death chain ----------------------------------------------------

def dense_generator(lam, mu, C):
    Q = np.zeros((C + 1, C + 1))
    for n in range(C + 1):
        if n < C:
            Q[n, n + 1] = lam
        if n > 0:
            Q[n, n - 1] = mu
        Q[n, n] = -Q[n].sum()
    return Q


def ode_trace(pi0, arrivals, departures, C, epochs_per_hour):
    """Kolmogorov forward equations integrated hour by hour with DOP853.

    Returns the distribution at every epoch boundary and, in the last
    column, the integral of ``lam(t) * pi_C(t)``: the exact expected number
    of arrivals turned away.
    """
    rows = [np.r_[pi0, 0.0]]
    y = np.r_[np.asarray(pi0, float), 0.0]
    grid = np.linspace(0.0, 1.0, epochs_per_hour + 1)
    for lam, mu in zip(arrivals, departures):
        Q = dense_generator(lam, mu, C)

        def rhs(_t, v, Q=Q, lam=lam):
            return np.r_[v[:-1] @ Q, lam * v[C]]

        sol = solve_ivp(rhs, (0.0, 1.0), y, method="DOP853", t_eval=grid, rtol=1e-12, atol=1e-14)
        rows.extend(sol.y.T[1:])
        y = sol.y[:, -1]
    return np.array(rows)


def monte_carlo_day(arrivals, departures, C, epochs_per_hour, runs, seed):
    """Event-by-event simulation of ``runs`` independent days from an empty park.

    Returns per-run arrays ``(epoch_estimate, rejected)``: the first sums
    ``1[full at epoch start] * lam * epoch`` over the day (the quantity the
    epoch formula estimates), the second counts arrivals actually turned
    away. Exponential clocks restart at each epoch boundary, which is exact
    because they are memoryless.
    """
    rng = np.random.default_rng(seed)
    dt = 1.0 / epochs_per_hour
    n = np.zeros(runs, dtype=np.int64)
    est = np.zeros(runs)
    rejected = np.zeros(runs)
    for lam, mu in zip(arrivals, departures):
        for _ in range(epochs_per_hour):
            est += (n == C) * (lam * dt)
            active = np.arange(runs)
            t = np.zeros(runs)
            while active.size:
                nn = n[active]
                rate = lam + mu * (nn > 0)
                live = rate > 0
                active, nn, rate = active[live], nn[live], rate[live]
                t_new = t[active] + rng.exponential(size=active.size) / rate
                inside = t_new < dt
                active, nn, rate = active[inside], nn[inside], rate[inside]
                t[active] = t_new[inside]
                arrival = rng.random(active.size) * rate < lam
                full = nn == C
                n[active[arrival & ~full]] += 1
                rejected[active[arrival & full]] += 1
                n[active[~arrival]] -= 1
    return est, rejected


# --- partition optimiser --------------------------------------------------

def enumerate_partition(day_costs, spaces, M, R):
    """Cheapest feasible per-day scheme vector by full enumeration, or None."""
    D, P = day_costs.shape
    best = None
    for x in itertools.product(range(P), repeat=D):
        if not M * sum(spaces[j] for j in x) > R:
            continue
        c = sum(day_costs[i, j] for i, j in enumerate(x))
        if best is None or c < best[0] - 1e-12:
            best = (c, x)
    return best


# --- classroom allocation -------------------------------------------------

def enumerate_allocation(meetings, rooms, demands):
    """Minimum of sum(duration * capacity) over every feasible room assignment."""
    best = None
    R = len(rooms)
    for assign in itertools.product(range(R), repeat=len(meetings)):
        ok = all(rooms[r].capacity >= demands[i] for i, r in enumerate(assign))
        if not ok:
            continue
        used = set()
        for i, r in enumerate(assign):
            m = meetings[i]
            for s in range(m.start_slot, m.start_slot + m.duration):
                key = (m.day, s, r)
                if key in used:
                    ok = False
                    break
                used.add(key)
            if not ok:
                break
        if not ok:
            continue
        J = sum(meetings[i].duration * rooms[r].capacity for i, r in enumerate(assign))
        if best is None or J < best:
            best = J
    return best


# --- bus waits ------------------------------------------------------------

def passenger_simulation(dispatch, capacities, rates, t_start=0.0):
    """FIFO boarding simulation with each minute's passengers at its midpoint.

    Fractional passenger counts are carried as fluid groups so that the
    result is comparable with continuous demand profiles. Passengers still
    queueing after the last bus are charged their wait up to its departure,
    the end of the service window.
    """
    queue = []  # [arrival_time, amount] in FIFO order
    total = 0.0
    mids = t_start + np.arange(len(rates)) + 0.5
    k = 0
    for d, cap in zip(dispatch, capacities):
        while k < len(rates) and mids[k] < d:
            if rates[k] > 0:
                queue.append([mids[k], float(rates[k])])
            k += 1
        room = float(cap)
        while queue and room > 1e-12:
            t, amt = queue[0]
            take = min(amt, room)
            total += take * (d - t)
            room -= take
            if take >= amt - 1e-12:
                queue.pop(0)
            else:
                queue[0][1] = amt - take
    last = dispatch[-1]
    total += sum(amt * (last - t) for t, amt in queue)
    return total, queue


# --- queue codes ----------------------------------------------------------

def nearest_codes(bits):
    """All ones-prefix codes at minimum Hamming distance from ``bits``."""
    n = len(bits)
    codes = [tuple([1] * k + [0] * (n - k)) for k in range(n + 1)]
    dist = [sum(a != b for a, b in zip(bits, c)) for c in codes]
    m = min(dist)
    return [c for c, d in zip(codes, dist) if d == m], m
