"""
Transient analysis of a finite-capacity car park modelled as a birth-death
chain with hourly piecewise-constant arrival and departure rates.

State ``n`` is the number of occupied spaces (0..C). Arrivals occur at rate
``lam`` while ``n < C``; departures at rate ``mu`` while ``n > 0``. Rates are
per hour, time is in hours.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# larger uniformised rate-time products are split into sub-steps
MAX_POISSON_MEAN = 50.0


@dataclass
class BirthDeathSpec:
    capacity: int
    arrivals: np.ndarray
    departures: np.ndarray
    epoch: float = 1.0 / 12.0

    def __post_init__(self):
        self.arrivals = np.asarray(getattr(self.arrivals, "values", self.arrivals), dtype=float)
        self.departures = np.asarray(getattr(self.departures, "values", self.departures), dtype=float)
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")
        if self.arrivals.shape != self.departures.shape:
            raise ValueError("arrival and departure profiles cover different horizons")
        if np.any(self.arrivals < 0) or np.any(self.departures < 0):
            raise ValueError("rates must be non-negative")
        per_hour = 1.0 / self.epoch
        if self.epoch <= 0 or abs(per_hour - round(per_hour)) > 1e-9:
            raise ValueError("epoch must divide one hour evenly")

    @property
    def epochs_per_hour(self) -> int:
        return int(round(1.0 / self.epoch))


@dataclass
class RejectionTrace:
    per_epoch: np.ndarray

    @property
    def total(self) -> float:
        return float(self.per_epoch.sum())

    def hourly(self, epochs_per_hour: int) -> np.ndarray:
        return self.per_epoch.reshape(-1, epochs_per_hour).sum(axis=1)


@dataclass(frozen=True)
class PartitionScheme:
    rho: float
    total_capacity: int

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")

    @property
    def pv_capacity(self) -> int:
        return int(math.floor(self.rho * self.total_capacity + 0.5))

    @property
    def sv_capacity(self) -> int:
        return self.total_capacity - self.pv_capacity


def build_q_matrix(lam: float, mu: float, C: int, sparse: bool = False):
    """Generator of the birth-death chain on states 0..C."""
    if lam < 0 or mu < 0:
        raise ValueError("rates must be non-negative")
    n = C + 1
    up = np.full(C, float(lam))
    down = np.full(C, float(mu))
    diag = -(np.r_[up, 0.0] + np.r_[0.0, down])
    if sparse:
        return sp.diags([down, diag, up], [-1, 0, 1], shape=(n, n), format="csr")
    Q = np.diag(diag)
    Q[np.arange(C), np.arange(1, n)] = up
    Q[np.arange(1, n), np.arange(C)] = down
    return Q


def _diagonal(Q):
    return Q.diagonal() if sp.issparse(Q) else np.diag(Q)


def transient_step(pi, Q, dt: float, tol: float = 1e-12) -> np.ndarray:
    """Row vector ``pi @ expm(Q * dt)`` by uniformisation.

    The Poisson series is truncated once the neglected tail mass drops
    below ``tol``. Large ``rate * dt`` products are split into equal
    sub-steps so the Poisson weights stay representable.
    """
    pi = np.asarray(pi, dtype=float)
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = float(-_diagonal(Q).min()) if pi.size else 0.0
    if rate <= 0:
        return pi.copy()
    steps = max(1, int(math.ceil(rate * dt / MAX_POISSON_MEAN)))
    qt = rate * dt / steps
    v_out = pi
    for _ in range(steps):
        v = v_out
        w = math.exp(-qt)
        acc = w * v
        mass = w
        n = 0
        while 1.0 - mass > tol:
            n += 1
            v = v + (v @ Q) / rate
            w *= qt / n
            acc = acc + w * v
            mass += w
            if n > 10 * qt + 100:
                break
        v_out = np.asarray(acc).ravel()
    return v_out


def analytic_steady_state(lam: float, mu: float, C: int) -> np.ndarray:
    """Stationary law of the constant-rate chain: ``pi_n ∝ (lam/mu)^n``."""
    if mu <= 0:
        raise ValueError("mu must be positive for a steady state")
    if lam == 0:
        out = np.zeros(C + 1)
        out[0] = 1.0
        return out
    logp = np.arange(C + 1) * math.log(lam / mu)
    p = np.exp(logp - logp.max())
    return p / p.sum()


def point_mass(C: int, state: int = 0) -> np.ndarray:
    pi = np.zeros(C + 1)
    pi[state] = 1.0
    return pi


def simulate_day(spec: BirthDeathSpec, pi0=None, tol: float = 1e-12):
    """Step the chain through every epoch of the rate profile.

    Returns ``(trace, rejections)``: ``trace`` has one row per epoch
    boundary (row 0 is ``pi0``), and the rejection in each epoch is the
    pre-step probability of a full car park times the slot arrival rate
    times the epoch length.
    """
    C = spec.capacity
    pi = point_mass(C) if pi0 is None else np.asarray(pi0, dtype=float)
    if pi.shape != (C + 1,):
        raise ValueError(f"initial distribution has dimension {pi.size}, expected {C + 1}")
    m = spec.epochs_per_hour
    n_epochs = len(spec.arrivals) * m
    trace = np.empty((n_epochs + 1, C + 1))
    trace[0] = pi
    rej = np.empty(n_epochs)
    e = 0
    for lam, mu in zip(spec.arrivals, spec.departures):
        Q = build_q_matrix(lam, mu, C, sparse=C > 32)
        for _ in range(m):
            rej[e] = pi[C] * lam * spec.epoch
            pi = transient_step(pi, Q, spec.epoch, tol)
            e += 1
            trace[e] = pi
    return trace, RejectionTrace(rej)


def _days(profile, hours_per_day=24) -> np.ndarray:
    a = np.asarray(getattr(profile, "values", profile), dtype=float)
    return a.reshape(-1, hours_per_day) if a.ndim == 1 else a


def scheme_rejections(total_capacity: int, scheme: PartitionScheme | float,
                      pv_arrivals, pv_departures, sv_arrivals, sv_departures,
                      epoch: float = 1.0 / 12.0, initial_state: int = 0):
    """Daily expected rejections of private and shared users under a scheme.

    Demands are arrays shaped ``(days, 24)`` (or flat hourly series). Each
    day runs two isolated chains from a point mass at ``initial_state``
    (clipped to the partition size). Returns ``(r_pv, r_sv)`` arrays of
    daily totals.
    """
    if not isinstance(scheme, PartitionScheme):
        scheme = PartitionScheme(float(scheme), total_capacity)
    pa, pd_, sa, sd = (_days(x) for x in (pv_arrivals, pv_departures, sv_arrivals, sv_departures))
    if not (pa.shape == pd_.shape == sa.shape == sd.shape):
        raise ValueError("demand profiles cover different days")
    r_pv, r_sv = np.zeros(len(pa)), np.zeros(len(pa))
    for i in range(len(pa)):
        for cap, lam, mu, out in ((scheme.pv_capacity, pa[i], pd_[i], r_pv),
                                  (scheme.sv_capacity, sa[i], sd[i], r_sv)):
            spec = BirthDeathSpec(cap, lam, mu, epoch)
            _, rej = simulate_day(spec, point_mass(cap, min(initial_state, cap)))
            out[i] = rej.total
    return r_pv, r_sv


def sv_demand_profile(pv_arrivals, pv_departures, subscribers: int = 200, p_in: float = 0.5,
                      p_out: float = 0.4, diversion: float = 0.2, rng=None):
    """Split observed demand into shared-vehicle and residual private demand.

    A ``diversion`` share of the observed rates moves to shared vehicles,
    which also gain a constant binomial profile from ``subscribers`` extra
    members. By default the binomial terms enter in expectation
    (``subscribers * p``); pass a numpy ``Generator`` as ``rng`` to sample
    them per hour instead.

    Returns ``(sv_arrivals, sv_departures, pv_arrivals, pv_departures)``.
    """
    if not 0.0 <= diversion <= 1.0:
        raise ValueError("diversion must lie in [0, 1]")
    arr = np.asarray(getattr(pv_arrivals, "values", pv_arrivals), dtype=float)
    dep = np.asarray(getattr(pv_departures, "values", pv_departures), dtype=float)
    if rng is None:
        extra_in = np.full(arr.shape, subscribers * p_in)
        extra_out = np.full(dep.shape, subscribers * p_out)
    else:
        extra_in = rng.binomial(subscribers, p_in, size=arr.shape).astype(float)
        extra_out = rng.binomial(subscribers, p_out, size=dep.shape).astype(float)
    return (diversion * arr + extra_in, diversion * dep + extra_out,
            (1 - diversion) * arr, (1 - diversion) * dep)
