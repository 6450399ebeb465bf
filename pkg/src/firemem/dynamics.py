"""Trajectories, attractors, the flip-prediction problem and exhaustive census."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BudgetExceeded, NetworkError
from .netcore import FMNetwork, FMState, pack_state, step_delta

DEFAULT_BUDGET = 2**26
_CHUNK = 1 << 18


def default_budget() -> int:
    """State-enumeration budget; ``FIREMEM_BUDGET`` overrides the default."""
    raw = os.environ.get("FIREMEM_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class Attractor:
    cycle: tuple[FMState, ...]
    period: int

    def __post_init__(self):
        if len(self.cycle) != self.period:
            raise ValueError("cycle length must equal the period")

    @property
    def is_fixed_point(self) -> bool:
        return self.period == 1

    def canonical(self) -> "Attractor":
        """Rotation starting at the lexicographically least state.

        Packed keys order exactly like the delta tuples (fixed-width fields,
        node 0 most significant), so no network is needed here.
        """
        keys = [s.tolist() for s in self.cycle]
        k = keys.index(min(keys))
        return Attractor(self.cycle[k:] + self.cycle[:k], self.period)

    @property
    def representative(self) -> FMState:
        return self.canonical().cycle[0]

    def same_as(self, other: "Attractor") -> bool:
        return self.period == other.period and self.canonical().cycle == other.canonical().cycle


@dataclass(frozen=True)
class Trajectory:
    """Pre-periodic prefix followed by one full period.

    ``states[transient + period]`` would repeat ``states[transient]``.
    """

    states: tuple[FMState, ...]
    transient: int
    period: int

    @property
    def cycle(self) -> tuple[FMState, ...]:
        return self.states[self.transient :]

    @property
    def attractor(self) -> Attractor:
        return Attractor(self.cycle, self.period)


@dataclass(frozen=True)
class PredictionQuery:
    net: FMNetwork
    node: int
    initial: FMState

    def __post_init__(self):
        if not 0 <= self.node < self.net.n:
            raise NetworkError(f"node {self.node} out of range for n={self.net.n}")
        object.__setattr__(self, "initial", self.net.validate_state(self.initial))


class Prediction(NamedTuple):
    answer: bool
    witness_time: int | None


def find_attractor(net: FMNetwork, s0: FMState, max_steps: int) -> Trajectory:
    """Exact transient and minimal period by first revisit of a packed state."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    s0 = net.validate_state(s0)
    seen = {pack_state(net, s0.delta): 0}
    states = [s0]
    d = s0.delta
    for t in range(1, max_steps + 1):
        d = step_delta(net, d)
        key = pack_state(net, d)
        first = seen.get(key)
        if first is not None:
            return Trajectory(tuple(states), first, t - first)
        seen[key] = t
        states.append(FMState(d))
    raise BudgetExceeded(max_steps)


def period_of(net: FMNetwork, s0: FMState, budget: int | None = None) -> int:
    cap = budget if budget is not None else default_budget()
    steps = min(net.state_space_size(), cap)
    return find_attractor(net, s0, steps).period


def predict(q: PredictionQuery, max_steps: int | None = None) -> Prediction:
    """Does ``q.node`` ever take the opposite boolean value at some t >= 1?

    Runs until the first flip (minimal witness) or until the trajectory
    revisits a state, after which nothing new can happen.
    """
    net, i = q.net, q.node
    d = q.initial.delta
    start = d[i] >= 1
    seen = {pack_state(net, d)}
    t = 0
    while True:
        t += 1
        if max_steps is not None and t > max_steps:
            raise BudgetExceeded(max_steps)
        d = step_delta(net, d)
        if (d[i] >= 1) != start:
            return Prediction(True, t)
        key = pack_state(net, d)
        if key in seen:
            return Prediction(False, None)
        seen.add(key)


# -- exhaustive enumeration ------------------------------------------------


class StateGraph:
    """Successor map over every canonical state, indexed in mixed radix.

    Node 0 is the most significant digit, so index order is lexicographic
    order of the delta tuples.
    """

    def __init__(self, net: FMNetwork, budget: int | None = None, jobs: int = 1):
        budget = budget if budget is not None else default_budget()
        size = net.state_space_size()
        if size > budget:
            raise BudgetExceeded(budget, "states")
        self.net = net
        self.size = size
        self.radix = net.dt + 1
        mult = np.ones(net.n, dtype=np.int64)
        for i in range(net.n - 2, -1, -1):
            mult[i] = mult[i + 1] * self.radix[i + 1]
        self.mult = mult
        self.succ = np.empty(size, dtype=np.int64)

        starts = range(0, size, _CHUNK)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                list(pool.map(self._fill, starts))
        else:
            for lo in starts:
                self._fill(lo)

    def _fill(self, lo: int) -> None:
        hi = min(lo + _CHUNK, self.size)
        d = self.decode(np.arange(lo, hi, dtype=np.int64))
        self.succ[lo:hi] = step_delta(self.net, d) @ self.mult

    def decode(self, idx: np.ndarray) -> np.ndarray:
        return (idx[:, None] // self.mult) % self.radix

    def encode(self, delta) -> int:
        return int(np.asarray(delta, dtype=np.int64) @ self.mult)

    def analyse(self) -> tuple[np.ndarray, np.ndarray]:
        """Per state: index of its attractor's least state; and cyclic mask."""
        n = self.size
        reach = self.succ.copy()  # f^(2^k)
        low = np.arange(n, dtype=np.int64)  # min over the first `span` iterates
        span = 1
        while span < n:
            low = np.minimum(low, low[reach])
            reach = reach[reach]
            span *= 2
        # reach = f^(2^k) with 2^k >= n lands every state on its cycle,
        # and low now covers at least 2^k iterates, i.e. a full cycle
        cyclic = np.zeros(n, dtype=bool)
        cyclic[reach] = True
        return low[reach], cyclic


def brute_force_census(
    net: FMNetwork, budget: int | None = None, jobs: int = 1
) -> list[tuple[Attractor, int]]:
    """Every attractor with its basin size, ordered by representative."""
    g = StateGraph(net, budget, jobs)
    rep, cyclic = g.analyse()
    reps, basins = np.unique(rep, return_counts=True)
    out = []
    for r, b in zip(reps.tolist(), basins.tolist()):
        cycle = [int(r)]
        while True:
            nxt = int(g.succ[cycle[-1]])
            if nxt == r:
                break
            cycle.append(nxt)
        states = tuple(FMState(row) for row in g.decode(np.array(cycle, dtype=np.int64)))
        out.append((Attractor(states, len(states)), int(b)))
    return out


def census_rows(census: list[tuple[Attractor, int]]) -> list[dict]:
    return [
        {"period": a.period, "basin": b, "representative": a.representative.tolist()}
        for a, b in census
    ]
