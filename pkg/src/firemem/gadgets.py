"""Constructions with long attractors: clocks, block cycles and prime unions."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import NamedTuple, Union

import numpy as np

from .builder import Block, Clock, NetworkBuilder
from .dynamics import default_budget, find_attractor
from .errors import EmptyList, KTooSmall, NonDistinctPrimes, TauTooSmall
from .netcore import FMNetwork, FMState, LocalRule

Claim = Union[int, str]  # an int or "nonpolynomial"


@dataclass(frozen=True)
class GadgetInstance:
    net: FMNetwork
    initial: FMState
    claimed_period: Claim
    labels: dict[int, str]
    # node groups simulated in isolation by the lcm law; empty for single-part gadgets
    components: tuple[tuple[int, ...], ...] = ()
    # (reader, source) dependencies that join the components
    connectors: tuple[tuple[int, int], ...] = ()
    clocks: tuple[Clock, ...] = ()
    blocks: tuple[Block, ...] = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.labels.values())) != len(self.labels) or set(self.labels) != set(range(self.net.n)):
            raise ValueError("labels must be total and injective")


class PeriodCheck(NamedTuple):
    ok: bool
    measured: int
    transient: int


def _check_tau(tau: int) -> None:
    if tau < 2:
        raise TauTooSmall(f"tau = {tau} < 2")


def _check_primes(primes) -> list[int]:
    primes = [int(p) for p in primes]
    if not primes:
        raise EmptyList("need at least one prime")
    if len(set(primes)) != len(primes):
        raise NonDistinctPrimes(f"repeated entries in {primes}")
    if min(primes) < 2:
        raise ValueError("every entry must be >= 2")
    return primes


def _finish(b: NetworkBuilder, claimed, **extra) -> GadgetInstance:
    net, init, labels = b.build()
    return GadgetInstance(net, init, claimed, labels, **extra)


def build_clock_network(tau: int) -> GadgetInstance:
    """K_{tau+1}, dt = tau, started at (0, 1, ..., tau): period tau+1."""
    _check_tau(tau)
    b = NetworkBuilder()
    clock = b.add_clock("K", tau, 0)
    return _finish(b, tau + 1, clocks=(clock,), params={"kind": "clock", "tau": tau})


def clock_schedule(tau: int, r: int) -> list[int]:
    """Initial a-node values of the tau-1 clocks on path node r."""
    return [(r + 1 + l) % (tau + 1) for l in range(tau - 1)]


def _add_block_cycle(b: NetworkBuilder, tau: int, k: int, prefix: str = "") -> list[Block]:
    blocks = []
    for j in range(1, k + 1):
        first = 0 if j == 1 else tau
        path_values = [first] + list(range(1, tau + 1))
        schedule = [clock_schedule(tau, r) for r in range(tau + 1)]
        blocks.append(b.add_block(f"{prefix}B{j}", tau, path_values, schedule))
    for j in range(k):
        b.link(blocks[j].path_nodes[-1], blocks[(j + 1) % k].path_nodes[0])
    return blocks


def build_block_cycle(tau: int, k: int) -> GadgetInstance:
    """k blocks closed into a cycle of k(tau+1) path nodes; period k(tau+1)."""
    _check_tau(tau)
    if k < 1:
        raise KTooSmall(f"k = {k} < 1")
    b = NetworkBuilder()
    blocks = _add_block_cycle(b, tau, k)
    clocks = tuple(c for blk in blocks for row in blk.clocks for c in row)
    return _finish(
        b, k * (tau + 1), clocks=clocks, blocks=tuple(blocks),
        params={"kind": "block-cycle", "tau": tau, "k": k},
    )


def block_cycle_node_count(tau: int, k: int) -> int:
    return k * (tau + 1) * (1 + (tau - 1) * (tau + 1))


def build_prime_union_hetero(primes, connector: str = "buffered", coprime_fix: bool = False) -> GadgetInstance:
    """Connected union of rotating cliques, one per prime, with different delays.

    Component i is K_{p+1} with dt = p (period p+1), or with ``coprime_fix``
    K_p with dt = p-1 (period exactly p). Component i's connector node reads
    one node of component i+1:

    * ``"direct"``: the connector node reads that node itself.
    * ``"buffered"``: through a relay node with dt = 2 that echoes it. The
      relay never reaches 0 because its source is off for one step at a time.
    """
    primes = _check_primes(primes)
    if connector not in ("buffered", "direct"):
        raise ValueError(f"unknown connector {connector!r}")
    b = NetworkBuilder()
    comps, clocks, periods = [], [], []
    for p in primes:
        size_tau = p - 1 if coprime_fix else p
        # K_2 with dt = 1 rotates with period 2, so tau = 1 is fine here
        clock = b.add_clock(f"K{p}", size_tau, 0)
        clocks.append(clock)
        comps.append(clock.node_ids)
        periods.append(size_tau + 1)
    connectors = []
    for i in range(len(primes) - 1):
        # read a node that starts at 1 so no connector pair starts at 0
        dst, src = clocks[i].node_ids[1], clocks[i + 1].node_ids[1]
        if connector == "direct":
            b.depend(dst, src)
            connectors.append((dst, src))
        else:
            relay = b.add(f"link{i}", 2, 2)
            b.depend(relay, src)
            b.depend(dst, relay)
            connectors.extend([(relay, src), (dst, relay)])
    return _finish(
        b, lcm(*periods), components=tuple(comps), connectors=tuple(connectors), clocks=tuple(clocks),
        params={"kind": "prime-union-hetero", "primes": primes, "connector": connector,
                "coprime_fix": coprime_fix, "component_periods": periods},
    )


def build_prime_union_uniform(tau: int, primes) -> GadgetInstance:
    """Block cycles C_p (period p(tau+1)) chained through clock contact nodes.

    The a-node on path node 0 of C_{p_i}'s first block reads the a-node on
    path node 1 of C_{p_{i+1}}'s first block. Both clocks have period tau+1
    and start one phase apart, so they are never off together.
    """
    _check_tau(tau)
    primes = _check_primes(primes)
    b = NetworkBuilder()
    comps, all_blocks, clocks = [], [], []
    for p in primes:
        lo = len(b)
        blocks = _add_block_cycle(b, tau, p, prefix=f"C{p}.")
        comps.append(tuple(range(lo, len(b))))
        all_blocks.append(blocks)
        clocks.extend(c for blk in blocks for row in blk.clocks for c in row)
    connectors = []
    for i in range(len(primes) - 1):
        dst = all_blocks[i][0].clocks[0][0].a_node
        src = all_blocks[i + 1][0].clocks[1][0].a_node
        b.depend(dst, src)
        connectors.append((dst, src))
    periods = [p * (tau + 1) for p in primes]
    return _finish(
        b, lcm(*periods), components=tuple(comps), connectors=tuple(connectors), clocks=tuple(clocks),
        blocks=tuple(blk for bl in all_blocks for blk in bl),
        params={"kind": "prime-union-uniform", "tau": tau, "primes": primes, "component_periods": periods},
    )


def closed_form_uniform_node_count(tau: int, primes) -> int:
    """Closed-form vertex count (tau+1)*tau*sum(p); the built network is larger."""
    return (tau + 1) * tau * sum(primes)


def induced_subnetwork(net: FMNetwork, nodes, initial: FMState) -> tuple[FMNetwork, FMState]:
    """Restrict to ``nodes``; inputs from outside the set are dropped."""
    nodes = list(nodes)
    index = {v: i for i, v in enumerate(nodes)}
    rules = []
    for v in nodes:
        r = net.rules[v]
        rules.append(LocalRule(r.kind, [index[j] for j in r.inputs if j in index]))
    sub = FMNetwork(rules, [int(net.dt[v]) for v in nodes])
    return sub, FMState(initial.delta[nodes])


def split_components(g: GadgetInstance) -> list[GadgetInstance]:
    """Each component on its own, connectors removed."""
    out = []
    for comp in g.components:
        sub, init = induced_subnetwork(g.net, comp, g.initial)
        labels = {i: g.labels[v] for i, v in enumerate(comp)}
        out.append(GadgetInstance(sub, init, "nonpolynomial", labels))
    return out


def verify_claimed_period(g: GadgetInstance, budget: int | None = None) -> PeriodCheck:
    cap = budget if budget is not None else default_budget()
    tr = find_attractor(g.net, g.initial, min(g.net.state_space_size(), cap))
    ok = tr.transient == 0 and (not isinstance(g.claimed_period, int) or tr.period == g.claimed_period)
    return PeriodCheck(ok, tr.period, tr.transient)


def connector_zero_clashes(g: GadgetInstance, states) -> list[int]:
    """Times at which both ends of some connector are at countdown 0."""
    if not g.connectors:
        return []
    dst = np.array([c[0] for c in g.connectors])
    src = np.array([c[1] for c in g.connectors])
    return [t for t, s in enumerate(states) if np.any((s.delta[dst] == 0) & (s.delta[src] == 0))]
