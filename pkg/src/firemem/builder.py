"""Incremental construction of labelled conjunctive networks.

Gadgets and the circuit compiler assemble networks node by node; every node
gets a human-readable role label, a maximum delay and an initial countdown.
"""

from __future__ import annotations

from dataclasses import dataclass

from .netcore import FMNetwork, FMState, LocalRule


@dataclass(frozen=True)
class Clock:
    """Complete graph on tau+1 nodes; ``a_node`` is the contact vertex."""

    tau: int
    node_ids: tuple[int, ...]
    a_node: int


@dataclass(frozen=True)
class Block:
    """A (tau+1)-path whose every node carries tau-1 clocks."""

    tau: int
    path_nodes: tuple[int, ...]
    clocks: tuple[tuple[Clock, ...], ...]  # clocks[r][l] hangs off path_nodes[r]


class NetworkBuilder:
    def __init__(self):
        self.labels: list[str] = []
        self.dt: list[int] = []
        self.initial: list[int] = []
        self.inputs: list[set[int]] = []
        self._by_label: dict[str, int] = {}

    def __len__(self):
        return len(self.labels)

    def add(self, label: str, dt: int, initial: int) -> int:
        if label in self._by_label:
            raise ValueError(f"duplicate node label {label!r}")
        i = len(self.labels)
        self.labels.append(label)
        self.dt.append(dt)
        self.initial.append(initial)
        self.inputs.append(set())
        self._by_label[label] = i
        return i

    def node(self, label: str) -> int:
        return self._by_label[label]

    def link(self, a: int, b: int) -> None:
        """Undirected edge: each node reads the other."""
        self.inputs[a].add(b)
        self.inputs[b].add(a)

    def depend(self, dst: int, src: int) -> None:
        """Directed edge: ``dst`` reads ``src``."""
        self.inputs[dst].add(src)

    def clique(self, nodes) -> None:
        nodes = list(nodes)
        for i, a in enumerate(nodes):
            for b in nodes[i + 1 :]:
                self.link(a, b)

    def add_clock(self, label: str, tau: int, a_value: int) -> Clock:
        # any assignment of distinct values rotates with period tau+1; we
        # lay the clock out as the rotation that puts a_value on the a-node
        ids = []
        for k in range(tau + 1):
            suffix = "a" if k == 0 else str(k)
            ids.append(self.add(f"{label}.{suffix}", tau, (a_value + k) % (tau + 1)))
        self.clique(ids)
        return Clock(tau, tuple(ids), ids[0])

    def add_block(self, label: str, tau: int, path_values, clock_values) -> Block:
        """Path nodes linked in order; ``clock_values[r]`` are the a-node values
        of the tau-1 clocks attached to path node r."""
        path = [self.add(f"{label}.path[{r}]", tau, v) for r, v in enumerate(path_values)]
        for a, b in zip(path, path[1:]):
            self.link(a, b)
        clocks = []
        for r, vals in enumerate(clock_values):
            row = []
            for l, v in enumerate(vals, start=1):
                c = self.add_clock(f"C({label})_{{{r},{l}}}", tau, v)
                self.link(c.a_node, path[r])
                row.append(c)
            clocks.append(tuple(row))
        return Block(tau, tuple(path), tuple(clocks))

    def build(self) -> tuple[FMNetwork, FMState, dict[int, str]]:
        rules = [LocalRule.conj(sorted(ins)) for ins in self.inputs]
        net = FMNetwork(rules, self.dt)
        return net, net.validate_state(FMState(self.initial)), dict(enumerate(self.labels))
