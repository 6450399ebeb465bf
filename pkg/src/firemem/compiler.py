"""Compile alternating monotone circuits into conjunctive networks with dt = 2.

Every circuit wire is a *block*: three path nodes u-v-w, each carrying one
triangle clock. A block at rest cycles with period 3 and reads ``122`` at
phase 0. Value 1 travels as a hole: ``120`` at phase 0, then one block further
every 3 steps.

* OR gate: the ``w`` ends of the argument blocks all touch the gate block's
  ``u``; any hole gets through. 3 steps.
* AND gate: the two arguments reach a clockless junction node through relay
  chains of different length. The junction (countdown 2) only drops to 0
  when holes arrive on two consecutive steps. 6 steps.
* A branch that arrives early is padded with extra blocks, so every gate
  sees its inputs in phase and one circuit iteration takes a fixed ``p``
  steps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .builder import Block, NetworkBuilder
from .circuit import AND, OR, AlternatingCircuit, MonotoneCircuit, eval_batch, iterate
from .dynamics import PredictionQuery
from .errors import CalibrationFailed, IllFormed
from .netcore import FMNetwork, FMState, step_delta

TAU = 2
WIRE_ZERO = (1, 2, 2)
WIRE_ONE = (1, 2, 0)
# a-node values of the clocks under u, v, w; identical on every block of figs 3 and 4
BLOCK_CLOCKS = ((2,), (0,), (1,))

# Fig. 3 transcription: (countdown, a-node value of its clock or None).
# upper branch, figure x = 182 and x = 232 at y = 72
AND_UPPER_RELAYS = ((1, 2), (2, 0))
# lower branch, figure x = 187 at y = 170
AND_LOWER_RELAYS = ((1, 2),)
# junction at figure (241, 123), no clock
AND_JUNCTION = 2

WIRE_DELAY = 3
OR_DELAY = 3
AND_DELAY = 6
CALIBRATION_EXHAUSTIVE_MAX = 10


class _Port(NamedTuple):
    """A block together with the step at which it shows its wire code."""

    block: Block
    time: int


@dataclass
class CompiledCircuit:
    circuit: AlternatingCircuit
    net: FMNetwork
    base_state: FMState
    labels: dict[int, str]
    input_blocks: tuple[tuple[int, int, int], ...]
    gate_gadgets: dict[str, tuple[int, ...]]
    gate_blocks: dict[str, tuple[int, int, int]]
    schedule_period: int
    p: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def input_names(self) -> list[str]:
        return self.circuit.input_names


class _Assembler:
    def __init__(self):
        self.b = NetworkBuilder()

    def block(self, label: str) -> Block:
        return self.b.add_block(label, TAU, WIRE_ZERO, BLOCK_CLOCKS)

    def relay(self, label: str, value: int, clock: int | None) -> int:
        node = self.b.add(label, TAU, value)
        if clock is not None:
            c = self.b.add_clock(f"{label}.C", TAU, clock)
            self.b.link(c.a_node, node)
        return node

    def feed(self, src: _Port, dst: int, show_at: int, label: str) -> list[int]:
        """Join ``src`` to node ``dst``, padding so the last block shows at ``show_at``."""
        gap = show_at - src.time
        if gap < 0 or gap % WIRE_DELAY:
            raise AssertionError(f"cannot delay by {gap} steps")
        tail = src.block.path_nodes[-1]
        made = []
        for j in range(gap // WIRE_DELAY):
            pad = self.block(f"{label}#{j}")
            self.b.link(tail, pad.path_nodes[0])
            tail = pad.path_nodes[-1]
            made.extend(pad.path_nodes)
        self.b.link(tail, dst)
        return made

    def or_gate(self, label: str, args: Sequence[_Port]) -> tuple[_Port, list[int]]:
        t = max(a.time for a in args) + OR_DELAY
        gate = self.block(label)
        nodes = list(gate.path_nodes)
        for k, a in enumerate(args):
            nodes += self.feed(a, gate.path_nodes[0], t - OR_DELAY, f"{label}.in{k}")
        return _Port(gate, t), nodes

    def and_gate(self, label: str, upper: _Port, lower: _Port) -> tuple[_Port, list[int]]:
        t = max(upper.time, lower.time) + AND_DELAY
        junction = self.b.add(f"{label}.J", TAU, AND_JUNCTION)
        gate = self.block(label)
        self.b.link(junction, gate.path_nodes[0])
        nodes = [junction, *gate.path_nodes]
        for side, src, relays in (("up", upper, AND_UPPER_RELAYS), ("lo", lower, AND_LOWER_RELAYS)):
            chain = [self.relay(f"{label}.{side}{k}", v, c) for k, (v, c) in enumerate(relays)]
            for a, b in zip(chain, chain[1:]):
                self.b.link(a, b)
            self.b.link(chain[-1], junction)
            nodes += chain
            nodes += self.feed(src, chain[0], t - AND_DELAY, f"{label}.{side}")
        return _Port(gate, t), nodes


def compile_circuit(c: MonotoneCircuit, calibrate: bool = True) -> CompiledCircuit:
    """Build the network; ``p`` comes from calibration unless disabled."""
    if not isinstance(c, AlternatingCircuit):
        c = AlternatingCircuit.from_circuit(c)
    asm = _Assembler()
    ports: list[_Port] = []
    input_blocks = []
    for name in c.input_names:
        blk = asm.block(f"in[{name}]")
        ports.append(_Port(blk, 0))
        input_blocks.append(blk.path_nodes)
    gadgets: dict[str, tuple[int, ...]] = {}
    gate_blocks = {}
    for g in c.gates:
        label = f"gate[{g.name}]"
        args = [ports[a] for a in g.args]
        if g.op == OR:
            port, nodes = asm.or_gate(label, args)
        else:
            if len(args) == 1:
                args = args * 2
            port, nodes = args[0], []
            for k, nxt in enumerate(args[1:], start=1):
                sub = label if k == len(args) - 1 else f"{label}/{k}"
                port, more = asm.and_gate(sub, port, nxt)
                nodes += more
        ports.append(port)
        gadgets[g.name] = tuple(nodes)
        gate_blocks[g.name] = port.block.path_nodes
    finish = max(ports[o].time for o in c.outputs)
    for k, o in enumerate(c.outputs):
        asm.feed(ports[o], input_blocks[k][0], finish, f"out[{c.input_names[k]}]")
    net, base, labels = asm.b.build()
    cc = CompiledCircuit(
        circuit=c, net=net, base_state=base, labels=labels,
        input_blocks=tuple(input_blocks), gate_gadgets=gadgets, gate_blocks=gate_blocks,
        schedule_period=finish + WIRE_DELAY,
    )
    cc.p = determine_period(cc) if calibrate else cc.schedule_period
    return cc


compile = compile_circuit  # noqa: A001 - public name used throughout the docs


def encode(cc: CompiledCircuit, x: Sequence[int]) -> FMState:
    return FMState(_encode_rows(cc, np.asarray([x]))[0])


def _encode_rows(cc: CompiledCircuit, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=bool)
    if X.shape[1] != len(cc.input_blocks):
        raise ValueError(f"expected {len(cc.input_blocks)} inputs, got {X.shape[1]}")
    rows = np.repeat(cc.base_state.delta[None, :], len(X), axis=0)
    w = np.array([blk[2] for blk in cc.input_blocks])
    rows[:, w] = np.where(X, WIRE_ONE[2], WIRE_ZERO[2])
    return rows


def decode(cc: CompiledCircuit, s: FMState) -> tuple[int, ...]:
    out = []
    for name, blk in zip(cc.input_names, cc.input_blocks):
        pattern = tuple(int(s.delta[i]) for i in blk)
        if pattern == WIRE_ZERO:
            out.append(0)
        elif pattern == WIRE_ONE:
            out.append(1)
        else:
            raise IllFormed(name, pattern)
    return tuple(out)


def calibration_inputs(n: int, samples: int = 256, seed: int = 0) -> np.ndarray:
    if n <= CALIBRATION_EXHAUSTIVE_MAX:
        return np.array(list(itertools.product((0, 1), repeat=n)), dtype=bool)
    rng = np.random.default_rng(seed)
    fixed = [np.zeros(n, bool), np.ones(n, bool), *np.eye(n, dtype=bool)]
    return np.vstack([fixed, rng.random((samples, n)) < 0.5])


def determine_period(cc: CompiledCircuit, budget: int | None = None) -> int:
    """Least p with F^p(encode(x)) == encode(C(x)) for every calibration input.

    Comparing whole states also checks that clocks, relays and junctions are
    back in their base phase.
    """
    budget = budget if budget is not None else 3 * cc.net.n
    X = calibration_inputs(len(cc.input_blocks))
    S = _encode_rows(cc, X)
    target = _encode_rows(cc, eval_batch(cc.circuit, X))
    for t in range(1, budget + 1):
        S = step_delta(cc.net, S)
        if np.array_equal(S, target):
            return t
    raise CalibrationFailed(budget)


def advance(cc: CompiledCircuit, s: FMState, steps: int) -> FMState:
    d = s.delta
    for _ in range(steps):
        d = step_delta(cc.net, d)
    return FMState(d)


def simulate_iterations(cc: CompiledCircuit, x0: Sequence[int], t: int) -> tuple[int, ...]:
    if t < 0:
        raise ValueError("t must be >= 0")
    return decode(cc, advance(cc, encode(cc, x0), cc.p * t))


class Mismatch(NamedTuple):
    x: tuple[int, ...]
    t: int
    expected: tuple[int, ...]
    observed: object


def verify_simulation(cc: CompiledCircuit, X=None, t_max: int = 8) -> Mismatch | None:
    """First (x, t) where the network disagrees with C^t(x), or None."""
    if X is None:
        X = calibration_inputs(len(cc.input_blocks))
    X = np.asarray(X, dtype=int)
    S = _encode_rows(cc, X)
    expected = [tuple(int(v) for v in x) for x in X]
    for t in range(1, t_max + 1):
        for _ in range(cc.p):
            S = step_delta(cc.net, S)
        expected = [iterate(cc.circuit, e, 1) for e in expected]
        for row, x, want in zip(S, X, expected):
            try:
                got = decode(cc, FMState(row))
            except IllFormed as err:
                got = err.pattern
            if got != want:
                return Mismatch(tuple(int(v) for v in x), t, want, got)
    return None


def query_node(cc: CompiledCircuit, i: int) -> int:
    """Third path node of input block i: countdown 2 for a 0, 0 for a 1."""
    return cc.input_blocks[i][2]


def reduce_prediction(c: MonotoneCircuit, x0: Sequence[int], i: int, compiled: CompiledCircuit | None = None) -> PredictionQuery:
    """Flip-prediction instance whose answer equals ``iter_circuit_predict(c, x0, i)``.

    The monitored node is off exactly at the steps where block i shows a 1.
    If ``x0[i] == 1`` it starts off and would flip trivially, so the query
    starts one step later, when it is back on; the next hole then marks the
    first later iteration with a 1.
    """
    cc = compiled if compiled is not None else compile_circuit(c)
    s = encode(cc, x0)
    if x0[i]:
        s = advance(cc, s, 1)
    return PredictionQuery(cc.net, query_node(cc, i), s)


# -- stand-alone gate gadgets (figs 3 and 4) ------------------------------


@dataclass
class GateGadget:
    kind: str
    net: FMNetwork
    base_state: FMState
    labels: dict[int, str]
    inputs: tuple[Block, Block]
    gate: Block
    outputs: tuple[Block, Block]

    def path_nodes(self) -> set[int]:
        return {v for blk in (*self.inputs, self.gate, *self.outputs) for v in blk.path_nodes}

    def machinery(self) -> list[int]:
        """Everything except block path nodes: clocks, relays, junction."""
        path = self.path_nodes()
        return [v for v in range(self.net.n) if v not in path]

    def encode(self, a: int, b: int) -> FMState:
        d = self.base_state.delta.copy()
        for blk, bit in zip(self.inputs, (a, b)):
            d[blk.path_nodes[2]] = WIRE_ONE[2] if bit else WIRE_ZERO[2]
        return FMState(d)


def build_gate_gadget(kind: str) -> GateGadget:
    """Two input blocks, the gate, and two fan-out blocks, as drawn."""
    asm = _Assembler()
    a, b = asm.block("in[0]"), asm.block("in[1]")
    ports = [_Port(a, 0), _Port(b, 0)]
    if kind == OR:
        port, _ = asm.or_gate("gate", ports)
    elif kind == AND:
        port, _ = asm.and_gate("gate", *ports)
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    outs = []
    for k in range(2):
        o = asm.block(f"out[{k}]")
        asm.b.link(port.block.path_nodes[2], o.path_nodes[0])
        outs.append(o)
    net, base, labels = asm.b.build()
    return GateGadget(kind, net, base, labels, (a, b), port.block, tuple(outs))


class GadgetReport(NamedTuple):
    kind: str
    settle_time: int  # first step at which the gate block shows the result for every input pair
    recovery_time: int  # first step from which all machinery matches the base orbit
    truth_table: dict
    outputs_ok: bool
    machinery_ok: bool


def _code(d: np.ndarray, blk: Block) -> tuple[int, ...]:
    return tuple(int(d[v]) for v in blk.path_nodes)


def measure_gate_gadget(kind: str, horizon: int = 24) -> GadgetReport:
    g = build_gate_gadget(kind)
    op = (lambda a, b: a & b) if kind == AND else (lambda a, b: a | b)
    pairs = list(itertools.product((0, 1), repeat=2))
    runs = {}
    for a, b in pairs:
        d = g.encode(a, b).delta
        traj = [d]
        for _ in range(horizon):
            d = step_delta(g.net, d)
            traj.append(d)
        runs[(a, b)] = traj
    base = [g.base_state.delta]
    for _ in range(horizon):
        base.append(step_delta(g.net, base[-1]))

    def shows(traj, t, blk, bit):
        return _code(traj[t], blk) == (WIRE_ONE if bit else WIRE_ZERO)

    settle = next(
        t for t in range(1, horizon - WIRE_DELAY)
        if all(shows(runs[ab], t, g.gate, op(*ab)) for ab in pairs)
    )
    table = {ab: int(shows(runs[ab], settle, g.gate, 1)) for ab in pairs}
    outputs_ok = all(
        shows(runs[ab], settle + WIRE_DELAY, o, op(*ab)) for ab in pairs for o in g.outputs
    )
    mach = np.array(g.machinery())
    last_off = -1
    for traj in runs.values():
        for t in range(horizon + 1):
            if not np.array_equal(traj[t][mach], base[t][mach]):
                last_off = max(last_off, t)
    recovery = last_off + 1
    settled_everywhere = all(np.array_equal(traj[-1], base[-1]) for traj in runs.values())
    return GadgetReport(kind, settle, recovery, table, outputs_ok, recovery <= settle and settled_everywhere)
