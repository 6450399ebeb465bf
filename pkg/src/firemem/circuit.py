"""Monotone boolean circuits: parsing, (iterated) evaluation, normalization.

Text format, one statement per line::

    input <name>
    <gid> = and <a> <b> ...
    <gid> = or <a> <b> ...
    output <inputname> = <ref>

``#`` starts a comment, identifiers match ``[A-Za-z0-9_]+``. Gates take one
or more arguments; definitions may appear in any order. Output k feeds input
k on the next iteration.
"""

from __future__ import annotations

import re
from importlib import resources
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    CircuitError,
    CircuitSyntaxError,
    CycleDetected,
    DegreeTooHigh,
    NegationRejected,
    NotAlternating,
    OutputArityMismatch,
    UnknownIdentifier,
)

INPUT = "input"
AND = "and"
OR = "or"
MAX_DEGREE = 4

_IDENT = re.compile(r"^[A-Za-z0-9_]+$")
_NEGATIONS = {"not", "nand", "nor", "xor", "xnor"}


@dataclass(frozen=True)
class Gate:
    op: str
    args: tuple[int, ...]
    name: str


def opposite(op: str) -> str:
    return AND if op == OR else OR


class MonotoneCircuit:
    """Inputs occupy node ids ``0..n_inputs-1``; gates follow in topological order."""

    def __init__(self, nodes: Sequence[Gate], outputs: Sequence[int]):
        nodes = tuple(nodes)
        n_inputs = 0
        while n_inputs < len(nodes) and nodes[n_inputs].op == INPUT:
            n_inputs += 1
        names = set()
        for i, g in enumerate(nodes):
            if g.name in names:
                raise CircuitError(f"duplicate name {g.name!r}")
            names.add(g.name)
            if i < n_inputs:
                if g.args:
                    raise CircuitError("inputs take no arguments")
                continue
            if g.op == INPUT:
                raise CircuitError("inputs must come before gates")
            if g.op not in (AND, OR):
                raise CircuitError(f"unsupported gate {g.op!r}")
            if not g.args:
                raise CircuitError(f"gate {g.name} has no arguments")
            if any(not 0 <= a < i for a in g.args):
                raise CircuitError(f"gate {g.name} is not in topological order")
        if len(outputs) != n_inputs or n_inputs == 0:
            raise OutputArityMismatch(f"{n_inputs} inputs but {len(outputs)} outputs")
        if any(not 0 <= o < len(nodes) for o in outputs):
            raise CircuitError("output refers to an unknown node")
        self.nodes = nodes
        self.n_inputs = n_inputs
        self.outputs = tuple(int(o) for o in outputs)

    @property
    def input_names(self) -> list[str]:
        return [g.name for g in self.nodes[: self.n_inputs]]

    @property
    def gates(self) -> tuple[Gate, ...]:
        return self.nodes[self.n_inputs :]

    def consumers(self) -> list[list[int]]:
        """Readers of every node, with multiplicity. Output k appears as ``-1-k``."""
        out = [[] for _ in self.nodes]
        for i, g in enumerate(self.nodes):
            for a in g.args:
                out[a].append(i)
        for k, o in enumerate(self.outputs):
            out[o].append(-1 - k)
        return out

    def layers(self) -> list[int]:
        """Gates before this one on a shortest path from an input.

        Inputs get -1, gates fed straight from an input get 0.
        """
        layer = [-1] * len(self.nodes)
        for i, g in enumerate(self.nodes[self.n_inputs :], start=self.n_inputs):
            layer[i] = min(layer[a] for a in g.args) + 1
        return layer

    def depth(self) -> int:
        """Gates on the longest input-to-output path."""
        d = [0] * len(self.nodes)
        for i, g in enumerate(self.nodes[self.n_inputs :], start=self.n_inputs):
            d[i] = max(d[a] for a in g.args) + 1
        return max(d[o] for o in self.outputs)

    def size(self) -> int:
        return len(self.nodes) - self.n_inputs

    def to_text(self) -> str:
        lines = [f"input {name}" for name in self.input_names]
        for g in self.gates:
            lines.append(f"{g.name} = {g.op} " + " ".join(self.nodes[a].name for a in g.args))
        for k, o in enumerate(self.outputs):
            lines.append(f"output {self.nodes[k].name} = {self.nodes[o].name}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"{type(self).__name__}(inputs={self.n_inputs}, gates={self.size()})"


def from_definitions(inputs: Sequence[str], defs: dict, outputs: dict, lines: dict | None = None):
    """Topologically order named gate definitions into a circuit.

    ``defs`` maps gate name to ``(op, [arg names])``; ``outputs`` maps input
    name to the name it is identified with.
    """
    lines = lines or {}
    index = {name: i for i, name in enumerate(inputs)}
    for name, (_, args) in defs.items():
        for a in args:
            if a not in index and a not in defs:
                raise UnknownIdentifier(f"line {lines.get(name, '?')}: {a!r} is not defined")
    order: list[str] = []
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    for root in defs:
        if state.get(root):
            continue
        stack = [(root, iter(defs[root][1]))]
        state[root] = 1
        while stack:
            name, it = stack[-1]
            for a in it:
                if a in index:
                    continue
                if state.get(a) == 1:
                    raise CycleDetected(f"cycle through {a!r}")
                if not state.get(a):
                    state[a] = 1
                    stack.append((a, iter(defs[a][1])))
                    break
            else:
                stack.pop()
                state[name] = 2
                order.append(name)
    nodes = [Gate(INPUT, (), name) for name in inputs]
    for name in order:
        index[name] = len(nodes)
        op, args = defs[name]
        nodes.append(Gate(op, tuple(index[a] for a in args), name))
    missing = [name for name in inputs if name not in outputs]
    if missing or len(outputs) != len(inputs):
        raise OutputArityMismatch(f"every input needs exactly one output; missing {missing}")
    outs = []
    for name in inputs:
        ref = outputs[name]
        if ref not in index:
            raise UnknownIdentifier(f"output {name} refers to undefined {ref!r}")
        outs.append(index[ref])
    return MonotoneCircuit(nodes, outs)


def parse_circuit(text: str) -> MonotoneCircuit:
    inputs: list[str] = []
    defs: dict[str, tuple[str, list[str]]] = {}
    outputs: dict[str, str] = {}
    where: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.replace("=", " = ").split()
        for tok in tokens:
            if tok != "=" and not _IDENT.match(tok):
                raise CircuitSyntaxError(lineno, f"bad identifier {tok!r}")
        if tokens[0] == "input":
            if len(tokens) != 2:
                raise CircuitSyntaxError(lineno, "expected 'input <name>'")
            name = tokens[1]
            if name in where:
                raise CircuitSyntaxError(lineno, f"{name!r} defined twice")
            inputs.append(name)
            where[name] = lineno
        elif tokens[0] == "output":
            if len(tokens) != 4 or tokens[2] != "=":
                raise CircuitSyntaxError(lineno, "expected 'output <input> = <ref>'")
            if tokens[1] in outputs:
                raise OutputArityMismatch(f"line {lineno}: second output for {tokens[1]!r}")
            outputs[tokens[1]] = tokens[3]
        elif len(tokens) >= 3 and tokens[1] == "=":
            name, op, args = tokens[0], tokens[2].lower(), tokens[3:]
            if op in _NEGATIONS:
                raise NegationRejected(f"line {lineno}: {op!r} is not monotone")
            if op not in (AND, OR):
                raise CircuitSyntaxError(lineno, f"unknown gate type {op!r}")
            if not args:
                raise CircuitSyntaxError(lineno, "gate needs at least one argument")
            if name in where:
                raise CircuitSyntaxError(lineno, f"{name!r} defined twice")
            defs[name] = (op, args)
            where[name] = lineno
        else:
            raise CircuitSyntaxError(lineno, f"cannot parse {line!r}")
    for name in outputs:
        if name not in inputs:
            raise UnknownIdentifier(f"output for undeclared input {name!r}")
    return from_definitions(inputs, defs, outputs, where)


def bundled_circuits() -> dict[str, str]:
    """Example circuits shipped in ``firemem/data``, by file name."""
    root = resources.files("firemem") / "data"
    files = sorted((f for f in root.iterdir() if f.name.endswith(".circ")), key=lambda f: f.name)
    return {f.name: f.read_text() for f in files}


# -- evaluation -------------------------------------------------------------


def eval_batch(c: MonotoneCircuit, X) -> np.ndarray:
    """Evaluate on every row of ``X`` (shape (m, n_inputs)) at once."""
    X = np.asarray(X, dtype=bool)
    vals = [X[:, k] for k in range(c.n_inputs)]
    for g in c.gates:
        cols = [vals[a] for a in g.args]
        vals.append(np.logical_and.reduce(cols) if g.op == AND else np.logical_or.reduce(cols))
    return np.stack([vals[o] for o in c.outputs], axis=1)


def eval(c: MonotoneCircuit, x: Sequence[int]) -> tuple[int, ...]:  # noqa: A001 - mirrors the math
    if len(x) != c.n_inputs:
        raise CircuitError(f"expected {c.n_inputs} inputs, got {len(x)}")
    vals = [bool(v) for v in x]
    for g in c.gates:
        args = [vals[a] for a in g.args]
        vals.append(all(args) if g.op == AND else any(args))
    return tuple(int(vals[o]) for o in c.outputs)


def iterate(c: MonotoneCircuit, x0: Sequence[int], t: int) -> tuple[int, ...]:
    if t < 0:
        raise ValueError("t must be >= 0")
    x = tuple(int(bool(v)) for v in x0)
    for _ in range(t):
        x = eval(c, x)
    return x


class CircuitPrediction(NamedTuple):
    answer: bool
    witness_time: int | None


def iter_circuit_predict(c: MonotoneCircuit, x0: Sequence[int], i: int) -> CircuitPrediction:
    """Is there t >= 1 with C^t(x0)_i = 1? Minimal witness if so."""
    if not 0 <= i < c.n_inputs:
        raise CircuitError(f"index {i} out of range")
    x = tuple(int(bool(v)) for v in x0)
    seen = {x}
    t = 0
    while True:
        t += 1
        x = eval(c, x)
        if x[i]:
            return CircuitPrediction(True, t)
        if x in seen:
            return CircuitPrediction(False, None)
        seen.add(x)


# -- alternating normal form ------------------------------------------------


def alternation_violations(c: MonotoneCircuit) -> tuple[list[str], list[str]]:
    """Structural problems, split into (alternation, degree) complaints."""
    alt, deg = [], []
    cons = c.consumers()
    nodes = c.nodes
    for k in range(c.n_inputs):
        readers = cons[k]
        if len(readers) != 1:
            alt.append(f"input {nodes[k].name} has out-degree {len(readers)}, expected 1")
        for r in readers:
            if r < 0 or nodes[r].op != OR:
                alt.append(f"input {nodes[k].name} feeds something other than an OR gate")
    for i, g in enumerate(nodes[c.n_inputs :], start=c.n_inputs):
        for a in g.args:
            src = nodes[a]
            if src.op == INPUT and g.op != OR:
                alt.append(f"{g.name}: AND gate reads input {src.name}")
            if src.op == g.op:
                alt.append(f"{g.name}: {g.op} gate reads {src.op} gate {src.name}")
        d = len(g.args) + len(cons[i])
        if d > MAX_DEGREE:
            deg.append(f"{g.name} has degree {d} > {MAX_DEGREE}")
    for k, o in enumerate(c.outputs):
        if nodes[o].op != OR:
            alt.append(f"output {nodes[k].name} is not an OR gate")
    layer = c.layers()
    for i, g in enumerate(nodes[c.n_inputs :], start=c.n_inputs):
        want = OR if layer[i] % 2 == 0 else AND
        if g.op != want:
            alt.append(f"{g.name} is {g.op} on layer {layer[i]}")
    return alt, deg


class AlternatingCircuit(MonotoneCircuit):
    """Monotone circuit in the form the compiler accepts.

    Inputs have out-degree 1 into OR gates, gate types alternate along every
    edge (OR on even layers), outputs are OR gates and no gate has degree
    above 4.
    """

    def __init__(self, nodes, outputs):
        super().__init__(nodes, outputs)
        alt, deg = alternation_violations(self)
        if alt:
            raise NotAlternating("; ".join(alt[:5]))
        if deg:
            raise DegreeTooHigh("; ".join(deg[:5]))

    @classmethod
    def from_circuit(cls, c: MonotoneCircuit) -> "AlternatingCircuit":
        return cls(c.nodes, c.outputs)


class _Draft:
    """Mutable node list used while rewriting a circuit."""

    def __init__(self, input_names):
        self.ops = [INPUT] * len(input_names)
        self.args: list[list[int]] = [[] for _ in input_names]
        self.names = list(input_names)
        self.taken = set(input_names)
        self.outputs: list[int] = []

    def fresh(self, base: str) -> str:
        name, k = base, 1
        while name in self.taken:
            k += 1
            name = f"{base}_{k}"
        self.taken.add(name)
        return name

    def add(self, op: str, args, name: str) -> int:
        self.ops.append(op)
        self.args.append(list(args))
        self.names.append(self.fresh(name))
        return len(self.ops) - 1

    def finish(self, cls=MonotoneCircuit):
        n_in = sum(1 for op in self.ops if op == INPUT)
        indeg = [len(a) for a in self.args]
        readers = [[] for _ in self.ops]
        for i, args in enumerate(self.args):
            for a in args:
                readers[a].append(i)
        order = list(range(n_in))
        for i in order:
            for r in readers[i]:
                indeg[r] -= 1
        ready = sorted(i for i in range(n_in, len(self.ops)) if indeg[i] == 0)
        while ready:
            i = ready.pop(0)
            order.append(i)
            for r in readers[i]:
                indeg[r] -= 1
                if indeg[r] == 0:
                    ready.append(r)
            ready.sort()
        if len(order) != len(self.ops):
            raise CycleDetected("rewrite produced a cycle")
        pos = {old: new for new, old in enumerate(order)}
        nodes = [Gate(self.ops[i], tuple(pos[a] for a in self.args[i]), self.names[i]) for i in order]
        return cls(nodes, [pos[o] for o in self.outputs])


def _binarize(c: MonotoneCircuit) -> _Draft:
    d = _Draft(c.input_names)
    new_id = list(range(c.n_inputs))
    for g in c.gates:
        args = [new_id[a] for a in g.args]
        while len(args) > 2:
            # pair up neighbours; a balanced tree keeps the depth logarithmic
            nxt = []
            for j in range(0, len(args) - 1, 2):
                nxt.append(d.add(g.op, args[j : j + 2], f"{g.name}_t"))
            if len(args) % 2:
                nxt.append(args[-1])
            args = nxt
        new_id.append(d.add(g.op, args, g.name))
    d.outputs = [new_id[o] for o in c.outputs]
    return d


def _alternate(src: _Draft) -> _Draft:
    d = _Draft(src.names[: src.ops.count(INPUT)])
    n_in = len(d.names)
    buf = [d.add(OR, [k], f"{d.names[k]}_buf") for k in range(n_in)]
    built: dict[int, int] = {}
    ident: dict[tuple[int, str], int] = {}

    def typed(ref: int, want: str) -> int:
        if ref < n_in:
            node, have = buf[ref], OR
        else:
            node, have = build(ref), src.ops[ref]
        if have == want:
            return node
        key = (node, want)
        if key not in ident:
            ident[key] = d.add(want, [node], f"{want}_{d.names[node]}")
        return ident[key]

    def build(ref: int) -> int:
        if ref not in built:
            op = src.ops[ref]
            args = [typed(a, opposite(op)) for a in src.args[ref]]
            built[ref] = d.add(op, args, src.names[ref])
        return built[ref]

    d.outputs = [typed(o, OR) for o in src.outputs]
    return d


def _limit_fanout(d: _Draft) -> None:
    readers: list[list[tuple[int, int]]] = [[] for _ in d.ops]  # (gate, arg slot); gate -1-k = output k
    for i, args in enumerate(d.args):
        for slot, a in enumerate(args):
            readers[a].append((i, slot))
    for k, o in enumerate(d.outputs):
        readers[o].append((-1 - k, 0))

    def rewire(reader, new_src):
        gate, slot = reader
        if gate < 0:
            d.outputs[-1 - gate] = new_src
        else:
            d.args[gate][slot] = new_src

    def spread(v: int, group) -> None:
        cap = MAX_DEGREE - len(d.args[v])
        if len(group) <= cap:
            return
        parts = [group[j::cap] for j in range(cap)]
        for part in parts:
            if len(part) == 1:
                continue
            # v -> opposite-type identity -> same-type identity keeps alternation
            mid = d.add(opposite(d.ops[v]), [v], f"{d.names[v]}_fo")
            twin = d.add(d.ops[v], [mid], f"{d.names[v]}_fo")
            for r in part:
                rewire(r, twin)
            spread(twin, part)

    for v in range(len(d.ops)):
        if d.ops[v] != INPUT:
            spread(v, list(readers[v]))


def normalize_alternating(c: MonotoneCircuit) -> AlternatingCircuit:
    """Equivalent circuit satisfying every AlternatingCircuit invariant.

    Gates wider than two become balanced trees, every input gets a private
    OR buffer, single-argument gates of the missing type are spliced in
    wherever two equal types meet, and over-wide fan-out goes through
    identity trees. Circuits that already qualify come back unchanged.
    """
    if alternation_violations(c) == ([], []):
        return AlternatingCircuit.from_circuit(c)
    d = _alternate(_binarize(c))
    _limit_fanout(d)
    return d.finish(AlternatingCircuit)
