"""Boolean networks with firing memory.

A node holds a boolean value plus a countdown. When its local rule fires the
countdown is reset to the node's maximum delay ``dt_i``; otherwise it decays
by one until it reaches zero. We store only the countdown ("shorthand"
state): a node is on iff its countdown is at least 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import (
    DanglingNodeId,
    DelayOutOfRange,
    DeltaOutOfRange,
    DuplicateInput,
    LengthMismatch,
    NetworkError,
)

AND = "and"
OR = "or"
THRESHOLD = "threshold"
KINDS = (AND, OR, THRESHOLD)

# below this size a dense matvec beats the sparse one
_DENSE_LIMIT = 96


@dataclass(frozen=True)
class LocalRule:
    """Local update function of one node.

    ``and`` fires iff every input is on (empty AND fires), ``or`` iff some
    input is on (empty OR never fires), ``threshold`` iff
    ``sum(w_j * x_j) - theta >= 0``.
    """

    kind: str
    inputs: tuple[int, ...]
    weights: tuple[int, ...] | None = None
    theta: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(j) for j in self.inputs))
        if self.kind not in KINDS:
            raise NetworkError(f"unknown rule kind {self.kind!r}")
        if self.kind == THRESHOLD:
            if self.weights is None or self.theta is None:
                raise NetworkError("threshold rule needs weights and theta")
            object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
            object.__setattr__(self, "theta", int(self.theta))
            if len(self.weights) != len(self.inputs):
                raise LengthMismatch("threshold weights and inputs differ in length")
        elif self.weights is not None or self.theta is not None:
            raise NetworkError(f"{self.kind} rule takes no weights/theta")

    @classmethod
    def conj(cls, inputs: Iterable[int]) -> "LocalRule":
        return cls(AND, tuple(inputs))

    @classmethod
    def disj(cls, inputs: Iterable[int]) -> "LocalRule":
        return cls(OR, tuple(inputs))

    def coefficients(self) -> tuple[tuple[int, ...], int]:
        """Weights and threshold of the equivalent threshold function."""
        if self.kind == AND:
            return (1,) * len(self.inputs), len(self.inputs)
        if self.kind == OR:
            return (1,) * len(self.inputs), 1
        return self.weights, self.theta

    def evaluate(self, x: Sequence[int]) -> int:
        vals = [1 if x[j] else 0 for j in self.inputs]
        if self.kind == AND:
            return int(all(vals))
        if self.kind == OR:
            return int(any(vals))
        return int(sum(w * v for w, v in zip(self.weights, vals)) - self.theta >= 0)


class FMState:
    """Shorthand state: one countdown value per node. Immutable and hashable."""

    __slots__ = ("delta",)

    def __init__(self, delta: Iterable[int]):
        arr = np.array(list(delta) if not isinstance(delta, np.ndarray) else delta, dtype=np.int64)
        if arr.ndim != 1:
            raise NetworkError("state must be a flat vector")
        arr.setflags(write=False)
        object.__setattr__(self, "delta", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FMState is immutable")

    @property
    def x(self) -> np.ndarray:
        return (self.delta >= 1).astype(np.int8)

    def __len__(self):
        return len(self.delta)

    def __iter__(self):
        return iter(self.delta.tolist())

    def __getitem__(self, i):
        return int(self.delta[i])

    def __eq__(self, other):
        if isinstance(other, FMState):
            return np.array_equal(self.delta, other.delta)
        return NotImplemented

    def __hash__(self):
        return hash(self.delta.tobytes())

    def __repr__(self):
        return f"FMState({self.delta.tolist()})"

    def tolist(self) -> list[int]:
        return self.delta.tolist()

    def compact(self) -> str:
        """Digits concatenated, as in the figures (``"012"``); only for dt <= 9."""
        return "".join(str(v) for v in self.delta.tolist())


class FMNetwork:
    """Validated network: one local rule and one maximum delay per node.

    Treated as immutable after construction. Edge ``j -> i`` exists iff
    ``j`` is among ``rules[i].inputs``.
    """

    def __init__(self, rules: Sequence[LocalRule], dt: Sequence[int]):
        rules = tuple(rules)
        dt = [int(d) for d in dt]
        if not rules:
            raise NetworkError("network needs at least one node")
        if len(rules) != len(dt):
            raise LengthMismatch(f"{len(rules)} rules but {len(dt)} delays")
        n = len(rules)
        for i, d in enumerate(dt):
            if d < 1:
                raise DelayOutOfRange(f"dt[{i}] = {d} < 1")
        for i, r in enumerate(rules):
            if not isinstance(r, LocalRule):
                raise NetworkError(f"rule {i} is not a LocalRule")
            if len(set(r.inputs)) != len(r.inputs):
                raise DuplicateInput(f"rule {i} lists an input twice: {r.inputs}")
            for j in r.inputs:
                if not 0 <= j < n:
                    raise DanglingNodeId(f"rule {i} references node {j} (n={n})")
        self.n = n
        self.rules = rules
        self.dt = np.array(dt, dtype=np.int64)
        self.dt.setflags(write=False)

        rows, cols, vals = [], [], []
        thr = np.empty(n, dtype=np.int64)
        for i, r in enumerate(rules):
            w, theta = r.coefficients()
            rows.extend([i] * len(r.inputs))
            cols.extend(r.inputs)
            vals.extend(w)
            thr[i] = theta
        if n <= _DENSE_LIMIT:
            dense = np.zeros((n, n), dtype=np.int64)
            np.add.at(dense, (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)), vals)
            self._matrix, self._matrix_t = dense, dense.T
        else:
            mat = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=np.int64)
            self._matrix, self._matrix_t = mat, mat.T.tocsr()
        self._thr = thr

        widths = np.array([int(d).bit_length() for d in dt], dtype=np.int64)
        self._bit_node = np.repeat(np.arange(n), widths)
        # most significant bit of each field first
        self._bit_shift = np.concatenate([np.arange(w - 1, -1, -1) for w in widths])

    # -- structure -----------------------------------------------------
    @property
    def is_conjunctive(self) -> bool:
        return all(r.kind == AND for r in self.rules)

    @property
    def is_disjunctive(self) -> bool:
        return all(r.kind == OR for r in self.rules)

    def in_neighbors(self, i: int) -> tuple[int, ...]:
        return self.rules[i].inputs

    def edges(self) -> list[tuple[int, int]]:
        """Directed edges ``(j, i)``: ``i`` reads ``j``."""
        return [(j, i) for i, r in enumerate(self.rules) for j in r.inputs]

    def state_space_size(self) -> int:
        return int(np.prod([int(d) + 1 for d in self.dt.tolist()], dtype=object))

    # -- evaluation ----------------------------------------------------
    def fire(self, x: np.ndarray) -> np.ndarray:
        """Plain synchronous update ``F(x)`` of boolean vector(s) ``x``.

        Accepts a single vector (n,) or a batch (m, n).
        """
        x = np.asarray(x, dtype=np.int64)
        if x.ndim == 1:
            s = self._matrix @ x
        else:
            s = np.asarray(x @ self._matrix_t)
        return s >= self._thr

    def validate_state(self, s: FMState | Sequence[int]) -> FMState:
        if not isinstance(s, FMState):
            s = FMState(s)
        if len(s) != self.n:
            raise LengthMismatch(f"state has {len(s)} entries, network has {self.n} nodes")
        bad = np.nonzero((s.delta < 0) | (s.delta > self.dt))[0]
        if bad.size:
            i = int(bad[0])
            raise DeltaOutOfRange(f"delta[{i}] = {s[i]} outside [0, {int(self.dt[i])}]")
        return s

    def __eq__(self, other):
        if not isinstance(other, FMNetwork):
            return NotImplemented
        return self.rules == other.rules and np.array_equal(self.dt, other.dt)

    __hash__ = None

    def __repr__(self):
        kinds = sorted({r.kind for r in self.rules})
        return f"FMNetwork(n={self.n}, kinds={kinds}, max_dt={int(self.dt.max())})"


def make_network(rules: Sequence[LocalRule], dt: Sequence[int]) -> FMNetwork:
    return FMNetwork(rules, dt)


def boolean_projection(s: FMState) -> np.ndarray:
    return s.x


def step_delta(net: FMNetwork, delta: np.ndarray) -> np.ndarray:
    """One firing-memory step on raw countdown array(s), shape (n,) or (m, n)."""
    f = net.fire(delta >= 1)
    return np.where(f, net.dt, np.maximum(delta - 1, 0))


def step(net: FMNetwork, s: FMState) -> FMState:
    return FMState(step_delta(net, s.delta))


def run(net: FMNetwork, s: FMState, steps: int) -> list[FMState]:
    """Trace of ``steps`` updates, including the initial state."""
    out = [s]
    d = s.delta
    for _ in range(steps):
        d = step_delta(net, d)
        out.append(FMState(d))
    return out


def canonicalize_initial(net: FMNetwork, x: Sequence[int], delta_raw: Sequence[int]) -> FMState:
    """Fold an arbitrary (boolean, countdown) pair into a shorthand state.

    An on node keeps its countdown but at least 1; an off node gets 0.
    """
    x = np.asarray(x, dtype=np.int64)
    raw = np.asarray(delta_raw, dtype=np.int64)
    if len(x) != net.n or len(raw) != net.n:
        raise LengthMismatch("x and delta_raw must have one entry per node")
    bad = np.nonzero((raw < 0) | (raw > net.dt))[0]
    if bad.size:
        i = int(bad[0])
        raise DeltaOutOfRange(f"delta_raw[{i}] = {int(raw[i])} outside [0, {int(net.dt[i])}]")
    return FMState(np.where(x != 0, np.maximum(raw, 1), 0))


def pack_state(net: FMNetwork, s: FMState | np.ndarray) -> bytes:
    """Bit-packed key: each countdown in ceil(log2(dt_i + 1)) bits, node order."""
    d = s.delta if isinstance(s, FMState) else s
    bits = (d[net._bit_node] >> net._bit_shift) & 1
    return np.packbits(bits.astype(np.uint8)).tobytes()


def unpack_state(net: FMNetwork, key: bytes) -> FMState:
    nbits = len(net._bit_node)
    bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8))[:nbits].astype(np.int64)
    d = np.zeros(net.n, dtype=np.int64)
    np.add.at(d, net._bit_node, bits << net._bit_shift)
    return FMState(d)
