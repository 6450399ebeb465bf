"""JSON and DOT serialization for networks, states, gadgets and compiled circuits."""

from __future__ import annotations

import json
from pathlib import Path

from .circuit import AlternatingCircuit, parse_circuit
from .compiler import CompiledCircuit
from .errors import FormatError
from .gadgets import GadgetInstance
from .netcore import THRESHOLD, FMNetwork, FMState, LocalRule


def parse_json(text: str, source: str = "<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise FormatError(f"{source}: line {err.lineno}, column {err.colno}: {err.msg}") from err


def load_json(path) -> object:
    path = Path(path)
    return parse_json(path.read_text(), str(path))


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _require(d, key, source):
    if not isinstance(d, dict) or key not in d:
        raise FormatError(f"{source}: missing key {key!r}")
    return d[key]


# -- networks and states -------------------------------------------------


def network_to_dict(net: FMNetwork) -> dict:
    rules = []
    for r in net.rules:
        entry = {"kind": r.kind, "inputs": list(r.inputs)}
        if r.kind == THRESHOLD:
            entry["weights"] = list(r.weights)
            entry["theta"] = r.theta
        rules.append(entry)
    return {"n": net.n, "dt": net.dt.tolist(), "rules": rules}


def network_from_dict(d, source: str = "network") -> FMNetwork:
    n = _require(d, "n", source)
    dt = _require(d, "dt", source)
    raw = _require(d, "rules", source)
    if not isinstance(raw, list) or len(raw) != n:
        raise FormatError(f"{source}: 'rules' must be a list of {n} entries")
    try:
        rules = [
            LocalRule(r["kind"], r["inputs"], r.get("weights"), r.get("theta"))
            for r in raw
        ]
    except (KeyError, TypeError) as err:
        raise FormatError(f"{source}: malformed rule ({err})") from err
    return FMNetwork(rules, dt)


def state_to_dict(s: FMState) -> dict:
    return {"delta": s.tolist()}


def state_from_dict(d, source: str = "state") -> FMState:
    delta = _require(d, "delta", source)
    if not isinstance(delta, list) or not all(isinstance(v, int) for v in delta):
        raise FormatError(f"{source}: 'delta' must be a list of integers")
    return FMState(delta)


def load_network(path) -> FMNetwork:
    return network_from_dict(load_json(path), str(path))


def load_state(path) -> FMState:
    return state_from_dict(load_json(path), str(path))


# -- gadgets -------------------------------------------------------------


def gadget_to_dict(g: GadgetInstance) -> dict:
    d = network_to_dict(g.net)
    d["labels"] = {str(i): lab for i, lab in sorted(g.labels.items())}
    d["claimed_period"] = g.claimed_period
    d["params"] = g.params
    return d


# -- compiled circuits ---------------------------------------------------


def compiled_to_dict(cc: CompiledCircuit) -> dict:
    d = network_to_dict(cc.net)
    d.update(
        p=cc.p,
        schedule_period=cc.schedule_period,
        input_blocks={name: list(blk) for name, blk in zip(cc.input_names, cc.input_blocks)},
        gate_blocks={k: list(v) for k, v in cc.gate_blocks.items()},
        gate_gadgets={k: list(v) for k, v in cc.gate_gadgets.items()},
        base_state=cc.base_state.tolist(),
        labels={str(i): lab for i, lab in sorted(cc.labels.items())},
        circuit=cc.circuit.to_text(),
    )
    return d


def compiled_from_dict(d, source: str = "compiled") -> CompiledCircuit:
    net = network_from_dict(d, source)
    circuit = AlternatingCircuit.from_circuit(parse_circuit(_require(d, "circuit", source)))
    blocks = _require(d, "input_blocks", source)
    try:
        input_blocks = tuple(tuple(blocks[name]) for name in circuit.input_names)
    except KeyError as err:
        raise FormatError(f"{source}: no input block for {err}") from err
    return CompiledCircuit(
        circuit=circuit,
        net=net,
        base_state=net.validate_state(FMState(_require(d, "base_state", source))),
        labels={int(k): v for k, v in d.get("labels", {}).items()},
        input_blocks=input_blocks,
        gate_gadgets={k: tuple(v) for k, v in d.get("gate_gadgets", {}).items()},
        gate_blocks={k: tuple(v) for k, v in d.get("gate_blocks", {}).items()},
        schedule_period=int(d.get("schedule_period", d["p"])),
        p=int(_require(d, "p", source)),
    )


# -- DOT -----------------------------------------------------------------


def to_dot(net: FMNetwork, labels: dict[int, str] | None = None, name: str = "fmnet") -> str:
    """Interaction graph, one directed edge ``j -> i`` per dependency."""
    lines = [f"digraph {name} {{"]
    for i in range(net.n):
        text = f"{i}:{int(net.dt[i])}"
        if labels and i in labels:
            text += "\\n" + labels[i].replace('"', '\\"')
        lines.append(f'  {i} [label="{text}"];')
    for j, i in net.edges():
        lines.append(f"  {j} -> {i};")
    lines.append("}")
    return "\n".join(lines) + "\n"
