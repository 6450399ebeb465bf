"""Command-line front end.

Every command prints one JSON report on stdout (``step`` prints JSON lines).
Wall-clock time lives in a separate ``timing`` field; everything else in a
report is a deterministic function of the inputs. Exit status 0 means
an answer was computed, including a negative one.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import compiler, gadgets, io
from .circuit import AlternatingCircuit, normalize_alternating, parse_circuit
from .dynamics import PredictionQuery, brute_force_census, census_rows, default_budget, find_attractor, predict
from .errors import FiremError
from .netcore import run

EXIT_ERROR = 1


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit(command: str, inputs: dict, result: dict, started: float, out=None) -> None:
    report = {
        "command": command,
        "inputs": inputs,
        "result": result,
        "timing": {"wall_clock_s": round(time.perf_counter() - started, 6)},
    }
    (out or sys.stdout).write(json.dumps(report, sort_keys=True) + "\n")


def _load_pair(args):
    net = io.load_network(args.network)
    state = net.validate_state(io.load_state(args.state))
    inputs = {"network": _digest(args.network), "state": _digest(args.state)}
    return net, state, inputs


def _maybe_dot(args, net, labels=None) -> None:
    if getattr(args, "dot", None):
        Path(args.dot).write_text(io.to_dot(net, labels))


def cmd_step(args) -> int:
    net = io.load_network(args.network)
    state = net.validate_state(io.load_state(args.state))
    if args.steps < 0:
        raise FiremError("--steps must be >= 0")
    for t, s in enumerate(run(net, state, args.steps)):
        sys.stdout.write(json.dumps({"t": t, "delta": s.tolist()}) + "\n")
    _maybe_dot(args, net)
    return 0


def cmd_attractor(args) -> int:
    t0 = time.perf_counter()
    net, state, inputs = _load_pair(args)
    budget = args.budget or min(net.state_space_size(), default_budget())
    tr = find_attractor(net, state, budget)
    _emit("attractor", inputs, {
        "transient": tr.transient,
        "period": tr.period,
        "cycle_start": tr.cycle[0].tolist(),
    }, t0)
    _maybe_dot(args, net)
    return 0


def cmd_predict(args) -> int:
    t0 = time.perf_counter()
    net, state, inputs = _load_pair(args)
    inputs["node"] = args.node
    ans = predict(PredictionQuery(net, args.node, state))
    _emit("predict", inputs, {"answer": ans.answer, "witness_time": ans.witness_time}, t0)
    return 0


def cmd_census(args) -> int:
    t0 = time.perf_counter()
    net = io.load_network(args.network)
    rows = census_rows(brute_force_census(net, args.budget, jobs=args.jobs))
    _emit("census", {"network": _digest(args.network)}, {"attractors": rows}, t0)
    return 0


def _parse_primes(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad prime list {text!r}") from err


def cmd_build_gadget(args) -> int:
    t0 = time.perf_counter()
    if args.kind == "clock":
        g = gadgets.build_clock_network(args.tau)
    elif args.kind == "block-cycle":
        g = gadgets.build_block_cycle(args.tau, args.k)
    elif args.kind == "prime-union-hetero":
        g = gadgets.build_prime_union_hetero(args.primes, args.connector, args.coprime_fix)
    else:
        g = gadgets.build_prime_union_uniform(args.tau, args.primes)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.dump_json(io.gadget_to_dict(g), out / "network.json")
    io.dump_json(io.state_to_dict(g.initial), out / "state.json")
    io.dump_json({str(i): lab for i, lab in sorted(g.labels.items())}, out / "labels.json")
    _maybe_dot(args, g.net, g.labels)
    _emit("build-gadget", {"kind": args.kind}, {
        "n": g.net.n,
        "claimed_period": g.claimed_period,
        "files": ["network.json", "state.json", "labels.json"],
    }, t0)
    return 0


def cmd_compile(args) -> int:
    t0 = time.perf_counter()
    c = parse_circuit(Path(args.circuit).read_text())
    if args.normalize:
        c = normalize_alternating(c)
    else:
        c = AlternatingCircuit.from_circuit(c)
    cc = compiler.compile_circuit(c)
    io.dump_json(io.compiled_to_dict(cc), args.output)
    _maybe_dot(args, cc.net, cc.labels)
    _emit("compile", {"circuit": _digest(args.circuit), "normalize": args.normalize}, {
        "n": cc.net.n,
        "p": cc.p,
        "schedule_period": cc.schedule_period,
        "depth": c.depth(),
        "gates": len(c.gates),
        "gadget_settle_steps": {"or": compiler.OR_DELAY, "and": compiler.AND_DELAY},
    }, t0)
    return 0


def cmd_verify_sim(args) -> int:
    t0 = time.perf_counter()
    cc = io.compiled_from_dict(io.load_json(args.compiled), str(args.compiled))
    n = len(cc.input_blocks)
    if args.samples is not None:
        rng = np.random.default_rng(args.seed)
        X = rng.integers(0, 2, size=(args.samples, n))
        mode = {"samples": args.samples, "seed": args.seed}
    else:
        X = np.array(list(itertools.product((0, 1), repeat=n)))
        mode = {"exhaustive": True}
    bad = compiler.verify_simulation(cc, X, args.t)
    result = {"ok": bad is None, "checked_inputs": len(X), "t_max": args.t, "p": cc.p}
    if bad is not None:
        result["first_failure"] = {
            "x": list(bad.x), "t": bad.t, "expected": list(bad.expected), "observed": list(bad.observed),
        }
    _emit("verify-sim", {"compiled": _digest(args.compiled), **mode}, result, t0)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="firemem", description="Boolean networks with firing memory.")
    sub = p.add_subparsers(dest="command", required=True)

    def pair(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("network", help="network JSON")
        sp.add_argument("state", help="state JSON")
        return sp

    sp = pair("step", "print an exact N-step trace as JSON lines")
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_step)

    sp = pair("attractor", "transient and period of the trajectory")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_attractor)

    sp = pair("predict", "does the node ever flip?")
    sp.add_argument("--node", type=int, required=True)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("census", help="every attractor with its basin size")
    sp.add_argument("network")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("build-gadget", help="write a gadget's network, state and labels")
    sp.add_argument("--kind", required=True,
                    choices=["clock", "block-cycle", "prime-union-hetero", "prime-union-uniform"])
    sp.add_argument("--tau", type=int, default=2)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--primes", type=_parse_primes, default=[2, 3])
    sp.add_argument("--connector", choices=["buffered", "direct"], default="buffered")
    sp.add_argument("--coprime-fix", action="store_true")
    sp.add_argument("--out", default=".")
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_build_gadget)

    sp = sub.add_parser("compile", help="compile a monotone circuit into a network")
    sp.add_argument("circuit")
    sp.add_argument("-o", "--output", default="compiled.json")
    sp.add_argument("--normalize", action="store_true", help="rewrite into alternating form first")
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("verify-sim", help="check decode(F^(pt)(encode x)) == C^t(x)")
    sp.add_argument("compiled")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--t", type=int, default=4)
    sp.set_defaults(func=cmd_verify_sim)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FiremError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
