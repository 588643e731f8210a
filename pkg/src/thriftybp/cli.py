"""Command-line front end.

Exit status: 0 when every check passes, 1 when a property is violated,
2 on usage, file-format or resource-cap errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from itertools import product
from pathlib import Path
from typing import Any, Sequence

from . import analysis, dageval, genprob, pebbling, reduction, transform
from .bp import BranchingProgram, run, size, validate_bp
from .dag import RootedDag, dag_from_spec, validate_dag
from .dageval import DagEvalInstance
from .genprob import GenInstance
from .report import DEFAULT_MAX_INSTANCES, DEFAULT_MAX_STEPS, FamilyTooLarge, Report

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from exc


def load_dag(spec: str) -> RootedDag:
    try:
        dag = dag_from_spec(spec)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"cannot load dag {spec!r}: {exc}") from exc
    report = validate_dag(dag)
    if not report:
        raise UsageError(f"invalid dag {spec!r}: {report}")
    return dag


def load_bp(path: str) -> BranchingProgram:
    try:
        return BranchingProgram.from_json(read_json(path))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def load_instance(path: str) -> DagEvalInstance:
    try:
        inst = DagEvalInstance.from_json(read_json(path))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = validate_dag(inst.dag)
    report.violations.extend(inst.validate().violations)
    if not report:
        raise UsageError(f"invalid instance {path}: {report}")
    return inst


def load_gen(path: str) -> GenInstance:
    try:
        return GenInstance.from_json(read_json(path))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(args: argparse.Namespace, payload: dict[str, Any], lines: Sequence[str]) -> None:
    if args.json:
        sys.stdout.write(dumps(payload))
    else:
        for line in lines:
            print(line)


# commands


def cmd_make_dag(args):
    dag = load_dag(args.dag)
    write_json(args.out, dag.to_json())
    _emit(args, {"n": dag.n, "out": args.out}, [f"wrote dag with {dag.n} nodes to {args.out}"])
    return EXIT_OK


def cmd_pebble(args):
    dag = load_dag(args.dag)
    try:
        p, witness = pebbling.min_pebbling_cost(dag, args.cap)
    except pebbling.PebblingBudgetExceeded as exc:
        raise UsageError(f"cap exceeded: {exc}") from exc
    seq = [sorted(c) for c in witness]
    _emit(args, {"p": p, "witness": seq}, [f"p={p}", json.dumps(seq)])
    return EXIT_OK


def cmd_evaluate(args):
    inst = load_instance(args.input)
    values = dageval.node_values(inst)
    answer = dageval.decide(inst)
    _emit(args, {"answer": answer, "values": {str(u): v for u, v in values.items()}},
          [answer, "values: " + " ".join(f"{u}={v}" for u, v in values.items())])
    return EXIT_OK


def cmd_reduce(args):
    inst = load_instance(args.input)
    try:
        naming = reduction.build_naming(inst.dag, inst.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    T = reduction.reduce_instance(inst, naming)
    write_json(args.out, T.to_json())
    if args.naming:
        write_json(args.naming, reduction.naming_to_json(naming))
    _emit(args, {"m": T.m, "out": args.out}, [f"wrote GEN[{T.m}] instance to {args.out}"])
    return EXIT_OK


def cmd_gen_decide(args):
    T = load_gen(args.input)
    closed = sorted(genprob.closure(T))
    answer = genprob.decide_gen(T)
    _emit(args, {"answer": answer, "closure": closed}, [answer, "closure: " + " ".join(map(str, closed))])
    return EXIT_OK


def _finish(args, report: Report, what: str) -> int:
    _emit(args, report.to_json(), [f"{what}: {report}"])
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_check_thrifty(args):
    b = load_bp(args.bp)
    dag = load_dag(args.dag)
    report = dageval.check_thrifty(b, dag, args.k, args.family, args.max_instances, args.max_steps)
    if report.ok and args.lemma:
        report = dageval.check_basic_thrifty_lemma(b, dag, args.k, args.family, args.max_instances)
    return _finish(args, report, "thrifty")


def _reduction_image(dag: RootedDag, k: int, family: str, max_instances: int) -> list[GenInstance]:
    naming = reduction.build_naming(dag, k)
    inputs = dageval.family_inputs(dag, k, family, max_instances)
    return [reduction.reduce_instance(inst, naming) for inst in inputs]


def cmd_check_incremental(args):
    b = load_bp(args.bp)
    if args.family_file:
        raw = read_json(args.family_file)
        try:
            family = [GenInstance.from_json(item) for item in raw]
        except (ValueError, TypeError) as exc:
            raise UsageError(f"malformed family file: {exc}") from exc
    elif args.exhaustive:
        if b.k > 3:
            raise UsageError("exhaustive mode is limited to m <= 3")
        family = list(genprob.all_gen_instances(b.k, args.max_instances))
    elif args.dag and args.k:
        family = _reduction_image(load_dag(args.dag), args.k, args.family, args.max_instances)
    else:
        raise UsageError("give --family-file, --exhaustive, or --dag with --k")
    report = genprob.check_semantic_incremental(b, family, args.max_steps)
    return _finish(args, report, "semantic-incremental")


def cmd_transform(args):
    B = load_bp(args.gen_bp)
    dag = load_dag(args.dag)
    try:
        naming = reduction.build_naming(dag, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    vr = validate_bp(B, "full")
    if not vr:
        raise UsageError(f"GEN program does not validate in full mode: {vr}")
    log = transform.TransformLog()
    out = transform.incremental_to_thrifty(B, dag, args.k, naming, log_to=log)
    write_json(args.out, out.to_json())
    payload = {"size_in": size(B), "size_out": size(out), "contracted": len(log.contracted),
               "deleted_edges": len(log.deleted_edges), "rejected": log.rejected, "out": args.out}
    _emit(args, payload, [f"size {size(B)} -> {size(out)}; wrote {args.out}"])
    return EXIT_OK if size(out) <= size(B) else EXIT_VIOLATION


def cmd_forward(args):
    b = load_bp(args.bp)
    dag = load_dag(args.dag)
    try:
        out = transform.thrifty_to_incremental(b, dag, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_json(args.out, out.to_json())
    _emit(args, {"size_in": size(b), "size_out": size(out), "m": out.k, "out": args.out},
          [f"GEN[{out.k}] program with {size(out)} states; wrote {args.out}"])
    return EXIT_OK


def cmd_construct_thrifty(args):
    dag = load_dag(args.dag)
    if args.sequence:
        seq = read_json(args.sequence)
    else:
        try:
            _, seq = pebbling.min_pebbling_cost(dag, args.cap)
        except pebbling.PebblingBudgetExceeded as exc:
            raise UsageError(f"cap exceeded: {exc}") from exc
    try:
        b = analysis.build_thrifty_from_pebbling(dag, args.k, seq)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_json(args.out, b.to_json())
    cost = pebbling.sequence_cost(seq)
    _emit(args, {"size": size(b), "pebbles": cost, "out": args.out},
          [f"thrifty program with {size(b)} states from a {cost}-pebble sequence; wrote {args.out}"])
    return EXIT_OK


def cmd_verify_bound(args):
    b = load_bp(args.bp)
    dag = load_dag(args.dag)
    try:
        result = analysis.verify_partition_bound(b, dag, args.k, args.p, args.cap, args.max_instances)
    except pebbling.PebblingBudgetExceeded as exc:
        raise UsageError(f"cap exceeded: {exc}") from exc
    data = result.to_json()
    _emit(args, data, [
        f"p={result.p} |D|={result.hard_inputs} groups={result.groups} (need >= {args.k ** result.p}) "
        f"max_group={result.max_group} (bound {args.k ** (dag.n - result.p)}) size={result.size}",
        "pass" if result.passed else f"FAIL: {result.report}",
    ])
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_protocol(args):
    b = load_bp(args.bp)
    inst = load_instance(args.input)
    try:
        pkg = analysis.encode_advice(b, inst)
        decoded = analysis.decode_advice(b, inst.dag, pkg)
    except (analysis.AnnotationError, analysis.ProtocolError) as exc:
        _emit(args, {"ok": False, "error": str(exc)}, [f"protocol failed: {exc}"])
        return EXIT_VIOLATION
    truth = dageval.node_values(inst)
    ok = decoded == truth
    payload = {"advice": pkg.to_json(), "decoded": {str(u): v for u, v in decoded.items()}, "ok": ok}
    _emit(args, payload, [
        f"critical state {pkg.critical_state}, {len(pkg.words)} word(s): {list(pkg.words)}",
        "decoded: " + " ".join(f"{u}={v}" for u, v in decoded.items()),
        "round trip ok" if ok else "round trip MISMATCH",
    ])
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_random_instance(args):
    dag = load_dag(args.dag)
    rng = random.Random(args.seed)
    k = args.k
    if args.family == "hard":
        inst = dageval.hard_input_from_values(dag, k, [rng.randint(1, k) for _ in dag.nodes])
    else:
        leaves = {w: rng.randint(1, k) for w in dag.leaves}
        funcs = {u: {a: rng.randint(1, k) for a in product(range(1, k + 1), repeat=dag.indegree(u))}
                 for u in dag.internal}
        inst = DagEvalInstance(dag, k, leaves, funcs)
    write_json(args.out, inst.to_json())
    _emit(args, {"out": args.out, "answer": dageval.decide(inst)}, [f"wrote instance to {args.out}"])
    return EXIT_OK


def cmd_run(args):
    b = load_bp(args.bp)
    raw = read_json(args.input)
    try:
        inst: Any = GenInstance.from_json(raw) if "T" in raw else DagEvalInstance.from_json(raw)
        trace = run(b, inst)
    except (ValueError, LookupError) as exc:
        raise UsageError(str(exc)) from exc
    steps = [[s.state, s.answer] for s in trace.steps]
    _emit(args, {"output": trace.output, "steps": steps}, [f"{trace.output} after {len(steps)} step(s)"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thriftybp", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    common.add_argument("--max-instances", type=int, default=DEFAULT_MAX_INSTANCES)
    common.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    common.add_argument("--cap", type=int, default=16, help="pebble budget for the exact solver")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    dag_help = "dag JSON file, or tree:H / pyramid:H / path:L"

    p = add("make-dag", cmd_make_dag, "write a generated dag to JSON")
    p.add_argument("--dag", required=True, help=dag_help)
    p.add_argument("--out", required=True)

    p = add("pebble", cmd_pebble, "exact black pebbling cost with a witness")
    p.add_argument("--dag", required=True, help=dag_help)

    p = add("evaluate", cmd_evaluate, "evaluate a dag-evaluation instance")
    p.add_argument("--in", dest="input", required=True)

    p = add("reduce", cmd_reduce, "map a dag-evaluation instance to GEN")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--naming", help="also write the element naming here")

    p = add("gen-decide", cmd_gen_decide, "decide a GEN instance and print its closure")
    p.add_argument("--in", dest="input", required=True)

    p = add("run", cmd_run, "run a branching program on one input")
    p.add_argument("--bp", required=True)
    p.add_argument("--in", dest="input", required=True)

    p = add("check-thrifty", cmd_check_thrifty, "check a dag-evaluation program is thrifty on a family")
    p.add_argument("--bp", required=True)
    p.add_argument("--dag", required=True, help=dag_help)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--family", choices=["hard", "all"], default="hard")
    p.add_argument("--lemma", action="store_true", help="also check children are queried before parents")

    p = add("check-incremental", cmd_check_incremental, "check a GEN program is semantic-incremental")
    p.add_argument("--bp", required=True)
    p.add_argument("--dag", help="use the reduction image of this dag's inputs as the family")
    p.add_argument("--k", type=int)
    p.add_argument("--family", choices=["hard", "all"], default="hard")
    p.add_argument("--family-file", help="JSON list of GEN instances")
    p.add_argument("--exhaustive", action="store_true", help="every GEN[m] instance (m <= 3)")

    p = add("transform", cmd_transform, "semantic-incremental GEN program -> thrifty program")
    p.add_argument("--gen-bp", required=True)
    p.add_argument("--dag", required=True, help=dag_help)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("forward", cmd_forward, "thrifty program -> semantic-incremental GEN program")
    p.add_argument("--bp", required=True)
    p.add_argument("--dag", required=True, help=dag_help)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("construct-thrifty", cmd_construct_thrifty, "thrifty program from a pebbling sequence")
    p.add_argument("--dag", required=True, help=dag_help)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sequence", help="JSON list of node arrays; default is an optimal sequence")
    p.add_argument("--out", required=True)

    p = add("verify-bound", cmd_verify_bound, "critical-state partition bound on the hard inputs")
    p.add_argument("--bp", required=True)
    p.add_argument("--dag", required=True, help=dag_help)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=int, help="pebbling cost; computed exactly if omitted")

    p = add("protocol", cmd_protocol, "advice-protocol encode/decode for one hard input")
    p.add_argument("--bp", required=True)
    p.add_argument("--input", "--in", dest="input", required=True)

    p = add("random-instance", cmd_random_instance, "write a seeded random instance")
    p.add_argument("--dag", required=True, help=dag_help)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", choices=["hard", "all"], default="hard")
    p.add_argument("--out", required=True)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("cap", "max_instances", "max_steps"):
        if getattr(args, name) < 1:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "k", None) is not None and args.k < 2:
        parser.error("--k must be >= 2")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FamilyTooLarge as exc:
        print(f"error: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
