"""Command-line front end: check, compile, reach, simulate.

Exit codes of ``qtl check``: 0 the property is valid, 1 it is refuted,
2 the checker cannot decide (outside the decidable fragment, or a period
certificate is missing), 3 input or usage error.

Formula dispatch (atoms and || -combinations of atoms below each operator):

    p, p || q          satisfaction by the initial state
    X f                one-step successors
    [] f               invariance (pre-image chain)
    [] <> f            recurrence (loop refinement; may be Unknown)
    <> [] f            stabilization (maximal invariant + extension)
    [] (f U g)         invariance conjunct plus recurrence conjunct
    [] (p U~ q)        single-action programs only; limit-point analysis
    <> p, <>~ p        deterministic programs with exit, p an exit-shaped
                       atom; anything else is Unknown by construction

Other shapes exit with code 3 and a pointer to this table.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import QtlError
from .linalg import Mat
from . import jsonio
from .formula import (
    Always,
    AlmostEventually,
    AlmostUntil,
    Eventually,
    FAtom,
    FFalse,
    FTrue,
    Next,
    Or,
    Until,
    parse_formula,
)
from .program import (
    QuantumAutomaton,
    SequentialProgram,
    initial_cq,
    embed,
    selector_successors,
    to_automaton,
)
from .qwhile import bohm_jacopini, compile_qwhile, parse as parse_qwhile
from .subspace import Subspace
from . import checker
from .checker import (
    VALID,
    NOT_VALID,
    UNKNOWN,
    Verdict,
    check_always_almost_until,
    check_always_eventually,
    check_always_until,
    check_eventually_always,
    check_exit_formulas,
    check_invariance,
    check_next,
    reachability_superop,
)

EXIT_VALID = 0
EXIT_NOT_VALID = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_program(path):
    return jsonio.program_from_json(_load_json(path))


def _exit_shaped(atom_subspace, program):
    """The data-space part of an atom supported only on the exit location,
    or None when the atom touches other locations."""
    if not isinstance(program, SequentialProgram) or program.exit_location is None:
        return None
    n_configs = len(program.configs())
    e_idx = program.config_index(program.exit_location)
    d = program.dim
    cols = []
    for col in atom_subspace.basis.column_vectors():
        reduced = []
        for h in range(d):
            for c in range(n_configs):
                entry = col.entry(h * n_configs + c, 0)
                if c != e_idx and not entry.is_zero():
                    return None
                if c == e_idx:
                    reduced.append(entry)
        cols.append(Mat.column(reduced))
    return Subspace.from_vectors(d, cols)


def _union_of(node, atoms, ambient):
    return checker._formula_union(node, atoms, ambient)


def _dispatch(formula, program, automaton, atoms, args) -> Verdict:
    ambient = automaton.dim

    def union(node):
        return _union_of(node, atoms, ambient)

    if isinstance(formula, (FTrue, FFalse, FAtom, Or)):
        u = union(formula)
        from .subspace import support

        ok = u.contains_subspace(support(automaton.initial_state, validate=False))
        return Verdict.valid() if ok else Verdict.not_valid(witness={"step": 0})
    if isinstance(formula, Next):
        return check_next(automaton, union(formula.body))
    if isinstance(formula, Always) and isinstance(formula.body, Eventually):
        return check_always_eventually(
            automaton,
            union(formula.body.body),
            period_bound=args.period_bound,
            tolerance=args.tolerance,
            witness_depth=args.depth,
        )
    if isinstance(formula, Always) and isinstance(formula.body, Until):
        return check_always_until(
            automaton,
            union(formula.body.left),
            union(formula.body.right),
            period_bound=args.period_bound,
            tolerance=args.tolerance,
        )
    if isinstance(formula, Always) and isinstance(formula.body, AlmostUntil):
        if len(automaton.actions) != 1:
            return Verdict.unknown("almost-until needs a single action (deterministic system)")
        action = next(iter(automaton.actions.values()))
        p = atoms[formula.body.left].subspace
        q = atoms[formula.body.right].subspace
        return check_always_almost_until(
            action,
            automaton.initial_state,
            p,
            q,
            period_bound=args.period_bound,
            tolerance=args.tolerance,
        )
    if isinstance(formula, Always):
        return check_invariance(automaton, union(formula.body))
    if isinstance(formula, Eventually) and isinstance(formula.body, Always):
        return check_eventually_always(
            automaton, union(formula.body.body), witness_depth=args.depth
        )
    if isinstance(formula, Eventually) and isinstance(formula.body, FAtom):
        sub = _exit_shaped(atoms[formula.body.name].subspace, program)
        if sub is None:
            return Verdict.unknown(
                "eventually is decided only for exit-shaped atoms of deterministic "
                "programs with exit (reducible to the termination problem otherwise)"
            )
        verdicts = check_exit_formulas(program, sub, tolerance=args.tolerance)
        return verdicts.eventually
    if isinstance(formula, AlmostEventually):
        sub = _exit_shaped(atoms[formula.atom].subspace, program)
        if sub is None:
            return Verdict.unknown(
                "almost-eventually is decided only for exit-shaped atoms of "
                "deterministic programs with exit"
            )
        verdicts = check_exit_formulas(program, sub, tolerance=args.tolerance)
        return verdicts.almost_eventually
    raise QtlError(
        f"formula shape not in the decidable fragment table (see `qtl check --help`)"
    )


def cmd_check(args) -> int:
    program = _load_program(args.program)
    if isinstance(program, QuantumAutomaton):
        automaton = program
        base = None
    else:
        automaton = to_automaton(program)
        base = program
    atoms = {}
    if args.atoms:
        atoms = jsonio.atoms_from_json(_load_json(args.atoms), base if base is not None else automaton)
    formula = parse_formula(args.formula, atoms)
    verdict = _dispatch(formula, base, automaton, atoms, args)
    report = jsonio.verdict_to_json(verdict)
    report["formula"] = args.formula
    if args.json:
        print(jsonio.dumps(report))
    else:
        print(f"formula: {args.formula}")
        print(f"status: {verdict.status}")
        if verdict.witness:
            print(f"witness: {jsonio.dumps(jsonio._plain(verdict.witness))}")
        if verdict.certificate is not None:
            dims = ", ".join(str(m.dim) for m in verdict.certificate.members)
            print(f"certificate: union of subspaces with dimensions [{dims}]")
        if verdict.diagnostics:
            print(f"diagnostics: {jsonio.dumps(jsonio._plain(verdict.diagnostics))}")
    return {VALID: EXIT_VALID, NOT_VALID: EXIT_NOT_VALID, UNKNOWN: EXIT_UNKNOWN}[verdict.status]


def cmd_compile(args) -> int:
    if args.source.endswith(".json"):
        program = _load_program(args.source)
        if not isinstance(program, SequentialProgram):
            print("error: normal form needs a sequential program", file=sys.stderr)
            return EXIT_ERROR
    else:
        with open(args.source, "r", encoding="utf-8") as fh:
            program = compile_qwhile(parse_qwhile(fh.read()))
    if args.normal_form:
        nf = bohm_jacopini(program)  # NotDeterministic for nondeterministic input
        payload = jsonio.normal_form_to_json(nf)
    else:
        payload = jsonio.program_to_json(program)
    text = jsonio.dumps(payload)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_VALID


def cmd_reach(args) -> int:
    program = _load_program(args.program)
    if not isinstance(program, SequentialProgram):
        print("error: reachability needs a sequential program", file=sys.stderr)
        return EXIT_ERROR
    result = reachability_superop(program, tolerance=args.tolerance)
    report = {
        "kraus_rank": result.diagnostics["kraus_rank"],
        "reach_trace": result.diagnostics["reach_trace"],
        "expected_steps": jsonio._plain(result.expected_steps),
        "almost_terminates": result.almost_terminates,
        "power_iteration_residual": result.diagnostics["power_iteration_residual"],
    }
    if args.json:
        print(jsonio.dumps(report))
    else:
        for key, value in report.items():
            print(f"{key}: {value}")
    return EXIT_VALID


def _budget():
    return int(os.environ.get("QTL_BUDGET", "4096"))


def cmd_simulate(args) -> int:
    program = _load_program(args.program)
    if isinstance(program, QuantumAutomaton):
        print("error: simulate needs a program, not an automaton", file=sys.stderr)
        return EXIT_ERROR
    atoms = {}
    if args.atoms:
        atoms = jsonio.atoms_from_json(_load_json(args.atoms), program)
    budget = _budget()
    if args.schedule == "enumerate":
        traces = [[initial_cq(program)]]
        for _ in range(args.steps):
            grown = []
            for trace in traces:
                for nxt in selector_successors(program, trace[-1], cap=budget):
                    grown.append(trace + [nxt])
                    if len(grown) > budget:
                        print("error: trace enumeration exceeded QTL_BUDGET", file=sys.stderr)
                        return EXIT_ERROR
            traces = grown
    else:
        word = [int(x) for x in args.schedule.split(",")] if args.schedule else []
        state = initial_cq(program)
        trace = [state]
        for k in range(args.steps):
            succ = selector_successors(program, state, cap=budget)
            pick = word[k] if k < len(word) else 0
            if pick >= len(succ):
                print(f"error: schedule index {pick} out of range at step {k}", file=sys.stderr)
                return EXIT_ERROR
            state = succ[pick]
            trace.append(state)
        traces = [trace]
    payload = []
    for t_idx, trace in enumerate(traces):
        steps = []
        for k, state in enumerate(trace):
            entry = {
                "step": k,
                "blocks": {
                    str(c): jsonio.mat_to_json(b) for c, b in sorted(state.blocks.items(), key=lambda kv: str(kv[0]))
                },
            }
            if atoms:
                emb = embed(state, program)
                entry["atom_probabilities"] = {
                    name: float((atom.subspace.projector @ emb).trace().re)
                    for name, atom in atoms.items()
                }
            steps.append(entry)
        payload.append({"trace": t_idx, "steps": steps})
    if args.json:
        print(jsonio.dumps(payload))
    else:
        for item in payload:
            print(f"trace {item['trace']}:")
            for entry in item["steps"]:
                print(f"  step {entry['step']}:")
                for c, b in entry["blocks"].items():
                    print(f"    {c}: {b}")
                if "atom_probabilities" in entry:
                    print(f"    atom probabilities: {entry['atom_probabilities']}")
    return EXIT_VALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtl",
        description="Verification of temporal properties of quantum programs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="decide a temporal formula", description=__doc__)
    p_check.add_argument("program", help="program / automaton JSON file")
    p_check.add_argument("--atoms", help="atom table JSON file")
    p_check.add_argument("-f", "--formula", required=True, help="formula text")
    p_check.add_argument("--tolerance", type=float, default=1e-9)
    p_check.add_argument("--period-bound", type=int, default=64, dest="period_bound")
    p_check.add_argument("--depth", type=int, default=12)
    p_check.add_argument("--json", action="store_true")
    p_check.set_defaults(func=cmd_check)

    p_compile = sub.add_parser("compile", help="compile .qw source to a program")
    p_compile.add_argument("source", help=".qw source (or program JSON with --normal-form)")
    p_compile.add_argument("-o", "--output", help="output path (default stdout)")
    p_compile.add_argument("--normal-form", action="store_true", dest="normal_form")
    p_compile.set_defaults(func=cmd_compile)

    p_reach = sub.add_parser("reach", help="reachability of the exit location")
    p_reach.add_argument("program")
    p_reach.add_argument("--tolerance", type=float, default=1e-9)
    p_reach.add_argument("--json", action="store_true")
    p_reach.set_defaults(func=cmd_reach)

    p_sim = sub.add_parser("simulate", help="exact step-by-step simulation")
    p_sim.add_argument("program")
    p_sim.add_argument("--steps", type=int, default=4)
    p_sim.add_argument("--schedule", default="", help="comma-separated successor picks, or 'enumerate'")
    p_sim.add_argument("--atoms")
    p_sim.add_argument("--json", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which collides with "unknown"
        return EXIT_VALID if exc.code in (0, None) else EXIT_ERROR
    if getattr(args, "tolerance", 1.0) <= 0:
        print("error: --tolerance must be positive", file=sys.stderr)
        return EXIT_ERROR
    if getattr(args, "period_bound", 1) < 1:
        print("error: --period-bound must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except QtlError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
