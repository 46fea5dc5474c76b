"""JSON schemas for matrices, subspaces, channels, programs and verdicts.

Numbers are exact: rationals are encoded as "p/q" strings (or bare
integers), complex entries as two-element arrays [re, im] of rationals, and
matrices as row-major nested arrays.  Real entries may be given directly as
rational literals.

Program schema (sequential):

    {"dimension": 2,
     "locations": ["l1", "l2"],
     "initial_location": "l1",
     "exit_location": "l2",
     "initial_state": [[...], ...],
     "act": {"l1": {"kraus": [matrix, ...],
                    "measurement": [matrix, ...],
                    "next": {"0": ["l2"], "1": ["l1"]}}, ...}}

The concurrent variant replaces locations/act by "processes" (each with its
own locations, act and "initial_location") plus "initial_scheduler"; next
entries become ["location", scheduler].  An automaton is {"dimension",
"actions": {name: {"kraus": [...]}}, "initial_state"}.
"""

from __future__ import annotations

import json

from .errors import QtlError
from .linalg import CRat, Mat, format_rational, parse_rational
from .subspace import Subspace, SubspaceUnion
from .superop import Measurement, SuperOp
from .program import (
    ConcurrentProcess,
    ConcurrentProgram,
    LocationAction,
    QuantumAutomaton,
    SequentialProgram,
)
from .formula import Atom, atom_from_blocks


def scalar_to_json(c: CRat):
    if c.im == 0:
        return format_rational(c.re)
    return [format_rational(c.re), format_rational(c.im)]


def scalar_from_json(obj) -> CRat:
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2:
            raise QtlError(f"complex entry must be [re, im], got {obj!r}")
        return CRat(parse_rational(obj[0]), parse_rational(obj[1]))
    return CRat(parse_rational(obj))


def mat_to_json(m: Mat):
    return [[scalar_to_json(m.entry(i, j)) for j in range(m.cols)] for i in range(m.rows)]


def mat_from_json(obj) -> Mat:
    return Mat.from_rows([[scalar_from_json(e) for e in row] for row in obj])


def subspace_to_json(s: Subspace):
    return {
        "dim": s.ambient_dim,
        "basis": [
            [scalar_to_json(s.basis.entry(i, j)) for i in range(s.ambient_dim)]
            for j in range(s.basis.cols)
        ],
    }


def subspace_from_json(obj) -> Subspace:
    dim = obj["dim"]
    columns = [[scalar_from_json(e) for e in col] for col in obj.get("basis", [])]
    return Subspace.from_vectors(dim, columns)


def union_to_json(u: SubspaceUnion):
    return [subspace_to_json(m) for m in u.members]


def union_from_json(obj) -> SubspaceUnion:
    members = [subspace_from_json(s) for s in obj]
    if not members:
        raise QtlError("a union needs at least one subspace")
    return SubspaceUnion(members[0].ambient_dim, members)


def channel_to_json(e: SuperOp):
    return {"kraus": [mat_to_json(k) for k in e.kraus]}


def channel_from_json(obj, validate="exact") -> SuperOp:
    return SuperOp([mat_from_json(k) for k in obj["kraus"]], validate=validate)


def measurement_to_json(m: Measurement):
    return {"operators": [mat_to_json(op) for op in m.operators]}


def measurement_from_json(obj) -> Measurement:
    ops = obj["operators"] if isinstance(obj, dict) else obj
    return Measurement([mat_from_json(op) for op in ops])


# ----------------------------------------------------------------------
# programs and automata


def _act_to_json(a: LocationAction, concurrent: bool):
    def target(t):
        return [t[0], t[1]] if concurrent else t

    return {
        "kraus": [mat_to_json(k) for k in a.channel.kraus],
        "measurement": [mat_to_json(op) for op in a.measurement.operators],
        "next": {str(j): [target(t) for t in targets] for j, targets in a.next.items()},
    }


def _act_from_json(obj, concurrent: bool) -> LocationAction:
    channel = SuperOp([mat_from_json(k) for k in obj["kraus"]], validate=None)
    measurement = Measurement([mat_from_json(op) for op in obj["measurement"]], validate=False)
    nxt = {}
    for j, targets in obj["next"].items():
        parsed = []
        for t in targets:
            if concurrent:
                parsed.append((t[0], int(t[1])))
            else:
                parsed.append(t)
        nxt[int(j)] = tuple(parsed)
    return LocationAction(channel, measurement, nxt)


def program_to_json(p):
    if isinstance(p, SequentialProgram):
        return {
            "dimension": p.dim,
            "locations": list(p.locations),
            "initial_location": p.initial_location,
            "exit_location": p.exit_location,
            "initial_state": mat_to_json(p.initial_state),
            "act": {loc: _act_to_json(p.act[loc], False) for loc in p.locations},
        }
    if isinstance(p, ConcurrentProgram):
        return {
            "dimension": p.dim,
            "processes": [
                {
                    "locations": list(proc.locations),
                    "initial_location": p.initial_locations[k],
                    "act": {loc: _act_to_json(proc.act[loc], True) for loc in proc.locations},
                }
                for k, proc in enumerate(p.processes)
            ],
            "initial_scheduler": p.initial_scheduler,
            "initial_state": mat_to_json(p.initial_state),
        }
    if isinstance(p, QuantumAutomaton):
        return {
            "dimension": p.dim,
            "actions": {name: channel_to_json(e) for name, e in p.actions.items()},
            "initial_state": mat_to_json(p.initial_state),
        }
    raise TypeError(f"cannot serialize {p!r}")


def program_from_json(obj):
    """Detects the model by shape: actions -> automaton, processes ->
    concurrent program, otherwise sequential program."""
    if "actions" in obj:
        return QuantumAutomaton(
            obj["dimension"],
            {name: channel_from_json(c) for name, c in obj["actions"].items()},
            mat_from_json(obj["initial_state"]),
        )
    if "processes" in obj:
        processes = []
        initial_locations = []
        for proc in obj["processes"]:
            act = {loc: _act_from_json(a, True) for loc, a in proc["act"].items()}
            processes.append(ConcurrentProcess(proc["locations"], act))
            initial_locations.append(proc["initial_location"])
        return ConcurrentProgram(
            dim=obj["dimension"],
            processes=processes,
            initial_state=mat_from_json(obj["initial_state"]),
            initial_locations=initial_locations,
            initial_scheduler=obj["initial_scheduler"],
        )
    act = {loc: _act_from_json(a, False) for loc, a in obj["act"].items()}
    return SequentialProgram(
        dim=obj["dimension"],
        locations=obj["locations"],
        act=act,
        initial_state=mat_from_json(obj["initial_state"]),
        initial_location=obj["initial_location"],
        exit_location=obj.get("exit_location"),
    )


# ----------------------------------------------------------------------
# atoms


def atoms_to_json(atoms: dict, program=None):
    out = []
    for atom in atoms.values():
        out.append({"name": atom.name, "subspace": subspace_to_json(atom.subspace)})
    return out


def atoms_from_json(obj, program) -> dict:
    """Atom table from a list of {"name", "blocks": {label: subspace}} or
    {"name", "subspace": {...}} entries; blocks are per-configuration."""
    atoms = {}
    for entry in obj:
        name = entry["name"]
        if "subspace" in entry:
            atoms[name] = Atom(name, subspace_from_json(entry["subspace"]))
        else:
            if not hasattr(program, "configs"):
                raise QtlError(
                    f"atom {name!r} uses per-location blocks, which need a program; "
                    "automata take a raw 'subspace' instead"
                )
            blocks = {
                label: subspace_from_json(sub) for label, sub in entry["blocks"].items()
            }
            atoms[name] = atom_from_blocks(name, blocks, program)
    return atoms


# ----------------------------------------------------------------------
# normal form and verdicts


def normal_form_to_json(nf):
    return {
        "body_channel": channel_to_json(nf.body_channel),
        "m0": mat_to_json(nf.m0),
        "m1": mat_to_json(nf.m1),
    }


def verdict_to_json(v):
    out = {"status": v.status, "diagnostics": _plain(v.diagnostics)}
    if v.witness is not None:
        out["witness"] = _plain(v.witness)
    if v.certificate is not None:
        out["certificate"] = union_to_json(v.certificate)
    return out


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and value == float("inf"):
        return "inf"
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


def dumps(obj, **kwargs) -> str:
    return json.dumps(obj, indent=2, **kwargs)
