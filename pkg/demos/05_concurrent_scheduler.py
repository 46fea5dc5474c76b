# Two processes sharing one qubit
# --------------------------------
# A concurrent program keeps one location register per process plus a
# scheduler register.  Each step, the scheduled process applies its channel
# and measurement to the shared data register; the measurement outcome picks
# the next location and the next scheduled process, possibly among several
# choices.  All analyses run on the embedding into one big sequential space.

from qtl import (
    ConcurrentProcess,
    ConcurrentProgram,
    LocationAction,
    Mat,
    Measurement,
    Subspace,
    SuperOp,
    initial_cq,
    successors,
    to_automaton,
)
from qtl.checker import check_invariance
from qtl.formula import atom_from_blocks
from qtl.subspace import SubspaceUnion

basis = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
x_conj = SuperOp.from_unitary(Mat.from_rows([[0, 1], [1, 0]]))
idle = SuperOp.identity(2)

# Process 1 flips the qubit, then hands control to process 2.
flipper = ConcurrentProcess(
    ("flip", "done"),
    {
        "flip": LocationAction(x_conj, basis, {0: (("done", 2),), 1: (("done", 2),)}),
        "done": LocationAction(idle, basis, {0: (("done", 2),), 1: (("done", 2),)}),
    },
)

# Process 2 measures: on outcome 0 it may keep control or return it -- a
# genuinely nondeterministic scheduler choice.
watcher = ConcurrentProcess(
    ("watch",),
    {
        "watch": LocationAction(
            idle, basis, {0: (("watch", 2), ("watch", 1)), 1: (("watch", 1),)}
        )
    },
)

program = ConcurrentProgram(
    dim=2,
    processes=(flipper, watcher),
    initial_state=Mat.unit(2, 0, 0),
    initial_locations=("flip", "watch"),
    initial_scheduler=1,
)

state = initial_cq(program)
print("initial configuration:", list(state.blocks))
for step in range(3):
    branches = successors(program, state)
    print(f"step {step + 1}: {len(branches)} successor state(s)")
    state = branches[0]
    for config, block in sorted(state.blocks.items(), key=lambda kv: repr(kv[0])):
        print("   ", config, "trace", block.trace())

automaton = to_automaton(program)
print("\nautomaton:", automaton)

# "The data register always stays a basis state" is an invariance of the
# union span|0> OR span|1>, lifted blockwise to every configuration.
span0 = Subspace.from_vectors(2, [[1, 0]])
span1 = Subspace.from_vectors(2, [[0, 1]])
blocks0 = {config: span0 for config in program.configs()}
blocks1 = {config: span1 for config in program.configs()}
atom0 = atom_from_blocks("all0", blocks0, program)
atom1 = atom_from_blocks("all1", blocks1, program)
u = SubspaceUnion(automaton.dim, [atom0.subspace, atom1.subspace])
verdict = check_invariance(automaton, u)
print("always a computational basis state:", verdict.status)
