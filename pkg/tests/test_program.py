import random
from fractions import Fraction

import pytest

from qtl.errors import (
    NonClassicalCoherence,
    NotDeterministic,
    NoExitLocation,
    SelectorExplosion,
)
from qtl.linalg import CRat, Mat, kron
from qtl.superop import Measurement, SuperOp
from qtl.program import (
    CQState,
    ConcurrentProcess,
    ConcurrentProgram,
    LocationAction,
    SequentialProgram,
    check_terminates,
    embed,
    extract,
    initial_cq,
    simulate_deterministic,
    step_superop,
    successors,
    to_automaton,
)
from qtl.qwhile import compile_source

from helpers import (
    EXAMPLE_LOOP_SRC,
    KET_MINUS_DENSITY,
    PAULI_X,
    random_deterministic_program,
)


@pytest.fixture(scope="module")
def example_loop():
    return compile_source(EXAMPLE_LOOP_SRC)


HALF = CRat(Fraction(1, 2))
KET0 = Mat.from_rows([[1, 0], [0, 0]])
KET1 = Mat.from_rows([[0, 0], [0, 1]])


class TestSuccessors:
    def test_measure_hadamard_loop_trajectory(self, example_loop):
        # sigma_1 = |-><-| at the guard; one step gives the split state,
        # another returns half the mass to the guard as |-><-| again
        sigma1 = CQState(2, {"l2": KET_MINUS_DENSITY})
        (sigma2,) = successors(example_loop, sigma1)
        assert sigma2 == CQState(2, {"l4": KET0 * HALF, "l3": KET1 * HALF})
        (sigma3,) = successors(example_loop, sigma2)
        assert sigma3 == CQState(2, {"l4": KET0 * HALF, "l2": KET_MINUS_DENSITY * HALF})

    def test_selector_count(self):
        meas = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
        act = {
            "a": LocationAction(SuperOp.identity(2), meas, {0: ("a", "b"), 1: ("a",)}),
            "b": LocationAction(SuperOp.identity(2), meas, {0: ("b",), 1: ("b",)}),
        }
        prog = SequentialProgram(2, ("a", "b"), act, KET_MINUS_DENSITY, "a")
        succ = successors(prog, initial_cq(prog))
        assert len(succ) == 2

    def test_trace_preserved_and_psd(self):
        rng = random.Random(0)
        for _ in range(10):
            prog = random_deterministic_program(rng, 2, 3)
            state = initial_cq(prog)
            for _ in range(4):
                (state,) = successors(prog, state)
                assert state.total_trace() == 1
                revalidated = CQState(2, dict(state.blocks))  # validates PSD blocks
                assert revalidated == state


class TestStepSuperop:
    def test_matches_block_trajectory(self, example_loop):
        e = step_superop(example_loop)
        sigma0 = embed(initial_cq(example_loop), example_loop)
        state = sigma0
        trajectory = simulate_deterministic(example_loop, 4)
        for k in range(1, 5):
            state = e.apply(state)
            assert state == embed(trajectory[k], example_loop)

    def test_exit_trace_sequence(self, example_loop):
        trajectory = simulate_deterministic(example_loop, 5)
        traces = [s.trace_of("l4") for s in trajectory]
        assert traces == [0, 0, Fraction(1, 2), Fraction(1, 2), Fraction(3, 4), Fraction(3, 4)]
        assert all(a <= b for a, b in zip(traces, traces[1:]))

    def test_one_location_identity_program(self):
        act = {
            "only": LocationAction(
                SuperOp.identity(2), Measurement.trivial(2), {0: ("only",)}
            )
        }
        prog = SequentialProgram(2, ("only",), act, KET_MINUS_DENSITY, "only")
        assert step_superop(prog).matrix_rep() == Mat.eye(4)

    def test_successors_agree_with_step_channel(self):
        rng = random.Random(1)
        for _ in range(100):
            dim = rng.choice([2, 3])
            prog = random_deterministic_program(rng, dim, rng.randint(1, 3))
            e = step_superop(prog)
            state = initial_cq(prog)
            for _ in range(2):
                (nxt,) = successors(prog, state)
                assert e.apply(embed(state, prog)) == embed(nxt, prog)
                state = nxt

    def test_step_channel_is_trace_preserving_exactly(self):
        rng = random.Random(2)
        prog = random_deterministic_program(rng, 2, 3)
        assert step_superop(prog).is_trace_preserving()

    def test_exit_monotonicity_along_trajectories(self):
        rng = random.Random(3)
        for _ in range(5):
            prog = random_deterministic_program(rng, 2, 3)
            trajectory = simulate_deterministic(prog, 64)
            traces = [s.trace_of("exit") for s in trajectory]
            assert all(a <= b for a, b in zip(traces, traces[1:]))

    def test_nondeterministic_rejected(self):
        meas = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
        act = {
            "a": LocationAction(SuperOp.identity(2), meas, {0: ("a", "b"), 1: ("a",)}),
            "b": LocationAction(SuperOp.identity(2), meas, {0: ("b",), 1: ("b",)}),
        }
        prog = SequentialProgram(2, ("a", "b"), act, KET_MINUS_DENSITY, "a")
        with pytest.raises(NotDeterministic):
            step_superop(prog)


class TestEmbedding:
    def test_roundtrip(self, example_loop):
        state = CQState(2, {"l4": KET0 * HALF, "l3": KET1 * HALF})
        assert extract(embed(state, example_loop), example_loop) == state

    def test_block_placement(self, example_loop):
        rho = Mat.from_rows([[1, 0], [0, 0]])
        state = CQState(2, {"l1": rho})
        emb = embed(state, example_loop)
        assert emb == kron(rho, Mat.unit(4, 0, 0))

    def test_cross_block_coherence_rejected(self, example_loop):
        bad = kron(KET0, Mat.unit(4, 1, 2))
        with pytest.raises(NonClassicalCoherence):
            extract(Mat.eye(8) * CRat(Fraction(1, 8)) + bad - bad.dagger() @ bad, example_loop)


class TestToAutomaton:
    def test_deterministic_single_action(self, example_loop):
        aut = to_automaton(example_loop)
        assert len(aut.actions) == 1
        (action,) = aut.actions.values()
        assert action.matrix_rep() == step_superop(example_loop).matrix_rep()

    def test_two_binary_choices_give_four_actions(self):
        meas = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
        act = {
            "a": LocationAction(SuperOp.identity(2), meas, {0: ("a", "b"), 1: ("a", "b")}),
            "b": LocationAction(SuperOp.identity(2), meas, {0: ("b",), 1: ("b",)}),
        }
        prog = SequentialProgram(2, ("a", "b"), act, KET_MINUS_DENSITY, "a")
        aut = to_automaton(prog)
        assert len(aut.actions) == 4
        for action in aut.actions.values():
            assert action.is_trace_preserving()

    def test_action_count_matches_product(self):
        rng = random.Random(4)
        meas = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
        labels = ("a", "b", "c")
        act = {}
        expected = 1
        for loc in labels:
            nxt = {}
            for j in range(2):
                k = rng.randint(1, 2)
                nxt[j] = tuple(rng.sample(labels, k))
                expected *= k
            act[loc] = LocationAction(SuperOp.identity(2), meas, nxt)
        prog = SequentialProgram(2, labels, act, KET_MINUS_DENSITY, "a")
        assert len(to_automaton(prog).actions) == expected

    def test_selector_cap(self):
        meas = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
        act = {
            "a": LocationAction(SuperOp.identity(2), meas, {0: ("a", "b"), 1: ("a", "b")}),
            "b": LocationAction(SuperOp.identity(2), meas, {0: ("a", "b"), 1: ("a", "b")}),
        }
        prog = SequentialProgram(2, ("a", "b"), act, KET_MINUS_DENSITY, "a")
        with pytest.raises(SelectorExplosion):
            to_automaton(prog, cap=3)


class TestTermination:
    def test_example_loop_is_almost_candidate(self, example_loop):
        result = check_terminates(example_loop)
        assert result.kind == "almost_candidate"
        assert result.final_exit_trace < 1

    def test_instant_exit(self):
        prog = compile_source("qubits 1;\nskip")
        result = check_terminates(prog)
        assert result.kind == "terminates" and result.step == 1

    def test_measure_to_exit_program(self):
        src = """qubits 1;
measurement M = {[[1, 0], [0, 0]], [[0, 0], [0, 1]]};
input [[1, 0], [0, 0]];
while meas M(q0) == 1 { skip }
"""
        prog = compile_source(src)
        result = check_terminates(prog)
        assert result.kind == "terminates" and result.step == 1

    def test_never_reaching_exit(self):
        # the loop never measures outcome 0, so no mass ever exits
        src = """qubits 1;
unitary X = [[0, 1], [1, 0]];
measurement M = {[[1, 0], [0, 0]], [[0, 0], [0, 1]]};
input [[0, 0], [0, 1]];
while meas M(q0) == 1 { apply X to q0; apply X to q0 }
"""
        prog = compile_source(src)
        assert check_terminates(prog).kind == "no"

    def test_requires_exit_location(self):
        act = {
            "only": LocationAction(
                SuperOp.identity(2), Measurement.trivial(2), {0: ("only",)}
            )
        }
        prog = SequentialProgram(2, ("only",), act, KET_MINUS_DENSITY, "only")
        with pytest.raises(NoExitLocation):
            check_terminates(prog)


class TestConcurrent:
    def _two_process_program(self, deterministic=True):
        meas = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
        x_conj = SuperOp.from_unitary(PAULI_X)
        # process 1 applies X and hands control to process 2 and back
        p1 = ConcurrentProcess(
            ("p", "q"),
            {
                "p": LocationAction(x_conj, meas, {0: (("q", 2),), 1: (("q", 2),)}),
                "q": LocationAction(SuperOp.identity(2), meas, {0: (("q", 2),), 1: (("q", 2),)}),
            },
        )
        targets0 = (("s", 1),) if deterministic else (("s", 1), ("t", 2))
        p2 = ConcurrentProcess(
            ("s", "t"),
            {
                "s": LocationAction(SuperOp.identity(2), meas, {0: targets0, 1: (("t", 1),)}),
                "t": LocationAction(SuperOp.identity(2), meas, {0: (("t", 2),), 1: (("t", 2),)}),
            },
        )
        return ConcurrentProgram(
            dim=2,
            processes=(p1, p2),
            initial_state=Mat.from_rows([[1, 0], [0, 0]]),
            initial_locations=("p", "s"),
            initial_scheduler=1,
        )

    def test_deterministic_step(self):
        prog = self._two_process_program()
        state = initial_cq(prog)
        (nxt,) = successors(prog, state)
        # X flipped the data and process 1 moved p -> q, scheduler -> 2
        assert nxt == CQState(2, {(("q", "s"), 2): Mat.from_rows([[0, 0], [0, 1]])})

    def test_embedded_dimension(self):
        prog = self._two_process_program()
        aut = to_automaton(prog)
        assert aut.dim == 2 * 2 * 2 * 2  # data x |L1| x |L2| x schedulers
        for action in aut.actions.values():
            assert action.is_trace_preserving()

    def test_nondeterministic_branching(self):
        prog = self._two_process_program(deterministic=False)
        assert not prog.deterministic
        aut = to_automaton(prog)
        assert len(aut.actions) == 2

    def test_concurrent_embed_roundtrip(self):
        prog = self._two_process_program()
        state = initial_cq(prog)
        for _ in range(3):
            (state,) = successors(prog, state)
        assert extract(embed(state, prog), prog) == state
