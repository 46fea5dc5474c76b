import random
from fractions import Fraction

import pytest

from qtl.errors import ArityMismatch, NotDeterministic, ParseError, UndeclaredOperator
from qtl.linalg import CRat, Mat
from qtl.program import (
    embed,
    initial_cq,
    simulate_deterministic,
)
from qtl.qwhile import (
    Apply,
    Case,
    Init,
    Seq,
    Skip,
    While,
    bohm_jacopini,
    compile_qwhile,
    compile_source,
    denote_bounded,
    denote_steps,
    lift_operator,
    parse,
    pretty_print,
    steps_for_depth,
)

from helpers import EXAMPLE_LOOP_SRC, KET_MINUS_DENSITY, random_qwhile_source

PRE = """qubits 1;
unitary H = sqrt(1/2) * [[1, 1], [1, -1]];
unitary X = [[0, 1], [1, 0]];
measurement M = {[[1, 0], [0, 0]], [[0, 0], [0, 1]]};
"""

KET0 = Mat.from_rows([[1, 0], [0, 0]])
KET1 = Mat.from_rows([[0, 0], [0, 1]])


class TestParser:
    def test_skip(self):
        assert parse("qubits 1;\nskip").body == Skip()

    def test_two_statement_program(self):
        prog = parse(PRE + "q0 := |0>; apply H to q0")
        assert prog.body == Seq(Init(0), Apply("H", (0,)))

    def test_while_roundtrip(self):
        prog = parse(PRE + "while meas M(q0) == 1 { apply H to q0 }")
        assert prog.body == While("M", (0,), Apply("H", (0,)))
        assert parse(pretty_print(prog)).body == prog.body

    def test_if_branches(self):
        prog = parse(PRE + "if meas M(q0) { 0 -> skip; 1 -> apply X to q0; }")
        assert prog.body == Case("M", (0,), (Skip(), Apply("X", (0,))))

    def test_complex_entries(self):
        prog = parse(
            "qubits 1;\nunitary S = [[1, 0], [0, i]];\napply S to q0"
        )
        mat, scale = prog.unitaries["S"]
        assert scale == 1 and mat.entry(1, 1) == CRat(0, 1)
        prog2 = parse(
            "qubits 1;\nunitary W = sqrt(1/2) * [[1, -i], [-i, 1]];\napply W to q0"
        )
        assert prog2.unitaries["W"][1] == Fraction(1, 2)

    def test_random_roundtrip(self):
        rng = random.Random(0)
        for _ in range(25):
            src = random_qwhile_source(rng)
            prog = parse(src)
            assert parse(pretty_print(prog)).body == prog.body

    def test_errors(self):
        with pytest.raises(ParseError):
            parse("qubits 1;\nskip skip")
        with pytest.raises(UndeclaredOperator):
            parse("qubits 1;\napply H to q0")
        with pytest.raises(UndeclaredOperator):
            parse("qubits 1;\nwhile meas M(q0) == 1 { skip }")
        with pytest.raises(ArityMismatch):
            parse(PRE + "apply H to q0, q0")
        with pytest.raises(ParseError):
            parse(PRE + "apply H to q5")
        with pytest.raises(ParseError):
            # not unitary
            parse("qubits 1;\nunitary B = [[1, 1], [0, 1]];\napply B to q0")
        with pytest.raises(ArityMismatch):
            # missing branch
            parse(PRE + "if meas M(q0) { 0 -> skip; }")
        with pytest.raises(ParseError):
            # measurement operators must be complete
            parse("qubits 1;\nmeasurement M = {[[1, 0], [0, 0]]};\nskip")

    def test_line_column_reporting(self):
        with pytest.raises(ParseError) as err:
            parse("qubits 1;\nskip;\napply")
        assert err.value.line == 3


class TestLift:
    def test_lift_on_two_qubits(self):
        x = Mat.from_rows([[0, 1], [1, 0]])
        # qubit 0 is the most significant bit
        lifted = lift_operator(x, (0,), 2)
        expected = Mat.zeros(4)
        for i, j in [(0, 2), (2, 0), (1, 3), (3, 1)]:
            expected = expected + Mat.unit(4, i, j)
        assert lifted == expected

    def test_lift_order_matters(self):
        cnot = Mat.from_rows(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
        )
        forward = lift_operator(cnot, (0, 1), 2)
        reversed_ = lift_operator(cnot, (1, 0), 2)
        assert forward == cnot
        assert forward != reversed_


class TestDenotation:
    def test_skip(self):
        prog = parse("qubits 1;\nskip")
        out, exhausted = denote_bounded(prog, KET_MINUS_DENSITY, 3)
        assert out == KET_MINUS_DENSITY and not exhausted

    def test_init_resets(self):
        prog = parse("qubits 1;\nq0 := |0>")
        out, _ = denote_bounded(prog, KET1, 3)
        assert out == KET0

    def test_loop_mass_by_depth(self):
        prog = parse(PRE + "while meas M(q0) == 1 { apply H to q0 }")
        for n in range(1, 6):
            out, exhausted = denote_bounded(prog, KET_MINUS_DENSITY, n)
            assert out.trace() == CRat(1 - Fraction(1, 2**n))
            assert exhausted

    def test_monotone_in_depth(self):
        rng = random.Random(1)
        from qtl.linalg import is_psd

        for _ in range(10):
            prog = parse(random_qwhile_source(rng))
            shallow, _ = denote_bounded(prog, KET0, 2)
            deep, _ = denote_bounded(prog, KET0, 4)
            assert is_psd(deep - shallow)


class TestCompile:
    def test_skip_two_locations(self):
        prog = compile_source("qubits 1;\nskip")
        assert len(prog.locations) == 2
        assert prog.exit_location == "l2"
        state = simulate_deterministic(prog, 1)[1]
        assert state.trace_of("l2") == 1

    def test_example_loop_locations(self):
        prog = compile_source(EXAMPLE_LOOP_SRC)
        assert prog.locations == ("l1", "l2", "l3", "l4")
        assert prog.exit_location == "l4"
        # guard routes 0 to the exit and 1 to the body
        assert prog.act["l2"].next[0] == ("l4",)
        assert prog.act["l2"].next[1] == ("l3",)
        assert prog.act["l3"].next[0] == ("l2",)

    def test_if_with_n_outcomes_locations(self):
        src = """qubits 1;
measurement T = {[[1, 0], [0, 0]], [[0, 0], [0, 1]]};
if meas T(q0) { 0 -> skip; 1 -> skip; }
"""
        prog = compile_source(src)
        # guard + two single-statement branches + exit
        assert len(prog.locations) == 4

    def test_loop_free_semantics_match(self):
        rng = random.Random(2)
        count = 0
        while count < 10:
            src = random_qwhile_source(rng, max_loops=0)
            ast = parse(src)
            prog = compile_qwhile(ast)
            steps = len(prog.locations)
            final = simulate_deterministic(prog, steps)[-1]
            expected, exhausted = denote_bounded(ast, prog.initial_state, 1)
            assert not exhausted
            assert final.trace_of(prog.exit_location) == 1
            assert final.block(prog.exit_location) == expected
            count += 1

    def test_denote_steps_equals_exit_blocks_everywhere(self):
        rng = random.Random(3)
        for _ in range(8):
            ast = parse(random_qwhile_source(rng))
            prog = compile_qwhile(ast)
            trajectory = simulate_deterministic(prog, 20)
            for k in range(21):
                assert trajectory[k].block(prog.exit_location) == denote_steps(
                    ast, prog.initial_state, k
                )

    def test_steps_for_depth_alignment_single_loop(self):
        ast = parse(EXAMPLE_LOOP_SRC)
        prog = compile_qwhile(ast)
        trajectory = simulate_deterministic(prog, steps_for_depth(ast, 6))
        for n in range(1, 7):
            k = steps_for_depth(ast, n)
            denoted, _ = denote_bounded(ast, prog.initial_state, n)
            assert trajectory[k].block(prog.exit_location) == denoted

    def test_steps_for_depth_sandwich_nested(self):
        rng = random.Random(4)
        from qtl.linalg import is_psd

        for _ in range(6):
            ast = parse(random_qwhile_source(rng, max_loops=2, max_len=2))
            prog = compile_qwhile(ast)
            for n in (1, 2, 3):
                k = steps_for_depth(ast, n)
                denoted, _ = denote_bounded(ast, prog.initial_state, n)
                exit_k = simulate_deterministic(prog, k)[-1].block(prog.exit_location)
                assert is_psd(exit_k - denoted)
                wider, _ = denote_bounded(ast, prog.initial_state, k + 1)
                assert is_psd(wider - exit_k)


class TestTwoQubits:
    PRE2 = """qubits 2;
unitary H = sqrt(1/2) * [[1, 1], [1, -1]];
unitary CX = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]];
measurement M = {[[1, 0], [0, 0]], [[0, 0], [0, 1]]};
"""

    def test_bell_preparation(self):
        prog = parse(self.PRE2 + "apply H to q0; apply CX to q0, q1")
        out, _ = denote_bounded(prog, Mat.unit(4, 0, 0), 1)
        half = CRat(Fraction(1, 2))
        bell = Mat.zeros(4)
        for i, j in [(0, 0), (0, 3), (3, 0), (3, 3)]:
            bell = bell + Mat.unit(4, i, j)
        assert out == bell * half

    def test_single_qubit_measurement_on_register(self):
        # measuring q1 of the Bell pair leaves a classical mixture
        src = self.PRE2 + (
            "apply H to q0; apply CX to q0, q1; "
            "if meas M(q1) { 0 -> skip; 1 -> skip; }"
        )
        prog = parse(src)
        out, _ = denote_bounded(prog, Mat.unit(4, 0, 0), 1)
        half = CRat(Fraction(1, 2))
        assert out == Mat.unit(4, 0, 0) * half + Mat.unit(4, 3, 3) * half

    def test_compiled_program_agrees(self):
        src = self.PRE2 + (
            "apply H to q0; apply CX to q0, q1; "
            "while meas M(q0) == 1 { apply H to q0 }"
        )
        ast = parse(src)
        prog = compile_qwhile(ast)
        assert prog.dim == 4
        trajectory = simulate_deterministic(prog, 12)
        for k in (0, 3, 6, 9, 12):
            assert trajectory[k].block(prog.exit_location) == denote_steps(
                ast, prog.initial_state, k
            )


class TestNormalForm:
    def test_example_loop_shape(self):
        prog = compile_source(EXAMPLE_LOOP_SRC)
        nf = bohm_jacopini(prog)
        assert nf.m0.rows == 8
        assert nf.m0 + nf.m1 == Mat.eye(8)
        assert nf.m0 @ nf.m0 == nf.m0
        assert nf.m1 @ nf.m1 == nf.m1

    def test_exit_blocks_match_original(self):
        prog = compile_source(EXAMPLE_LOOP_SRC)
        nf = bohm_jacopini(prog)
        sigma0 = embed(initial_cq(prog), prog)
        trajectory = simulate_deterministic(prog, 16)
        series = nf.exit_series(sigma0, 16)
        for k in range(17):
            original = nf.m0 @ embed(trajectory[k], prog) @ nf.m0
            assert series[k] == original

    def test_instant_exit_program(self):
        prog = compile_source("qubits 1;\nskip")
        nf = bohm_jacopini(prog)
        sigma0 = embed(initial_cq(prog), prog)
        assert nf.exit_after(sigma0, 0).is_zero()
        assert nf.exit_after(sigma0, 1).trace() == CRat(1)

    def test_normal_form_idempotent_on_exit_blocks(self):
        # re-reading the normal form as "one while" does not change the exit mass
        prog = compile_source(EXAMPLE_LOOP_SRC)
        nf = bohm_jacopini(prog)
        sigma0 = embed(initial_cq(prog), prog)
        rep = nf.body_channel.matrix_rep()
        from qtl.linalg import kron as _kron
        from qtl.superop import unvec, vec

        loop_rep = rep @ _kron(nf.m1, nf.m1)
        collect = _kron(nf.m0, nf.m0)
        acc = collect @ vec(sigma0)
        v = vec(sigma0)
        for k in range(12):
            v = loop_rep @ v
            acc = acc + collect @ v
            assert unvec(acc, 8) == nf.exit_after(sigma0, k + 1)

    def test_requires_determinism(self):
        from qtl.program import LocationAction, SequentialProgram
        from qtl.superop import Measurement, SuperOp

        meas = Measurement([Mat.unit(2, 0, 0), Mat.unit(2, 1, 1)])
        act = {
            "a": LocationAction(SuperOp.identity(2), meas, {0: ("a", "e"), 1: ("a",)}),
            "e": LocationAction(SuperOp.identity(2), Measurement.trivial(2, 2), {0: ("e",), 1: ("e",)}),
        }
        prog = SequentialProgram(2, ("a", "e"), act, KET0, "a", "e")
        with pytest.raises(NotDeterministic):
            bohm_jacopini(prog)
