"""Shared fixtures and exact random-instance generators for the test suite.

Channels are generated exactly trace preserving: signed-phase permutations,
rational rotations (Pythagorean), projective measurement channels, resets,
square-weight mixtures and compositions thereof.  The "finite order" subset
restricts to constructions whose peripheral eigenvalues are roots of unity,
which the period-detection paths of the checker can certify.
"""

from fractions import Fraction

from qtl.linalg import CRat, Mat
from qtl.subspace import Subspace, SubspaceUnion
from qtl.superop import Measurement, SuperOp
from qtl.program import LocationAction, QuantumAutomaton, SequentialProgram

EXAMPLE_LOOP_SRC = """
qubits 1;
unitary H = sqrt(1/2) * [[1, 1], [1, -1]];
measurement M = {[[1, 0], [0, 0]], [[0, 0], [0, 1]]};
input [[1/2, -1/2], [-1/2, 1/2]];
skip;
while meas M(q0) == 1 { apply H to q0 }
"""

KET_MINUS_DENSITY = Mat.from_rows([["1/2", "-1/2"], ["-1/2", "1/2"]])
KET_PLUS_DENSITY = Mat.from_rows([["1/2", "1/2"], ["1/2", "1/2"]])

PAULI_X = Mat.from_rows([[0, 1], [1, 0]])
PAULI_Z = Mat.from_rows([[1, 0], [0, -1]])
PAULI_Y = Mat.from_rows([[0, (0, -1)], [(0, 1), 0]])
HADAMARD_DIRECTION = Mat.from_rows([[1, 1], [1, -1]])  # sqrt(1/2) * this


def span(*vectors):
    dim = len(vectors[0])
    return Subspace.from_vectors(dim, [list(v) for v in vectors])


def union(*subspaces):
    return SubspaceUnion(subspaces[0].ambient_dim, list(subspaces))


def random_scalar(rng, bound=3):
    return CRat(
        Fraction(rng.randint(-bound, bound), rng.randint(1, bound)),
        Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) if rng.random() < 0.4 else 0,
    )


def random_matrix(rng, rows, cols=None, bound=3):
    cols = rows if cols is None else cols
    return Mat.from_rows([[random_scalar(rng, bound) for _ in range(cols)] for _ in range(rows)])


def random_density(rng, n):
    while True:
        b = random_matrix(rng, n)
        rho = b.dagger() @ b
        tr = rho.trace().re
        if tr != 0:
            return rho * CRat(Fraction(1, 1) / tr)


def random_vector(rng, n, bound=3):
    while True:
        v = Mat.column([random_scalar(rng, bound) for _ in range(n)])
        if not v.is_zero():
            return v


def random_subspace(rng, n, dim=None):
    if dim is None:
        dim = rng.randint(0, n)
    if dim == 0:
        return Subspace.zero(n)
    return Subspace.from_vectors(n, [random_vector(rng, n) for _ in range(dim + rng.randint(0, 1))])


_PHASES = [CRat(1), CRat(-1), CRat(0, 1), CRat(0, -1)]


def random_phase_permutation(rng, n):
    """A unitary with one unit-phase entry per row: exactly unitary, finite order."""
    perm = list(range(n))
    rng.shuffle(perm)
    rows = [[CRat(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][perm[i]] = rng.choice(_PHASES)
    return Mat.from_rows(rows)


_TRIPLES = [(3, 4, 5), (5, 12, 13), (8, 15, 17)]


def random_rational_rotation(rng, n):
    """A rational orthogonal rotation in one coordinate plane (infinite order)."""
    a, b, c = rng.choice(_TRIPLES)
    i, j = sorted(rng.sample(range(n), 2))
    rows = [[CRat(1) if r == s else CRat(0) for s in range(n)] for r in range(n)]
    rows[i][i] = CRat(Fraction(a, c))
    rows[i][j] = CRat(Fraction(b, c))
    rows[j][i] = CRat(Fraction(-b, c))
    rows[j][j] = CRat(Fraction(a, c))
    return Mat.from_rows(rows)


def random_projective_channel(rng, n):
    """Measure-and-forget in a random basis-index partition."""
    groups = {}
    for idx in range(n):
        groups.setdefault(rng.randint(0, max(0, n // 2)), []).append(idx)
    kraus = []
    for members in groups.values():
        p = Mat.zeros(n)
        for idx in members:
            p = p + Mat.unit(n, idx, idx)
        kraus.append(p)
    return SuperOp(kraus, validate=None)


def random_reset_channel(rng, n):
    """Everything is replaced by a random basis state."""
    target = rng.randint(0, n - 1)
    return SuperOp([Mat.unit(n, target, k) for k in range(n)], validate=None)


def _mixture(rng, e1: SuperOp, e2: SuperOp):
    a, b, c = rng.choice(_TRIPLES)
    w1, w2 = CRat(Fraction(a, c)), CRat(Fraction(b, c))
    return SuperOp(
        [k * w1 for k in e1.kraus] + [k * w2 for k in e2.kraus], validate=None
    )


def random_tp_channel(rng, n, finite_order=False):
    """An exactly trace-preserving channel on dimension n."""
    def base():
        roll = rng.random()
        if roll < 0.45:
            return SuperOp.from_unitary(random_phase_permutation(rng, n))
        if roll < 0.55 and not finite_order and n >= 2:
            return SuperOp.from_unitary(random_rational_rotation(rng, n))
        if roll < 0.8:
            return random_projective_channel(rng, n)
        return random_reset_channel(rng, n)

    e = base()
    if rng.random() < 0.5:
        e = base().compose(e)
    if rng.random() < 0.4:
        e = _mixture(rng, e, base())
    return e


def random_automaton(rng, dim, n_actions, finite_order=False):
    actions = {
        f"a{k}": random_tp_channel(rng, dim, finite_order=finite_order)
        for k in range(n_actions)
    }
    return QuantumAutomaton(dim, actions, random_density(rng, dim))


def random_union(rng, dim, max_members=2):
    members = [random_subspace(rng, dim, dim=rng.randint(0, dim - 1)) for _ in range(rng.randint(1, max_members))]
    return SubspaceUnion(dim, members)


def basis_union(rng, dim, max_members=2):
    """Unions of coordinate subspaces (well matched to permutation actions)."""
    members = []
    for _ in range(rng.randint(1, max_members)):
        k = rng.randint(1, dim - 1)
        idxs = rng.sample(range(dim), k)
        members.append(
            Subspace.from_vectors(dim, [[1 if r == i else 0 for r in range(dim)] for i in idxs])
        )
    return SubspaceUnion(dim, members)


def random_deterministic_program(rng, dim, n_locations, ensure_exit_reachable=True):
    """A random deterministic program with exit, exactly valid by construction."""
    labels = [f"l{i}" for i in range(n_locations)] + ["exit"]
    basis_meas = Measurement([Mat.unit(dim, k, k) for k in range(dim)], validate=False)
    act = {}
    for i, loc in enumerate(labels[:-1]):
        channel = random_tp_channel(rng, dim)
        meas = basis_meas if rng.random() < 0.6 else Measurement.trivial(dim, dim)
        nxt = {}
        for j in range(dim):
            if ensure_exit_reachable and rng.random() < 0.35:
                nxt[j] = ("exit",)
            else:
                nxt[j] = (rng.choice(labels),)
        act[loc] = LocationAction(channel, meas, nxt)
    act["exit"] = LocationAction(
        SuperOp.identity(dim), Measurement.trivial(dim, dim), {j: ("exit",) for j in range(dim)}
    )
    return SequentialProgram(
        dim=dim,
        locations=labels,
        act=act,
        initial_state=random_density(rng, dim),
        initial_location=labels[0],
        exit_location="exit",
    )


# ----------------------------------------------------------------------
# random Q-While sources


_QW_PREAMBLE = """qubits 1;
unitary H = sqrt(1/2) * [[1, 1], [1, -1]];
unitary X = [[0, 1], [1, 0]];
unitary Z = [[1, 0], [0, -1]];
measurement M = {[[1, 0], [0, 0]], [[0, 0], [0, 1]]};
"""


def random_qwhile_source(rng, max_loops=2, max_len=3, max_locations=10):
    """Random single-qubit source with at most ``max_loops`` nested loops.

    Rejection-sampled down to ``max_locations`` compiled locations so the
    embedded spaces stay tractable for exact arithmetic.
    """

    def stmt(loops_left, length):
        parts = []
        for _ in range(rng.randint(1, length)):
            roll = rng.random()
            if roll < 0.2:
                parts.append("skip")
            elif roll < 0.35:
                parts.append("q0 := |0>")
            elif roll < 0.6:
                parts.append(f"apply {rng.choice(['H', 'X', 'Z'])} to q0")
            elif roll < 0.8 and loops_left > 0:
                parts.append(
                    f"while meas M(q0) == 1 {{ {stmt(loops_left - 1, max(1, length - 1))} }}"
                )
            else:
                arms = [stmt(0 if loops_left == 0 else loops_left - 1, 1) for _ in range(2)]
                parts.append(f"if meas M(q0) {{ 0 -> {arms[0]}; 1 -> {arms[1]}; }}")
        return "; ".join(parts)

    from qtl.qwhile import parse, _location_count

    while True:
        source = _QW_PREAMBLE + stmt(max_loops, max_len)
        if _location_count(parse(source).body) < max_locations:
            return source
