"""Decision procedures for temporal properties of quantum automata and programs.

The workhorses are exact fixpoint computations on finite unions of
subspaces: decreasing pre-image chains decide invariance, a maximal
invariant plus its maximal extension decide "eventually always", and a loop
refinement over union components decides "always eventually" whenever the
relevant peripheral eigenvalue periods can be certified.  Reachability of
the exit of a deterministic program runs through the stable/peripheral
split of the one-step matrix representation and an exact resolvent.

Verdicts are three-valued: some fragments are equivalent to open problems
in number theory, and the checker answers Unknown with a stated reason
rather than guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    NoExitLocation,
    PreconditionViolated,
    QtlError,
    SingularMatrix,
    ToleranceAmbiguity,
)
from .linalg import CRat, Mat, invert, kernel_basis, kron, multiplicative_order, peripheral_split
from .subspace import Subspace, SubspaceUnion, independent_columns, satisfies, support
from .superop import MatrixRep, SuperOp, unvec, vec
from .program import (
    QuantumAutomaton,
    SequentialProgram,
    embed,
    initial_cq,
    simulate_deterministic,
    step_superop,
    to_automaton,
)
from .formula import Always, Atom, Eventually, FAtom, FFalse, FTrue, Next, Or, Until

VALID = "valid"
NOT_VALID = "not_valid"
UNKNOWN = "unknown"


@dataclass
class Verdict:
    status: str
    witness: dict | None = None
    certificate: SubspaceUnion | None = None
    diagnostics: dict = field(default_factory=dict)

    @staticmethod
    def valid(certificate=None, diagnostics=None):
        return Verdict(VALID, None, certificate, diagnostics or {})

    @staticmethod
    def not_valid(witness=None, certificate=None, diagnostics=None):
        return Verdict(NOT_VALID, witness, certificate, diagnostics or {})

    @staticmethod
    def unknown(reason, diagnostics=None):
        d = dict(diagnostics or {})
        d["reason"] = reason
        return Verdict(UNKNOWN, None, None, d)

    @property
    def is_valid(self):
        return self.status == VALID

    def __repr__(self):
        return f"Verdict({self.status})"


@dataclass
class ReachabilityResult:
    channel: SuperOp
    expected_steps: float
    almost_terminates: bool
    reach_state: Mat | None = None
    diagnostics: dict = field(default_factory=dict)


def _as_union(x) -> SubspaceUnion:
    if isinstance(x, SubspaceUnion):
        return x
    if isinstance(x, Atom):
        x = x.subspace
    if isinstance(x, Subspace):
        return SubspaceUnion(x.ambient_dim, [x])
    raise TypeError(f"expected a subspace or union, got {x!r}")


def _reps(a: QuantumAutomaton) -> dict:
    return {name: MatrixRep(e.matrix_rep()) for name, e in sorted(a.actions.items())}


def _initial_support(a: QuantumAutomaton) -> Subspace:
    return support(a.initial_state, validate=False)


# ----------------------------------------------------------------------
# support graph (exact reachability skeleton shared by witness search and
# the brute-force oracle)


class _SupportGraph:
    """Reachable supports of an automaton: one node per distinct support,
    one deterministic edge per action (the exact image)."""

    def __init__(self, automaton: QuantumAutomaton, max_depth: int, budget: int):
        reps = _reps(automaton)
        self.action_names = sorted(reps)
        root = _initial_support(automaton)
        self.nodes = [root]
        self.depth = [0]
        self.parent = [None]  # (node index, action name)
        self.edges = {}  # (node, action) -> node
        index = {root.key(): 0}
        frontier = [0]
        expanded = 0
        self.closed = True
        while frontier:
            nxt = []
            for i in frontier:
                if self.depth[i] >= max_depth:
                    self.closed = False
                    continue
                expanded += 1
                if expanded > budget:
                    raise BudgetExceeded(
                        f"support graph exceeded the budget of {budget} expansions"
                    )
                for name in self.action_names:
                    img = reps[name].image(self.nodes[i])
                    key = img.key()
                    j = index.get(key)
                    if j is None:
                        j = len(self.nodes)
                        index[key] = j
                        self.nodes.append(img)
                        self.depth.append(self.depth[i] + 1)
                        self.parent.append((i, name))
                        nxt.append(j)
                    self.edges[(i, name)] = j
            frontier = nxt

    def __len__(self):
        return len(self.nodes)

    def word_to(self, i) -> list:
        word = []
        while self.parent[i] is not None:
            i, name = self.parent[i]
            word.append(name)
        return word[::-1]

    def successors(self, i):
        return [
            (name, self.edges[(i, name)])
            for name in self.action_names
            if (i, name) in self.edges
        ]

    def expanded(self, i) -> bool:
        return (i, self.action_names[0]) in self.edges

    def find_cycle(self, allowed) -> list | None:
        """A cycle with all nodes in ``allowed``, as [(node, action, node), ...]."""
        allowed = set(allowed)
        color = {}
        path = []

        def dfs(v):
            color[v] = 1
            for name, w in self.successors(v):
                if w not in allowed:
                    continue
                if color.get(w) == 1:
                    cycle = []
                    for edge in path:
                        if cycle or edge[0] == w:
                            cycle.append(edge)
                    cycle.append((v, name, w))
                    return cycle
                if color.get(w) is None:
                    path.append((v, name, w))
                    found = dfs(w)
                    path.pop()
                    if found:
                        return found
            color[v] = 2
            return None

        for v in sorted(allowed):
            if color.get(v) is None:
                found = dfs(v)
                if found:
                    return found
        return None

    def cycle_through(self, v: int) -> list | None:
        """A word returning from v to v, if one exists among expanded nodes."""
        best = {v: []}
        frontier = [v]
        while frontier:
            nxt = []
            for i in frontier:
                for name, j in self.successors(i):
                    if j == v:
                        return best[i] + [name]
                    if j not in best:
                        best[j] = best[i] + [name]
                        nxt.append(j)
            frontier = nxt
        return None


def _violation_word(a: QuantumAutomaton, u: SubspaceUnion, depth: int, budget: int = 200000):
    """Breadth-first search for the shallowest support escaping the union."""
    graph = _SupportGraph(a, depth, budget)
    order = sorted(range(len(graph)), key=lambda i: graph.depth[i])
    for i in order:
        if not u.contains_subspace(graph.nodes[i]):
            return {
                "word": graph.word_to(i),
                "step": graph.depth[i],
                "support_dim": graph.nodes[i].dim,
            }
    return None


# ----------------------------------------------------------------------
# next and invariance


def check_next(a: QuantumAutomaton, u) -> Verdict:
    """Every one-step successor of the initial state satisfies the union."""
    u = _as_union(u)
    for name in sorted(a.actions):
        nxt = support(a.actions[name].apply(a.initial_state), validate=False)
        if not u.contains_subspace(nxt):
            return Verdict.not_valid(witness={"action": name, "word": [name], "step": 1})
    return Verdict.valid()


def _invariance_chain(reps: dict, u: SubspaceUnion):
    """Greatest fixpoint of Y -> Y meet all action pre-images of Y."""
    y = u
    depth = 0
    while True:
        y2 = y
        for rep in reps.values():
            y2 = y2.meet(rep.preimage_union(y))
        if y2 == y:
            return y, depth
        if not y2.subset_of(y):
            raise QtlError("invariance chain failed to decrease")
        y = y2
        depth += 1


def check_invariance(a: QuantumAutomaton, u) -> Verdict:
    """Decide that every reachable state satisfies the union of subspaces.

    The certificate is the stabilized pre-image chain; a refuting action
    word is recovered by breadth-first search bounded by the chain depth.
    """
    u = _as_union(u)
    if u.ambient_dim != a.dim:
        raise DimensionMismatch("proposition does not live on the automaton space")
    reps = _reps(a)
    psi, depth = _invariance_chain(reps, u)
    diag = {"chain_depth": depth}
    if psi.contains_subspace(_initial_support(a)):
        return Verdict.valid(certificate=psi, diagnostics=diag)
    witness = _violation_word(a, u, depth + a.dim)
    if witness is None:
        raise QtlError("refuted invariance but found no witness within the bound")
    return Verdict.not_valid(witness=witness, certificate=psi, diagnostics=diag)


def invariance_by_mixing(a: QuantumAutomaton, p: Subspace) -> Verdict:
    """Single-subspace invariance via the uniform mixture of the actions.

    Checks the first dim(H) iterates of the averaged channel; agrees with
    the chain on one-member unions and serves as an internal cross-check.
    """
    if p.ambient_dim != a.dim:
        raise DimensionMismatch("proposition does not live on the automaton space")
    reps = list(_reps(a).values())
    weight = CRat(Fraction(1, len(reps)))
    mixed = reps[0].m * weight
    for rep in reps[1:]:
        mixed = mixed + rep.m * weight
    v = vec(a.initial_state)
    for k in range(a.dim):
        state = unvec(v, a.dim)
        if not satisfies(state, p):
            witness = _violation_word(a, SubspaceUnion(a.dim, [p]), k + a.dim)
            return Verdict.not_valid(witness=witness, diagnostics={"mixing_step": k})
        v = mixed @ v
    return Verdict.valid(diagnostics={"mixing_steps": a.dim})


# ----------------------------------------------------------------------
# maximal invariant and maximal extension


def _joint_image(reps: dict, u: SubspaceUnion) -> SubspaceUnion:
    joint = None
    for rep in reps.values():
        img = rep.image_union(u)
        joint = img if joint is None else joint.union(img)
    return joint


def maximal_invariant(a: QuantumAutomaton, r) -> SubspaceUnion:
    """Largest sub-union x of r with (join of all action images of x) = x.

    Computed as the stabilization of the decreasing chain that intersects
    with every pre-image and with the joint image; both defining properties
    are re-checked on the result.
    """
    r = _as_union(r)
    reps = _reps(a)
    z = r
    while True:
        z2 = z
        for rep in reps.values():
            z2 = z2.meet(rep.preimage_union(z))
        z2 = z2.meet(_joint_image(reps, z))
        if z2 == z:
            break
        if not z2.subset_of(z):
            raise QtlError("maximal-invariant chain failed to decrease")
        z = z2
    if not (_joint_image(reps, z) == z and z.subset_of(r)):
        raise QtlError("maximal invariant failed its defining properties")
    return z


def _meet_of_preimages(reps: dict, u: SubspaceUnion) -> SubspaceUnion:
    pre = None
    for rep in reps.values():
        q = rep.preimage_union(u)
        pre = q if pre is None else pre.meet(q)
    return pre


def maximal_extension(a: QuantumAutomaton, x, max_iterations: int = 200) -> SubspaceUnion:
    """Smallest union y containing x with y = intersection of its pre-images
    (i.e. the set of states all of whose evolutions eventually enter and
    stay in x).

    Computed as the increasing chain Y -> meet of all action pre-images of
    Y starting from x; every element of the chain lies inside every
    admissible fixpoint, so the stabilized value is the wanted extension by
    construction.  Single-action pre-image trees (star nodes) can
    overshoot: a leaf that grows under one action may still be the meet
    fixpoint, so the chain is the reliable route.  Both defining properties
    are re-checked on the result.
    """
    x = _as_union(x)
    reps = _reps(a)
    if not _joint_image(reps, x) == x:
        raise PreconditionViolated("maximal_extension needs an invariant union")
    y = x
    for _ in range(max_iterations):
        y2 = _meet_of_preimages(reps, y)
        if y2 == y:
            break
        if not y.subset_of(y2):
            raise QtlError("pre-image chain lost monotonicity")
        y = y2
    else:
        raise QtlError("pre-image chain did not stabilize within the iteration cap")
    if not (x.subset_of(y) and _meet_of_preimages(reps, y) == y):
        raise QtlError("maximal extension failed its defining properties")
    return y


def check_eventually_always(a: QuantumAutomaton, u, witness_depth: int = 12) -> Verdict:
    """Decide "from some point on, every continuation satisfies the union".

    Valid exactly when the initial support lies in the maximal extension of
    the maximal invariant of the union.
    """
    u = _as_union(u)
    if u.ambient_dim != a.dim:
        raise DimensionMismatch("proposition does not live on the automaton space")
    x = maximal_invariant(a, u)
    psi = maximal_extension(a, x)
    diag = {"invariant_members": len(x.members), "certificate_members": len(psi.members)}
    if psi.contains_subspace(_initial_support(a)):
        return Verdict.valid(certificate=psi, diagnostics=diag)
    witness = _lasso_witness(a, u, mode="recurrent_violation", depth=witness_depth)
    return Verdict.not_valid(witness=witness, certificate=psi, diagnostics=diag)


def _lasso_witness(a: QuantumAutomaton, u: SubspaceUnion, mode: str, depth: int, budget: int = 4000):
    """Best-effort finite witness (prefix word + cycle word) for refuted
    limit properties; None when the bounded search finds nothing."""
    try:
        graph = _SupportGraph(a, depth, budget)
    except BudgetExceeded:
        return None
    n = len(graph)
    if mode == "recurrent_violation":
        # a reachable cycle through a support outside the union
        for v in range(n):
            if u.contains_subspace(graph.nodes[v]):
                continue
            cycle = graph.cycle_through(v)
            if cycle:
                return {"prefix": graph.word_to(v), "cycle": cycle}
    elif mode == "avoiding_cycle":
        bad = [v for v in range(n) if not u.contains_subspace(graph.nodes[v])]
        cycle = graph.find_cycle(bad)
        if cycle:
            return {
                "prefix": graph.word_to(cycle[0][0]),
                "cycle": [name for _, name, _ in cycle],
            }
    return None


# ----------------------------------------------------------------------
# always eventually (loop refinement over union components)


def _member_edges(members, reps):
    """Directed edges i --action--> j where the image of member i is exactly
    member j; images that are no member give no edge."""
    edges = {}
    for i, m in enumerate(members):
        for name, rep in reps.items():
            img = rep.image(m)
            for j, other in enumerate(members):
                if img == other:
                    edges[(i, name)] = j
                    break
    return edges


def _simple_cycles(n_nodes, edges):
    """All simple cycles (distinct nodes) as (node list, action list);
    rotations are deduplicated by anchoring at the smallest node."""
    adj = {}
    for (i, name), j in edges.items():
        adj.setdefault(i, []).append((name, j))
    cycles = []

    def dfs(start, node, path_nodes, path_actions):
        for name, j in sorted(adj.get(node, [])):
            if j == start:
                cycles.append((path_nodes[:], path_actions + [name]))
            elif j > start and j not in path_nodes:
                dfs(start, j, path_nodes + [j], path_actions + [name])

    for start in range(n_nodes):
        dfs(start, start, [start], [])
    return cycles


class _UnknownVerdict(Exception):
    def __init__(self, reason, diagnostics=None):
        super().__init__(reason)
        self.reason = reason
        self.diagnostics = diagnostics or {}


def _certified_period(loop_rep: Mat, period_bound: int, tolerance: float) -> int:
    """lcm of the multiplicative orders of the loop channel's peripheral
    eigenvalues, detected numerically up to the bound."""
    try:
        split = peripheral_split(loop_rep, tolerance)
    except ToleranceAmbiguity as exc:
        raise _UnknownVerdict(f"peripheral classification ambiguous: {exc}")
    b = 1
    for lam, _ in split.peripheral_eigenvalues:
        order = multiplicative_order(lam, period_bound)
        if order is None:
            raise _UnknownVerdict(
                f"peripheral eigenvalue {lam} has no certified order up to {period_bound}"
            )
        b = b * order // math.gcd(b, order)
    if b > max(period_bound, 4096):
        raise _UnknownVerdict(f"combined period {b} exceeds the configured bound")
    return b


def _p2_refine(members, cycle, u: SubspaceUnion, reps, period_bound, tolerance):
    """Shrink the first loop component to the states that keep landing in
    the target union along the loop's periodic subsequences."""
    nodes, actions = cycle
    j1 = nodes[0]
    dim = members[0].ambient_dim
    ms = [reps[name].m for name in actions]
    k = len(ms)
    prefixes = [Mat.eye(dim * dim)]
    for m in ms:
        prefixes.append(m @ prefixes[-1])
    suffixes = [None] * (k + 1)
    suffixes[k] = Mat.eye(dim * dim)
    for r in range(k - 1, -1, -1):
        suffixes[r] = suffixes[r + 1] @ ms[r]
    b = _certified_period(prefixes[k], period_bound, tolerance)
    pieces = []
    for r in range(1, k + 1):
        f_rep = prefixes[r] @ suffixes[r]
        f_dag = f_rep.dagger()
        fb_dag = MatrixRep(f_dag).power(b).m
        prefix_dag = prefixes[r].dagger()
        for p_s in u.members:
            y = vec(p_s.complement().projector)
            for _ in range(b):  # c = 1 .. b
                y = f_dag @ y
                z_sub = Subspace.full(dim)
                w = y
                for _ in range(dim * dim + 2):  # u = 0 .. d^2 + 1
                    pulled = unvec(prefix_dag @ w, dim)
                    constraint = support(pulled, validate=False).complement()
                    z_sub = z_sub.meet(constraint)
                    if z_sub.is_zero():
                        break
                    w = fb_dag @ w
                piece = members[j1].meet(z_sub)
                if not piece.is_zero():
                    pieces.append(piece)
    new_members = [m for i, m in enumerate(members) if i != j1] + pieces
    refined = SubspaceUnion(dim, new_members)
    if refined.contains_subspace(members[j1]):
        raise QtlError("loop refinement failed to shrink the union")
    return refined, b


def check_always_eventually(
    a: QuantumAutomaton,
    u,
    period_bound: int = 64,
    tolerance: float = 1e-9,
    witness_depth: int = 12,
) -> Verdict:
    """Decide "the union is visited infinitely often on every path".

    Alternates the maximal-invariant chain with a refinement of simple
    loops of union components that avoid the target; the refinement uses
    the certified period of the loop channel's peripheral spectrum and
    returns Unknown when no period certificate exists within the bound.
    """
    u = _as_union(u)
    if u.ambient_dim != a.dim:
        raise DimensionMismatch("proposition does not live on the automaton space")
    reps = _reps(a)
    x = SubspaceUnion.full(a.dim)
    diag = {"refinements": 0, "periods": [], "period_bound": period_bound, "tolerance": tolerance}
    try:
        for _ in range(200):
            x = maximal_invariant(a, x)
            if x.is_zero():
                break
            members = list(x.members)
            edges = _member_edges(members, reps)
            violating = None
            for nodes, actions in _simple_cycles(len(members), edges):
                if not any(u.contains_subspace(members[j]) for j in nodes):
                    violating = (nodes, actions)
                    break
            if violating is None:
                break
            x, period = _p2_refine(members, violating, u, reps, period_bound, tolerance)
            diag["refinements"] += 1
            diag["periods"].append(period)
        else:
            raise QtlError("loop refinement did not converge")
    except _UnknownVerdict as uv:
        merged = dict(diag)
        merged.update(uv.diagnostics)
        return Verdict.unknown(uv.reason, merged)
    psi = maximal_extension(a, x)
    diag["certificate_members"] = len(psi.members)
    if psi.contains_subspace(_initial_support(a)):
        return Verdict.valid(certificate=psi, diagnostics=diag)
    witness = _lasso_witness(a, u, mode="avoiding_cycle", depth=witness_depth)
    return Verdict.not_valid(witness=witness, certificate=psi, diagnostics=diag)


def check_always_until(
    a: QuantumAutomaton, phi, psi, period_bound: int = 64, tolerance: float = 1e-9
) -> Verdict:
    """Always (phi until psi) = invariance of phi plus always-eventually psi."""
    inv = check_invariance(a, phi)
    if inv.status == NOT_VALID:
        return Verdict.not_valid(
            witness=inv.witness,
            certificate=inv.certificate,
            diagnostics={"conjunct": "invariance"},
        )
    ae = check_always_eventually(a, psi, period_bound=period_bound, tolerance=tolerance)
    if ae.status == UNKNOWN:
        return ae
    if ae.status == NOT_VALID:
        ae.diagnostics["conjunct"] = "always_eventually"
        return ae
    return Verdict.valid(
        certificate=ae.certificate, diagnostics={"invariance_chain_depth": inv.diagnostics.get("chain_depth")}
    )


# ----------------------------------------------------------------------
# single-action almost-surely machinery (certified root-of-unity regime)


def _eigenprojector_at_one(b: Mat):
    """Exact spectral projector of b at eigenvalue one, assuming that
    eigenvalue is semisimple: the projector onto ker(b - I) along im(b - I)."""
    n = b.rows
    a = b - Mat.eye(n)
    ker = kernel_basis(a)
    k = len(ker)
    if k == 0:
        return Mat.zeros(n), 0
    cols = independent_columns(a)
    if k + len(cols) != n:
        raise ArithmeticError("eigenvalue one is not semisimple")
    t = ker[0]
    for v in ker[1:]:
        t = t.hstack(v)
    for c in cols:
        t = t.hstack(a[:, c])
    t_inv = invert(t)  # SingularMatrix exactly when kernel and image overlap
    selector = Mat.zeros(n)
    for i in range(k):
        selector = selector + Mat.unit(n, i, i)
    return t @ selector @ t_inv, k


def limit_states(e: SuperOp, sigma0: Mat, period_bound: int = 64, tolerance: float = 1e-9):
    """Exact limit cycle [tau_0 .. tau_{b-1}] of sigma_n = E^n(sigma0).

    Requires every peripheral eigenvalue of E's matrix representation to be
    a root of unity with order detectable within the bound.  The period is
    then certified exactly: the fixed space of E^b must have the same
    dimension as the peripheral spectrum, after which each tau_c is an
    exact rational matrix (the limit of the subsequence n = ub + c).
    """
    m = e.matrix_rep()
    try:
        split = peripheral_split(m, tolerance)
    except ToleranceAmbiguity as exc:
        raise _UnknownVerdict(f"peripheral classification ambiguous: {exc}")
    peripheral_dim = sum(mult for lam, mult in split.peripheral_eigenvalues)
    b = 1
    for lam, _ in split.peripheral_eigenvalues:
        order = multiplicative_order(lam, period_bound)
        if order is None:
            raise _UnknownVerdict(
                f"peripheral eigenvalue {lam} has no certified order up to {period_bound}"
            )
        b = b * order // math.gcd(b, order)
    big = MatrixRep(m).power(b).m
    try:
        projector, rank_one = _eigenprojector_at_one(big)
    except (ArithmeticError, SingularMatrix) as exc:
        raise _UnknownVerdict(f"limit projector unavailable: {exc}")
    if rank_one != peripheral_dim:
        raise _UnknownVerdict(
            f"period {b} uncertified: fixed space rank {rank_one} "
            f"!= peripheral dimension {peripheral_dim}"
        )
    v = projector @ vec(sigma0)
    states = []
    for _ in range(b):
        states.append(unvec(v, e.dim_in))
        v = m @ v
    return states


def check_always_almost_until(
    e: SuperOp,
    sigma0: Mat,
    p: Subspace,
    q: Subspace,
    period_bound: int = 64,
    tolerance: float = 1e-9,
) -> Verdict:
    """Always (p almost-until q) for a single action from sigma0.

    The invariance conjunct is exact.  The almost-surely conjunct asks that
    the satisfaction probability of q has limit point one; in the certified
    root-of-unity regime this reduces to exact satisfaction checks on the
    finitely many limit states of the orbit, and is Unknown otherwise.
    """
    a = QuantumAutomaton(e.dim_in, {"step": e}, sigma0, validate=False)
    inv = check_invariance(a, p)
    if inv.status == NOT_VALID:
        inv.diagnostics["conjunct"] = "invariance"
        return inv
    try:
        states = limit_states(e, sigma0, period_bound=period_bound, tolerance=tolerance)
    except _UnknownVerdict as uv:
        return Verdict.unknown(uv.reason, uv.diagnostics)
    limit_traces = [float((q.projector @ tau).trace().re) for tau in states]
    diag = {"period": len(states), "limit_traces": limit_traces}
    if any(satisfies(tau, q) for tau in states):
        return Verdict.valid(certificate=inv.certificate, diagnostics=diag)
    # no limit state reaches the target: the satisfaction probability is
    # bounded away from one along the whole orbit
    witness = {"conjunct": "limit_point", "limit_traces": limit_traces}
    return Verdict.not_valid(witness=witness, certificate=inv.certificate, diagnostics=diag)


# ----------------------------------------------------------------------
# reachability of the exit and the exit-shaped formulas


def _exit_projectors(program: SequentialProgram):
    if program.exit_location is None:
        raise NoExitLocation("program has no exit location")
    n_configs = len(program.configs())
    e_idx = program.config_index(program.exit_location)
    m0 = kron(Mat.eye(program.dim), Mat.unit(n_configs, e_idx, e_idx))
    m1 = Mat.eye(program.dim * n_configs) - m0
    return m0, m1


def _trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def reachability_superop(
    program: SequentialProgram,
    tolerance: float = 1e-9,
    trace_tol: float = 1e-7,
    kraus_tol: float = 1e-10,
) -> ReachabilityResult:
    """The channel collecting all mass that ever reaches the exit location.

    Its matrix representation is (M0 x M0) (I - N)^{-1}, with N the stable
    part of the one-step representation cut by the continue projector; the
    resolvent is inverted exactly on the rationalized stable part.  The
    expected number of steps until the exit (in the program's own step
    counting) comes from the squared resolvent, and the whole construction
    is cross-checked against 64 steps of direct power iteration.
    """
    body = step_superop(program)
    m0, m1 = _exit_projectors(program)
    d_emb = m0.rows
    step_rep = body.matrix_rep()
    cut = step_rep @ kron(m1, m1)
    split = peripheral_split(cut, tolerance)
    resolvent = invert(Mat.eye(d_emb * d_emb) - split.stable_part)
    collect = kron(m0, m0)
    sigma0 = embed(initial_cq(program), program)
    v0 = vec(sigma0)
    w = resolvent @ v0
    f_sigma = unvec(collect @ w, d_emb)
    reach_trace = float(f_sigma.trace().re)
    almost = abs(reach_trace - 1.0) <= trace_tol
    if almost:
        w2 = resolvent @ w
        expected = float(unvec(collect @ (w2 - w), d_emb).trace().re)
    else:
        expected = math.inf
    # power-iteration cross-check
    step_float = step_rep.to_complex()
    vk = v0.to_complex().ravel()
    for _ in range(64):
        vk = step_float @ vk
    collect_float = collect.to_complex()
    exit64 = (collect_float @ vk).reshape(d_emb, d_emb)
    residual = _trace_norm(exit64 - f_sigma.to_complex())
    # Kraus extraction from the reshuffled (Choi) matrix of the full map
    f_rep_float = (collect @ resolvent).to_complex().reshape(d_emb, d_emb, d_emb, d_emb)
    choi = f_rep_float.transpose(0, 2, 1, 3).reshape(d_emb * d_emb, d_emb * d_emb)
    choi = (choi + choi.conj().T) / 2
    eigvals, eigvecs = np.linalg.eigh(choi)
    scale = max(1.0, float(eigvals.max(initial=0.0)))
    kraus = [
        Mat.from_complex(np.sqrt(lam) * col.reshape(d_emb, d_emb))
        for lam, col in zip(eigvals, eigvecs.T)
        if lam > kraus_tol * scale
    ]
    channel = (
        SuperOp(kraus, validate="tolerant", tol=1e-6)
        if kraus
        else SuperOp([Mat.zeros(d_emb)], validate=None)
    )
    return ReachabilityResult(
        channel=channel,
        expected_steps=expected,
        almost_terminates=almost,
        reach_state=f_sigma,
        diagnostics={
            "reach_trace": reach_trace,
            "power_iteration_residual": residual,
            "kraus_rank": len(kraus),
            "tolerance": tolerance,
        },
    )


@dataclass
class ExitVerdicts:
    eventually: Verdict
    almost_eventually: Verdict
    always: Verdict


def exit_atom_subspace(program: SequentialProgram, exit_subspace: Subspace) -> Subspace:
    """The proposition "at the exit, inside the given subspace"."""
    from .formula import atom_from_blocks

    return atom_from_blocks(
        "exit_only", {program.exit_location: exit_subspace}, program
    ).subspace


def partial_correctness_subspace(program: SequentialProgram, exit_subspace: Subspace) -> Subspace:
    """Unconstrained off the exit, the given subspace at the exit."""
    from .formula import atom_from_blocks

    blocks = {
        loc: (exit_subspace if loc == program.exit_location else Subspace.full(program.dim))
        for loc in program.locations
    }
    return atom_from_blocks("exit_partial", blocks, program).subspace


def check_exit_formulas(
    program: SequentialProgram,
    exit_subspace: Subspace,
    always_subspace: Subspace | None = None,
    tolerance: float = 1e-9,
    trace_tol: float = 1e-7,
) -> ExitVerdicts:
    """The three exit-shaped properties of a deterministic program with exit.

    eventually: exact arrival inside the exit proposition within
    dim*|L| - 1 steps (arrival later is impossible).  almost_eventually:
    the reachability channel sends the initial state onto the exit
    proposition with probability one, within the certified tolerance.
    always: one exact satisfaction check on the running average of the
    first dim*|L| iterates; the proposition defaults to "unconstrained off
    the exit, `exit_subspace` at the exit".
    """
    if program.exit_location is None:
        raise NoExitLocation("program has no exit location")
    bound = program.dim * len(program.locations)
    trajectory = simulate_deterministic(program, bound - 1)

    eventually = Verdict.not_valid(
        diagnostics={
            "exit_trace_at_bound": float(trajectory[-1].trace_of(program.exit_location))
        }
    )
    for k, state in enumerate(trajectory):
        if any(c != program.exit_location for c in state.blocks):
            continue
        if satisfies(state.block(program.exit_location), exit_subspace):
            eventually = Verdict.valid(diagnostics={"step": k})
            break

    reach = reachability_superop(program, tolerance=tolerance, trace_tol=trace_tol)
    exit_atom = exit_atom_subspace(program, exit_subspace)
    inside = float((exit_atom.projector @ reach.reach_state).trace().re)
    leak = reach.diagnostics["reach_trace"] - inside
    almost_ok = reach.almost_terminates and abs(leak) <= max(trace_tol, tolerance * 10)
    almost_eventually = Verdict(
        VALID if almost_ok else NOT_VALID,
        diagnostics={
            "reach_trace": reach.diagnostics["reach_trace"],
            "leak_outside": leak,
            "power_iteration_residual": reach.diagnostics["power_iteration_residual"],
        },
    )

    target = always_subspace if always_subspace is not None else partial_correctness_subspace(
        program, exit_subspace
    )
    cesaro = Mat.zeros(program.dim * len(program.configs()))
    for state in trajectory:
        cesaro = cesaro + embed(state, program)
    if satisfies(cesaro, target):
        always = Verdict.valid(diagnostics={"cesaro_steps": bound})
    else:
        step = next(
            (k for k, s in enumerate(trajectory) if not satisfies(embed(s, program), target)),
            None,
        )
        always = Verdict.not_valid(witness={"step": step}, diagnostics={"cesaro_steps": bound})
    return ExitVerdicts(eventually=eventually, almost_eventually=almost_eventually, always=always)


# ----------------------------------------------------------------------
# entanglement-assisted invariance


def kleene_always(e: SuperOp, rho_ab: Mat, p: Subspace, t: int | None = None) -> Verdict:
    """Invariance of p under (E on the first factor) from a joint input,
    decided by one satisfaction check of the running average over t steps.

    t defaults to d^2 - 1 for a d-dimensional action space and may only be
    enlarged; the bound does not depend on the environment dimension.
    """
    d = e.dim_in
    if rho_ab.rows % d != 0:
        raise DimensionMismatch("joint state dimension is not a multiple of the action space")
    d_env = rho_ab.rows // d
    if p.ambient_dim != rho_ab.rows:
        raise DimensionMismatch("proposition must live on the joint space")
    t_min = max(1, d * d - 1)
    if t is None:
        t = t_min
    elif t < t_min:
        raise ValueError(f"t may not be below the bound {t_min}")
    lifted = SuperOp([kron(k, Mat.eye(d_env)) for k in e.kraus], validate=None)
    acc = Mat.zeros(rho_ab.rows)
    state = rho_ab
    for _ in range(t):
        acc = acc + state
        state = lifted.apply(state)
    if satisfies(acc, p):
        return Verdict.valid(diagnostics={"steps_averaged": t})
    step = 0
    probe = rho_ab
    while satisfies(probe, p):
        probe = lifted.apply(probe)
        step += 1
    return Verdict.not_valid(witness={"step": step}, diagnostics={"steps_averaged": t})


# ----------------------------------------------------------------------
# Hoare-style correctness through the exit formulas


def hoare_check(
    program: SequentialProgram,
    pre_sub: Subspace,
    post_sub: Subspace,
    mode: str = "partial",
    tolerance: float = 1e-9,
) -> Verdict:
    """Partial or total correctness of {pre} program {post}.

    Partial correctness is the invariance of "post at the exit,
    unconstrained elsewhere"; total correctness is almost-sure arrival in
    "post at the exit".  The input quantification over the precondition is
    discharged on a basis of it.
    """
    if mode not in ("partial", "total"):
        raise ValueError("mode must be 'partial' or 'total'")
    if pre_sub.ambient_dim != program.dim or post_sub.ambient_dim != program.dim:
        raise DimensionMismatch("pre and post conditions live on the data space")
    if pre_sub.is_zero():
        return Verdict.valid(diagnostics={"vacuous": True})
    for idx, col in enumerate(pre_sub.basis.column_vectors()):
        norm = (col.dagger() @ col).entry(0, 0)
        rho = (col @ col.dagger()) * (CRat(1) / norm)
        verdicts = check_exit_formulas(program.with_initial_state(rho), post_sub, tolerance=tolerance)
        verdict = verdicts.always if mode == "partial" else verdicts.almost_eventually
        if verdict.status != VALID:
            verdict.witness = {"input_basis_index": idx, **(verdict.witness or {})}
            return verdict
    return Verdict.valid(diagnostics={"basis_states_checked": pre_sub.dim})


# ----------------------------------------------------------------------
# brute-force oracle over the exact support graph


@dataclass
class OracleResult:
    status: str  # "holds" | "fails" | "inconclusive"
    witness: dict | None = None
    closed: bool = False

    def __repr__(self):
        return f"OracleResult({self.status})"


def _formula_union(node, atoms: dict, ambient: int) -> SubspaceUnion:
    """Or-combinations of atoms (and true/false) as a union of subspaces."""
    if isinstance(node, FTrue):
        return SubspaceUnion.full(ambient)
    if isinstance(node, FFalse):
        return SubspaceUnion.zero(ambient)
    if isinstance(node, FAtom):
        return SubspaceUnion(ambient, [atoms[node.name].subspace])
    if isinstance(node, Or):
        return _formula_union(node.left, atoms, ambient).union(
            _formula_union(node.right, atoms, ambient)
        )
    raise ValueError(f"oracle expects unions of atoms, got {node!r}")


def oracle_bfs(target, formula, atoms: dict, depth: int = 12, budget: int = 20000) -> OracleResult:
    """Brute-force evaluation over the exact reachable support graph.

    Refutations of box-shaped formulas (explicit violating words) and
    witnesses of diamond-shaped ones are sound at any depth; exact
    recurrences (lassos) refute the limit formulas.  When the reachable
    support graph closes within depth and budget the answers are complete
    for the supported shapes; otherwise Inconclusive.
    """
    a = target if isinstance(target, QuantumAutomaton) else to_automaton(target)
    graph = _SupportGraph(a, depth, budget)

    def union_of(node):
        return _formula_union(node, atoms, a.dim)

    try:
        if isinstance(formula, (FTrue, FFalse, FAtom, Or)):
            u = union_of(formula)
            ok = u.contains_subspace(graph.nodes[0])
            return OracleResult(
                "holds" if ok else "fails", None if ok else {"word": [], "step": 0}, True
            )
        if isinstance(formula, Next):
            u = union_of(formula.body)
            if not graph.expanded(0):
                return OracleResult("inconclusive")
            for name, j in graph.successors(0):
                if not u.contains_subspace(graph.nodes[j]):
                    return OracleResult("fails", {"word": [name], "step": 1}, graph.closed)
            return OracleResult("holds", None, True)
        if isinstance(formula, Always) and isinstance(formula.body, Eventually):
            u = union_of(formula.body.body)
            bad = [v for v in range(len(graph)) if not u.contains_subspace(graph.nodes[v])]
            cycle = graph.find_cycle(bad)
            if cycle:
                return OracleResult(
                    "fails",
                    {
                        "prefix": graph.word_to(cycle[0][0]),
                        "cycle": [name for _, name, _ in cycle],
                    },
                    graph.closed,
                )
            return OracleResult("holds" if graph.closed else "inconclusive", None, graph.closed)
        if isinstance(formula, Eventually) and isinstance(formula.body, Always):
            u = union_of(formula.body.body)
            for v in range(len(graph)):
                if not u.contains_subspace(graph.nodes[v]):
                    word = graph.cycle_through(v)
                    if word:
                        return OracleResult(
                            "fails", {"prefix": graph.word_to(v), "cycle": word}, graph.closed
                        )
            return OracleResult("holds" if graph.closed else "inconclusive", None, graph.closed)
        if isinstance(formula, Always) and isinstance(formula.body, Until):
            phi = union_of(formula.body.left)
            psi = union_of(formula.body.right)
            worst = OracleResult("holds", None, graph.closed)
            for v in range(len(graph)):
                r = _oracle_until(graph, phi, psi, root=v)
                if r.status == "fails":
                    prefix = graph.word_to(v)
                    witness = dict(r.witness or {})
                    witness["word"] = prefix + witness.get("word", witness.pop("prefix", []))
                    return OracleResult("fails", witness, graph.closed)
                if r.status == "inconclusive":
                    worst = OracleResult("inconclusive")
            if not graph.closed:
                return OracleResult("inconclusive")
            return worst
        if isinstance(formula, Always):
            u = union_of(formula.body)
            for i in range(len(graph)):
                if not u.contains_subspace(graph.nodes[i]):
                    return OracleResult(
                        "fails",
                        {"word": graph.word_to(i), "step": graph.depth[i]},
                        graph.closed,
                    )
            return OracleResult("holds" if graph.closed else "inconclusive", None, graph.closed)
        if isinstance(formula, Eventually):
            return _oracle_until(graph, SubspaceUnion.full(a.dim), union_of(formula.body))
        if isinstance(formula, Until):
            return _oracle_until(graph, union_of(formula.left), union_of(formula.right))
    except ValueError:
        return OracleResult("inconclusive")
    return OracleResult("inconclusive")


def _oracle_until(graph: _SupportGraph, phi: SubspaceUnion, psi: SubspaceUnion, root: int = 0) -> OracleResult:
    """Decide (phi U psi) over all paths from ``root`` on the support graph."""
    if psi.contains_subspace(graph.nodes[root]):
        return OracleResult("holds", {"step": 0}, True)
    region = set()
    frontier = [root]
    cut = False
    while frontier:
        nxt = []
        for i in frontier:
            if i in region:
                continue
            region.add(i)
            if not phi.contains_subspace(graph.nodes[i]):
                return OracleResult(
                    "fails",
                    {"word": _word_within(graph, region, root, i), "step": graph.depth[i]},
                    graph.closed,
                )
            if not graph.expanded(i):
                cut = True
                continue
            for name, j in graph.successors(i):
                if not psi.contains_subspace(graph.nodes[j]) and j not in region:
                    nxt.append(j)
        frontier = nxt
    cycle = graph.find_cycle(region)
    if cycle:
        return OracleResult(
            "fails",
            {
                "prefix": _word_within(graph, region, root, cycle[0][0]),
                "cycle": [name for _, name, _ in cycle],
            },
            graph.closed,
        )
    if cut:
        return OracleResult("inconclusive")
    return OracleResult("holds", None, graph.closed)


def _word_within(graph: _SupportGraph, region, source, target) -> list:
    """A shortest action word from source to target through region nodes."""
    if source == target:
        return []
    best = {source: []}
    frontier = [source]
    while frontier:
        nxt = []
        for i in frontier:
            for name, j in graph.successors(i):
                if j == target:
                    return best[i] + [name]
                if j in region and j not in best:
                    best[j] = best[i] + [name]
                    nxt.append(j)
        frontier = nxt
    return []


def replay_word(a: QuantumAutomaton, word) -> list:
    """Exact state trajectory along an action word, starting at sigma_0."""
    states = [a.initial_state]
    for name in word:
        states.append(a.actions[name].apply(states[-1]))
    return states
