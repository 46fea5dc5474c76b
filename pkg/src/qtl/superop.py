"""Completely positive maps in Kraus form, duals, matrix representations,
measurements, and the induced image/pre-image actions on subspaces.

The matrix representation M = sum_i E_i (x) conj(E_i) linearizes a channel on
row-major vectorized operators: vec(E(A)) = M vec(A).  It is the canonical
object for channel equality and for composing or powering channels without
multiplying out Kraus sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, PreconditionViolated
from .linalg import CRat, Mat, kron, mat_sum
from .subspace import Subspace, SubspaceUnion, support


def vec(a: Mat) -> Mat:
    """Row-major vectorization as a column: vec(A)[(i,j)] = A[i,j]."""
    re = a.num_re.reshape(-1, 1).copy()
    im = a.num_im.reshape(-1, 1).copy()
    return Mat(re, im, a.den)


def unvec(v: Mat, rows: int, cols: int | None = None) -> Mat:
    cols = rows if cols is None else cols
    if v.rows != rows * cols or v.cols != 1:
        raise DimensionMismatch("vector length does not match the target shape")
    re = v.num_re.reshape(rows, cols).copy()
    im = v.num_im.reshape(rows, cols).copy()
    return Mat(re, im, v.den)


class Measurement:
    """A quantum measurement {M_m}; completeness sum M†M = I holds exactly."""

    __slots__ = ("operators", "dim")

    def __init__(self, operators, validate: bool = True):
        operators = tuple(operators)
        if not operators:
            raise PreconditionViolated("a measurement needs at least one operator")
        dim = operators[0].cols
        for op in operators:
            if op.cols != dim or op.rows != dim:
                raise DimensionMismatch("measurement operators must be square and equal size")
        if validate:
            total = Mat.zeros(dim)
            for op in operators:
                total = total + op.dagger() @ op
            if total != Mat.eye(dim):
                raise PreconditionViolated("measurement operators do not sum to the identity")
        object.__setattr__(self, "operators", operators)
        object.__setattr__(self, "dim", dim)

    def __setattr__(self, name, value):
        raise AttributeError("Measurement is immutable")

    @staticmethod
    def trivial(dim: int, n_outcomes: int = 1) -> "Measurement":
        ops = [Mat.eye(dim)] + [Mat.zeros(dim) for _ in range(n_outcomes - 1)]
        return Measurement(ops, validate=False)

    def padded(self, n_outcomes: int) -> "Measurement":
        """Same measurement with zero operators appended up to n_outcomes."""
        if n_outcomes < len(self.operators):
            raise ValueError("cannot pad to fewer outcomes")
        if n_outcomes == len(self.operators):
            return self
        ops = list(self.operators) + [
            Mat.zeros(self.dim) for _ in range(n_outcomes - len(self.operators))
        ]
        return Measurement(ops, validate=False)

    def __len__(self):
        return len(self.operators)

    def __eq__(self, other):
        if not isinstance(other, Measurement):
            return NotImplemented
        return self.operators == other.operators

    def __repr__(self):
        return f"Measurement({len(self.operators)} outcomes on dim {self.dim})"


class SuperOp:
    """A trace-non-increasing completely positive map, held as Kraus operators.

    ``validate`` controls the admissibility check of sum E†E against the
    identity: "exact" demands it in exact arithmetic, "tolerant" numerically
    (for channels reconstructed from numeric data), None skips it.
    """

    __slots__ = ("kraus", "dim_in", "dim_out", "_trace_preserving", "_matrix_rep")

    def __init__(self, kraus, validate: str | None = "exact", tol: float = 1e-9):
        kraus = tuple(kraus)
        if not kraus:
            raise PreconditionViolated("a channel needs at least one Kraus operator")
        dim_in = kraus[0].cols
        dim_out = kraus[0].rows
        for k in kraus:
            if k.cols != dim_in or k.rows != dim_out:
                raise DimensionMismatch("Kraus operators must share one shape")
        object.__setattr__(self, "kraus", kraus)
        object.__setattr__(self, "dim_in", dim_in)
        object.__setattr__(self, "dim_out", dim_out)
        object.__setattr__(self, "_matrix_rep", None)
        tp = None
        if validate == "exact":
            total = Mat.zeros(dim_in)
            for k in kraus:
                total = total + k.dagger() @ k
            tp = total == Mat.eye(dim_in)
            if not tp:
                from .linalg import is_psd

                if not is_psd(Mat.eye(dim_in) - total):
                    raise PreconditionViolated("Kraus operators exceed the identity: not trace-non-increasing")
        elif validate == "tolerant":
            total = sum(
                k.to_complex().conj().T @ k.to_complex() for k in kraus
            )
            gap = np.eye(dim_in) - total
            eigs = np.linalg.eigvalsh((gap + gap.conj().T) / 2)
            if eigs.min() < -tol:
                raise PreconditionViolated(
                    f"Kraus operators exceed the identity beyond tolerance ({eigs.min()})"
                )
            tp = bool(np.max(np.abs(gap)) <= tol)
        object.__setattr__(self, "_trace_preserving", tp)

    def __setattr__(self, name, value):
        raise AttributeError("SuperOp is immutable")

    # ------------------------------------------------------------------

    @staticmethod
    def identity(dim: int) -> "SuperOp":
        return SuperOp([Mat.eye(dim)], validate=None)

    @staticmethod
    def from_unitary(u: Mat) -> "SuperOp":
        if u.dagger() @ u != Mat.eye(u.cols):
            raise PreconditionViolated("matrix is not exactly unitary")
        return SuperOp([u], validate=None)

    @staticmethod
    def from_scaled_unitary(v: Mat, scale: Fraction) -> "SuperOp":
        """Channel rho -> scale * v rho v† where sqrt(scale)*v is unitary.

        The Kraus set is {c_j * v} with rational c_j, sum c_j^2 = scale, so
        irrational unitaries with a rational direction stay exactly
        representable.
        """
        scale = Fraction(scale)
        if scale <= 0:
            raise PreconditionViolated("scale must be positive")
        if (v.dagger() @ v) * CRat(scale) != Mat.eye(v.cols):
            raise PreconditionViolated("scale * v†v is not the identity")
        coeffs = _rational_square_decomposition(scale)
        return SuperOp([v * CRat(c) for c in coeffs], validate=None)

    @staticmethod
    def from_measurement(m: Measurement) -> "SuperOp":
        return SuperOp(list(m.operators), validate=None)

    # ------------------------------------------------------------------

    def apply(self, rho: Mat) -> Mat:
        """sum_k E_k rho E_k†, exactly."""
        if rho.rows != self.dim_in or rho.cols != self.dim_in:
            raise DimensionMismatch("state dimension does not match the channel input")
        return mat_sum(k @ rho @ k.dagger() for k in self.kraus)

    def dual(self) -> "SuperOp":
        """Heisenberg-picture dual: Kraus set {E_k†}."""
        return SuperOp([k.dagger() for k in self.kraus], validate=None)

    def matrix_rep(self) -> Mat:
        """sum_i E_i (x) conj(E_i); cached."""
        if self._matrix_rep is None:
            if self.dim_in != self.dim_out:
                raise DimensionMismatch("matrix representation needs dim_in == dim_out")
            acc = mat_sum(kron(k, k.conj()) for k in self.kraus)
            object.__setattr__(self, "_matrix_rep", acc)
        return self._matrix_rep

    def compose(self, inner: "SuperOp") -> "SuperOp":
        """self after inner; Kraus set is all products."""
        if inner.dim_out != self.dim_in:
            raise DimensionMismatch("composition dimensions do not match")
        return SuperOp(
            [a @ b for a in self.kraus for b in inner.kraus], validate=None
        )

    def is_trace_preserving(self) -> bool:
        if self._trace_preserving is None:
            total = Mat.zeros(self.dim_in)
            for k in self.kraus:
                total = total + k.dagger() @ k
            object.__setattr__(self, "_trace_preserving", total == Mat.eye(self.dim_in))
        return self._trace_preserving

    def __eq__(self, other):
        """Channel equality through the matrix representation."""
        if not isinstance(other, SuperOp):
            return NotImplemented
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            return False
        return self.matrix_rep() == other.matrix_rep()

    def __repr__(self):
        return f"SuperOp({len(self.kraus)} Kraus, {self.dim_in}->{self.dim_out})"


def _rational_square_decomposition(scale: Fraction):
    """Write a positive rational as a sum of at most four rational squares."""
    p, q = scale.numerator, scale.denominator
    target = p * q  # scale = (p*q)/q^2
    parts = _four_squares(target)
    return [Fraction(a, q) for a in parts if a]


def _four_squares(n: int):
    """Lagrange decomposition by bounded search; n is expected to be small."""
    if n == 0:
        return (0,)
    best = None
    a = math.isqrt(n)
    for x in range(a, 0, -1):
        r1 = n - x * x
        if r1 == 0:
            return (x,)
        y0 = math.isqrt(r1)
        for y in range(y0, 0, -1):
            r2 = r1 - y * y
            if r2 == 0:
                return (x, y)
            z0 = math.isqrt(r2)
            for z in range(z0, 0, -1):
                r3 = r2 - z * z
                if r3 == 0:
                    return (x, y, z)
                w = math.isqrt(r3)
                if w * w == r3:
                    return (x, y, z, w)
        if best:
            break
    raise ArithmeticError(f"no four-square decomposition found for {n}")


# ----------------------------------------------------------------------
# image and pre-image of subspaces


def preimage(e: SuperOp, p: Subspace) -> Subspace:
    """The exact inverse-satisfaction set {sigma : E(sigma) |= p}.

    Computed as the orthocomplement of the dual channel applied to the
    complement projector.
    """
    if p.ambient_dim != e.dim_out:
        raise DimensionMismatch("subspace does not live in the channel output space")
    q_perp = p.complement().projector
    pulled = Mat.zeros(e.dim_in)
    for k in e.kraus:
        pulled = pulled + k.dagger() @ q_perp @ k
    return support(pulled, validate=False).complement()


def image(e: SuperOp, p: Subspace) -> Subspace:
    """Support of the channel applied to the normalized projector of p."""
    if p.ambient_dim != e.dim_in:
        raise DimensionMismatch("subspace does not live in the channel input space")
    if p.is_zero():
        return Subspace.zero(e.dim_out)
    rho = p.projector * CRat(Fraction(1, p.dim))
    return support(e.apply(rho), validate=False)


def preimage_union(e: SuperOp, u: SubspaceUnion) -> SubspaceUnion:
    return SubspaceUnion(e.dim_in, [preimage(e, m) for m in u.members])


def image_union(e: SuperOp, u: SubspaceUnion) -> SubspaceUnion:
    return SubspaceUnion(e.dim_out, [image(e, m) for m in u.members])


# ----------------------------------------------------------------------
# matrix-representation arithmetic (for composed and powered channels)


@dataclass(frozen=True)
class MatrixRep:
    """A channel given only by its matrix representation on vectorized states."""

    m: Mat

    @property
    def dim(self) -> int:
        return math.isqrt(self.m.rows)

    def apply(self, a: Mat) -> Mat:
        return unvec(self.m @ vec(a), self.dim)

    def dual_apply(self, a: Mat) -> Mat:
        """The dual channel on operators: vec(E*(A)) = M† vec(A)."""
        return unvec(self.m.dagger() @ vec(a), self.dim)

    def after(self, inner: "MatrixRep") -> "MatrixRep":
        return MatrixRep(self.m @ inner.m)

    def power(self, k: int) -> "MatrixRep":
        result = Mat.eye(self.m.rows)
        base = self.m
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return MatrixRep(result)

    def preimage(self, p: Subspace) -> Subspace:
        pulled = self.dual_apply(p.complement().projector)
        return support(pulled, validate=False).complement()

    def image(self, p: Subspace) -> Subspace:
        if p.is_zero():
            return Subspace.zero(self.dim)
        return support(self.apply(p.projector), validate=False)

    def preimage_union(self, u: SubspaceUnion) -> SubspaceUnion:
        return SubspaceUnion(self.dim, [self.preimage(m) for m in u.members])

    def image_union(self, u: SubspaceUnion) -> SubspaceUnion:
        return SubspaceUnion(self.dim, [self.image(m) for m in u.members])
