"""Exact complex-rational matrices plus the one numeric kernel of the package.

Everything that feeds the subspace lattice and the program semantics stays in
exact arithmetic: a matrix is a pair of integer numerator grids (real and
imaginary parts, numpy object arrays so the integers are unbounded) over a
single positive denominator.  Rank, kernel and inverse run fraction-free
(Bareiss) over the Gaussian integers, so no rounding ever happens on that
path.

The only numeric computation lives in :func:`peripheral_split`, which
separates the eigenvalues of modulus (close to) one from the strictly
contracting rest of a channel's matrix representation.  Its output is
rationalized exactly (binary floats are rationals) so downstream consumers
can keep computing exactly against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    PreconditionViolated,
    SingularMatrix,
    ToleranceAmbiguity,
)

Rational = Fraction


def parse_rational(text) -> Fraction:
    """Parse "p/q" or "p" (also plain ints) into an exact rational."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class CRat:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if isinstance(re, Fraction) else Fraction(re))
        object.__setattr__(self, "im", im if isinstance(im, Fraction) else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("CRat is immutable")

    @staticmethod
    def coerce(value) -> "CRat":
        """Accept CRat, int, Fraction, "p/q" strings, [re, im] pairs, complex."""
        if isinstance(value, CRat):
            return value
        if isinstance(value, (int, Fraction)):
            return CRat(value)
        if isinstance(value, str):
            return CRat(parse_rational(value))
        if isinstance(value, complex):
            return CRat(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, float):
            return CRat(Fraction(value))
        if isinstance(value, (tuple, list)) and len(value) == 2:
            return CRat(parse_rational(value[0]), parse_rational(value[1]))
        raise TypeError(f"cannot interpret {value!r} as a complex rational")

    def __add__(self, other):
        other = CRat.coerce(other)
        return CRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = CRat.coerce(other)
        return CRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return CRat.coerce(other) - self

    def __mul__(self, other):
        other = CRat.coerce(other)
        return CRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = CRat.coerce(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero CRat")
        return CRat(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __neg__(self):
        return CRat(-self.re, -self.im)

    def conjugate(self) -> "CRat":
        return CRat(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        try:
            other = CRat.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return format_rational(self.re)
        if self.re == 0:
            return f"{format_rational(self.im)}i"
        sign = "+" if self.im > 0 else "-"
        return f"{format_rational(self.re)}{sign}{format_rational(abs(self.im))}i"


def _gcd_reduce(num_re, num_im, den):
    """Divide out the gcd of all numerators and the denominator."""
    g = den
    for v in num_re.flat:
        if g == 1:
            return num_re, num_im, den
        g = math.gcd(g, v if v >= 0 else -v)
    for v in num_im.flat:
        if g == 1:
            return num_re, num_im, den
        g = math.gcd(g, v if v >= 0 else -v)
    if g > 1:
        num_re = num_re // g
        num_im = num_im // g
        den = den // g
    return num_re, num_im, den


class Mat:
    """Dense matrix with exact complex-rational entries.

    Stored as integer numerator grids over one positive denominator; all
    arithmetic is exact.  Instances are immutable by convention: no method
    mutates ``self``.
    """

    __slots__ = ("num_re", "num_im", "den", "rows", "cols", "_key")

    def __init__(self, num_re, num_im, den=1, _normalized=False):
        num_re = np.asarray(num_re, dtype=object)
        num_im = np.asarray(num_im, dtype=object)
        if num_re.shape != num_im.shape or num_re.ndim != 2:
            raise DimensionMismatch("numerator grids must be equal 2-d shapes")
        if den <= 0:
            num_re, num_im, den = -num_re, -num_im, -den
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if not _normalized:
            num_re, num_im, den = _gcd_reduce(num_re, num_im, den)
        object.__setattr__(self, "num_re", num_re)
        object.__setattr__(self, "num_im", num_im)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "rows", num_re.shape[0])
        object.__setattr__(self, "cols", num_re.shape[1])
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("Mat is immutable")

    # ------------------------------------------------------------------
    # constructors

    @staticmethod
    def from_rows(rows) -> "Mat":
        """Build from nested entries (ints, Fractions, "p/q", [re,im], CRat)."""
        grid = [[CRat.coerce(entry) for entry in row] for row in rows]
        nrows = len(grid)
        ncols = len(grid[0]) if nrows else 0
        if any(len(row) != ncols for row in grid):
            raise DimensionMismatch("ragged rows")
        den = 1
        for row in grid:
            for e in row:
                den = den * e.re.denominator // math.gcd(den, e.re.denominator)
                den = den * e.im.denominator // math.gcd(den, e.im.denominator)
        num_re = np.empty((nrows, ncols), dtype=object)
        num_im = np.empty((nrows, ncols), dtype=object)
        for i, row in enumerate(grid):
            for j, e in enumerate(row):
                num_re[i, j] = int(e.re * den)
                num_im[i, j] = int(e.im * den)
        return Mat(num_re, num_im, den)

    @staticmethod
    def zeros(rows, cols=None) -> "Mat":
        cols = rows if cols is None else cols
        z = np.zeros((rows, cols), dtype=object)
        return Mat(z, z.copy(), 1, _normalized=True)

    @staticmethod
    def eye(n) -> "Mat":
        re = np.zeros((n, n), dtype=object)
        for i in range(n):
            re[i, i] = 1
        return Mat(re, np.zeros((n, n), dtype=object), 1, _normalized=True)

    @staticmethod
    def unit(n, i, j) -> "Mat":
        """The n x n matrix with a single 1 at (i, j)."""
        re = np.zeros((n, n), dtype=object)
        re[i, j] = 1
        return Mat(re, np.zeros((n, n), dtype=object), 1, _normalized=True)

    @staticmethod
    def column(entries) -> "Mat":
        return Mat.from_rows([[e] for e in entries])

    @staticmethod
    def from_complex(array, max_denominator=None) -> "Mat":
        """Exactly rationalize a float/complex array (binary floats are rationals).

        With ``max_denominator`` the entries are rounded to the nearest
        rational of bounded denominator instead.
        """
        array = np.asarray(array, dtype=complex)

        def conv(x):
            f = Fraction(x)
            if max_denominator is not None:
                f = f.limit_denominator(max_denominator)
            return f

        rows = [
            [CRat(conv(array[i, j].real), conv(array[i, j].imag)) for j in range(array.shape[1])]
            for i in range(array.shape[0])
        ]
        return Mat.from_rows(rows)

    # ------------------------------------------------------------------
    # element access

    def entry(self, i, j) -> CRat:
        return CRat(Fraction(self.num_re[i, j], self.den), Fraction(self.num_im[i, j], self.den))

    def entries(self):
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def column_vectors(self):
        return [self[:, j] for j in range(self.cols)]

    def __getitem__(self, idx):
        sub_re = self.num_re[idx]
        sub_im = self.num_im[idx]
        if sub_re.ndim == 1:
            sub_re = sub_re.reshape(-1, 1)
            sub_im = sub_im.reshape(-1, 1)
        return Mat(sub_re.copy(), sub_im.copy(), self.den)

    # ------------------------------------------------------------------
    # arithmetic

    def _coerce_scalar(self, other):
        return CRat.coerce(other)

    def __add__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shape mismatch in addition")
        g = math.gcd(self.den, other.den)
        ka, kb = other.den // g, self.den // g
        return Mat(
            self.num_re * ka + other.num_re * kb,
            self.num_im * ka + other.num_im * kb,
            self.den * ka,
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Mat(-self.num_re, -self.num_im, self.den, _normalized=True)

    def __mul__(self, scalar):
        s = self._coerce_scalar(scalar)
        d = self.den * s.re.denominator * s.im.denominator
        are = s.re.numerator * s.im.denominator
        aim = s.im.numerator * s.re.denominator
        return Mat(
            self.num_re * are - self.num_im * aim,
            self.num_re * aim + self.num_im * are,
            d,
        )

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        re = np.dot(self.num_re, other.num_re) - np.dot(self.num_im, other.num_im)
        im = np.dot(self.num_re, other.num_im) + np.dot(self.num_im, other.num_re)
        return Mat(re, im, self.den * other.den)

    def dagger(self) -> "Mat":
        return Mat(self.num_re.T.copy(), -self.num_im.T.copy(), self.den, _normalized=True)

    def conj(self) -> "Mat":
        return Mat(self.num_re.copy(), -self.num_im.copy(), self.den, _normalized=True)

    def transpose(self) -> "Mat":
        return Mat(self.num_re.T.copy(), self.num_im.T.copy(), self.den, _normalized=True)

    def trace(self) -> CRat:
        tr_re = sum(self.num_re[i, i] for i in range(min(self.rows, self.cols)))
        tr_im = sum(self.num_im[i, i] for i in range(min(self.rows, self.cols)))
        return CRat(Fraction(tr_re, self.den), Fraction(tr_im, self.den))

    def hstack(self, other: "Mat") -> "Mat":
        if self.rows != other.rows:
            raise DimensionMismatch("row mismatch in hstack")
        g = math.gcd(self.den, other.den)
        ka, kb = other.den // g, self.den // g
        return Mat(
            np.hstack([self.num_re * ka, other.num_re * kb]),
            np.hstack([self.num_im * ka, other.num_im * kb]),
            self.den * ka,
        )

    def vstack(self, other: "Mat") -> "Mat":
        if self.cols != other.cols:
            raise DimensionMismatch("column mismatch in vstack")
        g = math.gcd(self.den, other.den)
        ka, kb = other.den // g, self.den // g
        return Mat(
            np.vstack([self.num_re * ka, other.num_re * kb]),
            np.vstack([self.num_im * ka, other.num_im * kb]),
            self.den * ka,
        )

    # ------------------------------------------------------------------
    # predicates

    def is_zero(self) -> bool:
        return not (self.num_re.any() or self.num_im.any())

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_hermitian(self) -> bool:
        return (
            self.is_square()
            and np.array_equal(self.num_re, self.num_re.T)
            and np.array_equal(self.num_im, -self.num_im.T)
        )

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return (
            self.den == other.den
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.num_re, other.num_re)
            and np.array_equal(self.num_im, other.num_im)
        )

    def key(self):
        """Hashable canonical key (entries are normalized at construction)."""
        if self._key is None:
            object.__setattr__(
                self,
                "_key",
                (
                    self.rows,
                    self.cols,
                    self.den,
                    tuple(self.num_re.flat),
                    tuple(self.num_im.flat),
                ),
            )
        return self._key

    def __hash__(self):
        return hash(self.key())

    # ------------------------------------------------------------------
    # conversion

    def to_complex(self) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=complex)
        den = self.den
        # fast path: denominator and numerators fit in floats
        if den < 2**500:
            fd = float(den)
            for i in range(self.rows):
                for j in range(self.cols):
                    re, im = self.num_re[i, j], self.num_im[i, j]
                    if -(2**500) < re < 2**500 and -(2**500) < im < 2**500:
                        out[i, j] = complex(re / fd, im / fd)
                    else:
                        out[i, j] = complex(
                            float(Fraction(re, den)), float(Fraction(im, den))
                        )
            return out
        for i in range(self.rows):
            for j in range(self.cols):
                out[i, j] = complex(
                    float(Fraction(self.num_re[i, j], den)),
                    float(Fraction(self.num_im[i, j], den)),
                )
        return out

    def __repr__(self):
        body = "; ".join(
            " ".join(repr(self.entry(i, j)) for j in range(self.cols)) for i in range(self.rows)
        )
        return f"Mat[{body}]"


def kron(a: Mat, b: Mat) -> Mat:
    """Exact Kronecker product."""
    re = np.kron(a.num_re, b.num_re) - np.kron(a.num_im, b.num_im)
    im = np.kron(a.num_re, b.num_im) + np.kron(a.num_im, b.num_re)
    return Mat(re, im, a.den * b.den)


def mat_sum(mats) -> Mat:
    """Exact sum of matrices with a single final normalization pass.

    Equivalent to folding ``+`` but avoids the per-addition gcd sweep, which
    dominates when accumulating many Kraus terms.
    """
    mats = list(mats)
    if not mats:
        raise ValueError("mat_sum needs at least one matrix")
    den = 1
    for m in mats:
        den = den * m.den // math.gcd(den, m.den)
    re = np.zeros((mats[0].rows, mats[0].cols), dtype=object)
    im = np.zeros((mats[0].rows, mats[0].cols), dtype=object)
    for m in mats:
        scale = den // m.den
        re = re + m.num_re * scale
        im = im + m.num_im * scale
    return Mat(re, im, den)


# ----------------------------------------------------------------------
# fraction-free elimination over the Gaussian integers


def _rows_as_pairs(m: Mat, augment_identity=False):
    rows = []
    n = m.rows
    for i in range(n):
        row = [(m.num_re[i, j], m.num_im[i, j]) for j in range(m.cols)]
        if augment_identity:
            row.extend((m.den, 0) if j == i else (0, 0) for j in range(n))
        rows.append(row)
    return rows


def _echelon(rows, width):
    """In-place Bareiss elimination; returns the list of (row, col) pivots.

    Works over the Gaussian integers: every division in the update formula
    is exact, so entries stay integer pairs with single-minor growth.
    """
    pivots = []
    prev_re, prev_im = 1, 0
    r = 0
    nrows = len(rows)
    for c in range(width):
        pr = None
        for i in range(r, nrows):
            e = rows[i][c]
            if e[0] or e[1]:
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            rows[r], rows[pr] = rows[pr], rows[r]
        pre, pim = rows[r][c]
        pn = prev_re * prev_re + prev_im * prev_im
        for i in range(r + 1, nrows):
            tre, tim = rows[i][c]
            row_i, row_r = rows[i], rows[r]
            for j in range(c, width):
                are, aim = row_i[j]
                bre, bim = row_r[j]
                # piv * a - t * b, then exact division by the previous pivot
                nre = pre * are - pim * aim - (tre * bre - tim * bim)
                nim = pre * aim + pim * are - (tre * bim + tim * bre)
                if pn == 1:
                    if prev_re == 1:
                        row_i[j] = (nre, nim)
                    else:  # previous pivot is a unit other than 1
                        qre = nre * prev_re + nim * prev_im
                        qim = nim * prev_re - nre * prev_im
                        row_i[j] = (qre, qim)
                else:
                    qre = (nre * prev_re + nim * prev_im) // pn
                    qim = (nim * prev_re - nre * prev_im) // pn
                    row_i[j] = (qre, qim)
            row_i[c] = (0, 0)
        pivots.append((r, c))
        prev_re, prev_im = pre, pim
        r += 1
        if r == nrows:
            break
    return pivots


def rank(m: Mat) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    rows = _rows_as_pairs(m)
    return len(_echelon(rows, m.cols))


def _crat_from_pair(pair):
    return CRat(Fraction(pair[0]), Fraction(pair[1]))


def kernel_basis(m: Mat):
    """Exact basis of the right null space, one column vector per free column.

    Returns an empty list exactly when the matrix is injective.
    """
    n_cols = m.cols
    if n_cols == 0:
        return []
    if m.rows == 0:
        return [Mat.column([CRat(1) if j == f else CRat(0) for j in range(n_cols)]) for f in range(n_cols)]
    rows = _rows_as_pairs(m)
    pivots = _echelon(rows, n_cols)
    pivot_cols = [c for _, c in pivots]
    pivot_set = set(pivot_cols)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis = []
    zero = CRat(0)
    for f in free_cols:
        v = [zero] * n_cols
        v[f] = CRat(1)
        for r, c in reversed(pivots):
            if c > f:
                continue
            acc = zero
            row = rows[r]
            for j in range(c + 1, n_cols):
                if v[j].is_zero():
                    continue
                e = row[j]
                if e[0] or e[1]:
                    acc = acc + _crat_from_pair(e) * v[j]
            v[c] = -acc / _crat_from_pair(row[c])
        basis.append(Mat.column(v))
    return basis


def invert(m: Mat) -> Mat:
    """Exact inverse; raises SingularMatrix when the rank is deficient."""
    if not m.is_square():
        raise DimensionMismatch("only square matrices can be inverted")
    n = m.rows
    if n == 0:
        return m
    rows = _rows_as_pairs(m, augment_identity=True)
    pivots = _echelon(rows, 2 * n)
    if len(pivots) < n or any(c >= n for _, c in pivots):
        raise SingularMatrix(f"matrix of rank {rank(m)} < {n}")
    zero = CRat(0)
    cols = []
    for k in range(n):
        x = [zero] * n
        for r, c in reversed(pivots):
            row = rows[r]
            acc = _crat_from_pair(row[n + k])
            for j in range(c + 1, n):
                if not x[j].is_zero():
                    e = row[j]
                    if e[0] or e[1]:
                        acc = acc - _crat_from_pair(e) * x[j]
            x[c] = acc / _crat_from_pair(row[c])
        cols.append(x)
    return Mat.from_rows([[cols[k][i] for k in range(n)] for i in range(n)])


def solve(a: Mat, b: Mat) -> Mat:
    """Exact solution of a x = b for square nonsingular a."""
    return invert(a) @ b


def is_psd(m: Mat) -> bool:
    """Exact positive-semidefiniteness test for a Hermitian matrix.

    Runs the Schur-complement (LDL-style) sweep in exact arithmetic: a zero
    diagonal pivot forces its whole row to vanish, a negative one is a
    certificate of failure.
    """
    if not m.is_hermitian():
        return False
    n = m.rows
    a = [[m.entry(i, j) for j in range(n)] for i in range(n)]
    for k in range(n):
        d = a[k][k]
        if d.im != 0:
            return False
        if d.re < 0:
            return False
        if d.re == 0:
            for j in range(k + 1, n):
                if not a[k][j].is_zero():
                    return False
            continue
        for i in range(k + 1, n):
            if a[i][k].is_zero():
                continue
            factor = a[i][k] / d
            for j in range(k + 1, n):
                a[i][j] = a[i][j] - factor * a[k][j]
        for j in range(k + 1, n):
            a[k][j] = CRat(0)
    return True


# ----------------------------------------------------------------------
# peripheral spectrum splitting (the numeric regime)


@dataclass(frozen=True)
class SpectralSplit:
    """Split of a (sub)stochastic channel matrix into peripheral and stable parts.

    ``peripheral_projector`` projects onto the span of eigenspaces with
    modulus within ``tolerance`` of one; ``stable_part`` is the input with
    that component removed, so its spectral radius is strictly below one.
    Both are exact rationalizations of the numeric computation.
    """

    peripheral_projector: Mat
    stable_part: Mat
    tolerance: float
    eigenvalues: list  # [(complex estimate, algebraic multiplicity)]

    @property
    def peripheral_eigenvalues(self):
        cut = 1.0 - self.tolerance
        return [(lam, mult) for lam, mult in self.eigenvalues if abs(lam) >= cut]


def _cluster_eigenvalues(values, tol=1e-7):
    clusters = []
    for lam in values:
        for idx, (rep, mult) in enumerate(clusters):
            if abs(lam - rep) <= tol:
                clusters[idx] = ((rep * mult + lam) / (mult + 1), mult + 1)
                break
        else:
            clusters.append((lam, 1))
    return [(complex(rep), mult) for rep, mult in clusters]


def peripheral_split(m: Mat, tolerance: float = 1e-9) -> SpectralSplit:
    """Separate the modulus-one spectral component of a channel matrix.

    The input must have spectral radius at most one (matrix representation of
    a trace-non-increasing channel).  Classification happens at the given
    tolerance; an eigenvalue modulus inside [1-2*tol, 1-tol/2] makes the
    classification unsafe and raises ToleranceAmbiguity.
    """
    if not m.is_square():
        raise DimensionMismatch("peripheral_split needs a square matrix")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    n = m.rows
    if n == 0:
        return SpectralSplit(m, m, tolerance, [])
    a = m.to_complex()
    cut = 1.0 - tolerance
    t, z, sdim = scipy.linalg.schur(a, output="complex", sort=lambda lam: abs(lam) >= cut)
    eigs = np.diag(t)
    radius = max(abs(eigs))
    if radius > 1.0 + max(tolerance, 64 * np.finfo(float).eps * max(1.0, radius)):
        raise PreconditionViolated(
            f"spectral radius {radius} exceeds 1; not a trace-non-increasing channel"
        )
    lo, hi = 1.0 - 2.0 * tolerance, 1.0 - 0.5 * tolerance
    for lam in eigs:
        if lo <= abs(lam) <= hi:
            raise ToleranceAmbiguity(
                f"eigenvalue modulus {abs(lam)} inside the unsafe band [{lo}, {hi}]"
            )
    k = sdim
    if k == 0:
        projector = np.zeros((n, n), dtype=complex)
    elif k == n:
        projector = np.eye(n, dtype=complex)
    else:
        y = scipy.linalg.solve_sylvester(t[:k, :k], -t[k:, k:], t[:k, k:])
        r = np.zeros((n, n), dtype=complex)
        r[:k, :k] = np.eye(k)
        r[:k, k:] = y
        projector = z @ r @ z.conj().T
    stable = a @ (np.eye(n) - projector)
    # consistency of the numeric split before rationalizing it
    scale = max(1.0, float(np.max(np.abs(projector))))
    if np.max(np.abs(projector @ projector - projector)) > 1e-7 * scale * scale:
        raise ToleranceAmbiguity("spectral projector failed the idempotency check")
    if np.max(np.abs(a @ projector - projector @ a)) > 1e-7 * scale:
        raise ToleranceAmbiguity("spectral projector does not commute with the input")
    if k < n:
        stable_radius = max(abs(np.linalg.eigvals(stable)))
        if stable_radius >= 1.0 - 0.5 * tolerance:
            raise ToleranceAmbiguity(
                f"stable part kept spectral radius {stable_radius}"
            )
    projector_mat = Mat.from_complex(projector)
    stable_mat = m - m @ projector_mat
    return SpectralSplit(
        peripheral_projector=projector_mat,
        stable_part=stable_mat,
        tolerance=tolerance,
        eigenvalues=_cluster_eigenvalues(list(eigs)),
    )


def multiplicative_order(lam: complex, bound: int, tolerance: float = 1e-8):
    """Smallest k <= bound with lam**k == 1 within tolerance, else None."""
    if abs(abs(lam) - 1.0) > tolerance:
        return None
    power = 1.0 + 0.0j
    for k in range(1, bound + 1):
        power *= lam
        if abs(power - 1.0) <= tolerance:
            return k
    return None
