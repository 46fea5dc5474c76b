# Exact states, channels and the subspace lattice
# ------------------------------------------------
# Everything in this library that feeds a verdict is computed in exact
# rational-complex arithmetic.  This script walks through the basic objects:
# density matrices, Kraus channels, supports and the lattice of subspaces.

from fractions import Fraction

from qtl import Mat, SuperOp, Subspace, support, satisfies

# |-><-| as an exact density matrix: entries are "p/q" literals
minus = Mat.from_rows([["1/2", "-1/2"], ["-1/2", "1/2"]])
print("state |-><-| =", minus)
print("trace:", minus.trace())

# The Hadamard rotation has irrational entries, but the channel it induces
# does not: sqrt(1/2) * [[1,1],[1,-1]] conjugation has a rational Kraus set.
hadamard = SuperOp.from_scaled_unitary(Mat.from_rows([[1, 1], [1, -1]]), Fraction(1, 2))
print("\nHadamard channel Kraus operators:", len(hadamard.kraus))
print("H(|-><-|) =", hadamard.apply(minus))  # exactly |1><1|

# Supports are column spaces, computed exactly
plus = Mat.from_rows([["1/2", "1/2"], ["1/2", "1/2"]])
line = support(plus)
print("\nsupp(|+><+|) is a line:", line)
print("|+><+| satisfies its own support:", satisfies(plus, line))
print("|+><+| inside span|0>:", satisfies(plus, Subspace.from_vectors(2, [[1, 0]])))

# The lattice: meet is intersection, join is span, complement is orthogonal
a = Subspace.from_vectors(2, [[1, 0]])
b = Subspace.from_vectors(2, [[1, 1]])
print("\nmeet dim:", a.meet(b).dim, " join dim:", a.join(b).dim)
print("complement of span{(1,1)}:", b.complement())
print("double complement returns the original:", b.complement().complement() == b)

# Measurement channels move probability onto classical outcomes exactly
damp = SuperOp([Mat.from_rows([[1, 0], [0, 0]]), Mat.from_rows([[0, 1], [0, 0]])])
print("\nreset channel on |+><+|:", damp.apply(plus))
print("its matrix representation:\n", damp.matrix_rep())
