#!/usr/bin/env python3
# Codes and families: the GF(2) substrate, CSS codes, and the shipped
# level-indexed family with its rate/doubling metadata.

import numpy as np

from decint import css, gf2
from decint.gf2 import BitMatrix, BitVector

# --- bit-packed GF(2) linear algebra ------------------------------------------
h = BitMatrix.from_rows(["1111"])  # the [[4,2,2]] check, both sectors
print("rank([1111]) =", gf2.rank(h))
print("kernel dimension =", gf2.nullspace_basis(h).nrows)  # even-weight space

# Coset minimum weight is the quantity error correction actually bounds:
v = BitVector.from_bits([1, 1, 1, 0])
print("min weight in 1110 + span{1111} =", gf2.coset_min_weight(h, v).weight)

# --- a CSS code from its checks ------------------------------------------------
code = css.c422()
print("\n[[4,2,2]]:", code)
print(code.validate())
print("distance:", code.min_distance())

# Logical representatives come out paired: LX_i anticommutes with LZ_j iff i=j.
print("LX:")
print(code.lx.to_dense())
print("LZ:")
print(code.lz.to_dense())

# Stabilizer-reduced weight: X on three qubits is one stabilizer away from
# a single-qubit error.
p = css.PauliOp(BitVector.from_bits([1, 1, 1, 0]), BitVector.zeros(4))
print("reduced weight of XXXI:", code.reduced_weight(p).weight)

# --- hypergraph products and the toy family -------------------------------------
fam = css.toy_family()
print("\ntoy family levels:")
for r in range(1, fam.depth + 1):
    c = fam.level(r)
    print(f"  r={r}: {c.name:12s} n={c.n:3d} m={c.m:2d} d={c.min_distance()}")
report = fam.validate()
print("family checks passed:", report.passed)

# Rate adjustment: freeze logical qubits down to the nearest power of two.
base3 = css.build_hgp(BitMatrix.from_rows(["110", "011"]), BitMatrix.from_rows(["1111"]))
print("\nbase code m =", base3.m, "-> frozen to m =", css.freeze_logicals(base3, 2).m)

# Encoded states are signed stabilizer tableaus; checks read 0 and logical
# Z operators read the encoded bits.
tab = fam.level(2).encode_state([1, 0])
lz0 = fam.level(2).lz.row(0).to_array()
print("logical Z_0 readout of |10_L>:", tab.expectation_z(np.zeros(4, np.uint8), lz0))
