#!/usr/bin/env python3
# The noise model: independent location faults, local stochastic samples,
# composition, and the low-weight tail bound with its exact verification.

import math
from fractions import Fraction

from decint import noise
from decint.noise import NoiseParams

# --- fault patterns over circuit locations ---------------------------------------
params = NoiseParams(delta=0.1, seed=42)
fp = noise.sample_fault_pattern(10_000, params)
print(f"faulty fraction at delta=0.1: {len(fp)/10_000:.4f}")

# Same seed, same pattern; the samplers are pure functions of their keys.
assert noise.sample_fault_pattern(100, params, trial=5) == noise.sample_fault_pattern(
    100, params, trial=5
)

# --- local stochastic channels ----------------------------------------------------
s = noise.sample_ls_iid(qubits=12, delta=0.3, seed=7)
print("ls support:", s.support, "assignment:", s.paulis)

# The i.i.d. instance saturates the defining inclusion bound with equality:
x, z = noise.sample_ls_bits(4, 0.2, seed=1, trials=200_000)
sup = (x | z) != 0
print(f"Pr(q0,q1 both hit): {float((sup[:,0] & sup[:,1]).mean()):.4f} "
      f"(exactly delta^2 = {0.2**2})")

# Composition certifies the sum of the parameters.
print("compose(0.01, 0.02) =", noise.compose_ls(0.01, 0.02))

# --- the overflow tail bound -------------------------------------------------------
# Probability that a parameter-delta channel touches more than mu*n of n
# qubits: h * (2^{h2(mu)/mu} delta)^{mu n}.
for n in (20, 50):
    tb = noise.tail_bound(mu=0.2, delta=0.01, n=n, h=1)
    sizes = noise.support_sizes(n, 0.01, 10**6, seed=3)
    tau_hat = float((sizes > 0.2 * n).mean())
    print(f"n={n}: analytic bound {tb.value:.3e}  empirical overflow {tau_hat:.3e}")

# Exact-arithmetic domination: the binomial tail is a Fraction, the bound is
# certified at 60 digits.
ok, tail, bound = noise.tail_bound_dominates(Fraction(1, 5), Fraction(1, 100), 50, 1)
print(f"exact tail {float(tail):.3e} <= bound {bound:.3e}: {ok}")

# Truncation into the low-weight branch:
samples = [noise.sample_ls_iid(50, 0.01, seed=9, trial=t) for t in range(2000)]
res = noise.ls_truncate(samples, mu=0.2, n=50)
print(f"overflow frequency over {res.total} samples: {res.tau_hat:.4f}")
