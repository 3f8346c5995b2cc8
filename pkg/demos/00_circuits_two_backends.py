#!/usr/bin/env python3
# Two circuit backends, one contract: the signed tableau is the exact
# oracle; the Pauli-frame engine propagates error frames for batches of
# Monte Carlo trials. A fault injected at any location produces identical
# outcome flips in both.

import numpy as np

from decint import circuit as circ
from decint.circuit import Circuit, FrameBatch, FrameRunner, Gate, LocationFault
from decint.noise import NoiseParams
from decint.tableau import Tableau

# Build a small syndrome-style circuit: prepare a GHZ pair of parities and
# measure everything; ideal outcomes are deterministic.
wires = ["q0", "q1", "q2"]
c = Circuit(wires)
body = [
    [Gate("h", ("q0",)), Gate("idle", ("q1",)), Gate("idle", ("q2",))],
    [Gate("cnot", ("q0", "q1")), Gate("idle", ("q2",))],
    [Gate("cnot", ("q1", "q2")), Gate("idle", ("q0",))],
]
for layer in body + body[::-1]:  # each layer is self-inverse
    c.add_layer(layer)
c.add_layer([Gate("measure", (w,), out=f"m{w}") for w in wires])
print("circuit JSON:")
print(c.to_json()[:200], "...")

_, ideal = circ.run_ideal(c, Tableau.zero_state(wires))
print("\nideal outcomes:", ideal)

# Inject an X fault on the second-layer CNOT's output and compare backends.
fault = LocationFault(x=(1, 0), z=(0, 0))
_, noisy = circ.run_noisy(c, Tableau.zero_state(wires), faults={(1, 0): fault})
batch = FrameBatch(wires, 1)
FrameRunner(NoiseParams(delta=0.0, seed=0)).run(
    c, batch, noisy=False, forced_faults={(1, 0): fault}
)
print("tableau outcomes with fault:", noisy)
print("frame-predicted flips:      ", {k: int(v[0]) for k, v in batch.flips.items()})

# Frames compose linearly, so conjugation is a group action:
fx, fz, _ = circ.propagate_frame(c, np.array([1, 0, 0], np.uint8), np.zeros(3, np.uint8))
print("\nX on q0 conjugated through the circuit -> x:", fx, "z:", fz)

# Bulk noise: 100k trials of the same circuit at delta = 0.01 in one call.
batch = FrameBatch(wires, 100_000)
FrameRunner(NoiseParams(delta=0.01, seed=5)).run(c, batch)
flips = np.stack([batch.flips[f"m{w}"] for w in wires], axis=1)
print(f"\n100k-trial flip marginals at delta=0.01: {flips.mean(axis=0).round(4)}")
print("census of residual frames per wire:",
      circ.weight_census(batch, {w: [w] for w in wires})["q0"].mean().round(4))
