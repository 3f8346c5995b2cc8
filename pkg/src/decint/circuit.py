"""Layered Clifford circuit IR plus two execution backends.

The gate set is {idle, init0, measure-Z, H, CNOT, X/Y/Z, classically
controlled Pauli, discard}. The signed-tableau backend is the exact oracle;
the Pauli-frame backend propagates error frames for batches of Monte Carlo
trials against cached reference outcomes. Classical decoder calls are not
gates: they run as callbacks between circuit fragments (see interface.py).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from .noise import STREAM_CIRCUIT, NoiseParams, rng_stream
from .tableau import Tableau

UNITARY_GATES = {"h", "cnot", "x", "y", "z", "idle", "cpauli"}
GATE_ARITY = {
    "idle": 1,
    "init0": 1,
    "measure": 1,
    "h": 1,
    "cnot": 2,
    "x": 1,
    "y": 1,
    "z": 1,
    "cpauli": 1,
    "discard": 1,
}


@dataclass(frozen=True)
class Gate:
    name: str
    wires: tuple
    out: Optional[str] = None      # classical outcome label (measure)
    pauli: Optional[str] = None    # pauli kind for cpauli: "x" | "y" | "z"
    control: Optional[str] = None  # classical control label for cpauli

    def __post_init__(self):
        if self.name not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.wires) != GATE_ARITY[self.name]:
            raise ValueError(f"{self.name} arity mismatch: {self.wires}")
        if self.name == "measure" and self.out is None:
            raise ValueError("measure needs an outcome label")
        if self.name == "cpauli" and (self.pauli not in ("x", "y", "z") or self.control is None):
            raise ValueError("cpauli needs a pauli kind and a classical control")


class Circuit:
    """A depth-d circuit: a list of layers of gates over labelled wires."""

    def __init__(self, wires: Sequence[Hashable], layers: Optional[list[list[Gate]]] = None):
        self.wires = list(wires)
        self._index = {w: i for i, w in enumerate(self.wires)}
        self.layers: list[list[Gate]] = layers or []
        if len(self._index) != len(self.wires):
            raise ValueError("duplicate wire labels")

    def add_layer(self, gates: Iterable[Gate]) -> "Circuit":
        gates = list(gates)
        seen = set()
        for g in gates:
            for w in g.wires:
                if w not in self._index:
                    raise ValueError(f"gate on unknown wire {w!r}")
                if w in seen:
                    raise ValueError(f"wire {w!r} used twice in one layer")
                seen.add(w)
        self.layers.append(gates)
        return self

    @property
    def depth(self) -> int:
        return len(self.layers)

    def locations(self) -> list[tuple[int, int]]:
        return [(li, gi) for li, layer in enumerate(self.layers) for gi in range(len(layer))]

    @property
    def n_locations(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def measurement_labels(self) -> list[str]:
        return [g.out for layer in self.layers for g in layer if g.name == "measure"]

    def validate(self) -> None:
        """Raise on malformed circuits (overlap and arity are checked on add)."""
        known: set[str] = set()
        for layer in self.layers:
            produced = set()
            for g in layer:
                if g.name == "cpauli" and g.control not in known:
                    raise ValueError(f"cpauli control {g.control!r} precedes its measurement")
                if g.name == "measure":
                    if g.out in known:
                        raise ValueError(f"duplicate outcome label {g.out!r}")
                    produced.add(g.out)
            known |= produced

    # -- serialization --------------------------------------------------------

    def to_json(self) -> str:
        def enc(g: Gate) -> dict:
            if g.name == "measure":
                return {"gate": g.name, "in": [str(g.wires[0])], "out": [g.out]}
            if g.name == "init0":
                return {"gate": g.name, "in": [], "out": [str(g.wires[0])]}
            if g.name == "cpauli":
                return {
                    "gate": f"c{g.pauli}",
                    "in": [g.control, str(g.wires[0])],
                    "out": [str(g.wires[0])],
                }
            return {
                "gate": g.name,
                "in": [str(w) for w in g.wires],
                "out": [str(w) for w in g.wires] if g.name != "discard" else [],
            }

        return json.dumps(
            {
                "wires": [str(w) for w in self.wires],
                "layers": [[enc(g) for g in layer] for layer in self.layers],
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        obj = json.loads(text)
        circ = cls(obj["wires"])
        for layer in obj["layers"]:
            gates = []
            for g in layer:
                name = g["gate"]
                if name == "measure":
                    gates.append(Gate("measure", (g["in"][0],), out=g["out"][0]))
                elif name == "init0":
                    gates.append(Gate("init0", (g["out"][0],)))
                elif name in ("cx", "cy", "cz") and len(g["in"]) == 2:
                    gates.append(
                        Gate("cpauli", (g["in"][1],), pauli=name[1], control=g["in"][0])
                    )
                else:
                    gates.append(Gate(name, tuple(g["in"])))
            circ.add_layer(gates)
        return circ


# -- fault model --------------------------------------------------------------


@dataclass(frozen=True)
class LocationFault:
    """Sampled Pauli-twirled fault at one location.

    For measurements the fault is an outcome flip (noise pushed before the
    ideal readout); otherwise x/z masks over the gate's wires, applied after
    the ideal gate.
    """

    x: tuple[int, ...] = ()
    z: tuple[int, ...] = ()
    flip: bool = False


def sample_location_fault(gate: Gate, rng: np.random.Generator) -> LocationFault:
    """Uniform nontrivial Pauli on the gate support; flip for measurements."""
    if gate.name == "measure":
        return LocationFault(flip=True)
    k = len(gate.wires)
    code = int(rng.integers(1, 4**k))  # nonzero -> nontrivial
    xs, zs = [], []
    for _ in range(k):
        part = code % 4
        xs.append(1 if part in (1, 3) else 0)
        zs.append(1 if part in (2, 3) else 0)
        code //= 4
    return LocationFault(x=tuple(xs), z=tuple(zs))


# -- tableau backend ------------------------------------------------------------


def run_ideal(
    circuit: Circuit, state: Tableau, rng: Optional[np.random.Generator] = None
) -> tuple[Tableau, dict[str, int]]:
    """Exact stabilizer evolution; random outcomes drawn from `rng`."""
    return run_noisy(circuit, state, faults=None, rng=rng)


def run_noisy(
    circuit: Circuit,
    state: Tableau,
    faults: Optional[dict[tuple[int, int], LocationFault]] = None,
    rng: Optional[np.random.Generator] = None,
    outcomes: Optional[dict[str, int]] = None,
) -> tuple[Tableau, dict[str, int]]:
    """Tableau execution with explicit location faults.

    `faults` maps (layer, gate) -> LocationFault; missing locations run
    ideally. The input tableau is mutated and returned.
    """
    circuit.validate()
    faults = faults or {}
    outcomes = outcomes if outcomes is not None else {}
    for li, layer in enumerate(circuit.layers):
        for gi, g in enumerate(layer):
            fault = faults.get((li, gi))
            _apply_gate_tableau(state, g, outcomes, rng)
            if fault is None or g.name == "discard":
                continue
            if g.name == "measure":
                if fault.flip:
                    outcomes[g.out] ^= 1
            else:
                for w, fx, fz in zip(g.wires, fault.x, fault.z):
                    q = state.index(w)
                    xb = np.zeros(state.n, np.uint8)
                    zb = np.zeros(state.n, np.uint8)
                    xb[q], zb[q] = fx, fz
                    state.apply_pauli(xb, zb)
    return state, outcomes


def _apply_gate_tableau(state: Tableau, g: Gate, outcomes: dict, rng):
    if g.name == "idle":
        return
    if g.name == "h":
        state.apply_h(g.wires[0])
    elif g.name == "cnot":
        state.apply_cnot(g.wires[0], g.wires[1])
    elif g.name == "x":
        state.apply_x(g.wires[0])
    elif g.name == "y":
        state.apply_y(g.wires[0])
    elif g.name == "z":
        state.apply_z(g.wires[0])
    elif g.name == "cpauli":
        if outcomes.get(g.control, 0):
            getattr(state, f"apply_{g.pauli}")(g.wires[0])
    elif g.name == "init0":
        state.reset_zero(g.wires[0], rng=rng)
    elif g.name == "measure":
        outcome, _ = state.measure_z(g.wires[0], rng=rng)
        outcomes[g.out] = outcome
    elif g.name == "discard":
        state.measure_z(g.wires[0], rng=rng)
    else:  # pragma: no cover
        raise ValueError(g.name)


# -- Pauli frame backend ---------------------------------------------------------


class FrameBatch:
    """Pauli error frames for a batch of trials over a fixed wire set.

    x/z are (trials, wires) uint8 arrays; `flips` maps each measurement
    label to the per-trial outcome flip relative to the reference run.
    """

    def __init__(self, wires: Sequence[Hashable], trials: int):
        self.wires = list(wires)
        self.index = {w: i for i, w in enumerate(self.wires)}
        self.trials = trials
        self.x = np.zeros((trials, len(self.wires)), dtype=np.uint8)
        self.z = np.zeros_like(self.x)
        self.flips: dict[str, np.ndarray] = {}

    def columns(self, wires: Sequence[Hashable]) -> np.ndarray:
        return np.array([self.index[w] for w in wires], dtype=np.intp)

    def inject(self, wires: Sequence[Hashable], x: np.ndarray, z: np.ndarray):
        cols = self.columns(wires)
        self.x[:, cols] ^= x.astype(np.uint8)
        self.z[:, cols] ^= z.astype(np.uint8)

    def weight_per_trial(self, wires: Sequence[Hashable]) -> np.ndarray:
        cols = self.columns(wires)
        return ((self.x[:, cols] | self.z[:, cols]) != 0).sum(axis=1)


def weight_census(batch: FrameBatch, blocks: dict[str, Sequence[Hashable]]) -> dict[str, np.ndarray]:
    """Per-block frame support sizes; blocks must partition the wires."""
    seen: list = []
    for ws in blocks.values():
        seen.extend(ws)
    if sorted(map(str, seen)) != sorted(map(str, batch.wires)):
        raise ValueError("blocks must partition the wire set")
    return {name: batch.weight_per_trial(ws) for name, ws in blocks.items()}


class FrameRunner:
    """Propagates frame batches through circuits, injecting sampled faults.

    Fault randomness is keyed by (seed, STREAM_CIRCUIT, circuit_tag,
    location, chunk), so results do not depend on how trials are chunked
    across workers. `circuit_tag` distinguishes repeated fragments.
    """

    def __init__(self, params: NoiseParams, chunk: int = 0):
        self.params = params
        self.chunk = chunk

    def _loc_rng(self, tag: int, loc: int) -> np.random.Generator:
        return rng_stream(self.params.seed, STREAM_CIRCUIT, tag, loc, self.chunk)

    def run(
        self,
        circuit: Circuit,
        batch: FrameBatch,
        tag: int = 0,
        noisy: bool = True,
        forced_faults: Optional[dict[tuple[int, int], LocationFault]] = None,
    ) -> FrameBatch:
        delta = self.params.delta if noisy else 0.0
        loc = 0
        for li, layer in enumerate(circuit.layers):
            for gi, g in enumerate(layer):
                _apply_gate_frame(batch, g)
                forced = (forced_faults or {}).get((li, gi))
                if forced is not None and g.name != "discard":
                    _apply_forced_fault(batch, g, forced)
                if delta > 0.0 and g.name != "discard":
                    rng = self._loc_rng(tag, loc)
                    mask = rng.random(batch.trials) < delta
                    if mask.any():
                        _apply_sampled_faults(batch, g, mask, rng)
                loc += 1
        return batch


def _apply_gate_frame(batch: FrameBatch, g: Gate):
    ix = batch.index
    if g.name in ("idle", "x", "y", "z"):
        return  # fixed Paulis commute with the frame up to phase
    if g.name == "h":
        q = ix[g.wires[0]]
        batch.x[:, q], batch.z[:, q] = batch.z[:, q].copy(), batch.x[:, q].copy()
    elif g.name == "cnot":
        c, t = ix[g.wires[0]], ix[g.wires[1]]
        batch.x[:, t] ^= batch.x[:, c]
        batch.z[:, c] ^= batch.z[:, t]
    elif g.name == "cpauli":
        # Control bit differs from the reference run where its flip is set.
        flip = batch.flips.get(g.control)
        if flip is not None and flip.any():
            q = ix[g.wires[0]]
            if g.pauli in ("x", "y"):
                batch.x[:, q] ^= flip
            if g.pauli in ("z", "y"):
                batch.z[:, q] ^= flip
    elif g.name == "measure":
        q = ix[g.wires[0]]
        batch.flips[g.out] = batch.x[:, q].copy()
        batch.z[:, q] = 0
    elif g.name in ("init0", "discard"):
        q = ix[g.wires[0]]
        batch.x[:, q] = 0
        batch.z[:, q] = 0
    else:  # pragma: no cover
        raise ValueError(g.name)


def _apply_forced_fault(batch: FrameBatch, g: Gate, fault: LocationFault):
    if g.name == "measure":
        if fault.flip:
            batch.flips[g.out] ^= 1
        return
    for w, fx, fz in zip(g.wires, fault.x, fault.z):
        q = batch.index[w]
        batch.x[:, q] ^= fx
        batch.z[:, q] ^= fz


def propagate_frame(
    circuit: Circuit, x_bits: np.ndarray, z_bits: np.ndarray
) -> tuple[np.ndarray, np.ndarray, dict[str, int]]:
    """Conjugate a single Pauli frame through the circuit, noiselessly.

    Returns the final (x, z) frame over circuit.wires plus the measurement
    outcome flips the frame induces.
    """
    batch = FrameBatch(circuit.wires, 1)
    batch.inject(circuit.wires, np.asarray([x_bits], dtype=np.uint8), np.asarray([z_bits], dtype=np.uint8))
    runner = FrameRunner(NoiseParams(delta=0.0, seed=0))
    runner.run(circuit, batch, noisy=False)
    flips = {k: int(v[0]) for k, v in batch.flips.items()}
    return batch.x[0].copy(), batch.z[0].copy(), flips


def _apply_sampled_faults(batch: FrameBatch, g: Gate, mask: np.ndarray, rng: np.random.Generator):
    """Pauli-twirled faults on the masked trials (flip for measurements)."""
    if g.name == "measure":
        batch.flips[g.out] ^= mask.astype(np.uint8)
        return
    k = len(g.wires)
    codes = rng.integers(1, 4**k, size=batch.trials)
    for j, w in enumerate(g.wires):
        part = (codes // (4**j)) % 4
        q = batch.index[w]
        batch.x[:, q] ^= (mask & ((part == 1) | (part == 3))).astype(np.uint8)
        batch.z[:, q] ^= (mask & ((part == 2) | (part == 3))).astype(np.uint8)
