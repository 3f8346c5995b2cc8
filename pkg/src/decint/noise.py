"""Stochastic circuit-level noise: fault patterns, local stochastic samples,
composition, and the low-weight tail bound.

Randomness is counter-based: every draw comes from a Philox stream keyed by
(master seed, purpose, location/trial indices), so samplers are pure
functions of their key and trivially parallel across trials and workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import mpmath
import numpy as np

# Stream purposes (mixed into Philox keys).
STREAM_FAULT_PATTERN = 1
STREAM_LS = 2
STREAM_CIRCUIT = 3
STREAM_ORACLE = 4
STREAM_TRIAL = 5
STREAM_TREE = 6

_MIX1 = 0x9E3779B97F4A7C15
_MIX2 = 0xBF58476D1CE4E5B9


def rng_stream(seed: int, *ids: int) -> np.random.Generator:
    """Independent, reproducible generator keyed by (seed, ids...)."""
    mix = 0
    for i, v in enumerate(ids):
        mix = (mix + (int(v) + 1) * ((_MIX1 if i % 2 == 0 else _MIX2) ** (i + 1))) % (1 << 64)
    key = np.array([int(seed) % (1 << 64), mix], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class NoiseParams:
    """Circuit-level noise configuration.

    `pauli_twirl` records that the arbitrary replacement channel is
    instantiated as its Pauli-twirled member (the simulable instance); it is
    carried into every report.
    """

    delta: float
    seed: int
    pauli_twirl: bool = True

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")

    def to_json(self) -> dict:
        return {"delta": self.delta, "seed": self.seed, "pauli_twirl": self.pauli_twirl}

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseParams":
        return cls(
            delta=float(obj["delta"]),
            seed=int(obj["seed"]),
            pauli_twirl=bool(obj.get("pauli_twirl", True)),
        )


@dataclass(frozen=True)
class FaultPattern:
    """Subset of circuit locations that are faulty in one execution."""

    locations: frozenset

    def __contains__(self, loc) -> bool:
        return loc in self.locations

    def __len__(self) -> int:
        return len(self.locations)


def sample_fault_pattern(
    locations: Union[int, Sequence], params: NoiseParams, trial: int = 0
) -> FaultPattern:
    """Each location independently faulty with probability delta."""
    labels = list(range(locations)) if isinstance(locations, int) else list(locations)
    rng = rng_stream(params.seed, STREAM_FAULT_PATTERN, trial)
    mask = rng.random(len(labels)) < params.delta
    return FaultPattern(frozenset(l for l, m in zip(labels, mask) if m))


PAULI_KINDS = ("X", "Z", "Y")


@dataclass(frozen=True)
class LocalStochasticSample:
    """Support set plus a nontrivial Pauli on each supported qubit."""

    n: int
    support: tuple[int, ...]
    paulis: tuple[str, ...]

    def __post_init__(self):
        if len(self.support) != len(self.paulis):
            raise ValueError("support/assignment length mismatch")

    def as_bits(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.zeros(self.n, dtype=np.uint8)
        z = np.zeros(self.n, dtype=np.uint8)
        for q, p in zip(self.support, self.paulis):
            if p in ("X", "Y"):
                x[q] = 1
            if p in ("Z", "Y"):
                z[q] = 1
        return x, z


def sample_ls_iid(qubits: int, delta: float, seed: int, trial: int = 0) -> LocalStochasticSample:
    """I.i.d. support with probability delta, uniform nontrivial Pauli on it.

    Satisfies Pr(T subset of A) = delta^|T| with equality.
    """
    rng = rng_stream(seed, STREAM_LS, trial)
    mask = rng.random(qubits) < delta
    kinds = rng.integers(0, 3, size=qubits)
    support = tuple(int(i) for i in np.nonzero(mask)[0])
    paulis = tuple(PAULI_KINDS[int(kinds[i])] for i in support)
    return LocalStochasticSample(qubits, support, paulis)


def sample_ls_bits(
    qubits: int, delta: float, seed: int, trials: int, stream: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Batched i.i.d. local stochastic samples as (x, z) bit arrays."""
    rng = rng_stream(seed, STREAM_LS, stream)
    mask = rng.random((trials, qubits)) < delta
    kinds = rng.integers(0, 3, size=(trials, qubits))
    x = (mask & (kinds != 1)).astype(np.uint8)  # X or Y
    z = (mask & (kinds != 0)).astype(np.uint8)  # Z or Y
    return x, z


def compose_ls(a_delta: float, b_delta: float) -> float:
    """Certified parameter of the composition: the sum, capped at 1."""
    return min(1.0, a_delta + b_delta)


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError("entropy argument outside [0, 1]")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


@dataclass(frozen=True)
class TailBound:
    value: float
    threshold_ok: bool  # delta < 2^{-h2(mu)/mu}
    mu: float
    delta: float
    n: int
    h: int


def tail_bound(mu: float, delta: float, n: int, h: int) -> TailBound:
    """Analytic overflow bound h * (2^{h2(mu)/mu} * delta)^{mu * n}.

    `threshold_ok` reports whether delta is below the decay threshold; the
    bound value is returned either way (it may exceed 1).
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    base = 2.0 ** (binary_entropy(mu) / mu) * delta
    return TailBound(
        value=h * base ** (mu * n),
        threshold_ok=base < 1.0,
        mu=mu,
        delta=delta,
        n=n,
        h=h,
    )


def binomial_tail_exact(n: int, delta: Fraction, t: int) -> Fraction:
    """Pr(Bin(n, delta) >= t) in exact rational arithmetic."""
    delta = Fraction(delta)
    total = Fraction(0)
    for k in range(t, n + 1):
        total += math.comb(n, k) * delta**k * (1 - delta) ** (n - k)
    return total


def tail_bound_dominates(
    mu: Fraction, delta: Fraction, n: int, h: int, dps: int = 60
) -> tuple[bool, Fraction, float]:
    """Certify exact binomial tail <= analytic bound for integer mu*n.

    The tail is an exact Fraction; the bound is evaluated at `dps` digits and
    shrunk by a 1e-40 relative margin so a True verdict is a genuine
    certificate (the bound itself is irrational).
    """
    mu = Fraction(mu)
    delta = Fraction(delta)
    t = mu * n
    if t.denominator != 1:
        raise ValueError("mu * n must be an integer on the verification grid")
    tail = binomial_tail_exact(n, delta, int(t))
    with mpmath.workdps(dps):
        mmu = mpmath.mpf(mu.numerator) / mu.denominator
        mdelta = mpmath.mpf(delta.numerator) / delta.denominator
        h2 = -mmu * mpmath.log(mmu, 2) - (1 - mmu) * mpmath.log(1 - mmu, 2)
        bound = h * (mpmath.power(2, h2 / mmu) * mdelta) ** (mmu * n)
        bound_lo = bound * (1 - mpmath.mpf("1e-40"))
        ok = mpmath.mpf(tail.numerator) / tail.denominator <= bound_lo
        return bool(ok), tail, float(bound)


@dataclass
class TruncationResult:
    kept: list
    total: int
    overflow: int

    @property
    def tau_hat(self) -> float:
        return self.overflow / self.total if self.total else 0.0


def ls_truncate(
    samples: Iterable[LocalStochasticSample], mu: float, n: int
) -> TruncationResult:
    """Partition samples into support <= mu*n (kept) and overflow."""
    kept = []
    overflow = 0
    total = 0
    for s in samples:
        total += 1
        if len(s.support) <= mu * n:
            kept.append(s)
        else:
            overflow += 1
    return TruncationResult(kept=kept, total=total, overflow=overflow)


def support_sizes(n: int, delta: float, trials: int, seed: int, stream: int = 0) -> np.ndarray:
    """Support sizes of `trials` i.i.d. samples (binomial fast path)."""
    rng = rng_stream(seed, STREAM_LS, stream)
    return rng.binomial(n, delta, size=trials)
