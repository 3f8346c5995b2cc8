"""Signed stabilizer tableaus.

A pure n-qubit stabilizer state is stored as n independent, pairwise
commuting Pauli generators with +/-1 signs. Generators are kept in the
Hermitian convention: each qubit contributes I, X, Y (= iXZ) or Z, and the
stored sign bit s means the generator equals (-1)^s times that product.
Used as the exact oracle backend; the Pauli-frame engine handles bulk
Monte Carlo.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Optional, Sequence

import numpy as np


def _g_exponents(x1, z1, x2, z2):
    """Aaronson-Gottesman phase function, vectorized over qubits.

    Returns the i-exponent contributed by each qubit when multiplying the
    Hermitian single-qubit Paulis (x1, z1) * (x2, z2).
    """
    x1 = x1.astype(np.int8)
    z1 = z1.astype(np.int8)
    x2 = x2.astype(np.int8)
    z2 = z2.astype(np.int8)
    y1 = x1 & z1
    only_x = x1 & (1 - z1)
    only_z = (1 - x1) & z1
    return y1 * (z2 - x2) + only_x * (z2 * (2 * x2 - 1)) + only_z * (x2 * (1 - 2 * z2))


def pauli_product(
    terms: Sequence[tuple[np.ndarray, np.ndarray, int]], extra_i: int = 0
) -> tuple[np.ndarray, np.ndarray, int]:
    """Multiply Hermitian Paulis (x, z, sign) left to right.

    `extra_i` adds a global i^extra_i factor (used when lifting Y = iXZ).
    The result must be Hermitian again; raises otherwise.
    """
    if not terms:
        raise ValueError("empty product")
    x, z, s = terms[0]
    x = x.copy()
    z = z.copy()
    phase = (2 * s + extra_i) % 4
    for x2, z2, s2 in terms[1:]:
        phase = (phase + 2 * s2 + int(_g_exponents(x, z, x2, z2).sum())) % 4
        x ^= x2
        z ^= z2
    if phase % 2:
        raise ValueError("non-Hermitian Pauli product")
    return x, z, (phase // 2) % 2


def symplectic_overlap(x1, z1, x2, z2) -> np.ndarray:
    """1 where the two Paulis anticommute (row-wise)."""
    return ((x1 & z2).sum(axis=-1) + (z1 & x2).sum(axis=-1)) % 2


class Tableau:
    """Mutable signed stabilizer tableau over labelled wires."""

    def __init__(
        self,
        labels: Sequence[Hashable],
        xs: np.ndarray,
        zs: np.ndarray,
        signs: np.ndarray,
        check: bool = True,
    ):
        self.labels: list[Hashable] = list(labels)
        self.xs = np.asarray(xs, dtype=np.uint8) & 1
        self.zs = np.asarray(zs, dtype=np.uint8) & 1
        self.signs = np.asarray(signs, dtype=np.uint8) & 1
        n = len(self.labels)
        if self.xs.shape != (n, n) or self.zs.shape != (n, n) or self.signs.shape != (n,):
            raise ValueError("tableau shape mismatch")
        if check:
            self.assert_valid()

    # -- construction --------------------------------------------------------

    @classmethod
    def zero_state(cls, labels: Sequence[Hashable]) -> "Tableau":
        n = len(labels)
        return cls(labels, np.zeros((n, n), np.uint8), np.eye(n, dtype=np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_generators(
        cls, labels: Sequence[Hashable], gens: Iterable[tuple[np.ndarray, np.ndarray, int]]
    ) -> "Tableau":
        gens = list(gens)
        xs = np.array([g[0] for g in gens], dtype=np.uint8)
        zs = np.array([g[1] for g in gens], dtype=np.uint8)
        signs = np.array([g[2] for g in gens], dtype=np.uint8)
        return cls(labels, xs, zs, signs)

    def copy(self) -> "Tableau":
        return Tableau(list(self.labels), self.xs.copy(), self.zs.copy(), self.signs.copy(), check=False)

    def tensor(self, other: "Tableau") -> "Tableau":
        n1, n2 = len(self.labels), len(other.labels)
        xs = np.zeros((n1 + n2, n1 + n2), np.uint8)
        zs = np.zeros_like(xs)
        xs[:n1, :n1] = self.xs
        xs[n1:, n1:] = other.xs
        zs[:n1, :n1] = self.zs
        zs[n1:, n1:] = other.zs
        return Tableau(
            self.labels + other.labels, xs, zs, np.concatenate([self.signs, other.signs]), check=False
        )

    # -- bookkeeping ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        return self.labels.index(label)

    def assert_valid(self):
        n = self.n
        sym = np.zeros((n, n), dtype=np.uint8)
        for i in range(n):
            sym[i] = symplectic_overlap(self.xs[i], self.zs[i], self.xs, self.zs)
        if sym.any():
            raise ValueError("generators do not commute")
        if self._rank_symplectic() != n:
            raise ValueError("generators not independent")

    def _rank_symplectic(self) -> int:
        m = np.concatenate([self.xs, self.zs], axis=1).copy()
        r = 0
        for c in range(m.shape[1]):
            idx = np.nonzero(m[r:, c])[0]
            if idx.size == 0:
                continue
            p = r + idx[0]
            m[[r, p]] = m[[p, r]]
            hit = np.nonzero(m[:, c])[0]
            hit = hit[hit != r]
            m[hit] ^= m[r]
            r += 1
            if r == m.shape[0]:
                break
        return r

    def _rowsum_into(self, rows: np.ndarray, src: int):
        """generators[rows] <- generators[rows] * generators[src]."""
        if rows.size == 0:
            return
        g = _g_exponents(self.xs[rows], self.zs[rows], self.xs[src], self.zs[src]).sum(axis=1)
        phase = (2 * self.signs[rows].astype(np.int64) + 2 * int(self.signs[src]) + g) % 4
        if (phase % 2).any():
            raise ValueError("rowsum of anticommuting generators")
        self.signs[rows] = (phase // 2).astype(np.uint8)
        self.xs[rows] ^= self.xs[src]
        self.zs[rows] ^= self.zs[src]

    # -- gates ----------------------------------------------------------------

    def apply_h(self, label: Hashable):
        q = self.index(label)
        self.signs ^= self.xs[:, q] & self.zs[:, q]
        self.xs[:, q], self.zs[:, q] = self.zs[:, q].copy(), self.xs[:, q].copy()

    def apply_s(self, label: Hashable):
        q = self.index(label)
        self.signs ^= self.xs[:, q] & self.zs[:, q]
        self.zs[:, q] ^= self.xs[:, q]

    def apply_cnot(self, control: Hashable, target: Hashable):
        c, t = self.index(control), self.index(target)
        self.signs ^= self.xs[:, c] & self.zs[:, t] & (self.xs[:, t] ^ self.zs[:, c] ^ 1)
        self.xs[:, t] ^= self.xs[:, c]
        self.zs[:, c] ^= self.zs[:, t]

    def apply_x(self, label: Hashable):
        self.signs ^= self.zs[:, self.index(label)]

    def apply_z(self, label: Hashable):
        self.signs ^= self.xs[:, self.index(label)]

    def apply_y(self, label: Hashable):
        q = self.index(label)
        self.signs ^= self.xs[:, q] ^ self.zs[:, q]

    def apply_pauli(self, x_bits: np.ndarray, z_bits: np.ndarray):
        """Conjugate the state by the Pauli X^x Z^z (global phase dropped)."""
        self.signs ^= symplectic_overlap(self.xs, self.zs, x_bits, z_bits).astype(np.uint8)

    # -- measurement ----------------------------------------------------------

    def measure_z(self, label: Hashable, rng: Optional[np.random.Generator] = None,
                  forced: Optional[int] = None) -> tuple[int, bool]:
        """Measure Z on a wire, collapse, and remove the wire.

        Returns (outcome, deterministic). Random outcomes draw from `rng`
        unless `forced` pins them (used to realize init0 on a dirty wire).
        """
        q = self.index(label)
        anti = np.nonzero(self.xs[:, q])[0]
        if anti.size:
            p = int(anti[0])
            self._rowsum_into(anti[1:], p)
            if forced is not None:
                outcome = int(forced)
            else:
                if rng is None:
                    raise ValueError("random measurement needs an rng")
                outcome = int(rng.integers(0, 2))
            self.xs[p] = 0
            self.zs[p] = 0
            self.zs[p, q] = 1
            self.signs[p] = outcome
            deterministic = False
            zq_row = p
        else:
            lam, sign = self._express_z(q)
            outcome = sign
            deterministic = True
            sel = np.nonzero(lam)[0]
            zq_row = int(sel[0])
            for i in sel[1:]:
                self._rowsum_into(np.array([zq_row]), int(i))
        # Clear the measured column from every other generator, then drop it.
        rest = np.nonzero(self.zs[:, q])[0]
        rest = rest[rest != zq_row]
        self._rowsum_into(rest, zq_row)
        keep = np.arange(self.n) != zq_row
        cols = np.arange(self.n) != q
        self.xs = self.xs[keep][:, cols]
        self.zs = self.zs[keep][:, cols]
        self.signs = self.signs[keep]
        del self.labels[q]
        return outcome, deterministic

    def _express_z(self, q: int) -> tuple[np.ndarray, int]:
        """Write Z_q as a product of generators; returns (combination, sign)."""
        a = np.concatenate([self.xs, self.zs], axis=1).T.copy()  # (2n, g)
        b = np.zeros(2 * self.n, dtype=np.uint8)
        b[self.n + q] = 1
        lam = _solve_dense(a, b)
        if lam is None:
            raise ValueError("Z not in stabilizer group")
        sel = np.nonzero(lam)[0]
        terms = [(self.xs[i], self.zs[i], int(self.signs[i])) for i in sel]
        x, z, s = pauli_product(terms)
        return lam, int(s)

    def add_fresh_zero(self, label: Hashable):
        """Append a new wire prepared in |0>."""
        n = self.n
        xs = np.zeros((n + 1, n + 1), np.uint8)
        zs = np.zeros_like(xs)
        xs[:n, :n] = self.xs
        zs[:n, :n] = self.zs
        zs[n, n] = 1
        self.xs, self.zs = xs, zs
        self.signs = np.concatenate([self.signs, [0]]).astype(np.uint8)
        self.labels.append(label)

    def reset_zero(self, label: Hashable, rng: Optional[np.random.Generator] = None):
        """Force a wire into |0> (measure with a pinned outcome, re-add)."""
        if label in self.labels:
            self.measure_z(label, rng=rng, forced=0)
        self.add_fresh_zero(label)

    def expectation_z(self, x_bits: np.ndarray, z_bits: np.ndarray) -> Optional[int]:
        """Outcome bit of measuring the Pauli X^x Z^z if deterministic, else None."""
        if symplectic_overlap(self.xs, self.zs, x_bits, z_bits).any():
            return None
        a = np.concatenate([self.xs, self.zs], axis=1).T.copy()
        b = np.concatenate([x_bits, z_bits]).astype(np.uint8)
        lam = _solve_dense(a, b)
        if lam is None:
            return None
        sel = np.nonzero(lam)[0]
        if sel.size == 0:
            return 0
        terms = [(self.xs[i], self.zs[i], int(self.signs[i])) for i in sel]
        _, _, s = pauli_product(terms)
        return int(s)

    # -- canonical form & comparison -------------------------------------------

    def canonicalize(self):
        """Deterministic canonical generating set.

        RREF over the concatenated (X|Z) bit matrix with phase-tracked row
        sums; RREF of a basis is unique, so equal states canonicalize to
        identical tableaus.
        """
        r = 0
        n = self.n
        for c in range(2 * n):
            col = self.xs[:, c] if c < n else self.zs[:, c - n]
            idx = np.nonzero(col[r:])[0]
            if idx.size == 0:
                continue
            self._swap_rows(r, r + int(idx[0]))
            col = self.xs[:, c] if c < n else self.zs[:, c - n]
            hit = np.nonzero(col)[0]
            hit = hit[hit != r]
            self._rowsum_into(hit, r)
            r += 1
            if r == n:
                break

    def _swap_rows(self, i: int, j: int):
        if i == j:
            return
        self.xs[[i, j]] = self.xs[[j, i]]
        self.zs[[i, j]] = self.zs[[j, i]]
        self.signs[[i, j]] = self.signs[[j, i]]

    def rename(self, mapping: dict):
        """Relabel wires in place (values must stay unique)."""
        self.labels = [mapping.get(l, l) for l in self.labels]
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("renaming collides")

    def reorder(self, labels: Sequence[Hashable]) -> "Tableau":
        """Return a copy with wire columns permuted to the given label order."""
        if sorted(map(str, labels)) != sorted(map(str, self.labels)):
            raise ValueError("label sets differ")
        perm = [self.index(l) for l in labels]
        return Tableau(list(labels), self.xs[:, perm], self.zs[:, perm], self.signs.copy(), check=False)

    def same_state(self, other: "Tableau") -> bool:
        """Exact state equality (same wires, same stabilizer group and signs)."""
        if set(map(str, self.labels)) != set(map(str, other.labels)):
            return False
        a = self.copy()
        b = other.reorder(self.labels)
        a.canonicalize()
        b.canonicalize()
        return (
            np.array_equal(a.xs, b.xs)
            and np.array_equal(a.zs, b.zs)
            and np.array_equal(a.signs, b.signs)
        )


def random_stabilizer_state(
    labels: Sequence[Hashable], rng: np.random.Generator, moves: Optional[int] = None
) -> Tableau:
    """Seeded random stabilizer state: a random H/S/CNOT walk from |0...0>."""
    t = Tableau.zero_state(labels)
    n = t.n
    moves = moves if moves is not None else max(8, 4 * n * n)
    for _ in range(moves):
        kind = int(rng.integers(0, 3 if n > 1 else 2))
        if kind == 0:
            t.apply_h(labels[int(rng.integers(0, n))])
        elif kind == 1:
            t.apply_s(labels[int(rng.integers(0, n))])
        else:
            c, tg = rng.choice(n, size=2, replace=False)
            t.apply_cnot(labels[int(c)], labels[int(tg)])
    return t


def _solve_dense(a: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """Solve a x = b over GF(2) for small dense uint8 systems."""
    a = a.copy() & 1
    b = b.copy() & 1
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        idx = np.nonzero(a[r:, c])[0]
        if idx.size == 0:
            continue
        p = r + int(idx[0])
        a[[r, p]] = a[[p, r]]
        b[r], b[p] = b[p], b[r]
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != r]
        a[hit] ^= a[r]
        b[hit] ^= b[r]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    if b[r:].any():
        return None
    x = np.zeros(ncols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = b[i]
    return x
