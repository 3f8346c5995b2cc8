"""Dense GF(2) linear algebra over bit-packed rows.

Rows are packed into 64-bit words so that row XOR and popcount (the hot
operations in syndrome decoding and coset searches) are single numpy ops.
All objects are immutable after construction; every operation returns a new
value, so concurrent use from multiple workers is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

WORD = 64

# Exhaustive coset enumeration is allowed up to this many generators; beyond
# it coset_min_weight only reports a cap-bounded upper estimate.
MAX_ENUM_ROWS = 20


def _nwords(ncols: int) -> int:
    return max(1, (ncols + WORD - 1) // WORD)


def _pack(dense: np.ndarray, ncols: int) -> np.ndarray:
    """Pack a (rows, ncols) 0/1 array into little-endian uint64 words."""
    dense = np.asarray(dense, dtype=np.uint8).reshape(-1, ncols) if ncols else np.zeros(
        (len(dense), 0), dtype=np.uint8
    )
    nbytes = _nwords(ncols) * 8
    packed = np.zeros((dense.shape[0], nbytes), dtype=np.uint8)
    if ncols:
        packed[:, : (ncols + 7) // 8] = np.packbits(dense, axis=-1, bitorder="little")
    return packed.view(np.uint64)


def _unpack(words: np.ndarray, ncols: int) -> np.ndarray:
    if ncols == 0:
        return np.zeros((words.shape[0], 0), dtype=np.uint8)
    bits = np.unpackbits(words.view(np.uint8), axis=-1, bitorder="little")
    return bits[:, :ncols]


def _popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


class BitVector:
    """Immutable GF(2) vector of fixed length."""

    __slots__ = ("words", "n")

    def __init__(self, words: np.ndarray, n: int):
        self.words = words
        self.n = n
        words.flags.writeable = False

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        arr = np.fromiter((int(b) & 1 for b in bits), dtype=np.uint8)
        return cls(_pack(arr.reshape(1, -1), arr.size)[0].copy(), arr.size)

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(np.zeros(_nwords(n), dtype=np.uint64), n)

    @classmethod
    def ones(cls, n: int) -> "BitVector":
        return cls.from_bits([1] * n)

    @classmethod
    def unit(cls, n: int, i: int) -> "BitVector":
        bits = np.zeros(n, dtype=np.uint8)
        bits[i] = 1
        return cls.from_bits(bits)

    def to_array(self) -> np.ndarray:
        return _unpack(self.words.reshape(1, -1), self.n)[0]

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return int((self.words[i >> 6] >> np.uint64(i & 63)) & np.uint64(1))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BitVector(self.words ^ other.words, self.n)

    def dot(self, other: "BitVector") -> int:
        """Inner product mod 2."""
        if self.n != other.n:
            raise ValueError("length mismatch")
        return _popcount(self.words & other.words) & 1

    def weight(self) -> int:
        return _popcount(self.words)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and self.n == other.n
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.n, self.words.tobytes()))

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"BitVector({self.to01()})"

    def to01(self) -> str:
        return "".join(str(b) for b in self.to_array())


class BitMatrix:
    """Immutable GF(2) matrix with bit-packed rows."""

    __slots__ = ("words", "nrows", "ncols")

    def __init__(self, words: np.ndarray, nrows: int, ncols: int):
        self.words = words.reshape(nrows, _nwords(ncols))
        self.nrows = nrows
        self.ncols = ncols
        self.words.flags.writeable = False

    @classmethod
    def from_rows(cls, rows: Sequence, ncols: Optional[int] = None) -> "BitMatrix":
        """Build from row iterables of 0/1 entries (or '01' strings)."""
        parsed = [
            [int(ch) & 1 for ch in (row if not isinstance(row, str) else list(row))]
            for row in rows
        ]
        if parsed:
            ncols = len(parsed[0]) if ncols is None else ncols
            if any(len(r) != ncols for r in parsed):
                raise ValueError("ragged rows")
        else:
            ncols = 0 if ncols is None else ncols
        dense = np.array(parsed, dtype=np.uint8).reshape(len(parsed), ncols)
        return cls(_pack(dense, ncols), len(parsed), ncols)

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "BitMatrix":
        dense = np.asarray(dense, dtype=np.uint8) & 1
        if dense.ndim != 2:
            raise ValueError("expected 2-d array")
        return cls(_pack(dense, dense.shape[1]), dense.shape[0], dense.shape[1])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(np.zeros((nrows, _nwords(ncols)), dtype=np.uint64), nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words, self.ncols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.words[i].copy(), self.ncols)

    def rows(self) -> list[BitVector]:
        return [self.row(i) for i in range(self.nrows)]

    def get(self, i: int, j: int) -> int:
        return int((self.words[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def stack(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.ncols:
            raise ValueError("column mismatch")
        return BitMatrix(
            np.vstack([self.words, other.words]), self.nrows + other.nrows, self.ncols
        )

    def mul_vec(self, v: BitVector) -> BitVector:
        """Matrix-vector product over GF(2)."""
        if v.n != self.ncols:
            raise ValueError("dimension mismatch")
        bits = (np.bitwise_count(self.words & v.words).sum(axis=1) & 1).astype(np.uint8)
        return BitVector.from_bits(bits) if self.nrows else BitVector.zeros(0)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch")
        bt = other.transpose()
        out = np.zeros((self.nrows, other.ncols), dtype=np.uint8)
        for j in range(other.ncols):
            out[:, j] = np.bitwise_count(self.words & bt.words[j]).sum(axis=1) & 1
        return BitMatrix.from_dense(out)

    def is_zero(self) -> bool:
        return not self.words.any()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and (self.nrows, self.ncols) == (other.nrows, other.ncols)
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.nrows}x{self.ncols})"

    # -- elimination ---------------------------------------------------------

    def _rref_words(self, extra: Optional[np.ndarray] = None):
        """Reduced row echelon form on a working copy.

        Pivoting is deterministic: columns scanned left to right, ties broken
        by lowest row index. Optionally carries an augmented block `extra`
        through the same row operations.
        """
        work = self.words.copy()
        aug = extra.copy() if extra is not None else None
        pivots: list[int] = []
        r = 0
        for c in range(self.ncols):
            if r == self.nrows:
                break
            w, b = divmod(c, WORD)
            mask = np.uint64(1) << np.uint64(b)
            pr = -1
            for i in range(r, self.nrows):
                if work[i, w] & mask:
                    pr = i
                    break
            if pr < 0:
                continue
            if pr != r:
                work[[r, pr]] = work[[pr, r]]
                if aug is not None:
                    aug[[r, pr]] = aug[[pr, r]]
            sel = (work[:, w] & mask) != 0
            sel[r] = False
            if sel.any():
                work[sel] ^= work[r]
                if aug is not None:
                    aug[sel] ^= aug[r]
            pivots.append(c)
            r += 1
        return work, pivots, aug


def rank(m: BitMatrix) -> int:
    """GF(2) rank via row reduction; the input is unchanged."""
    _, pivots, _ = m._rref_words()
    return len(pivots)


def rref(m: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row echelon form and pivot column list."""
    work, pivots, _ = m._rref_words()
    return BitMatrix(work, m.nrows, m.ncols), pivots


def nullspace_basis(m: BitMatrix) -> BitMatrix:
    """Basis of {v : Mv = 0}, one row per free column; ncols - rank rows."""
    work, pivots, _ = m._rref_words()
    red = _unpack(work, m.ncols)
    free = [c for c in range(m.ncols) if c not in pivots]
    basis = np.zeros((len(free), m.ncols), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, p in enumerate(pivots):
            basis[k, p] = red[i, f]
    return BitMatrix.from_dense(basis)


def solve(m: BitMatrix, b: BitVector) -> Optional[BitVector]:
    """Some x with Mx = b, or None when the system is inconsistent."""
    if b.n != m.nrows:
        raise ValueError("rhs length must equal nrows")
    aug = _pack(b.to_array().reshape(-1, 1), 1)
    work, pivots, aug = m._rref_words(extra=aug)
    red_b = _unpack(aug, 1)[:, 0]
    if red_b[len(pivots):].any():
        return None
    x = np.zeros(m.ncols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = red_b[i]
    return BitVector.from_bits(x)


def inverse(m: BitMatrix) -> BitMatrix:
    """Inverse of a square full-rank matrix."""
    if m.nrows != m.ncols:
        raise ValueError("not square")
    aug = BitMatrix.identity(m.nrows).words
    work, pivots, aug = m._rref_words(extra=aug)
    if len(pivots) != m.nrows:
        raise ValueError("singular matrix")
    return BitMatrix(aug, m.nrows, m.nrows)


def row_space_contains(m: BitMatrix, v: BitVector) -> bool:
    """Whether v lies in the row space of m."""
    return solve(m.transpose(), v) is not None


@dataclass(frozen=True)
class CosetWeight:
    """Result of a coset minimum-weight search.

    `exact` is False when the generator count exceeded the enumeration limit;
    then `weight` is only the best value seen (reported as >= cap when the
    truncated search never got below the cap).
    """

    weight: int
    exact: bool


def coset_min_weight(basis: BitMatrix, v: BitVector, cap: Optional[int] = None) -> CosetWeight:
    """Minimum Hamming weight over the coset {v + span(basis rows)}.

    Exhaustive (Gray-code) enumeration of all 2^k coset elements for
    k <= MAX_ENUM_ROWS generators; beyond that a cap-bounded partial search
    over low-weight generator combinations is used and flagged inexact.
    """
    if basis.ncols != v.n:
        raise ValueError("length mismatch")
    best = v.weight()
    if best == 0:
        return CosetWeight(0, True)
    k = basis.nrows
    if k <= MAX_ENUM_ROWS:
        cur = v.words.copy()
        for i in range(1, 1 << k):
            cur ^= basis.words[(i & -i).bit_length() - 1]
            w = _popcount(cur)
            if w < best:
                best = w
                if best == 0:
                    break
        return CosetWeight(best, True)
    # Truncated search: single and pairwise generator combinations only.
    ws = np.bitwise_count(basis.words ^ v.words).sum(axis=1)
    best = min(best, int(ws.min()))
    for i in range(k):
        ws2 = np.bitwise_count((basis.words ^ basis.words[i]) ^ v.words).sum(axis=1)
        best = min(best, int(ws2[np.arange(k) != i].min()))
    if cap is not None and best > cap:
        best = cap
    return CosetWeight(best, False)


def matrix_to_text(m: BitMatrix) -> str:
    """Plain-text format: first line 'nrows ncols', then 0/1 rows."""
    lines = [f"{m.nrows} {m.ncols}"]
    dense = m.to_dense()
    for i in range(m.nrows):
        lines.append("".join(str(b) for b in dense[i]))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> BitMatrix:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    nrows, ncols = (int(t) for t in lines[0].split())
    rows = lines[1 : 1 + nrows]
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise ValueError("malformed matrix text")
    return BitMatrix.from_rows(rows, ncols=ncols)
