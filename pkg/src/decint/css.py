"""CSS codes: logical structure, reduced weights, distances, and families.

A CSS code is held as the pair of binary check matrices (H_X, H_Z) with
H_X H_Z^T = 0, plus a cached symplectic-dual basis of logical operator
representatives. Code families bundle levels r = 1, 2, ... with the rate
and doubling metadata the interface constructions rely on.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gf2
from .gf2 import BitMatrix, BitVector, CosetWeight
from .tableau import Tableau, pauli_product


@dataclass(frozen=True)
class PauliOp:
    """Sign-free n-qubit Pauli, split into X and Z parts."""

    x: BitVector
    z: BitVector

    def __post_init__(self):
        if self.x.n != self.z.n:
            raise ValueError("X and Z parts must have equal length")

    @property
    def n(self) -> int:
        return self.x.n

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(BitVector.zeros(n), BitVector.zeros(n))

    @classmethod
    def single(cls, kind: str, i: int, n: int) -> "PauliOp":
        x = BitVector.unit(n, i) if kind in ("X", "Y") else BitVector.zeros(n)
        z = BitVector.unit(n, i) if kind in ("Z", "Y") else BitVector.zeros(n)
        return cls(x, z)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x.to_array() | self.z.to_array()))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    subject: str
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(CheckResult(name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = [f"[{self.subject}]"]
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"  {status:4s} {c.name}" + (f" ({c.detail})" if c.detail else ""))
        return "\n".join(lines)


def _quotient_basis(candidates: BitMatrix, modulus: BitMatrix) -> BitMatrix:
    """Representatives of span(candidates) / span(modulus), deterministically.

    Reduces every candidate against the RREF of the modulus, then keeps the
    rows that extend the running basis (lowest candidate index wins).
    """
    red_mod, piv_mod = gf2.rref(modulus)
    mod_rows = red_mod.to_dense()[: len(piv_mod)]
    accepted: list[np.ndarray] = []
    accepted_piv: list[int] = []
    for i in range(candidates.nrows):
        v = candidates.row(i).to_array()
        for row, p in zip(mod_rows, piv_mod):
            if v[p]:
                v ^= row
        for row, p in zip(accepted, accepted_piv):
            if v[p]:
                v ^= row
        nz = np.nonzero(v)[0]
        if nz.size:
            accepted.append(v)
            accepted_piv.append(int(nz[0]))
    if not accepted:
        return BitMatrix.zeros(0, candidates.ncols)
    return BitMatrix.from_dense(np.array(accepted, dtype=np.uint8))


class CssCode:
    """CSS code with cached logical operator representatives.

    Immutable by convention: treat every attribute as read-only.
    """

    def __init__(
        self,
        hx: BitMatrix,
        hz: BitMatrix,
        lx: BitMatrix,
        lz: BitMatrix,
        name: str = "",
        distance: Optional[tuple[int, bool]] = None,
    ):
        if hx.ncols != hz.ncols:
            raise ValueError("H_X and H_Z act on different qubit counts")
        self.n = hx.ncols
        self.hx = hx
        self.hz = hz
        self.lx = lx
        self.lz = lz
        self.m = lx.nrows
        self.name = name or f"[[{self.n},{self.m}]]"
        self._distance = distance

    @classmethod
    def from_checks(
        cls, hx: BitMatrix, hz: BitMatrix, name: str = "", compute_distance: bool = True
    ) -> "CssCode":
        """Derive logical representatives from the check matrices.

        L_X spans ker(H_Z)/rowspace(H_X) and L_Z spans ker(H_X)/rowspace(H_Z);
        L_Z is then re-based so that L_X L_Z^T = I (anticommutation exactly on
        matching logical indices). Gaussian elimination is deterministic, so
        the representatives are stable across runs.
        """
        lx = _quotient_basis(gf2.nullspace_basis(hz), hx)
        lz = _quotient_basis(gf2.nullspace_basis(hx), hz)
        if lx.nrows != lz.nrows:
            raise ValueError("inconsistent logical dimensions")
        if lx.nrows:
            pairing = lx @ lz.transpose()
            lz = gf2.inverse(pairing).transpose() @ lz
        code = cls(hx, hz, lx, lz, name=name)
        if compute_distance and code.n <= 24:
            code._distance = code.min_distance()
        return code

    def __repr__(self) -> str:
        return f"CssCode({self.name}, n={self.n}, m={self.m})"

    # -- invariants ------------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check every CssCode invariant; failures are reported, not raised."""
        rep = ValidationReport(self.name)
        rep.add("hx_hz_orthogonal", (self.hx @ self.hz.transpose()).is_zero())
        rx, rz = gf2.rank(self.hx), gf2.rank(self.hz)
        rep.add(
            "logical_count",
            self.m == self.n - rx - rz,
            f"m={self.m}, n-rank(HX)-rank(HZ)={self.n - rx - rz}",
        )
        rep.add("lx_shape", self.lx.nrows == self.m and self.lx.ncols == self.n)
        rep.add("lz_shape", self.lz.nrows == self.m and self.lz.ncols == self.n)
        rep.add("lx_commutes_with_z_checks", (self.hz @ self.lx.transpose()).is_zero())
        rep.add("lz_commutes_with_x_checks", (self.hx @ self.lz.transpose()).is_zero())
        if self.m:
            rep.add(
                "symplectic_pairing",
                (self.lx @ self.lz.transpose()) == BitMatrix.identity(self.m),
            )
            rep.add(
                "lx_independent_of_stabilizers",
                gf2.rank(self.hx.stack(self.lx)) == rx + self.m,
            )
            rep.add(
                "lz_independent_of_stabilizers",
                gf2.rank(self.hz.stack(self.lz)) == rz + self.m,
            )
        return rep

    # -- weights and distance ----------------------------------------------------

    def x_stabilizer_basis(self) -> BitMatrix:
        red, piv = gf2.rref(self.hx)
        return BitMatrix.from_dense(red.to_dense()[: len(piv)])

    def z_stabilizer_basis(self) -> BitMatrix:
        red, piv = gf2.rref(self.hz)
        return BitMatrix.from_dense(red.to_dense()[: len(piv)])

    def reduced_weight(self, p: PauliOp, cap: Optional[int] = None) -> CosetWeight:
        """Stabilizer-reduced weight max(|e_x|_red, |e_z|_red).

        The X part reduces against X-type stabilizers (rows of H_X) and the
        Z part against Z-type stabilizers; exact whenever both enumerations
        stayed within the generator limit.
        """
        if p.n != self.n:
            raise ValueError("operator length mismatch")
        wx = gf2.coset_min_weight(self.x_stabilizer_basis(), p.x, cap=cap)
        wz = gf2.coset_min_weight(self.z_stabilizer_basis(), p.z, cap=cap)
        return CosetWeight(max(wx.weight, wz.weight), wx.exact and wz.exact)

    def min_distance(self, cap: int = 1 << 22) -> tuple[int, bool]:
        """Minimum distance min(d_X, d_Z) by exhaustive kernel enumeration.

        Exact when both kernels fit inside `cap` enumerated vectors;
        otherwise a best-seen upper value with the exact flag cleared.
        """
        if self._distance is not None:
            return self._distance
        dz, ez = _sector_distance(self.hx, self.hz, cap)
        dx, ex = _sector_distance(self.hz, self.hx, cap)
        result = (min(dx, dz), ex and ez)
        self._distance = result
        return result

    @property
    def distance(self) -> Optional[tuple[int, bool]]:
        return self._distance

    # -- encoded states ------------------------------------------------------------

    def stabilizer_generators(self) -> list[tuple[np.ndarray, np.ndarray, int]]:
        gens = []
        bx = self.x_stabilizer_basis().to_dense()
        bz = self.z_stabilizer_basis().to_dense()
        zero = np.zeros(self.n, dtype=np.uint8)
        for row in bx:
            gens.append((row.copy(), zero.copy(), 0))
        for row in bz:
            gens.append((zero.copy(), row.copy(), 0))
        return gens

    def encode_state(self, u: Sequence[int], labels: Optional[Sequence] = None) -> Tableau:
        """Tableau of the logical basis state |u_L>.

        Generators: the code stabilizers plus each logical-Z representative
        signed by (-1)^{u_j}.
        """
        u = list(u)
        if len(u) != self.m:
            raise ValueError("logical string length must equal m")
        labels = list(labels) if labels is not None else list(range(self.n))
        gens = self.stabilizer_generators()
        lz = self.lz.to_dense()
        zero = np.zeros(self.n, dtype=np.uint8)
        for j in range(self.m):
            gens.append((zero.copy(), lz[j].copy(), int(u[j]) & 1))
        return Tableau.from_generators(labels, gens)

    def lift_logical(self, x_bits: np.ndarray, z_bits: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
        """Physical representative of the logical Pauli X^x Z^z (Hermitian).

        Y on logical qubit j contributes i * LX_j * LZ_j; the accumulated
        phase is folded into the returned sign bit.
        """
        return lift_with_reps(self.lx.to_dense(), self.lz.to_dense(), x_bits, z_bits)

    def encoded_tableau(
        self, logical: Tableau, labels: Optional[Sequence] = None
    ) -> Tableau:
        """Encode an m-qubit logical stabilizer state into the code block.

        Generators: code stabilizers plus each logical generator lifted
        through the representative pairs (signs carried exactly).
        """
        if logical.n != self.m:
            raise ValueError("logical tableau must act on m qubits")
        labels = list(labels) if labels is not None else list(range(self.n))
        gens = self.stabilizer_generators()
        lx = self.lx.to_dense()
        lz = self.lz.to_dense()
        for row in range(logical.n):
            x, z, s = lift_with_reps(lx, lz, logical.xs[row], logical.zs[row])
            gens.append((x, z, s ^ int(logical.signs[row])))
        return Tableau.from_generators(labels, gens)


def lift_with_reps(
    lx_reps: np.ndarray, lz_reps: np.ndarray, x_bits: np.ndarray, z_bits: np.ndarray
) -> tuple[np.ndarray, np.ndarray, int]:
    """Multiply representative Paulis for a logical X^x Z^z word.

    lx_reps/lz_reps are (m, N) dense representative rows over N physical
    qubits; overlapping supports are handled with exact phase tracking.
    """
    m, n = lx_reps.shape
    terms = []
    ys = 0
    zero = np.zeros(n, np.uint8)
    for j in range(m):
        xb, zb = int(x_bits[j]), int(z_bits[j])
        if xb and zb:
            ys += 1
        if xb:
            terms.append((lx_reps[j].astype(np.uint8), zero, 0))
        if zb:
            terms.append((zero, lz_reps[j].astype(np.uint8), 0))
    if not terms:
        return zero.copy(), zero.copy(), 0
    return pauli_product(terms, extra_i=ys)


def _sector_distance(h_ker: BitMatrix, h_stab: BitMatrix, cap: int) -> tuple[int, bool]:
    """Min weight over ker(h_ker) minus rowspace(h_stab)."""
    basis = gf2.nullspace_basis(h_ker)
    k = basis.nrows
    if k == 0:
        return (0, True)
    red_stab, piv_stab = gf2.rref(h_stab)
    stab_rows = red_stab.to_dense()[: len(piv_stab)]
    n = basis.ncols
    if (1 << k) <= cap:
        best = n + 1
        cur = np.zeros_like(basis.words[0])
        for i in range(1, 1 << k):
            cur = cur ^ basis.words[(i & -i).bit_length() - 1]
            w = int(np.bitwise_count(cur).sum())
            if w < best and not _in_rowspace(cur, stab_rows, piv_stab, n):
                best = w
        return (best if best <= n else 0, True)
    # Too large to enumerate: scan the basis rows only (upper value).
    best = n + 1
    for i in range(k):
        w = int(np.bitwise_count(basis.words[i]).sum())
        if w < best and not _in_rowspace(basis.words[i], stab_rows, piv_stab, n):
            best = w
    return (best if best <= n else 0, False)


def _in_rowspace(words: np.ndarray, stab_rows: np.ndarray, pivots: list[int], n: int) -> bool:
    v = gf2._unpack(words.reshape(1, -1), n)[0].copy()
    for row, p in zip(stab_rows, pivots):
        if v[p]:
            v ^= row
    return not v.any()


# -- standard constructions -------------------------------------------------------


def trivial_code() -> CssCode:
    code = CssCode.from_checks(BitMatrix.zeros(0, 1), BitMatrix.zeros(0, 1), name="trivial")
    code._distance = (1, True)
    return code


def c422() -> CssCode:
    h = BitMatrix.from_rows(["1111"])
    return CssCode.from_checks(h, h, name="[[4,2,2]]")


def steane_code() -> CssCode:
    hamming = BitMatrix.from_rows(["0001111", "0110011", "1010101"])
    return CssCode.from_checks(hamming, hamming, name="steane")


def build_hgp(h1: BitMatrix, h2: BitMatrix, name: str = "") -> CssCode:
    """Hypergraph product of two classical parity-check matrices."""
    a = h1.to_dense()
    b = h2.to_dense()
    r1, n1 = a.shape
    r2, n2 = b.shape
    hx = np.concatenate(
        [np.kron(a, np.eye(n2, dtype=np.uint8)), np.kron(np.eye(r1, dtype=np.uint8), b.T)],
        axis=1,
    )
    hz = np.concatenate(
        [np.kron(np.eye(n1, dtype=np.uint8), b), np.kron(a.T, np.eye(r2, dtype=np.uint8))],
        axis=1,
    )
    return CssCode.from_checks(
        BitMatrix.from_dense(hx % 2),
        BitMatrix.from_dense(hz % 2),
        name=name or f"hgp({r1}x{n1},{r2}x{n2})",
    )


def freeze_logicals(code: CssCode, m_new: int) -> CssCode:
    """Freeze the highest-index logical qubits to |0_L>.

    Their L_Z representatives become Z-checks; the surviving logical pairs
    are untouched, so H_X H_Z^T = 0 is preserved by construction.
    """
    if not 0 < m_new <= code.m:
        raise ValueError("m_new out of range")
    if m_new == code.m:
        return code
    frozen = BitMatrix.from_dense(code.lz.to_dense()[m_new:])
    hz = code.hz.stack(frozen)
    lx = BitMatrix.from_dense(code.lx.to_dense()[:m_new])
    lz = BitMatrix.from_dense(code.lz.to_dense()[:m_new])
    return CssCode(code.hx, hz, lx, lz, name=f"{code.name}/m={m_new}")


# -- code families ---------------------------------------------------------------


@dataclass(frozen=True)
class CodeFamily:
    """Sequence of CSS codes indexed by level r = 1, 2, ...

    The doubling/rate properties are required only for levels r > r0; r0 is
    family metadata because the source construction pins it only eventually.
    """

    levels: tuple[CssCode, ...]
    alpha: float
    beta: float
    r0: int = 1
    provenance: str = ""

    def level(self, r: int) -> CssCode:
        if not 1 <= r <= len(self.levels):
            raise ValueError(f"family has no level {r}")
        return self.levels[r - 1]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def validate(self) -> ValidationReport:
        rep = ValidationReport(f"family:{self.provenance or 'anonymous'}")
        first = self.levels[0]
        rep.add("level1_trivial", first.n == 1 and first.m == 1)
        for r in range(2, self.depth + 1):
            code, prev = self.level(r), self.level(r - 1)
            if r > self.r0:
                rep.add(
                    f"doubling_r{r}",
                    code.m == 2 * prev.m,
                    f"m_{r}={code.m}, m_{r-1}={prev.m}",
                )
                rep.add(
                    f"rate_r{r}",
                    code.m >= self.alpha * code.n,
                    f"m={code.m}, alpha*n={self.alpha * code.n:.3f}",
                )
                if code.distance is not None and code.distance[1]:
                    rep.add(
                        f"distance_r{r}",
                        code.distance[0] >= self.beta * code.n,
                        f"d={code.distance[0]}, beta*n={self.beta * code.n:.3f}",
                    )
        for r in range(1, self.depth + 1):
            sub = self.level(r).validate()
            for c in sub.checks:
                rep.add(f"r{r}:{c.name}", c.passed, c.detail)
        return rep


def build_family_rate_adjusted(
    base: Sequence[CssCode], alpha: float, c1: float, beta: float = 0.0, provenance: str = ""
) -> CodeFamily:
    """Re-derive a family encoding exactly 2^s logical qubits per level.

    For each s, the smallest base level r with m_{r-1} < 2^s <= m_r is
    frozen down to 2^s logical qubits. A trivial level-1 code is prepended
    so the output indexes as a standard family. Raises if the base violates
    the monotonicity hypotheses.
    """
    ms = [c.m for c in base]
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError(f"base family m values must strictly increase, got {ms}")
    levels: list[CssCode] = [trivial_code()]
    s = 1
    while (1 << s) <= ms[-1]:
        target = 1 << s
        r = next(i for i, m in enumerate(ms) if m >= target)
        if r > 0 and ms[r - 1] >= target:
            raise ValueError("base family skipped a doubling step")
        levels.append(freeze_logicals(base[r], target))
        s += 1
    return CodeFamily(
        levels=tuple(levels),
        alpha=alpha / c1,
        beta=beta,
        r0=1,
        provenance=provenance or "rate-adjusted",
    )


def toy_family() -> CodeFamily:
    """Shipped small family: [[1,1,1]], [[4,2,2]], [[10,4,2]], [[16,8,2]].

    Levels 3 and 4 are hypergraph products with m already a power of two,
    so the rate adjustment is the identity on them. Distances are recorded
    as exactly computed at these sizes.
    """
    levels = (
        trivial_code(),
        c422(),
        build_hgp(BitMatrix.from_rows(["111"]), BitMatrix.from_rows(["111"]), name="hgp33"),
        build_hgp(BitMatrix.from_rows(["111"]), BitMatrix.from_rows(["11111"]), name="hgp35"),
    )
    return CodeFamily(levels=levels, alpha=0.4, beta=0.125, r0=1, provenance="builtin-toy")


def steane_family() -> CodeFamily:
    """Trivial + Steane variant (m = 1 at level 2, distance 3).

    Breaks the doubling property on purpose; r0 = 2 exempts its top level.
    Used to exercise the correctable-error contract of the interface.
    """
    return CodeFamily(
        levels=(trivial_code(), steane_code()),
        alpha=1 / 7,
        beta=3 / 7,
        r0=2,
        provenance="builtin-steane",
    )


BUILTIN_FAMILIES = {"toy": toy_family, "steane": steane_family}


# -- serialization ----------------------------------------------------------------


def code_to_text(code: CssCode) -> str:
    parts = [f"{code.n} {code.m}\n"]
    for tag, mat in (("HX", code.hx), ("HZ", code.hz), ("LX", code.lx), ("LZ", code.lz)):
        parts.append(f"{tag}\n{gf2.matrix_to_text(mat)}")
    return "".join(parts)


def code_from_text(text: str, name: str = "") -> CssCode:
    lines = text.splitlines()
    n, m = (int(t) for t in lines[0].split())
    blocks: dict[str, BitMatrix] = {}
    i = 1
    while i < len(lines):
        tag = lines[i].strip()
        if not tag:
            i += 1
            continue
        header = lines[i + 1]
        nrows = int(header.split()[0])
        chunk = "\n".join(lines[i + 1 : i + 2 + nrows])
        blocks[tag] = gf2.matrix_from_text(chunk)
        i += 2 + nrows
    if "HX" not in blocks or "HZ" not in blocks:
        raise ValueError("code text missing HX/HZ blocks")
    if "LX" in blocks and "LZ" in blocks:
        code = CssCode(blocks["HX"], blocks["HZ"], blocks["LX"], blocks["LZ"], name=name)
    else:
        code = CssCode.from_checks(blocks["HX"], blocks["HZ"], name=name, compute_distance=False)
    if code.n != n or code.m != m:
        raise ValueError("header does not match matrix blocks")
    return code


def save_family(family: CodeFamily, directory) -> None:
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    filenames = []
    for r, code in enumerate(family.levels, start=1):
        fn = f"level_{r}.txt"
        (directory / fn).write_text(code_to_text(code))
        filenames.append(fn)
    manifest = {
        "alpha": family.alpha,
        "beta": family.beta,
        "r0": family.r0,
        "provenance": family.provenance,
        "levels": filenames,
    }
    (directory / "family.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_family(directory) -> CodeFamily:
    directory = pathlib.Path(directory)
    manifest = json.loads((directory / "family.json").read_text())
    levels = tuple(
        code_from_text((directory / fn).read_text(), name=f"level{r}")
        for r, fn in enumerate(manifest["levels"], start=1)
    )
    return CodeFamily(
        levels=levels,
        alpha=manifest["alpha"],
        beta=manifest["beta"],
        r0=manifest["r0"],
        provenance=manifest.get("provenance", ""),
    )
