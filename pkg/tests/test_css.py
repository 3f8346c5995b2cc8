import itertools

import numpy as np
import pytest

from decint import css, gf2
from decint.css import CssCode, PauliOp
from decint.gf2 import BitMatrix, BitVector


@pytest.fixture(scope="module")
def c422():
    return css.c422()


@pytest.fixture(scope="module")
def steane():
    return css.steane_code()


def brute_sector_distance(h_ker: BitMatrix, h_stab: BitMatrix) -> int:
    """Oracle: enumerate all vectors, min weight in ker(h_ker) \\ rowspace(h_stab)."""
    n = h_ker.ncols
    best = n + 1
    for bits in itertools.product([0, 1], repeat=n):
        v = BitVector.from_bits(bits)
        if v.weight() == 0 or v.weight() >= best:
            continue
        if h_ker.mul_vec(v).weight() != 0:
            continue
        if gf2.row_space_contains(h_stab, v):
            continue
        best = v.weight()
    return best


class TestValidate:
    def test_c422_all_pass(self, c422):
        rep = c422.validate()
        assert rep.passed, str(rep)
        assert c422.m == 2

    def test_nonorthogonal_checks_fail(self):
        h = BitMatrix.from_rows(["10"])
        code = CssCode(h, h, BitMatrix.from_rows(["01"]), BitMatrix.from_rows(["01"]))
        rep = code.validate()
        assert not rep.passed
        assert any(c.name == "hx_hz_orthogonal" for c in rep.failures())

    def test_steane_all_pass(self, steane):
        rep = steane.validate()
        assert rep.passed, str(rep)
        assert steane.m == 1
        assert gf2.rank(steane.hx) == 3 and gf2.rank(steane.hz) == 3

    def test_trivial_code(self):
        code = css.trivial_code()
        assert code.validate().passed
        assert (code.n, code.m) == (1, 1)


class TestReducedWeight:
    def test_identity(self, c422):
        assert c422.reduced_weight(PauliOp.identity(4)).weight == 0

    def test_full_x_is_stabilizer(self, c422):
        p = PauliOp(BitVector.ones(4), BitVector.zeros(4))
        assert c422.reduced_weight(p).weight == 0

    def test_weight_three_reduces_to_one(self, c422):
        p = PauliOp(BitVector.from_bits([1, 1, 1, 0]), BitVector.zeros(4))
        assert c422.reduced_weight(p).weight == 1

    def test_zero_on_whole_stabilizer_group(self, steane):
        # Exhaustive over the 2^6 stabilizer group elements.
        bx = steane.x_stabilizer_basis()
        bz = steane.z_stabilizer_basis()
        for cx in itertools.product([0, 1], repeat=bx.nrows):
            for cz in itertools.product([0, 1], repeat=bz.nrows):
                x = BitVector.zeros(7)
                z = BitVector.zeros(7)
                for i, c in enumerate(cx):
                    if c:
                        x = x ^ bx.row(i)
                for i, c in enumerate(cz):
                    if c:
                        z = z ^ bz.row(i)
                assert steane.reduced_weight(PauliOp(x, z)).weight == 0

    def test_invariant_under_stabilizer_multiplication(self, steane):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = PauliOp(
                BitVector.from_bits(rng.integers(0, 2, 7)),
                BitVector.from_bits(rng.integers(0, 2, 7)),
            )
            s_x = steane.x_stabilizer_basis().row(int(rng.integers(0, 3)))
            s_z = steane.z_stabilizer_basis().row(int(rng.integers(0, 3)))
            q = PauliOp(p.x ^ s_x, p.z ^ s_z)
            assert steane.reduced_weight(p).weight == steane.reduced_weight(q).weight


class TestMinDistance:
    def test_trivial(self):
        assert css.trivial_code().min_distance() == (1, True)

    def test_c422(self, c422):
        assert c422.min_distance() == (2, True)
        assert brute_sector_distance(c422.hx, c422.hz) == 2

    def test_steane(self, steane):
        assert steane.min_distance() == (3, True)
        assert brute_sector_distance(steane.hx, steane.hz) == 3

    def test_detectability_below_distance(self, steane):
        # No non-stabilizer Pauli of weight < d commutes with all checks.
        d = steane.min_distance()[0]
        for support in itertools.chain.from_iterable(
            itertools.combinations(range(7), w) for w in range(1, d)
        ):
            for kinds in itertools.product("XZY", repeat=len(support)):
                x = np.zeros(7, dtype=np.uint8)
                z = np.zeros(7, dtype=np.uint8)
                for q, k in zip(support, kinds):
                    x[q] = k in "XY"
                    z[q] = k in "ZY"
                xv, zv = BitVector.from_bits(x), BitVector.from_bits(z)
                commutes = (
                    steane.hz.mul_vec(xv).weight() == 0
                    and steane.hx.mul_vec(zv).weight() == 0
                )
                if commutes:
                    assert gf2.row_space_contains(steane.hx, xv)
                    assert gf2.row_space_contains(steane.hz, zv)


class TestEncodeState:
    def test_trivial_zero(self):
        t = css.trivial_code().encode_state([0])
        assert t.measure_z(0) == (0, True)

    def test_c422_stabilizers(self, c422):
        t = c422.encode_state([0, 0])
        ones = np.ones(4, dtype=np.uint8)
        zeros = np.zeros(4, dtype=np.uint8)
        assert t.expectation_z(ones, zeros) == 0  # XXXX
        assert t.expectation_z(zeros, ones) == 0  # ZZZZ
        for j in range(2):
            lz = c422.lz.row(j).to_array()
            assert t.expectation_z(zeros, lz) == 0

    def test_steane_logical_one(self, steane):
        t = steane.encode_state([1])
        lz = steane.lz.row(0).to_array()
        assert t.expectation_z(np.zeros(7, np.uint8), lz) == 1

    @pytest.mark.parametrize("u", [(0, 0), (0, 1), (1, 0), (1, 1)])
    def test_c422_syndrome_zero_and_logical_signs(self, c422, u):
        t = c422.encode_state(u)
        for i in range(c422.hx.nrows):
            assert t.expectation_z(c422.hx.row(i).to_array(), np.zeros(4, np.uint8)) == 0
        for i in range(c422.hz.nrows):
            assert t.expectation_z(np.zeros(4, np.uint8), c422.hz.row(i).to_array()) == 0
        for j in range(2):
            assert t.expectation_z(np.zeros(4, np.uint8), c422.lz.row(j).to_array()) == u[j]


class TestLiftLogical:
    def test_lift_x_is_representative(self, c422):
        x, z, s = c422.lift_logical(np.array([1, 0]), np.array([0, 0]))
        assert np.array_equal(x, c422.lx.row(0).to_array())
        assert not z.any() and s == 0

    def test_lift_y_hermitian(self, steane):
        x, z, s = steane.lift_logical(np.array([1]), np.array([1]))
        assert np.array_equal(x, steane.lx.row(0).to_array())
        assert np.array_equal(z, steane.lz.row(0).to_array())
        assert s in (0, 1)


class TestHgp:
    def test_two_bit_repetition(self):
        h = BitMatrix.from_rows(["11"])
        code = css.build_hgp(h, h)
        assert (code.hx @ code.hz.transpose()).is_zero()
        assert code.validate().passed
        assert code.m == code.n - gf2.rank(code.hx) - gf2.rank(code.hz)

    def test_three_bit_repetition_toric_like(self):
        h = BitMatrix.from_rows(["110", "011"])
        code = css.build_hgp(h, h)
        assert code.validate().passed
        assert code.m == 1

    def test_toy_level_codes(self):
        c3 = css.build_hgp(BitMatrix.from_rows(["111"]), BitMatrix.from_rows(["111"]))
        assert (c3.n, c3.m) == (10, 4)
        assert c3.min_distance() == (2, True)
        c4 = css.build_hgp(BitMatrix.from_rows(["111"]), BitMatrix.from_rows(["11111"]))
        assert (c4.n, c4.m) == (16, 8)
        assert c4.validate().passed


class TestFamilies:
    def test_toy_family_valid(self):
        fam = css.toy_family()
        rep = fam.validate()
        assert rep.passed, "\n".join(str(c) for c in rep.failures())
        assert [c.m for c in fam.levels] == [1, 2, 4, 8]

    def test_steane_family_valid(self):
        rep = css.steane_family().validate()
        assert rep.passed, "\n".join(str(c) for c in rep.failures())

    def test_rate_adjust_identity_on_powers_of_two(self):
        fam = css.toy_family()
        base = [fam.level(2), fam.level(3), fam.level(4)]
        adjusted = css.build_family_rate_adjusted(base, alpha=0.4, c1=2.0)
        assert [c.m for c in adjusted.levels] == [1, 2, 4, 8]
        for got, want in zip(adjusted.levels[1:], base):
            assert got.hx == want.hx and got.hz == want.hz

    def test_rate_adjust_freezes_odd_m(self):
        # Base code with m = 3: freeze one logical to reach 2^1.
        h1 = BitMatrix.from_rows(["110", "011"])
        h2 = BitMatrix.from_rows(["1111"])
        base3 = css.build_hgp(h1, h2)
        assert base3.m == 3
        big = css.build_hgp(BitMatrix.from_rows(["111"]), BitMatrix.from_rows(["11111"]))
        adjusted = css.build_family_rate_adjusted([base3, big], alpha=0.2, c1=2.0)
        lvl2 = adjusted.level(2)
        assert lvl2.m == 2 and lvl2.n == base3.n
        assert (lvl2.hx @ lvl2.hz.transpose()).is_zero()
        assert lvl2.validate().passed
        assert gf2.rank(lvl2.hz) == gf2.rank(base3.hz) + 1

    def test_freeze_preserves_orthogonality(self):
        code = css.build_hgp(BitMatrix.from_rows(["111"]), BitMatrix.from_rows(["111"]))
        frozen = css.freeze_logicals(code, 2)
        assert (frozen.hx @ frozen.hz.transpose()).is_zero()
        assert frozen.validate().passed

    def test_rate_adjust_rejects_bad_base(self):
        fam = css.toy_family()
        with pytest.raises(ValueError):
            css.build_family_rate_adjusted([fam.level(3), fam.level(2)], alpha=0.4, c1=2.0)


class TestSerialization:
    def test_code_roundtrip(self, steane):
        text = css.code_to_text(steane)
        back = css.code_from_text(text, name="steane")
        assert back.hx == steane.hx and back.hz == steane.hz
        assert back.lx == steane.lx and back.lz == steane.lz

    def test_family_roundtrip(self, tmp_path):
        fam = css.toy_family()
        css.save_family(fam, tmp_path / "fam")
        back = css.load_family(tmp_path / "fam")
        assert back.depth == fam.depth
        assert back.alpha == fam.alpha and back.r0 == fam.r0
        for a, b in zip(back.levels, fam.levels):
            assert a.hx == b.hx and a.hz == b.hz and a.lx == b.lx and a.lz == b.lz

    def test_corrupt_family_detected(self, tmp_path):
        fam = css.toy_family()
        css.save_family(fam, tmp_path / "fam")
        target = tmp_path / "fam" / "level_2.txt"
        text = target.read_text().replace("1111", "1011", 1)
        target.write_text(text)
        back = css.load_family(tmp_path / "fam")
        assert not back.validate().passed
