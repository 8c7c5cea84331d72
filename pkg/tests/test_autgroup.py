import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import invertible_matrices
from polaraut.autgroup import (
    AffinePermutation,
    BlockProfile,
    apply_affine,
    block_profile,
    blta_log2_size,
    blta_size,
    compose,
    identity_perm,
    inverse,
    is_automorphism,
    is_blta_member,
    partial_symmetry,
    phi_set,
    sample_blta,
    sample_lta,
    unapply_affine,
    variable_permutation,
)
from polaraut.errors import DimensionError, InvalidPermutationError
from polaraut.f2core import BitMatrix, BitVector, random_invertible
from polaraut.monomial import MonomialCode, evaluate, parse_code
from polaraut.polar import ChannelModel, construct_polar


def swap(m, a, b):
    sigma = list(range(m))
    sigma[a], sigma[b] = sigma[b], sigma[a]
    return variable_permutation(sigma)


def polar_codes(max_m=8):
    bec = ChannelModel("bec", 0.5)
    for m in range(2, max_m + 1):
        for k in sorted({1, (1 << m) // 4, (1 << m) // 2, 3 * (1 << m) // 4, (1 << m) - 1}):
            yield construct_polar(bec, m, k).monomials


class TestApplyAffine:
    def test_identity(self):
        w = BitVector.from_str("01101001")
        assert apply_affine(identity_perm(3), w) == w

    def test_lsb_offset_swaps_pairs(self):
        perm = AffinePermutation(BitMatrix.identity(3), BitVector.from_str("001"))
        w = BitVector.from_str("10000110")
        assert apply_affine(perm, w).to_list() == [0, 1, 0, 0, 1, 0, 0, 1]

    def test_swap_x0_x2_moves_index1_to_4(self):
        assert swap(3, 0, 2).index_map[1] == 4

    def test_wrong_length(self):
        with pytest.raises(DimensionError):
            apply_affine(identity_perm(3), BitVector.zeros(4))

    def test_evaluation_becomes_substitution(self):
        # f = x0*x1 under x -> (x1, x0 + x2, x2 + 1) gives x1*(x0 + x2)
        perm = AffinePermutation(BitMatrix.from_strs(["010", "101", "001"]), BitVector.from_str("001"))
        got = apply_affine(perm, evaluate(parse_code("x0*x1", 3).monomials[0]))
        want = [((i >> 1) & 1) & (((i >> 2) ^ i) & 1) for i in range(8)]
        assert got.to_list() == want

    def test_batch_and_inverse(self):
        rng = np.random.default_rng(0)
        perm = sample_lta(4, rng)
        words = rng.normal(size=(3, 16))
        np.testing.assert_array_equal(unapply_affine(perm, apply_affine(perm, words)), words)

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_bijective(self, m, seed):
        rng = np.random.default_rng(seed)
        perm = AffinePermutation(random_invertible(m, rng), BitVector.from_array(rng.integers(0, 2, m)))
        assert sorted(perm.index_map.tolist()) == list(range(1 << m))

    def test_singular_rejected(self):
        with pytest.raises(ValueError):
            AffinePermutation(BitMatrix.from_strs(["11", "11"]), BitVector.zeros(2))


class TestVariablePermutation:
    def test_identity(self):
        assert variable_permutation([0, 1, 2]) == identity_perm(3)

    def test_reversal(self):
        perm = variable_permutation([2, 1, 0])
        assert perm.index_map.tolist() == [0, 4, 2, 6, 1, 5, 3, 7]

    def test_not_bijective(self):
        with pytest.raises(InvalidPermutationError):
            variable_permutation([0, 0, 1])

    @given(st.permutations(list(range(5))))
    def test_inverse_is_identity(self, sigma):
        perm = variable_permutation(sigma)
        assert compose(perm, inverse(perm)) == identity_perm(5)

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_compose_matches_sequential_application(self, m, seed):
        rng = np.random.default_rng(seed)
        f, s = sample_lta(m, rng), sample_blta(BlockProfile((m,)), rng)
        w = rng.integers(0, 2, 1 << m)
        np.testing.assert_array_equal(apply_affine(compose(f, s), w), apply_affine(s, apply_affine(f, w)))


class TestIsAutomorphism:
    def test_identity(self, code16):
        assert is_automorphism(code16, identity_perm(4))

    def test_tree_code_swaps(self, code16):
        assert is_automorphism(code16, swap(4, 2, 3))
        assert not is_automorphism(code16, swap(4, 0, 1))

    def test_dimension_mismatch(self, code16):
        with pytest.raises(DimensionError):
            is_automorphism(code16, identity_perm(3))

    def test_methods_agree(self):
        rng = np.random.default_rng(5)
        rnd = random.Random(5)
        for _ in range(150):
            m = rnd.randint(1, 4)
            code = MonomialCode(m, frozenset(v for v in range(1 << m) if rnd.random() < 0.5))
            perm = AffinePermutation(random_invertible(m, rng), BitVector.from_array(rng.integers(0, 2, m)))
            assert is_automorphism(code, perm, "anf") == is_automorphism(code, perm, "span")

    def test_group_closure(self):
        rng = np.random.default_rng(17)
        rnd = random.Random(17)
        for m in (2, 3):
            mats = invertible_matrices(m)
            for _ in range(15):
                code = MonomialCode(m, frozenset(v for v in range(1 << m) if rnd.random() < 0.6))
                auts = []
                for rows in mats:
                    for b in range(1 << m):
                        p = AffinePermutation(BitMatrix.from_lists(rows), BitVector(m, b))
                        if is_automorphism(code, p):
                            auts.append(p)
                for _ in range(20):
                    p1, p2 = auts[rng.integers(len(auts))], auts[rng.integers(len(auts))]
                    assert is_automorphism(code, compose(p1, p2))
                    assert is_automorphism(code, inverse(p1))


class TestBlockProfile:
    def test_tree_code(self, code16):
        assert block_profile(code16).sizes == (2, 1, 1)

    def test_fully_symmetric(self, rm13):
        assert block_profile(rm13).sizes == (3,)

    def test_two_one(self):
        assert block_profile(parse_code("1,x0,x1,x2,x1*x2", 3)).sizes == (2, 1)

    def test_profile_fields(self):
        p = BlockProfile.parse("2,1,1")
        assert (p.m, p.l) == (4, 3)
        assert [p.nu(i) for i in range(3)] == [2, 1, 0]
        assert [p.gamma(i) for i in range(3)] == [0, 2, 3]
        assert list(p.block_vars(0)) == [2, 3]
        assert p.to_json() == [2, 1, 1]

    def test_relisting_invariance(self):
        rnd = random.Random(2)
        for code in polar_codes(6):
            gens = list(code.gens)
            rnd.shuffle(gens)
            assert block_profile(MonomialCode.from_masks(code.m, gens)) == block_profile(code)


class TestBltaSize:
    @pytest.mark.parametrize("m", range(1, 9))
    def test_lta_limit(self, m):
        assert blta_size(BlockProfile.lta(m)) == 2 ** (m * (m - 1) // 2 + m)

    def test_full_affine_m2(self):
        assert len(invertible_matrices(2)) == 6
        assert blta_size(BlockProfile((2,))) == 24

    def test_two_one(self):
        assert blta_size(BlockProfile((2, 1))) == 192

    def test_exact_beyond_64_bits(self):
        size = blta_size(BlockProfile((12,)))
        assert size > 2**64
        assert blta_log2_size(BlockProfile((12,))) == pytest.approx(math.log2(size))


class TestSampling:
    def test_lta_is_unit_upper_triangular(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            perm = sample_lta(5, rng)
            for j, row in enumerate(perm.A.rows):
                assert (row >> j) & 1 and row & ((1 << j) - 1) == 0

    def test_coupon_collector_two_one(self):
        profile = BlockProfile((2, 1))
        members = set()
        for rows in invertible_matrices(3):
            for b in range(8):
                p = AffinePermutation(BitMatrix.from_lists(rows), BitVector(3, b))
                if is_blta_member(p, profile):
                    members.add(p)
        assert len(members) == 192
        rng = np.random.default_rng(2024)
        seen = {sample_blta(profile, rng) for _ in range(5000)}
        assert seen == members

    @settings(max_examples=40)
    @given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
    def test_samples_are_members(self, sizes, seed):
        profile = BlockProfile(tuple(sizes))
        assert is_blta_member(sample_blta(profile, np.random.default_rng(seed)), profile)

    def test_member_identity(self):
        assert is_blta_member(identity_perm(4), BlockProfile.lta(4))

    def test_member_rejects_forbidden_entry(self):
        perm = AffinePermutation(BitMatrix.from_strs(["100", "010", "011"]), BitVector.zeros(3))
        assert not is_blta_member(perm, BlockProfile.lta(3))
        assert is_blta_member(perm, BlockProfile((2, 1)))

    def test_member_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            is_blta_member(identity_perm(3), BlockProfile.lta(4))

    def test_tree_code_permutation_samples(self, code16):
        rng = np.random.default_rng(9)
        profile = block_profile(code16)
        for _ in range(50):
            perm = sample_blta(profile, rng)
            if perm.is_linear_permutation():
                assert is_automorphism(code16, perm)
        # the only nontrivial permutation in BLTA((2,1,1)) is the x2/x3 swap
        assert is_blta_member(swap(4, 2, 3), profile)

    def test_lta_automorphisms_of_polar_codes(self):
        rng = np.random.default_rng(3)
        for code in polar_codes(8):
            for _ in range(5):
                assert is_automorphism(code, sample_lta(code.m, rng))

    def test_blta_automorphisms_of_polar_codes(self):
        rng = np.random.default_rng(4)
        for code in polar_codes(8):
            profile = block_profile(code)
            for _ in range(5):
                assert is_automorphism(code, sample_blta(profile, rng))


class TestSymmetry:
    def test_fully_symmetric(self, rm13):
        report = partial_symmetry(rm13)
        assert report.dims == (1, 1, 1) and report.t == 3

    def test_tree_code(self, code16):
        report = partial_symmetry(code16)
        assert report.dims == (3, 1, 2, 2) and report.t == 1
        assert report.minimal_variables == (1,)

    def test_two_one(self):
        report = partial_symmetry(parse_code("1,x0,x1,x2,x1*x2", 3))
        assert report.dims == (1, 2, 2) and report.t == 1

    def test_schema(self):
        for code in polar_codes(6):
            report = partial_symmetry(code)
            low = min(report.dims)
            assert sum(d == low for d in report.dims) == report.t
            assert all(d > low for d in report.dims if d != low)
            assert 1 <= report.t <= code.m
            assert set(report.to_json()) == {"dims", "t", "minimal_variables"}


class TestTheorem2:
    def test_phi_tree_code(self, code16):
        codes = phi_set(code16, 0, BlockProfile((2, 1, 1)))
        assert codes == [
            MonomialCode(2),
            parse_code("1,x0,x1", 2),
            parse_code("1", 2),
            parse_code("1,x0,x1", 2),
        ]

    def test_phi_root(self, code16):
        assert phi_set(code16, 2, BlockProfile((2, 1, 1))) == [code16]

    def test_phi_repetition(self):
        codes = phi_set(parse_code("1", 2), 0, BlockProfile((1, 1)))
        assert codes == [MonomialCode(1), parse_code("1", 1)]

    def test_examples(self, code16, rm13):
        from polaraut.autgroup import verify_theorem2

        assert verify_theorem2(code16, BlockProfile((2, 1, 1)))
        assert verify_theorem2(rm13, BlockProfile((3,)))
        assert not verify_theorem2(code16, BlockProfile((3, 1)))

    def test_level2_swap_invariance(self, code16):
        for sub in phi_set(code16, 0, BlockProfile((2, 1, 1))):
            assert is_automorphism(sub, swap(2, 0, 1))

    def test_polar_codes(self):
        from polaraut.autgroup import verify_theorem2

        for code in polar_codes(8):
            assert verify_theorem2(code, block_profile(code))


def test_json_roundtrip():
    perm = sample_blta(BlockProfile((2, 2)), np.random.default_rng(0))
    data = perm.to_json()
    assert set(data) == {"A", "b"}
    assert AffinePermutation.from_json(data) == perm
