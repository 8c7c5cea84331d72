import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_is_decreasing, brute_precedes, eval_monomial_direct, mask_vars
from polaraut.errors import DimensionError, InvalidDirectionError
from polaraut.f2core import BitVector, int_rank, rank
from polaraut.monomial import (
    Monomial,
    MonomialCode,
    all_monomials,
    decompose,
    derivative_dimension,
    directional_derivative,
    evaluate,
    generator_matrix,
    is_decreasing,
    parse_code,
    parse_monomial,
    partial_derivative_code,
    precedes,
)


def mono(text, m):
    return parse_monomial(text, m)


class TestEvaluate:
    def test_constant(self):
        assert evaluate(Monomial(3, 0)).to_list() == [1] * 8

    def test_x0_is_msb(self):
        assert evaluate(mono("x0", 3)).to_list() == [0, 0, 0, 0, 1, 1, 1, 1]

    def test_x2_is_lsb(self):
        assert evaluate(mono("x2", 3)).to_list() == [0, 1, 0, 1, 0, 1, 0, 1]

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_matches_pointwise_product(self, m):
        for v in range(1 << m):
            assert evaluate(Monomial(m, v)).to_list() == eval_monomial_direct(v, m)

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_all_monomials_independent(self, m):
        rows = [evaluate(mon).bits for mon in all_monomials(m)]
        assert int_rank(rows) == 1 << m


class TestDirectionalDerivative:
    def test_x0_along_e0(self):
        out = directional_derivative(evaluate(mono("x0", 3)), BitVector.from_str("100"))
        assert out.to_list() == [1] * 8

    def test_constant_vanishes(self):
        for b in ["100", "011", "111"]:
            out = directional_derivative(evaluate(Monomial(3, 0)), BitVector.from_str(b))
            assert out.bits == 0

    def test_x0x1_along_11(self):
        # (x0 + 1)(x1 + 1) + x0 x1 = x0 + x1 + 1
        out = directional_derivative(evaluate(mono("x0*x1", 2)), BitVector.from_str("11"))
        want = evaluate(mono("x0", 2)) ^ evaluate(mono("x1", 2)) ^ evaluate(Monomial(2, 0))
        assert out == want

    def test_zero_direction(self):
        with pytest.raises(InvalidDirectionError):
            directional_derivative(evaluate(mono("x0", 2)), BitVector.zeros(2))

    def test_direction_length(self):
        with pytest.raises(DimensionError):
            directional_derivative(evaluate(mono("x0", 2)), BitVector.from_str("100"))

    @given(st.integers(1, 5).flatmap(lambda m: st.tuples(
        st.just(m), st.integers(0, 2 ** (1 << m) - 1), st.integers(1, 2**m - 1))))
    def test_identical_on_mirrored_points(self, args):
        m, fbits, b = args
        d = directional_derivative(BitVector(1 << m, fbits), BitVector(m, b)).to_list()
        shift = int(f"{b:0{m}b}"[::-1], 2)  # variable mask -> index mask
        assert all(d[x] == d[x ^ shift] for x in range(1 << m))


class TestDerivativeCodes:
    def test_example_repetition(self, rm13):
        for i in range(3):
            child = partial_derivative_code(rm13, i)
            assert child == MonomialCode(2, frozenset({0}))

    def test_tree_code_left_child(self, code16):
        assert partial_derivative_code(code16, 0) == parse_code("1,x1,x2", 3)

    def test_constant_gives_zero_code(self):
        rep = parse_code("1", 3)
        for i in range(3):
            child = partial_derivative_code(rep, i)
            assert child.dimension == 0 and child.m == 2

    def test_derivative_dimension_examples(self, rm13, code16):
        assert derivative_dimension(rm13, BitVector.from_str("010")) == 1
        assert derivative_dimension(code16, BitVector.from_str("0010")) == 2
        assert derivative_dimension(parse_code("1,x0", 2), BitVector.from_str("11")) == 1

    def test_derivative_dimension_rejects_zero(self, rm13):
        with pytest.raises(InvalidDirectionError):
            derivative_dimension(rm13, BitVector.zeros(3))

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_partial_dimension_agrees_with_rank(self, m):
        rng = random.Random(m)
        for _ in range(20):
            code = MonomialCode(m, frozenset(v for v in range(1 << m) if rng.random() < 0.5))
            for i in range(m):
                e_i = BitVector(m, 1 << i)
                assert derivative_dimension(code, e_i) == partial_derivative_code(code, i).dimension


class TestDecompose:
    def test_tree_code_root(self, code16):
        minus, plus = decompose(code16, 0)
        assert minus == parse_code("1,x1,x2", 3)  # {1, x2, x3} before re-indexing
        assert plus == parse_code("1,x0,x1,x2", 3)  # {1, x1, x2, x3}

    def test_tree_code_second_level(self, code16):
        minus, plus = decompose(code16, 0)
        assert decompose(minus, 0) == (MonomialCode(2), parse_code("1,x0,x1", 2))
        assert decompose(plus, 0) == (parse_code("1", 2), parse_code("1,x0,x1", 2))

    def test_reindexing_keeps_order(self):
        code = parse_code("x0*x3,x1*x3,x2", 4)
        minus, plus = decompose(code, 1)
        assert minus == parse_code("x2", 3)
        assert plus == parse_code("x0*x2,x1", 3)

    def test_dimension_split_exhaustive(self):
        for m in (1, 2, 3):
            for subset in range(1 << (1 << m)):
                code = MonomialCode(m, frozenset(v for v in range(1 << m) if (subset >> v) & 1))
                for i in range(m):
                    minus, plus = decompose(code, i)
                    assert minus.dimension + plus.dimension == code.dimension
                    assert minus.length == plus.length == code.length // 2


class TestOrder:
    def test_constant_precedes_all(self):
        for v in range(16):
            assert precedes(Monomial(4, 0), Monomial(4, v))

    def test_examples(self):
        assert precedes(mono("x0*x3", 4), mono("x0*x2", 4))
        assert not precedes(mono("x0*x1", 4), mono("x0*x2", 4))

    def test_mismatched_m(self):
        with pytest.raises(DimensionError):
            precedes(Monomial(3, 1), Monomial(4, 1))

    @pytest.mark.parametrize("order", ["reversed", "literal"])
    def test_matches_definition(self, order):
        m = 5
        for a, b in itertools.product(range(1 << m), repeat=2):
            assert precedes(Monomial(m, a), Monomial(m, b), order) == brute_precedes(
                mask_vars(a), mask_vars(b), order
            )

    def test_is_decreasing_examples(self, rm13):
        assert is_decreasing(rm13)
        assert is_decreasing(parse_code("1,x0,x1,x2,x1*x2", 3))
        assert not is_decreasing(parse_code("x2", 3))

    def test_literal_switch(self):
        code = parse_code("1,x0,x1,x2,x1*x2", 3)
        assert is_decreasing(code)
        assert not is_decreasing(code, order="literal")
        assert is_decreasing(parse_code("1,x0,x1,x2,x0*x1", 3), order="literal")

    @pytest.mark.parametrize("order", ["reversed", "literal"])
    def test_is_decreasing_matches_definition(self, order):
        rng = random.Random(11)
        for m in (2, 3, 4):
            for _ in range(150):
                masks = {v for v in range(1 << m) if rng.random() < rng.choice([0.3, 0.6, 0.9])}
                masks.add(0)
                code = MonomialCode(m, frozenset(masks))
                assert is_decreasing(code, order) == brute_is_decreasing(masks, m, order)


class TestCodeBasics:
    def test_rate_and_dimension(self, rm13, code16):
        assert rm13.rate == pytest.approx(0.5)
        assert str(rm13.rate) == "1/2"
        assert code16.dimension == 7

    def test_set_semantics(self):
        assert parse_code("1,x0,x1", 3) == parse_code("x1,1,x0", 3)

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            parse_code("1,x0,x0", 3)

    def test_text_syntax(self):
        assert str(mono("x2*x0", 3)) == "x0*x2"
        assert str(Monomial(3, 0)) == "1"
        with pytest.raises(ValueError):
            parse_monomial("x0+x1", 3)

    def test_json_roundtrip(self, code16):
        data = code16.to_json()
        assert data["m"] == 4
        assert sorted(data["monomials"]) == data["monomials"]
        assert MonomialCode.from_json(data) == code16

    def test_generator_matrix_rank(self, code16):
        assert rank(generator_matrix(code16)) == 7
