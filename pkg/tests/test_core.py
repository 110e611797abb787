"""Unit tests for register shapes, states, permutations, and output distributions."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nflab import (
    FLOAT_ATOL,
    Permutation,
    RegisterShape,
    ShapeError,
    ValidationError,
    build_input_state,
    compose,
    deferred_equivalence_check,
    float_state,
    identity,
    invert,
    output_distribution,
    random_permutation,
    rational_state,
    sample_outcome,
    transposition,
)

S1 = RegisterShape(1, 1, 1, 1)
FIXTURE = rational_state([Fraction(16, 25), Fraction(9, 25)])


class TestRegisterShape:
    def test_s1_derived_quantities(self):
        assert S1.n == 3
        assert S1.N == 8
        assert S1.num_bins == 2
        assert S1.bin_size == 4
        assert S1.resource_dim == 2
        assert S1.copies == 2
        assert S1.support == 4
        assert S1.zero_class_size == 4
        assert S1.num_value_classes == 3

    def test_ny_must_be_within_register(self):
        with pytest.raises(ShapeError):
            RegisterShape(0, 0, 1, 2)
        with pytest.raises(ShapeError):
            RegisterShape(1, 1, 1, 0)

    def test_negative_field_rejected(self):
        with pytest.raises(ShapeError):
            RegisterShape(-1, 1, 1, 1)

    def test_value_class_of_maps_support_then_zero_padding(self):
        # Two copies of each of two coefficients, then the zero class.
        assert [S1.value_class_of(j) for j in range(8)] == [0, 0, 1, 1, 2, 2, 2, 2]


class TestResourceState:
    def test_rational_state_normalization_enforced(self):
        with pytest.raises(ValidationError):
            rational_state([Fraction(1, 2), Fraction(1, 3)])

    def test_float_state_tolerates_rounding(self):
        float_state([1 / 3, 1 / 3, 1 / 3, 0.0])

    def test_float_state_rejects_bad_mass(self):
        with pytest.raises(ValidationError):
            float_state([0.5, 0.4])

    def test_negative_mass_rejected(self):
        with pytest.raises(ValidationError):
            rational_state([Fraction(3, 2), Fraction(-1, 2)])


class TestInputState:
    def test_fixture_expansion(self):
        # Each coefficient mass is halved (one uniform bit) and repeated twice,
        # then padded with zeros to length N = 8.
        inp = build_input_state(S1, FIXTURE)
        expected = (
            Fraction(8, 25),
            Fraction(8, 25),
            Fraction(9, 50),
            Fraction(9, 50),
            Fraction(0),
            Fraction(0),
            Fraction(0),
            Fraction(0),
        )
        assert inp.squared_magnitudes == expected

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            build_input_state(S1, rational_state([Fraction(1, 4)] * 4))

    def test_float_backend_preserved(self):
        inp = build_input_state(S1, float_state([0.64, 0.36]))
        assert inp.backend == "float"
        assert math.isclose(sum(inp.squared_magnitudes), 1.0, abs_tol=FLOAT_ATOL)


class TestPermutation:
    def test_identity_and_inverse(self):
        p = Permutation((2, 0, 1))
        assert compose(p, invert(p)).image == identity(3).image

    def test_compose_order_is_right_to_left(self):
        # compose(a, b) applies b first.
        a = transposition(0, 1, 3)
        b = transposition(1, 2, 3)
        assert [compose(a, b)(k) for k in range(3)] == [a(b(k)) for k in range(3)]

    def test_non_bijection_rejected(self):
        with pytest.raises(ValidationError):
            Permutation((0, 0, 1))

    def test_random_permutation_is_valid(self):
        rng = random.Random(7)
        p = random_permutation(8, rng)
        assert sorted(p.image) == list(range(8))


class TestOutputDistribution:
    def test_identity_concentrates_support_in_bin_zero(self):
        # All four nonzero input slots sit below B = 4, i.e. in bin 0.
        dist = output_distribution(build_input_state(S1, FIXTURE), identity(8))
        assert dist.probabilities == (Fraction(1), Fraction(0))

    def test_swap_into_other_bin(self):
        # Moving one mass-8/25 slot into the top bin shifts that mass across bins.
        dist = output_distribution(build_input_state(S1, FIXTURE), transposition(0, 4, 8))
        assert dist.probabilities == (Fraction(17, 25), Fraction(8, 25))

    def test_probabilities_sum_to_one(self):
        rng = random.Random(11)
        inp = build_input_state(S1, FIXTURE)
        for _ in range(20):
            dist = output_distribution(inp, random_permutation(8, rng))
            assert sum(dist.probabilities) == 1

    def test_sample_outcome_matches_support(self):
        inp = build_input_state(S1, FIXTURE)
        rng = random.Random(3)
        swap = transposition(0, 4, 8)
        counts = {"0": 0, "1": 0}
        for _ in range(500):
            counts[sample_outcome(inp, swap, rng)] += 1
        # 17/25 of the mass lies in bin 0 after the swap; generous binomial band.
        assert 280 < counts["0"] < 400


class TestDeferredEquivalence:
    def test_exact_agreement_on_fixture(self):
        inp = build_input_state(S1, FIXTURE)
        rng = random.Random(5)
        for _ in range(50):
            assert deferred_equivalence_check(inp, random_permutation(8, rng))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 9))
    def test_float_agreement_random_states(self, seed):
        rng = random.Random(seed)
        raw = [rng.random() for _ in range(2)]
        total = sum(raw)
        state = float_state([x / total for x in raw])
        inp = build_input_state(S1, state)
        assert deferred_equivalence_check(inp, random_permutation(8, rng))
