"""Unit tests for cost vectors, the reversible compiler, and preparation routines."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nflab import (
    Aggregator,
    ShapeError,
    CostVector,
    GateList,
    Permutation,
    RegisterShape,
    TRANSPOSITION_MODEL,
    ValidationError,
    aggregate_cost,
    aggregate_cost_samp_alg,
    build_tilde_p,
    compile_permutation,
    compose,
    distribution_class_partition,
    gate_list_from_text,
    identity,
    output_distribution,
    build_input_state,
    prepare_stars_and_bars,
    random_permutation,
    random_stars_and_bars_target,
    rational_state,
    scalar_cost,
    scaling_experiment,
    tilde_cost,
    transposition,
    transposition_count_cost,
    transposition_sequence,
)
from nflab.core import OutcomeDistribution

S1 = RegisterShape(1, 1, 1, 1)
FIXTURE = rational_state([Fraction(16, 25), Fraction(9, 25)])


class TestCostVector:
    def test_lexicographic_order(self):
        a = CostVector(("t",), (2.0,))
        b = CostVector(("t",), (3.0,))
        assert a < b
        assert max([a, b]) == b

    def test_within_budget_is_componentwise(self):
        v = CostVector(("g",), (5.0,))
        assert v.within((5.0,))
        assert not v.within((4.9,))

    def test_component_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            CostVector(("a",), (1.0,)) < CostVector(("b",), (1.0,))

    def test_add(self):
        a = scalar_cost("t", 2.0)
        assert a.add(scalar_cost("t", 3.0)).values == (5.0,)


class TestTranspositionCost:
    def test_identity_costs_zero(self):
        assert transposition_count_cost(identity(8)).values == (0,)

    def test_single_swap_costs_one(self):
        assert transposition_count_cost(transposition(2, 5, 8)).values == (1,)

    def test_cycle_costs_length_minus_one(self):
        p = Permutation((1, 2, 3, 0))  # one 4-cycle
        assert transposition_count_cost(p).values == (3,)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 9))
    def test_sequence_reconstructs_permutation(self, seed):
        rng = random.Random(seed)
        p = random_permutation(8, rng)
        out = identity(8)
        for a, b in transposition_sequence(p):
            out = compose(transposition(a, b, 8), out)
        assert out.image == p.image
        assert len(transposition_sequence(p)) == transposition_count_cost(p).values[0]


class TestAggregator:
    def test_average(self):
        agg = Aggregator("average")
        vs = [scalar_cost("t", v) for v in (0, 1, 1, 2, 2, 2, 3, 3, 4)]
        assert agg(vs).values == (2.0,)

    def test_max(self):
        agg = Aggregator("max")
        vs = [scalar_cost("t", v) for v in (0, 1, 4, 2)]
        assert agg(vs).values == (4,)

    def test_budget_counts_classes_within_threshold(self):
        agg = Aggregator("budget", budget=(1.0,))
        vs = [scalar_cost("t", v) for v in (0, 1, 1, 2, 2, 2, 3, 3, 4)]
        # Three classes cost at most 1; stored negated so cheaper is larger.
        assert agg(vs).values == (-3,)

    def test_permutation_symmetry(self):
        rng = random.Random(2)
        vs = [scalar_cost("t", rng.randint(0, 9)) for _ in range(12)]
        shuffled = vs[:]
        rng.shuffle(shuffled)
        for agg in (Aggregator("average"), Aggregator("max"), Aggregator("budget", budget=(3.0,))):
            assert agg(vs) == agg(shuffled)

    def test_budget_requires_threshold(self):
        with pytest.raises(ValidationError):
            Aggregator("budget")


class TestCompiler:
    def test_gate_text_round_trip(self):
        gl = compile_permutation(transposition(0, 3, 8), 3)
        text = gl.to_text()
        assert gate_list_from_text(text, gl.n).gates == gl.gates

    def test_serialization_format(self):
        gl = compile_permutation(transposition(0, 1, 2), 1)
        for line in gl.to_text().splitlines():
            op = line.split()
            assert op[0] in ("X", "CCX")
            assert all(tok.isdigit() for tok in op[1:])

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_compiled_circuit_realizes_permutation(self, n):
        rng = random.Random(n)
        for _ in range(6):
            p = random_permutation(2 ** n, rng)
            assert compile_permutation(p, n).simulate().image == p.image

    def test_gate_count_grows_linearly(self):
        # One transposition costs O(n) gates: check the per-n worst case
        # stays under an explicit linear envelope.
        rng = random.Random(0)
        for n in range(3, 9):
            worst = 0
            for _ in range(10):
                a, b = rng.sample(range(2 ** n), 2)
                worst = max(worst, len(compile_permutation(transposition(a, b, 2 ** n), n).gates))
            assert worst <= 12 * n

    def test_ancilla_restoration_enforced(self):
        # A bare CCX targeting the ancilla line leaves it dirty.
        bad = GateList(1, (("X", 1),))
        with pytest.raises(ValidationError):
            bad.simulate()


class TestAggregateCost:
    def test_per_class_minima_at_s1(self):
        partition = distribution_class_partition(FIXTURE, S1)
        result = aggregate_cost(partition, TRANSPOSITION_MODEL, Aggregator("average"))
        minima = sorted(v.values[0] for v in result.per_class.values())
        assert minima == [0, 1, 1, 2, 2, 2, 3, 3, 4]
        assert result.aggregate.values == (2.0,)
        assert result.exact

    def test_minimizers_are_members_with_minimal_cost(self):
        partition = distribution_class_partition(FIXTURE, S1)
        result = aggregate_cost(partition, TRANSPOSITION_MODEL, Aggregator("max"))
        for key, p in result.minimizers.items():
            assert TRANSPOSITION_MODEL(p) == result.per_class[key]

    def test_sampled_mode_upper_bounds_exact(self):
        partition = distribution_class_partition(FIXTURE, S1)
        exact = aggregate_cost(partition, TRANSPOSITION_MODEL, Aggregator("max"))
        approx = aggregate_cost(
            partition, TRANSPOSITION_MODEL, Aggregator("max"),
            mode="best_of_sampled", samples=50, seed=1,
        )
        assert not approx.exact
        assert exact.aggregate <= approx.aggregate


class TestSecondaryCost:
    def test_tilde_permutation_block_structure(self):
        p = transposition(0, 4, 8)
        tp = build_tilde_p([p, identity(8)])
        assert tp.nx == 1
        assert tilde_cost(tp, TRANSPOSITION_MODEL).values == (1,)

    def test_secondary_aggregate_at_s1(self):
        partition = distribution_class_partition(FIXTURE, S1)
        res = aggregate_cost_samp_alg(partition, 1, TRANSPOSITION_MODEL, Aggregator("average"))
        assert res.num_secondary_classes == 81
        assert res.aggregate.values == (4.0,)


class TestPreparation:
    def test_target_prepared_exactly(self):
        shape = RegisterShape(2, 2, 0, 2)
        target = OutcomeDistribution(
            (Fraction(1, 4), Fraction(2, 4), Fraction(0), Fraction(1, 4))
        )
        p = prepare_stars_and_bars(target, shape)
        inp = build_input_state(shape, rational_state([Fraction(1)]))
        assert output_distribution(inp, p).probabilities == target.probabilities

    def test_transposition_budget(self):
        rng = random.Random(5)
        for nt in (1, 2, 3):
            shape = RegisterShape(nt, nt, 0, nt)
            target = random_stars_and_bars_target(nt, rng)
            p = prepare_stars_and_bars(target, shape)
            assert transposition_count_cost(p).values[0] <= 2 ** nt

    def test_mass_granularity_enforced(self):
        shape = RegisterShape(1, 1, 0, 1)
        with pytest.raises(ValidationError):
            prepare_stars_and_bars(
                OutcomeDistribution((Fraction(1, 3), Fraction(2, 3))), shape
            )

    def test_scaling_experiment_rows(self):
        rows, c_fit = scaling_experiment([1, 2, 3], samples_per_size=5, seed=0)
        assert [r.n_tilde for r in rows] == [1, 2, 3]
        assert rows[0].bound_lower_formula is None
        assert rows[1].bound_lower_formula == 4.0
        assert c_fit > 0
        for r in rows:
            assert r.max_transpositions <= r.N_tilde

    def test_scaling_size_guard(self):
        with pytest.raises(ValidationError):
            scaling_experiment([7], samples_per_size=1, seed=0)
