"""Desk-scale no-free-lunch comparison of two resource states.

Two states that are both distinct and strongly distinct must induce the same
partition of the permutation set into distribution classes, and therefore the
same aggregate cost under every cost model and aggregator; a state failing
either predicate prepares strictly fewer distributions instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .core import RegisterShape, ResourceState
from .cost import (
    Aggregator,
    CostModel,
    CostVector,
    aggregate_cost,
    aggregate_cost_samp_alg,
)
from .equivalence import (
    count_classes,
    distribution_class_partition,
)
from .haar import is_distinct, strong_distinct_oracle


@dataclass(frozen=True)
class CostPair:
    cost_a: CostVector
    cost_b: CostVector

    @property
    def equal(self) -> bool:
        return self.cost_a == self.cost_b


@dataclass(frozen=True)
class NflReport:
    shape: RegisterShape
    precondition_ok: bool
    violations: Tuple[str, ...]
    m_star: int
    m_a: Optional[int] = None
    m_b: Optional[int] = None
    partitions_identical: Optional[bool] = None
    cost_pairs: Optional[Dict[Tuple[str, str], CostPair]] = None
    secondary_class_counts: Optional[Tuple[int, int]] = None
    secondary_cost_pairs: Optional[Dict[Tuple[str, str], CostPair]] = None

    @property
    def all_equal(self) -> bool:
        if not self.precondition_ok or not self.partitions_identical:
            return False
        pairs = list((self.cost_pairs or {}).values())
        pairs += list((self.secondary_cost_pairs or {}).values())
        if self.secondary_class_counts is not None:
            if self.secondary_class_counts[0] != self.secondary_class_counts[1]:
                return False
        return all(p.equal for p in pairs)


def _predicate_violations(
    name: str, state: ResourceState, shape: RegisterShape, tolerance: float
) -> List[str]:
    out = []
    tol = 0 if state.backend == "rational" else tolerance
    if not is_distinct(state, tol):
        out.append(f"state {name} is not distinct")
    if not strong_distinct_oracle(state, shape):
        out.append(f"state {name} is not strongly distinct")
    return out


def nfl_compare(
    state_a: ResourceState,
    state_b: ResourceState,
    shape: RegisterShape,
    cost_models: Sequence[CostModel],
    aggregators: Sequence[Aggregator],
    nx: Optional[int] = None,
    tolerance: float = 1e-12,
) -> NflReport:
    """Exhaustively verify cost equality for two admissible resource states.

    Both states must pass distinctness and the strong-distinctness oracle;
    otherwise a precondition-violation report is returned (not an exception),
    citing the collapsed class count M < M*.
    """
    m_star = count_classes(shape)
    violations = _predicate_violations("A", state_a, shape, tolerance)
    violations += _predicate_violations("B", state_b, shape, tolerance)
    if violations:
        collapsed: Dict[str, int] = {}
        for name, state in (("A", state_a), ("B", state_b)):
            part = distribution_class_partition(state, shape)
            collapsed[name] = part.num_classes
        return NflReport(
            shape=shape,
            precondition_ok=False,
            violations=tuple(
                violations
                + [f"M(A) = {collapsed['A']}, M(B) = {collapsed['B']}, M* = {m_star}"]
            ),
            m_star=m_star,
            m_a=collapsed["A"],
            m_b=collapsed["B"],
        )

    part_a = distribution_class_partition(state_a, shape)
    part_b = distribution_class_partition(state_b, shape)
    identical = part_a.labels == part_b.labels

    cost_pairs: Dict[Tuple[str, str], CostPair] = {}
    for model in cost_models:
        for agg in aggregators:
            ra = aggregate_cost(part_a, model, agg)
            rb = aggregate_cost(part_b, model, agg)
            cost_pairs[(model.name, agg.name)] = CostPair(ra.aggregate, rb.aggregate)

    secondary_counts = None
    secondary_pairs = None
    if nx is not None and nx > 0:
        secondary_pairs = {}
        for model in cost_models:
            for agg in aggregators:
                sa = aggregate_cost_samp_alg(part_a, nx, model, agg)
                sb = aggregate_cost_samp_alg(part_b, nx, model, agg)
                secondary_pairs[(model.name, agg.name)] = CostPair(
                    sa.aggregate, sb.aggregate
                )
                secondary_counts = (
                    sa.num_secondary_classes,
                    sb.num_secondary_classes,
                )

    return NflReport(
        shape=shape,
        precondition_ok=True,
        violations=(),
        m_star=m_star,
        m_a=part_a.num_classes,
        m_b=part_b.num_classes,
        partitions_identical=identical,
        cost_pairs=cost_pairs,
        secondary_class_counts=secondary_counts,
        secondary_cost_pairs=secondary_pairs,
    )
