import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shared.assignment_core import (
    RangeAssignment,
    cost,
    depends_on,
    increased_range_audit,
    intended_receivers,
    prefix_property_holds,
    reaches_all,
    simulate_broadcast,
    star_cost,
    superadditivity_holds,
)
from shared.cross_model import SOURCE_ID, CrossNetwork, SegmentLabel
from shared.errors import ValidationError
from services.bench_chakra.generators import generate_random_cross

SQRT2, SQRT5 = math.sqrt(2.0), math.sqrt(5.0)


@pytest.fixture
def symmetric_example():
    # the worked example before n4 is moved off (0, 2)
    return CrossNetwork.from_points(
        (-2.0, 0.0),
        [(-3.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (0.0, 2.0), (0.0, -1.0)],
    )


def test_cost_examples():
    assert cost(RangeAssignment.zeros(4)) == 0.0
    assert cost(RangeAssignment([1.0, 2.0])) == 5.0
    assert cost(RangeAssignment([1.0, SQRT5, SQRT2, 0.0, 0.0, 0.0])) == pytest.approx(8.0)
    assert cost(RangeAssignment([2.0, 1.0], alpha=3)) == 9.0


@pytest.mark.parametrize("ranges, alpha", [([-1.0, 0.0], 2.0), ([float("inf")], 2.0), ([1.0], 1.5), ([1.0], 6.5)])
def test_assignment_rejects_bad_values(ranges, alpha):
    with pytest.raises(ValidationError):
        RangeAssignment(ranges, alpha)


def test_assignment_is_read_only():
    a = RangeAssignment([1.0, 2.0])
    with pytest.raises(ValueError):
        a.ranges[0] = 3.0
    assert a.with_range(0, 3.0).as_list() == [3.0, 2.0]
    assert a.as_list() == [1.0, 2.0]


def test_size_mismatch_is_rejected(worked_example):
    with pytest.raises(ValidationError):
        reaches_all(worked_example, RangeAssignment.zeros(3))


def test_one_hop_star(worked_example):
    far = worked_example.dist[SOURCE_ID].max()
    star = RangeAssignment.zeros(6).with_range(SOURCE_ID, far)
    outcome = simulate_broadcast(worked_example, star)
    assert outcome.reached == set(range(6))
    assert outcome.rounds == 1
    assert all(parent == SOURCE_ID for parent in outcome.hop_parentage.values())
    assert cost(star) == pytest.approx(star_cost(worked_example))
    for b in range(1, 6):
        for a in range(1, 6):
            if a != b:
                assert not depends_on(worked_example, star, b, a)


def test_all_zero_reaches_only_source(worked_example):
    outcome = simulate_broadcast(worked_example, RangeAssignment.zeros(6))
    assert outcome.reached == {SOURCE_ID}
    assert outcome.rounds == 0
    assert not reaches_all(worked_example, RangeAssignment.zeros(6))


def test_distributed_example_delivers(symmetric_example):
    ranges = RangeAssignment([1.0, 0.0, SQRT5, 0.0, 0.0, SQRT2])
    outcome = simulate_broadcast(symmetric_example, ranges)
    assert outcome.delivered_to(6)
    assert outcome.hop_parentage[1] == SOURCE_ID
    assert outcome.hop_parentage[2] == SOURCE_ID
    assert {outcome.hop_parentage[v] for v in (3, 4, 5)} == {2}
    assert outcome.rounds == 2
    assert cost(ranges) == pytest.approx(8.0)


def test_hop_by_hop_assignment_delivers(worked_example):
    net = worked_example
    index = net.index
    ranges = np.array(net.hops, dtype=float)
    ranges[SOURCE_ID] = max(net.dist[SOURCE_ID, index.first_of(SegmentLabel.I)],
                            net.dist[SOURCE_ID, index.first_of(SegmentLabel.II)])
    # l_II connects the diamond with one long enough transmission
    ranges[index.last_of(SegmentLabel.II)] = max(net.dist[2, v] for v in (3, 4, 5))
    assert reaches_all(net, RangeAssignment(ranges))


def test_depends_on_along_a_chain():
    net = CrossNetwork.from_points((-2.0, 0.0), [(-3.0, 0.0), (-4.5, 0.0)])
    chain = RangeAssignment([1.0, 1.5, 0.0])
    assert depends_on(net, chain, 2, 1)
    assert not depends_on(net, chain, 1, 2)
    assert intended_receivers(net, chain, 1) == {2}
    assert intended_receivers(net, chain, 2) == frozenset()
    with pytest.raises(ValidationError):
        depends_on(net, chain, 1, 1)


def test_increased_range_audit_examples():
    net = CrossNetwork.from_points(
        (-2.0, 0.0),
        [(-3.0, 0.0), (-4.0, 0.0), (-5.5, 0.0), (-1.0, 0.0), (2.0, 0.0), (0.0, 1.5), (0.0, -0.7)],
    )
    # n_hat here is {1, 2, 3} (all on Segment I)
    assert net.index.n_hat == {1, 2, 3}
    hop = RangeAssignment(np.array(net.hops))
    audit = increased_range_audit(net, hop)
    assert audit.increased == frozenset() and audit.shape_ok

    half = hop.with_range(1, net.hops[1] / 2)
    assert not increased_range_audit(net, half).shape_ok

    stretched = hop.with_range(1, 2.5)
    audit = increased_range_audit(net, stretched)
    assert audit.increased == {1}
    assert audit.shape_ok


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=1, max_size=10), st.floats(2, 6))
def test_superadditivity(parts, alpha):
    assert superadditivity_holds(parts, alpha)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.integers(0, 2 ** 32 - 1), st.data())
def test_simulation_monotone_and_prefix_closed(n_nodes, seed, data):
    net = generate_random_cross(n_nodes, seed)
    raw = data.draw(st.lists(st.floats(0, 1.5), min_size=n_nodes, max_size=n_nodes))
    base = RangeAssignment(raw)
    before = simulate_broadcast(net, base)
    assert SOURCE_ID in before.reached
    assert prefix_property_holds(net, before)

    node = data.draw(st.integers(0, n_nodes - 1))
    bump = data.draw(st.floats(0, 1.0))
    after = simulate_broadcast(net, base.with_range(node, base[node] + bump))
    assert before.reached <= after.reached
    assert prefix_property_holds(net, after)

    # hop parents form a forest rooted at transmitting nodes
    for child, parent in after.hop_parentage.items():
        assert parent in after.reached and parent != child


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 15), st.integers(0, 2 ** 32 - 1), st.data())
def test_depends_on_is_antisymmetric(n_nodes, seed, data):
    net = generate_random_cross(n_nodes, seed)
    star = RangeAssignment.zeros(n_nodes).with_range(SOURCE_ID, net.dist[SOURCE_ID].max())
    raw = np.array(data.draw(st.lists(st.floats(0, 1.0), min_size=n_nodes, max_size=n_nodes)))
    raw[SOURCE_ID] = star[SOURCE_ID] * data.draw(st.floats(0.1, 1.0))
    assignment = RangeAssignment(raw)
    if not reaches_all(net, assignment):
        assignment = star
    for a in range(n_nodes):
        for b in range(a + 1, n_nodes):
            assert not (depends_on(net, assignment, a, b) and depends_on(net, assignment, b, a))


def test_cost_strictly_increasing_in_each_range():
    a = RangeAssignment([0.5, 1.0, 0.0])
    assert cost(a.with_range(1, 1.0001)) > cost(a)
    assert cost(a.with_range(2, 1e-3)) > cost(a)
