import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from shared.assignment_core import cost, reaches_all
from shared.errors import DisconnectedGrid, EmptySegment, InfeasibleN, InvalidNetwork
from shared.grid_model import GridNetwork, GridSegment, generate_square_grid
from shared.network_io import save_grid
from services.bench_chakra.generators import generate_random_cross
from services.engine_vyuha.distributed import distributed_assignment, grid_distributed_assignment
from services.engine_vyuha.planner_registry import run_planner

PLUS = ((-1.0, 0.0, 1.0, 0.0), (0.0, -1.0, 0.0, 1.0))


def test_square_grid_shape():
    grid = generate_square_grid(1, 1.0, 6, seed=3)
    assert len(grid.segments) == 4
    assert len(grid.intersections) == 4
    assert grid.n_nodes == 6
    assert set(grid.node_segment) == {0, 1, 2, 3}

    grid = generate_square_grid(2, 0.5, 12, seed=7)
    assert len(grid.segments) == 6
    assert len(grid.intersections) == 9
    assert all(len(x.segments) == 2 for x in grid.intersections)


@pytest.mark.parametrize("k, side, n_nodes", [(2, 1.0, 5), (0, 1.0, 10), (1, 0.0, 10)])
def test_square_grid_rejects_infeasible_requests(k, side, n_nodes):
    with pytest.raises(InfeasibleN):
        generate_square_grid(k, side, n_nodes, seed=0)


def test_square_grid_is_deterministic():
    first = save_grid(generate_square_grid(2, 1.0, 12, seed=11))
    assert save_grid(generate_square_grid(2, 1.0, 12, seed=11)) == first
    assert save_grid(generate_square_grid(2, 1.0, 12, seed=12)) != first


def test_segment_normalisation_and_shape():
    seg = GridSegment(1.0, 0.0, -1.0, 0.0)
    assert seg.as_list() == [-1.0, 0.0, 1.0, 0.0]
    assert seg.horizontal and seg.length == 2.0
    with pytest.raises(InvalidNetwork):
        GridSegment(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(InvalidNetwork):
        GridSegment(0.0, 0.0, 0.0, 0.0)


def test_grid_validation_errors():
    with pytest.raises(EmptySegment):
        GridNetwork(PLUS, [(-0.5, 0.0), (0.5, 0.0)], (0, 0))
    with pytest.raises(DisconnectedGrid):
        GridNetwork(((0.0, 0.0, 1.0, 0.0), (0.0, 1.0, 1.0, 1.0)), [(0.5, 0.0), (0.5, 1.0)], (0, 1))
    with pytest.raises(InvalidNetwork):
        GridNetwork(PLUS, [(-0.5, 0.2), (0.0, 0.5)], (0, 1))
    with pytest.raises(InvalidNetwork):
        GridNetwork(PLUS, [(-0.5, 0.0), (0.0, 0.5)], (0, 1), source_id=2)


def test_node_on_a_crossing_takes_the_lowest_segment():
    grid = GridNetwork(PLUS, [(0.0, 0.0), (0.4, 0.0), (0.0, -0.7)], (1, 0, 1))
    assert grid.node_segment == (0, 0, 1)


def test_chains_and_arm_nodes():
    grid = GridNetwork(
        PLUS,
        [(-0.8, 0.0), (-0.3, 0.0), (0.5, 0.0), (0.0, 0.6), (0.0, -0.4), (0.9, 0.0)],
        (0, 0, 0, 1, 1, 0),
    )
    assert grid.chains == ((0, 1, 2, 5), (4, 3))
    assert grid.intersection_between(0, 1, 2)
    assert not grid.intersection_between(0, 0, 1)
    # left, right, up, down
    assert grid.arm_nodes(0) == [1, 2, 3, 4]
    assert grid.intersection_order() == [0]


def test_grid_rule_on_a_cross_shaped_grid(worked_example):
    grid = GridNetwork.from_cross(worked_example)
    assert len(grid.segments) == 2
    a = grid_distributed_assignment(grid)
    assert a.as_list() == distributed_assignment(worked_example).as_list()
    assert reaches_all(grid, a)


def test_grid_rule_drops_the_longest_edge_of_a_cell():
    # one cell, one node per side; the corner edges close a single cycle
    square = ((0.0, 0.0, 3.0, 0.0), (0.0, 3.0, 3.0, 3.0), (0.0, 0.0, 0.0, 3.0), (3.0, 0.0, 3.0, 3.0))
    grid = GridNetwork(square, [(0.0, 1.5), (1.5, 0.0), (1.5, 3.0), (3.0, 2.5)], (2, 0, 1, 3))
    assert [grid.arm_nodes(k) for k in range(4)] == [[1, 0], [2, 0], [1, 3], [2, 3]]
    a = grid_distributed_assignment(grid)
    # the 1-3 corner edge is the longest relay edge, so the data reaches 3 through 2
    assert a.as_list() == pytest.approx([4.5 ** 0.5, 0.0, 2.5 ** 0.5, 0.0])
    assert cost(a) == pytest.approx(7.0)
    assert reaches_all(grid, a)


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 40), st.integers(0, 2 ** 32 - 1), st.sampled_from(["uniform", "intersection"]))
def test_grid_rule_matches_the_cross_rule(n_nodes, seed, mode):
    net = generate_random_cross(n_nodes, seed, source_mode=mode)
    assume(np.any(net.points[1:, 1] != 0.0))
    grid = GridNetwork.from_cross(net)
    assert np.array_equal(grid_distributed_assignment(grid).ranges, distributed_assignment(net).ranges)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 40), st.integers(0, 2 ** 32 - 1))
def test_grid_planners_deliver(k, extra, seed):
    n_segments = 2 * (k + 1)
    grid = generate_square_grid(k, 1.0, n_segments + extra, seed)
    rule = grid_distributed_assignment(grid)
    assert reaches_all(grid, rule)
    _, bip = run_planner("bip", grid)
    _, swept = run_planner("bip-sweep", grid)
    assert bip["delivered"] and swept["delivered"]
    assert swept["cost"] <= bip["cost"]
    assert cost(rule) > 0.0
