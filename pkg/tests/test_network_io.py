import json

import pytest

from shared.assignment_core import RangeAssignment
from shared.errors import InvalidNetwork, TiedWeights, ValidationError
from shared.grid_model import GridNetwork, generate_square_grid
from shared.network_io import (
    load_any_network,
    load_assignment,
    load_grid,
    load_network,
    network_from_dict,
    save_assignment,
    save_grid,
    save_network,
)
from services.bench_chakra.generators import generate_random_cross


def _write(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_network_file_is_bit_exact(tmp_path):
    net = generate_random_cross(15, 99)
    path = tmp_path / "net.json"
    save_network(net, path)
    again = load_network(path)
    assert (again.points == net.points).all()
    assert save_network(again) == path.read_text(encoding="utf-8")


def test_network_payload_is_canonicalised():
    net = network_from_dict({"source": [0.0, 3.0], "nodes": [[0.0, -1.0], [2.0, 0.0]]})
    assert net.points[0].tolist() == [-3.0, 0.0]
    assert net.points[1].tolist() == [1.0, 0.0]
    assert net.arm_half_length == 1.0


@pytest.mark.parametrize("payload, error", [
    ({"source": [0.0], "nodes": []}, ValidationError),
    ({"source": [-1.0, 0.0], "nodes": [[1.0, 0.0, 2.0]]}, ValidationError),
    ({"source": [-1.0, 0.0], "nodes": [[1.0, 1.0]]}, InvalidNetwork),
    ({"source": [-1.0, 0.0], "nodes": [[1.0, 0.0]], "arm_half_length": 0}, ValidationError),
    ({"source": [-1.0, 0.0], "nodes": [[-2.0, 0.0], [-3.0, 0.0]]}, TiedWeights),
])
def test_bad_network_payloads(payload, error):
    with pytest.raises(error):
        network_from_dict(payload)


def test_unreadable_files_are_input_errors(tmp_path):
    with pytest.raises(ValidationError):
        load_network(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError) as err:
        load_any_network(broken)
    assert err.value.exit_code == 1


def test_grid_file_and_dispatch(tmp_path):
    grid = generate_square_grid(2, 1.0, 10, seed=5)
    path = tmp_path / "grid.json"
    save_grid(grid, path)
    again = load_grid(path)
    assert again.node_segment == grid.node_segment
    assert again.source_id == grid.source_id
    assert isinstance(load_any_network(path), GridNetwork)

    payload = json.loads(path.read_text(encoding="utf-8"))
    payload["source"] = 10
    with pytest.raises(InvalidNetwork):
        load_grid(_write(tmp_path / "bad.json", payload))


def test_assignment_files(tmp_path):
    path = tmp_path / "a.json"
    save_assignment(RangeAssignment([1.5, 0.0, 0.25], alpha=3.0), path)
    loaded = load_assignment(path)
    assert loaded.as_list() == [1.5, 0.0, 0.25]
    assert loaded.alpha == 3.0

    with pytest.raises(ValidationError):
        load_assignment(_write(tmp_path / "neg.json", {"alpha": 2.0, "ranges": [1.0, -0.5]}))
    with pytest.raises(ValidationError):
        load_assignment(_write(tmp_path / "alpha.json", {"alpha": 7.0, "ranges": [1.0]}))
