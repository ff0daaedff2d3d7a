import json
import logging
from pathlib import Path

import pydantic

from shared.assignment_core import RangeAssignment
from shared.cross_model import CrossNetwork, check_distinct_distances
from shared.errors import InvalidNetwork, ValidationError
from shared.grid_model import GridNetwork
from shared.schemas import AssignmentFile, GridFile, NetworkFile

# JSON files for networks, grids and assignments. Floats are written with
# Python's shortest round-trip repr, so a load after a save is bit-exact.


def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such file")
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: not valid JSON ({e})")


def _write_json(payload, path):
    text = json.dumps(payload, indent=2) + "\n"
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text, encoding="utf-8")
    return text


def _parse(model, payload, path):
    try:
        return model.model_validate(payload)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise ValidationError(f"{path}: {where}: {first['msg']}")


# --- cross networks ---

def network_to_dict(network):
    pts = network.points
    return {
        "arm_half_length": float(network.arm_half_length),
        "source": [float(pts[0, 0]), float(pts[0, 1])],
        "nodes": [[float(x), float(y)] for x, y in pts[1:]],
    }


def network_from_dict(payload, path="<network>"):
    """Validates and canonicalises a network payload; tied distances are rejected."""
    parsed = _parse(NetworkFile, payload, path)
    network = CrossNetwork.from_points(parsed.source, parsed.nodes, arm_half_length=parsed.arm_half_length)
    check_distinct_distances(network)
    return network


def load_network(path):
    network = network_from_dict(_read_json(path), path)
    logging.debug(f"loaded cross network {path}: N={network.n_nodes}")
    return network


def save_network(network, path=None):
    return _write_json(network_to_dict(network), path)


# --- grids ---

def grid_to_dict(grid):
    return {
        "segments": [s.as_list() for s in grid.segments],
        "nodes": [[float(x), float(y), int(seg)] for (x, y), seg in zip(grid.points, grid.node_segment)],
        "source": int(grid.source_id),
    }


def grid_from_dict(payload, path="<grid>"):
    parsed = _parse(GridFile, payload, path)
    if parsed.source >= len(parsed.nodes):
        raise InvalidNetwork(f"{path}: source {parsed.source} is not a node index")
    points = [row[:2] for row in parsed.nodes]
    labels = [int(row[2]) for row in parsed.nodes]
    return GridNetwork(tuple(tuple(s) for s in parsed.segments), points, tuple(labels), source_id=parsed.source)


def load_grid(path):
    return grid_from_dict(_read_json(path), path)


def save_grid(grid, path=None):
    return _write_json(grid_to_dict(grid), path)


def load_any_network(path):
    """Cross or grid, told apart by the presence of a `segments` key."""
    payload = _read_json(path)
    if isinstance(payload, dict) and "segments" in payload:
        return grid_from_dict(payload, path)
    return network_from_dict(payload, path)


# --- assignments ---

def assignment_to_dict(assignment):
    return {"alpha": float(assignment.alpha), "ranges": assignment.as_list()}


def load_assignment(path):
    parsed = _parse(AssignmentFile, _read_json(path), path)
    return RangeAssignment(parsed.ranges, parsed.alpha)


def save_assignment(assignment, path=None):
    return _write_json(assignment_to_dict(assignment), path)
