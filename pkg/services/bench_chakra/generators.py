import logging

import numpy as np

from shared.cross_model import CrossNetwork, check_distinct_distances
from shared.errors import InvalidNetwork, ValidationError

SOURCE_MODES = ("uniform", "intersection")
MAX_DRAWS = 100

# Arm directions in draw order: -x, +x, +y, -y
_ARMS = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


def _positions(rng, count, arm_half_length):
    """`count` points uniform over the four arms (total length 4L)."""
    t = rng.random(count) * 4.0 * arm_half_length
    arm = np.minimum((t // arm_half_length).astype(int), 3)
    offset = t - arm * arm_half_length
    return _ARMS[arm] * offset[:, None]


def generate_random_cross(n_nodes, seed, arm_half_length=1.0, source_mode="uniform"):
    """
    Random cross network: the non-source nodes fall uniformly over the four
    arms. The source sits at the intersection ("intersection") or is itself a
    uniform draw ("uniform"), after which the frame is rotated so it lies on
    the -x half-line. Draws with a tied pairwise distance are redrawn.
    """
    if n_nodes < 2:
        raise ValidationError(f"a random cross needs N >= 2, got {n_nodes}")
    if source_mode not in SOURCE_MODES:
        raise ValidationError(f"source_mode must be one of {SOURCE_MODES}, got {source_mode!r}")
    if not arm_half_length > 0:
        raise ValidationError(f"arm_half_length must be > 0, got {arm_half_length}")

    rng = np.random.default_rng(seed)
    for attempt in range(1, MAX_DRAWS + 1):
        if source_mode == "intersection":
            source = np.zeros(2)
            nodes = _positions(rng, n_nodes - 1, arm_half_length)
        else:
            drawn = _positions(rng, n_nodes, arm_half_length)
            source, nodes = drawn[0], drawn[1:]
        try:
            network = CrossNetwork.from_points(source, nodes, arm_half_length=arm_half_length)
            check_distinct_distances(network)
            return network
        except InvalidNetwork as e:
            logging.warning(f"cross draw {attempt} (seed {seed}) rejected ({e}); resampling")
    raise InvalidNetwork(f"no valid cross network after {MAX_DRAWS} draws (N={n_nodes}, seed={seed})")
