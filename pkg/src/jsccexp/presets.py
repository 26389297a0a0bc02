"""Named channel constructions."""
from __future__ import annotations

import numpy as np

from .prob import ChannelSpec, validate_channel


def example_6x4(xi1=0.065, xi2=0.01) -> ChannelSpec:
    """6-input, 4-output channel whose E₀ maximizer jumps between two supports.

    Inputs 0-3 form a symmetric 4-ary channel with crossover ξ₁ to each other
    output; inputs 4 and 5 each spread mass over one half of the outputs.
    """
    if not 0.0 <= xi1 <= 1.0 / 3.0:
        raise ValueError(f"xi1 must lie in [0, 1/3], got {xi1}")
    if not 0.0 <= xi2 <= 0.5:
        raise ValueError(f"xi2 must lie in [0, 1/2], got {xi2}")
    w = np.full((6, 4), xi1)
    np.fill_diagonal(w[:4], 1.0 - 3.0 * xi1)
    w[4] = [0.5 - xi2, 0.5 - xi2, xi2, xi2]
    w[5] = [xi2, xi2, 0.5 - xi2, 0.5 - xi2]
    return validate_channel(w)


PRESETS = {"example-6x4": example_6x4}
