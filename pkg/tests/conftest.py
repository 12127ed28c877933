import numpy as np
import pytest

from jointscope.classifier import ReferenceScorer
from jointscope.synthgen import DEFECT_KINDS, JointSpec, render_joint


def seeded_defect_specs(n, seed=2024):
    """Deterministic mixed-kind defect specs, round-robin over the six kinds."""
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(n):
        kind = DEFECT_KINDS[i % len(DEFECT_KINDS)]
        specs.append(JointSpec(
            seed=int(rng.integers(0, 2**31)),
            kind=kind,
            pad_radius_px=int(rng.integers(44, 85)),
            board_hue=float(rng.uniform()),
        ))
    return specs


@pytest.fixture(scope="session")
def scorer():
    return ReferenceScorer()


@pytest.fixture(scope="session")
def splash_render():
    res = render_joint(JointSpec(seed=1, kind=DEFECT_KINDS[0], pad_radius_px=60, board_hue=0.45))
    return res.image.astype(np.float32) / 255.0, res.truth
