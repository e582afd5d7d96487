import random

import pytest
from hypothesis import HealthCheck, settings

from hhhstream import Hierarchy
from hhhstream.io import gen_uniform, gen_zipf

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# desk-scale lattices
H1 = Hierarchy.uniform(1, 16, 4)      # 1D, 16-bit values, 4 levels
H1_SMALL = Hierarchy.uniform(1, 8, 2)
H2 = Hierarchy.uniform(2, 8, 2)       # pairs of 8-bit values, 25 nodes
H2_TINY = Hierarchy.uniform(2, 4, 2)  # 2 levels per dimension
H3 = Hierarchy.uniform(3, 4, 2)


def adversarial(hierarchy, n, seed, heavy=3):
    """A few heavy elements interleaved with a long tail of distinct ones."""
    rng = random.Random(seed)
    widths = [dim.width for dim in hierarchy.dims]
    heavies = [tuple(rng.randrange(1 << w) for w in widths) for _ in range(heavy)]
    out = []
    for i in range(n):
        if i % 3 == 0:
            out.append(heavies[(i // 3) % heavy])
        else:
            out.append(tuple(rng.randrange(1 << w) for w in widths))
    return out


def corpus(hierarchy, n, seeds, universe=300):
    """(name, stream) pairs mixing uniform, Zipf and adversarial streams."""
    out = []
    for seed in seeds:
        kind = seed % 4
        if kind == 0:
            out.append((f"uniform-{seed}", gen_uniform(universe, n, seed, hierarchy)))
        elif kind == 1:
            out.append((f"zipf0.8-{seed}", gen_zipf(universe, n, 0.8, seed, hierarchy)))
        elif kind == 2:
            out.append((f"zipf1.2-{seed}", gen_zipf(universe, n, 1.2, seed, hierarchy)))
        else:
            out.append((f"adversarial-{seed}", adversarial(hierarchy, n, seed)))
    return out


@pytest.fixture
def h2():
    return H2


@pytest.fixture
def ipv4_2d():
    return Hierarchy.ipv4(dims=2)
