import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from crackset.acceptance import DEFAULT_PARAMS
from crackset.grid_sets import LatticeSpec

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def spec16():
    return LatticeSpec(1.0, 1.0 / 16)


@pytest.fixture
def spec64():
    return LatticeSpec(1.0, 1.0 / 64)


@pytest.fixture
def params():
    return DEFAULT_PARAMS


def flood_fill(mask: np.ndarray) -> list[set]:
    """Plain stack flood fill with 4-adjacency, groups ordered by smallest cell."""
    seen = np.zeros_like(mask, bool)
    groups = []
    n0, n1 = mask.shape
    for i in range(n0):
        for j in range(n1):
            if mask[i, j] and not seen[i, j]:
                stack, grp = [(i, j)], set()
                seen[i, j] = True
                while stack:
                    a, b = stack.pop()
                    grp.add((a, b))
                    for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        c, d = a + da, b + db
                        if 0 <= c < n0 and 0 <= d < n1 and mask[c, d] and not seen[c, d]:
                            seen[c, d] = True
                            stack.append((c, d))
                groups.append(grp)
    return groups


def cell_edges(cells) -> set:
    """Boundary edges of a cell set by counting each unit edge's incident cells."""
    count = {}
    for i, j in cells:
        for e in (("h", i, j), ("h", i, j + 1), ("v", i, j), ("v", i + 1, j)):
            count[e] = count.get(e, 0) + 1
    return {e for e, c in count.items() if c == 1}
