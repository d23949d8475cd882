"""Write the localized-strain field used by the case (b) scenario.

The field is a radial expansion bump centred on the small crack, scaled to a
fixed total elastic energy, plus a gentle rigid rotation.

    python demos/make_bump_snapshot.py
"""
import os

import numpy as np

from crackset.field import elastic_energy, field_from_function
from crackset.grid_sets import LatticeSpec
from crackset.scenario import write_snapshot

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "src", "crackset", "scenarios", "bump.field")


def bump(x, y, sigma=0.06):
    g = np.exp(-(x * x + y * y) / (2 * sigma * sigma))
    return np.stack([x * g, y * g], axis=-1)


def main(path=OUT, target_alpha=15.0):
    spec = LatticeSpec(1.0, 1 / 64)
    u = field_from_function(spec, bump)
    u = u.with_values(u.values * np.sqrt(target_alpha / elastic_energy(u)))
    rot = field_from_function(spec, lambda x, y: 0.01 * np.stack([y, -x], axis=-1))
    u = u.with_values(u.values + rot.values)
    write_snapshot(u, path)
    print(f"wrote {os.path.normpath(path)}  alpha={elastic_energy(u):.6f}")


if __name__ == "__main__":
    main()
