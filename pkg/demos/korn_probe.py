"""Measure the Korn-Poincare ratio on three families of lattice shapes.

For each shape the probe tries constant strains, bending fields and random
quadratics, and keeps the worst ratio ||u - Pu|| / |Eu|. Squares level off
near 0.36, thin strips grow with their length, and L-shaped paths grow too,
though the sampled maximum is not monotone in the arm length.

    python demos/korn_probe.py
"""
import math

from crackset.probe import FAMILIES, probe_korn_constant


def main():
    print(f"constant strain on any square: 1/sqrt(12) = {1 / math.sqrt(12):.4f}")
    for fam in FAMILIES:
        res = probe_korn_constant(fam, samples=4, seed=0)
        ratios = ", ".join(f"{r['max_ratio']:.3f}" for r in res["rows"])
        print(f"{fam:>6}: {ratios}")
        print(f"        nondecreasing {res['nondecreasing']}, below cubic envelope {res['within_envelope']}")


if __name__ == "__main__":
    main()
