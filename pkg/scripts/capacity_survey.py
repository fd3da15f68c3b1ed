"""Capacities of qubit depolarizing channels and their pairwise additivity sandwich."""

import argparse
import itertools
import sys

import numpy as np

from qpurity.capacity import capacity, capacity_binary_bistochastic
from qpurity.channels import amplitude_damping, depolarizing
from qpurity.cli import render
from qpurity.harness import capacity_additivity_check
from qpurity.optimize import OptimizerConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args(argv)
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed)
    rows = []
    for p in np.round(np.arange(0.1, 1.0, 0.1), 10):
        phi = depolarizing(2, float(p))
        gen = capacity(phi, cfg)
        rows.append({"channel": phi.label, "capacity": gen.value, "upper_bound": gen.upper_bound,
                     "binary_formula": capacity_binary_bistochastic(phi, cfg).value})
    ad = amplitude_damping(0.5)
    r = capacity(ad, cfg)
    rows.append({"channel": ad.label, "capacity": r.value, "upper_bound": r.upper_bound, "binary_formula": None})
    sys.stdout.write(render(rows, "csv"))
    pairs = []
    for p1, p2 in itertools.product((0.3, 0.5, 0.7), repeat=2):
        rep = capacity_additivity_check(depolarizing(2, p1), depolarizing(2, p2), cfg)
        pairs.append({"p1": p1, "p2": p2, "lower": rep.product_value, "upper": rep.joint_value,
                      "width": rep.gap})
    sys.stdout.write("\n" + render(pairs, "csv"))


if __name__ == "__main__":
    main()
