"""Logistic-map nodes on commuting circulant layers: discrete criterion margin
versus the measured decay of the synchronization error."""

import argparse

import numpy as np

from multisync.criteria import discrete_criterion
from multisync.instances import discrete_instance
from multisync.sim import initial_states, simulate_dt, sync_error


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=10)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>3} {'r':>2} {'margin':>8} {'ratio':>8} {'final':>10}")
    for k in range(args.count):
        inst = discrete_instance(rng, min_margin=0.0)
        margin = discrete_criterion(inst.family_layers, inst.system.D_list, np.eye(1),
                                    inst.c).margin
        x0 = initial_states(inst.system.n, 1, 0.5, seed=k)
        rep = sync_error(simulate_dt(inst.system, inst.dynamics, x0, args.steps))
        print(f"{inst.system.n:>3} {inst.system.r:>2} {margin:8.4f} {rep.decay_ratio:8.4f} "
              f"{rep.final_error:10.2e}")


if __name__ == "__main__":
    main()
