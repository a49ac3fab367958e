"""Survival sweep over c for every shipped attack; writes CSV.

    python scripts/run_sweep.py --trials 200000 --out sweep.csv
"""
import argparse
import sys
from dataclasses import dataclass, field

from qsdc import SHIPPED_ATTACKS, analysis


@dataclass
class SweepExperiment:
    c_values: tuple = (0.05, 0.1, 0.25, 0.5, 0.75, 0.9)
    strategies: tuple = SHIPPED_ATTACKS
    trials: int = 100_000
    seed: int = 0
    out: str = field(default="-")

    def run(self) -> str:
        rows = analysis.sweep(self.c_values, self.strategies, self.trials, self.seed)
        return analysis.sweep_csv(rows)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=SweepExperiment.trials)
    p.add_argument("--seed", type=int, default=SweepExperiment.seed)
    p.add_argument("--out", default="-")
    a = p.parse_args(argv)
    exp = SweepExperiment(trials=a.trials, seed=a.seed, out=a.out)
    text = exp.run()
    if exp.out == "-":
        sys.stdout.write(text)
    else:
        with open(exp.out, "w", newline="") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
