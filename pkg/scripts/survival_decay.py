"""Multi-bit survival: Monte Carlo fraction of undetected n-bit sessions vs s^n."""
import argparse
from dataclasses import dataclass

from qsdc import analysis
from qsdc.adversary import EveStrategySpec
from qsdc.analysis import SecurityParams
from qsdc.protocol import ProtocolConfig
from qsdc.rng import hash64


@dataclass
class DecayExperiment:
    c: float = 0.5
    strategy: str = "intercept-ba/random-zx"
    ns: tuple = (1, 2, 5, 10, 20, 40)
    trials: int = 100_000
    seed: int = 0

    def rows(self):
        spec = EveStrategySpec.parse(self.strategy)
        s1 = analysis.survival_one(SecurityParams(self.c, analysis.enumerate_detection(spec)))
        for n in self.ns:
            cfg = ProtocolConfig(c=self.c, message_bits=n, master_seed=hash64(self.seed, n), eve=spec)
            est = analysis.session_survival(cfg, self.trials)
            yield n, s1 ** n, est


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--c", type=float, default=DecayExperiment.c)
    p.add_argument("--strategy", default=DecayExperiment.strategy)
    p.add_argument("--trials", type=int, default=DecayExperiment.trials)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args(argv)
    exp = DecayExperiment(c=a.c, strategy=a.strategy, trials=a.trials, seed=a.seed)
    print(f"{'n':>4} {'s^n':>10} {'mc':>10} {'ci95':>9}  inside")
    for n, formula, est in exp.rows():
        print(f"{n:4d} {formula:10.6f} {est.point:10.6f} {est.half_width_95:9.6f}  "
              f"{'yes' if est.contains(formula) else 'no'}")


if __name__ == "__main__":
    main()
