"""Per-strategy table: exact vs simulated detection, message error, Eve's guess accuracy."""
import argparse
from dataclasses import dataclass

from qsdc import analysis
from qsdc.adversary import BasisPolicy, EveKind, EveStrategySpec


def all_strategies():
    yield EveStrategySpec(EveKind.NONE)
    yield EveStrategySpec(EveKind.DOS_AB)
    for kind in (EveKind.INTERCEPT_RESEND_AB, EveKind.INTERCEPT_RESEND_BA,
                 EveKind.INTERCEPT_RESEND_BOTH, EveKind.MEASURE_ONLY_BA):
        for policy in BasisPolicy:
            yield EveStrategySpec(kind, policy)


@dataclass
class AttackTable:
    rounds: int = 1_000_000
    seed: int = 0

    def run(self):
        print(f"{'strategy':<28} {'d exact':>8} {'d mc':>8} {'ber exact':>9} {'ber mc':>8} "
              f"{'guess exact':>11} {'guess mc':>9}")
        for i, spec in enumerate(all_strategies()):
            det = analysis.detection_frequency(spec, self.rounds, self.seed + 2 * i)
            msg = analysis.message_statistics(spec, self.rounds, self.seed + 2 * i + 1)
            g = analysis.enumerate_guess_accuracy(spec)
            gmc = msg.guess_accuracy.point if msg.guess_accuracy else None
            print(f"{spec.label:<28} {analysis.enumerate_detection(spec):8.5f} {det.point:8.5f} "
                  f"{analysis.enumerate_message_error(spec):9.5f} {msg.bit_error.point:8.5f} "
                  f"{'-' if g is None else f'{g:.5f}':>11} {'-' if gmc is None else f'{gmc:.5f}':>9}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rounds", type=int, default=AttackTable.rounds)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args(argv)
    AttackTable(a.rounds, a.seed).run()


if __name__ == "__main__":
    main()
