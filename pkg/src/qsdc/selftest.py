"""Build-health checks, one per acceptance criterion.

Each ``check_*`` takes its sample sizes and tolerances as arguments so the
acceptance tests can run them at full size and ``qsdc selftest`` at reduced
size. Statistical checks use the stated tolerance or 4 binomial standard
deviations, whichever is wider, so reduced runs stay meaningful.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import analysis, batch, keyxfer, qstate, rng as rngmod
from .adversary import NO_EVE, SHIPPED_ATTACKS, EveKind, EveStrategySpec, BasisPolicy
from .analysis import SecurityParams, enumerate_detection, survival_one
from .protocol import ProtocolConfig
from .qstate import StateLabel

MIN_STAT_SAMPLES = 10_000
IR_BA_RANDOM = EveStrategySpec(EveKind.INTERCEPT_RESEND_BA, BasisPolicy.RANDOM_ZX)
IR_BOTH_RANDOM = EveStrategySpec(EveKind.INTERCEPT_RESEND_BOTH, BasisPolicy.RANDOM_ZX)
MEASURE_BREIDBART = EveStrategySpec(EveKind.MEASURE_ONLY_BA, BasisPolicy.BREIDBART)
DOS = EveStrategySpec(EveKind.DOS_AB)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    skipped: bool = False

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"[{status}] {self.number:2d} {self.name:<28s} {self.seconds:7.2f}s  {self.detail}"


def _sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(number, name, passed, detail, time.perf_counter() - t0)


# ------------------------------------------------------------------- checks

def check_encoding_algebra(op: Optional[qstate.Operator] = None) -> CheckResult:
    expected = {
        StateLabel.Z0: (-1.0, StateLabel.Z1),
        StateLabel.Z1: (1.0, StateLabel.Z0),
        StateLabel.X0: (1.0, StateLabel.X1),
        StateLabel.X1: (-1.0, StateLabel.X0),
    }

    def run():
        u = op if op is not None else qstate.I_SIGMA_Y
        worst = 0.0
        for src, (sign, dst) in expected.items():
            out = qstate.apply(u, qstate.prepare(src))
            want = qstate.prepare(dst)
            worst = max(worst, abs(out.a0 - sign * want.a0), abs(out.a1 - sign * want.a1))
        return worst <= 1e-12, f"max amplitude error {worst:.1e}"

    return _timed(1, "encoding algebra", run)


def random_states(gen: np.random.Generator, n: int) -> list[qstate.StateVector]:
    v = gen.normal(size=(n, 2)) + 1j * gen.normal(size=(n, 2))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return [qstate.StateVector(complex(a), complex(b)) for a, b in v]


def check_unitarity(pairs: int = 1000, seed: int = 0) -> CheckResult:
    def run():
        gen = np.random.default_rng(seed)
        a_states, b_states = random_states(gen, pairs), random_states(gen, pairs)
        worst = 0.0
        for op in qstate.PROTOCOL_OPERATORS:
            for a, b in zip(a_states, b_states):
                before = qstate.inner_product(a, b)
                after = qstate.inner_product(qstate.apply(op, a), qstate.apply(op, b))
                worst = max(worst, abs(after - before))
        return worst <= 1e-12, f"{pairs} pairs, max |<Ua|Ub> - <a|b>| = {worst:.1e}"

    return _timed(2, "unitarity", run)


def check_no_eve_soundness(sessions: int = 10_000, c: float = 0.3, bits: int = 32,
                           seed: int = 0) -> CheckResult:
    def run():
        seeds = rngmod.derive_seeds(seed, np.arange(sessions))
        sb = batch.run_sessions(ProtocolConfig(c=c, message_bits=bits, eve=NO_EVE), seeds)
        aborts, errors = int(sb.aborted.sum()), int(sb.bit_errors.sum())
        ok = aborts == 0 and errors == 0 and bool((sb.delivered == bits).all())
        return ok, f"{sessions} sessions: {aborts} aborts, {errors} bit errors"

    return _timed(3, "no-Eve soundness", run)


def check_detection_oracle(rounds: int = 1_000_000, seed: int = 0,
                           expected: Optional[dict] = None) -> CheckResult:
    """MC detection frequency within 4 sigma of the enumeration (or of ``expected``)."""

    def run():
        ok = True
        parts = []
        for i, spec in enumerate(SHIPPED_ATTACKS):
            target = enumerate_detection(spec) if expected is None else expected[spec.label]
            est = analysis.detection_frequency(spec, rounds, rngmod.hash64(seed, 4, i))
            z = (est.point - target) / _sigma(target, rounds)
            ok &= abs(z) <= 4.0
            parts.append(f"{spec.label}={est.point:.5f} (d={target:.5f}, z={z:+.2f})")
        return ok, "; ".join(parts)

    return _timed(4, "detection oracle", run)


def check_survival_formula(trials: int = 100_000, seed: int = 0,
                           spec: EveStrategySpec = IR_BA_RANDOM,
                           c_values=(0.1, 0.25, 0.5, 0.75)) -> CheckResult:
    def run():
        d = enumerate_detection(spec)
        ok = True
        parts = []
        for i, c in enumerate(c_values):
            est = analysis.estimate_survival(
                ProtocolConfig(c=c, master_seed=rngmod.hash64(seed, 5, i), eve=spec), trials)
            f = survival_one(SecurityParams(c, d))
            ok &= est.contains(f)
            parts.append(f"c={c}: {est.point:.4f}+-{est.half_width_95:.4f} vs {f:.4f}")
        return ok, "; ".join(parts)

    return _timed(5, "survival s(c,d)", run)


def check_exponential_decay(trials: int = 100_000, seed: int = 0, c: float = 0.5,
                            ns=(1, 5, 20), spec: EveStrategySpec = IR_BA_RANDOM) -> CheckResult:
    def run():
        s1 = survival_one(SecurityParams(c, enumerate_detection(spec)))
        ok = True
        parts = []
        for n in ns:
            est = analysis.session_survival(
                ProtocolConfig(c=c, message_bits=n, master_seed=rngmod.hash64(seed, 6, n),
                               eve=spec), trials)
            ok &= est.contains(s1 ** n)
            parts.append(f"n={n}: {est.point:.4f}+-{est.half_width_95:.4f} vs {s1 ** n:.4f}")
        return ok, "; ".join(parts)

    return _timed(6, "decay s(n,c,d)", run)


def check_eve_information(rounds: int = 1_000_000, seed: int = 0, tol: float = 0.002) -> CheckResult:
    def run():
        both = analysis.message_statistics(IR_BOTH_RANDOM, rounds, rngmod.hash64(seed, 7, 0))
        breid = analysis.message_statistics(MEASURE_BREIDBART, rounds, rngmod.hash64(seed, 7, 1))
        target = 0.5 * (1.0 + math.sqrt(2.0) / 2.0)
        width = max(tol, 4.0 * _sigma(target, rounds))
        acc = breid.guess_accuracy.point
        ok = both.guess_accuracy.point == 1.0 and abs(acc - target) <= width
        return ok, (f"intercept-both accuracy {both.guess_accuracy.point:.6f}; "
                    f"breidbart {acc:.5f} (target {target:.5f} +- {width:.4f})")

    return _timed(7, "Eve information", run)


def check_dos(rounds: int = 1_000_000, seed: int = 0, tol: float = 0.002) -> CheckResult:
    def run():
        det = analysis.detection_frequency(DOS, rounds, rngmod.hash64(seed, 8, 0))
        msg = analysis.message_statistics(DOS, rounds, rngmod.hash64(seed, 8, 1))
        width = max(tol, 4.0 * _sigma(0.25, rounds))
        ber = msg.bit_error.point
        ok = det.point == 0.0 and abs(ber - 0.25) <= width
        return ok, f"detection rate {det.point}; message BER {ber:.5f} (0.25 +- {width:.4f})"

    return _timed(8, "DoS on A->B", run)


def check_key_transfer(sessions: int = 1000, pairs: int = 1000, attacked: int = 1000,
                       seed: int = 0, raw_bits: int = 128, final_bits: int = 64,
                       c: float = 0.5) -> CheckResult:
    def run():
        seeds = [int(s) for s in rngmod.derive_seeds(rngmod.hash64(seed, 9, 0), np.arange(sessions))]
        ks = keyxfer.KeySession(raw_bits, final_bits)
        agree = sum(
            keyxfer.run_key_transfer(ProtocolConfig(c=c, master_seed=s),
                                     keyxfer.KeySession(raw_bits, final_bits, s)).keys_match
            for s in seeds)
        aseeds = [int(s) for s in rngmod.derive_seeds(rngmod.hash64(seed, 9, 1), np.arange(attacked))]
        aborts = sum(
            not keyxfer.run_key_transfer(ProtocolConfig(c=c, master_seed=s, eve=IR_BA_RANDOM),
                                         ks).established
            for s in aseeds)
        p = 1.0 - survival_one(SecurityParams(c, enumerate_detection(IR_BA_RANDOM))) ** raw_bits
        # interval around the predicted rate; the empirical one degenerates at p_hat = 1
        half = analysis.Z95 * _sigma(p, attacked)
        abort_ok = abs(aborts / attacked - p) <= half
        gen = np.random.default_rng(rngmod.hash64(seed, 9, 2))
        a = gen.integers(0, 2, size=(pairs, raw_bits), dtype=np.uint8)
        b = gen.integers(0, 2, size=(pairs, raw_bits), dtype=np.uint8)
        tseeds = gen.integers(0, 2**63, size=pairs)
        linear = all(
            np.array_equal(keyxfer.privacy_amplify(x ^ y, int(t), final_bits),
                           keyxfer.privacy_amplify(x, int(t), final_bits)
                           ^ keyxfer.privacy_amplify(y, int(t), final_bits))
            for x, y, t in zip(a, b, tseeds))
        ok = agree == sessions and abort_ok and linear
        return ok, (f"{agree}/{sessions} keys agree; abort rate {aborts / attacked:.6f} "
                    f"vs {p:.6f}+-{half:.1e}; linearity {'ok' if linear else 'BROKEN'}")

    return _timed(9, "key transfer", run)


def check_sweep_determinism(trials: int = 100_000, seed: int = 0) -> CheckResult:
    from . import cli

    def run():
        argv = ["sweep", "--c", "0.1,0.25,0.5,0.75", "--eve", "none,intercept-ba,measure-ba",
                "--trials", str(trials), "--seed", str(seed)]
        first, second = cli.render(argv), cli.render(argv)
        ok = first == second and first.startswith(",".join(analysis.SWEEP_HEADER))
        return ok, f"{len(first.encode())} bytes, identical={first == second}"

    return _timed(10, "sweep determinism", run)


def run_all(trials: int = 100_000, seed: int = 0) -> list[CheckResult]:
    results = [check_encoding_algebra(), check_unitarity(seed=seed),
               check_no_eve_soundness(seed=seed)]
    stat = [
        (4, "detection oracle", lambda: check_detection_oracle(trials, seed)),
        (5, "survival s(c,d)", lambda: check_survival_formula(trials, seed)),
        (6, "decay s(n,c,d)", lambda: check_exponential_decay(trials, seed)),
        (7, "Eve information", lambda: check_eve_information(trials, seed)),
        (8, "DoS on A->B", lambda: check_dos(trials, seed)),
        (9, "key transfer", lambda: check_key_transfer(
            sessions=min(1000, max(10, trials // 100)), pairs=1000,
            attacked=min(1000, max(10, trials // 100)), seed=seed)),
    ]
    for number, name, fn in stat:
        if trials < MIN_STAT_SAMPLES:
            results.append(CheckResult(number, name, True,
                                       f"skipped: trials < {MIN_STAT_SAMPLES}", skipped=True))
        else:
            results.append(fn())
    results.append(check_sweep_determinism(min(trials, 10_000), seed))
    return results
