"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 session aborted
because Alice detected Eve.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

from . import analysis, keyxfer, selftest
from .adversary import BasisPolicy, EveKind, EveStrategySpec
from .analysis import DegenerateParams, SecurityParams, fmt
from .protocol import (ConfigError, MaxRoundsExceeded, ProtocolConfig, SessionStats,
                       run_session)

EXIT_OK, EXIT_USAGE, EXIT_DETECTED = 0, 1, 2

TRANSCRIPT_COLUMNS = ("round_index", "mode", "alice_prep", "bob_action", "bob_state", "bob_bit",
                      "eve_events", "eve_guess", "alice_outcome", "alice_basis", "sifted",
                      "detected", "decoded_bit", "public_events")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _probability(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be a number in [0, 1], got {text!r}")
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return x


def _probability_list(text: str) -> list[float]:
    values = [_probability(part) for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("expected a comma-separated list of values in [0, 1]")
    return values


def _positive_int(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return x


def _seed(text: str) -> int:
    try:
        x = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be an unsigned 64-bit integer, got {text!r}")
    if not 0 <= x < 2 ** 64:
        raise argparse.ArgumentTypeError(f"must lie in [0, 2^64), got {text}")
    return x


_EVE_CHOICES = [k.value for k in EveKind]
_POLICY_CHOICES = [p.value for p in BasisPolicy]


def _eve_list(text: str) -> list[EveKind]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part not in _EVE_CHOICES:
            raise argparse.ArgumentTypeError(
                f"unknown strategy {part!r}; choose from {', '.join(_EVE_CHOICES)}")
        out.append(EveKind(part))
    return out


def _default_seed() -> int:
    env = os.environ.get("QSDC_SEED")
    if env is None:
        return 0
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as e:
        raise UsageError(f"QSDC_SEED {e}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qsdc", description="Single-qubit deterministic secure direct "
                                        "communication: simulator and analysis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=("json",), default_format="json"):
        sp.add_argument("--seed", type=_seed, default=None,
                        help="master seed (default: $QSDC_SEED or 0)")
        sp.add_argument("--format", choices=formats, default=default_format)
        sp.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    def eve_flags(sp, many=False):
        sp.add_argument("--eve", type=_eve_list if many else str, default="none",
                        choices=None if many else _EVE_CHOICES,
                        help="eavesdropping strategy" + (" (comma-separated)" if many else ""))
        sp.add_argument("--policy", choices=_POLICY_CHOICES, default=None,
                        help="Eve's basis policy (default depends on strategy)")

    sp = sub.add_parser("simulate", help="run one session, emit JSON-lines transcripts")
    sp.add_argument("--c", type=_probability, default=0.1)
    sp.add_argument("--bits", type=_positive_int, default=32)
    sp.add_argument("--max-rounds", type=_positive_int, default=None)
    eve_flags(sp)
    common(sp, ("json", "csv"))

    sp = sub.add_parser("sweep", help="Monte Carlo vs. closed-form survival over a grid")
    sp.add_argument("--c", type=_probability_list, default=[0.1, 0.25, 0.5, 0.75])
    sp.add_argument("--trials", type=_positive_int, default=100_000)
    eve_flags(sp, many=True)
    common(sp, ("csv", "json"), "csv")

    sp = sub.add_parser("formula", help="closed-form survival and rate")
    sp.add_argument("--c", type=_probability, required=True)
    sp.add_argument("--d", type=_probability, required=True)
    sp.add_argument("--n", type=_positive_int, default=1)
    common(sp)

    sp = sub.add_parser("keygen", help="key transfer with privacy amplification")
    sp.add_argument("--c", type=_probability, default=0.1)
    sp.add_argument("--raw-bits", type=_positive_int, default=128)
    sp.add_argument("--final-bits", type=_positive_int, default=64)
    eve_flags(sp)
    common(sp)

    sp = sub.add_parser("selftest", help="run the acceptance checks at reduced size")
    sp.add_argument("--trials", type=_positive_int, default=100_000)
    sp.add_argument("--seed", type=_seed, default=None)
    return p


def _spec(kind, policy) -> EveStrategySpec:
    kind = EveKind(kind)
    if kind in (EveKind.NONE, EveKind.DOS_AB):
        return EveStrategySpec(kind)
    return EveStrategySpec(kind, BasisPolicy(policy) if policy else None)


def _dumps(obj) -> str:
    def norm(x):
        if isinstance(x, float):
            return float(fmt(x))
        if isinstance(x, dict):
            return {k: norm(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [norm(v) for v in x]
        return x
    return json.dumps(norm(obj), separators=(",", ":"))


# ----------------------------------------------------------------- commands

def _cmd_simulate(args, seed) -> tuple[str, int]:
    try:
        cfg = ProtocolConfig(c=args.c, message_bits=args.bits, master_seed=seed,
                             eve=_spec(args.eve, args.policy), max_rounds=args.max_rounds)
    except ConfigError as e:
        raise UsageError(str(e))
    result = run_session(cfg)
    stats = SessionStats.from_result(result)
    if args.format == "json":
        lines = [t.to_json() for t in result.transcripts]
        lines.append(_dumps({"session_stats": stats.to_dict()}))
        text = "\n".join(lines) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRANSCRIPT_COLUMNS)
        for t in result.transcripts:
            d = t.to_dict()
            d["eve_events"] = json.dumps(d["eve_events"], separators=(",", ":"))
            d["public_events"] = ";".join(d["public_events"])
            w.writerow(["" if d[k] is None else d[k] for k in TRANSCRIPT_COLUMNS])
        text = buf.getvalue()
    return text, EXIT_DETECTED if result.aborted else EXIT_OK


def _cmd_sweep(args, seed) -> tuple[str, int]:
    if any(c >= 1.0 for c in args.c):
        raise UsageError("--c: sweep values must lie in [0, 1); c = 1 never sends a message")
    specs = [_spec(k, args.policy) for k in args.eve]
    rows = analysis.sweep(args.c, specs, args.trials, seed)
    if args.format == "csv":
        return analysis.sweep_csv(rows), EXIT_OK
    return "\n".join(_dumps(r.__dict__) for r in rows) + "\n", EXIT_OK


def _cmd_formula(args, seed) -> tuple[str, int]:
    params = SecurityParams(args.c, args.d, args.n)
    try:
        rec = {"c": args.c, "d": args.d, "n": args.n,
               "s_one": analysis.survival_one(params),
               "s_n": analysis.survival_n(params),
               "rate": analysis.effective_rate(args.c)}
    except DegenerateParams as e:
        raise UsageError(f"--c/--d: {e}")
    return _dumps(rec) + "\n", EXIT_OK


def _cmd_keygen(args, seed) -> tuple[str, int]:
    try:
        ks = keyxfer.KeySession(args.raw_bits, args.final_bits, seed)
    except ValueError as e:
        raise UsageError(f"--final-bits: {e}")
    cfg = ProtocolConfig(c=args.c, message_bits=args.raw_bits, master_seed=seed,
                         eve=_spec(args.eve, args.policy))
    out = keyxfer.run_key_transfer(cfg, ks)
    rec = {"status": out.status.value, "raw_bits": args.raw_bits,
           "final_bits": args.final_bits, "rounds": out.session.qubits_used}
    if out.established:
        rec.update(alice_key=keyxfer.to_hex(out.alice_key), bob_key=keyxfer.to_hex(out.bob_key),
                   keys_match=out.keys_match)
    return _dumps(rec) + "\n", EXIT_OK if out.established else EXIT_DETECTED


def _cmd_selftest(args, seed) -> tuple[str, int]:
    if args.trials < selftest.MIN_STAT_SAMPLES:
        print(f"warning: --trials {args.trials} is below {selftest.MIN_STAT_SAMPLES}; "
              "statistical checks are skipped", file=sys.stderr)
    results = selftest.run_all(args.trials, seed)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed and not r.skipped for r in results)} passed, "
                 f"{sum(not r.passed for r in results)} failed, "
                 f"{sum(r.skipped for r in results)} skipped")
    return "\n".join(lines) + "\n", EXIT_OK if ok else EXIT_USAGE


_COMMANDS = {"simulate": _cmd_simulate, "sweep": _cmd_sweep, "formula": _cmd_formula,
             "keygen": _cmd_keygen, "selftest": _cmd_selftest}


def execute(argv: Optional[Sequence[str]] = None) -> tuple[str, int, Optional[str]]:
    """Parse and run; returns (output text, exit code, --out path).

    Raises UsageError before any output is produced.
    """
    args = build_parser().parse_args(argv)
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        text, code = _COMMANDS[args.command](args, seed)
    except MaxRoundsExceeded as e:
        raise UsageError(f"--c/--max-rounds: {e}")
    return text, code, getattr(args, "out", None)


def render(argv: Sequence[str]) -> str:
    """Output of a command as a string (ignores --out)."""
    return execute(argv)[0]


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        text, code, out = execute(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if out:
        tmp = out + ".tmp"
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
