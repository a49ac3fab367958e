import io
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsdc import batch, rng
from qsdc.adversary import BasisPolicy, EveKind, EveStrategySpec
from qsdc.protocol import (BobAction, ConfigError, MaxRoundsExceeded, Mode, ProtocolConfig,
                           RoundTranscript, SessionStats, decode, message_from_seed,
                           read_transcripts, run_round, run_session, write_transcripts)
from qsdc.qstate import StateLabel

DATA = Path(__file__).parent / "data"
IR_BOTH = EveStrategySpec(EveKind.INTERCEPT_RESEND_BOTH, BasisPolicy.RANDOM_ZX)


def rnd(cfg, r=0, bit=0, **kw):
    return run_round(cfg, bit, rng.RoundStreams(cfg.master_seed, r), **kw)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(c=-0.1), dict(c=1.5), dict(message_bits=0),
                                    dict(master_seed=-1), dict(master_seed=2 ** 64),
                                    dict(message_bits=10, max_rounds=5)])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            ProtocolConfig(**kw)

    def test_default_cap(self):
        assert ProtocolConfig(message_bits=10).max_rounds == 64 * 10 + 1000


class TestDecode:
    @pytest.mark.parametrize("prep,outcome,bit", [("z0", 0, 0), ("z0", 1, 1),
                                                  ("x0", 0, 0), ("x0", 1, 1)])
    def test_table(self, prep, outcome, bit):
        assert decode(StateLabel(prep), outcome) == bit

    def test_rejects_other_preparations(self):
        with pytest.raises(ConfigError):
            decode(StateLabel.Z1, 0)


class TestRound:
    def test_message_bit_one_from_zero(self):
        t = rnd(ProtocolConfig(), bit=1, force_mode=Mode.MESSAGE, force_alice_prep="z0")
        assert (t.alice_outcome, t.decoded_bit, t.bob_action) == (1, 1, BobAction.ENCODE_IY)
        assert t.public_events == ("alice:receipt",)

    def test_message_bit_zero_from_phi0(self):
        t = rnd(ProtocolConfig(), bit=0, force_mode=Mode.MESSAGE, force_alice_prep="x0")
        assert (t.alice_outcome, t.decoded_bit, t.bob_action) == (0, 0, BobAction.ENCODE_I)

    def test_control_undisturbed(self):
        t = rnd(ProtocolConfig(), force_mode=Mode.CONTROL, force_alice_prep="x0",
                force_control_state="x1")
        assert t.sifted and t.alice_outcome == 1 and not t.detected
        assert t.decoded_bit is None and t.bob_action is BobAction.CONTROL_SUBSTITUTE
        assert t.public_events == ("alice:receipt", "bob:control_run", "bob:announce_state")

    def test_control_unsifted(self):
        t = rnd(ProtocolConfig(), force_mode=Mode.CONTROL, force_alice_prep="z0",
                force_control_state="x1")
        assert not t.sifted and not t.detected

    def test_forcing_keeps_other_draws(self):
        cfg = ProtocolConfig(c=0.5, eve=IR_BOTH)
        for r in range(50):
            a = rnd(cfg, r)
            b = rnd(cfg, r, force_mode=a.mode, force_alice_prep=a.alice_prep)
            assert a == b

    def test_detected_round_announces(self):
        cfg = ProtocolConfig(eve=IR_BOTH)
        for r in range(200):
            t = rnd(cfg, r, force_mode=Mode.CONTROL)
            if t.detected:
                assert t.public_events[-1] == "alice:detected_eve"
                break
        else:
            pytest.fail("no detection in 200 attacked control rounds")

    def test_eve_detection_rate_both_random(self):
        n = 200_000
        cfg = ProtocolConfig(eve=IR_BOTH)
        rb = batch.simulate_rounds(cfg, np.arange(n, dtype=np.uint64), 0, force_mode=Mode.CONTROL)
        p = rb.detected.mean()
        assert abs(p - 1 / 8) <= 4 * math.sqrt(1 / 8 * 7 / 8 / n)

    @settings(max_examples=200)
    @given(st.integers(0, rng.MASK64), st.integers(0, 10 ** 6), st.integers(0, 1),
           st.floats(0, 1))
    def test_transcript_invariants(self, seed, r, bit, c):
        t = rnd(ProtocolConfig(c=c, master_seed=seed), r, bit)
        assert (t.decoded_bit is not None) == (t.mode is Mode.MESSAGE)
        if t.detected:
            assert t.mode is Mode.CONTROL and t.sifted
        assert t.alice_prep in (StateLabel.Z0, StateLabel.X0)


class TestSession:
    def test_no_control_rounds(self):
        res = run_session(ProtocolConfig(c=0, message_bits=8, master_seed=3))
        assert res.qubits_used == 8 and not res.aborted
        assert all(a == b for a, b in res.delivered_bits)

    def test_all_control_never_finishes(self):
        with pytest.raises(MaxRoundsExceeded):
            run_session(ProtocolConfig(c=1, message_bits=4))

    def test_mean_rounds_geometric(self):
        cfg = ProtocolConfig(c=0.5, message_bits=1000)
        sb = batch.run_sessions(cfg, rng.derive_seeds(0, np.arange(200)))
        # each session is 1000 + NegBin(1000, 1/2) rounds: sd sqrt(2000) per session
        assert abs(sb.qubits_used.mean() - 2000) <= 4 * math.sqrt(2000 / 200)

    def test_explicit_message(self):
        msg = [1, 0, 1, 1, 0]
        res = run_session(ProtocolConfig(c=0.2, message_bits=5), msg)
        assert [b for b, _ in res.delivered_bits] == msg

    def test_message_length_checked(self):
        with pytest.raises(ConfigError):
            run_session(ProtocolConfig(message_bits=5), [0, 1])

    def test_default_message_from_seed(self):
        res = run_session(ProtocolConfig(c=0, message_bits=16, master_seed=9))
        assert [b for b, _ in res.delivered_bits] == message_from_seed(9, 16)

    def test_deterministic(self):
        cfg = ProtocolConfig(c=0.3, message_bits=40, master_seed=77, eve=IR_BOTH)
        assert run_session(cfg) == run_session(cfg)

    def test_abort_is_last_round(self):
        cfg = ProtocolConfig(c=0.5, message_bits=200, eve=IR_BOTH)
        res = run_session(cfg)
        assert res.aborted
        assert res.transcripts[-1].detected and res.abort_round == res.transcripts[-1].round_index
        assert not any(t.detected for t in res.transcripts[:-1])
        assert res.qubits_used == len(res.transcripts)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, rng.MASK64), st.floats(0, 0.9), st.integers(1, 40))
    def test_no_eve_correct(self, seed, c, n):
        res = run_session(ProtocolConfig(c=c, message_bits=n, master_seed=seed))
        assert not res.aborted
        assert len(res.delivered_bits) == n
        assert all(a == b for a, b in res.delivered_bits)
        assert not any(t.detected for t in res.transcripts)

    def test_stats(self):
        res = run_session(ProtocolConfig(c=0.4, message_bits=30, master_seed=5, eve=IR_BOTH))
        st_ = SessionStats.from_result(res)
        assert st_.rounds == st_.message_rounds + st_.control_rounds
        assert st_.eve_guesses == st_.eve_correct_guesses == st_.delivered_bits


class TestStatistics:
    N = 1_000_000

    def test_mode_frequency(self):
        c = 0.3
        rb = batch.simulate_rounds(ProtocolConfig(c=c), 11, np.arange(self.N))
        assert abs(rb.control.mean() - c) <= 4 * math.sqrt(c * (1 - c) / self.N)

    def test_sift_rate(self):
        rb = batch.simulate_rounds(ProtocolConfig(), 12, np.arange(self.N), force_mode=Mode.CONTROL)
        assert abs(rb.sifted.mean() - 0.5) <= 4 * math.sqrt(0.25 / self.N)
        assert not rb.detected.any()

    def test_control_soundness_scalar(self):
        cfg = ProtocolConfig(c=1.0, master_seed=4)
        assert not any(rnd(cfg, r).detected for r in range(5000))


class TestSerialization:
    def test_round_trip(self):
        res = run_session(ProtocolConfig(c=0.5, message_bits=20, master_seed=1, eve=IR_BOTH))
        buf = io.StringIO()
        write_transcripts(res.transcripts, buf)
        buf.seek(0)
        assert tuple(read_transcripts(buf)) == res.transcripts

    def test_enum_strings(self):
        t = rnd(ProtocolConfig(), bit=1, force_mode=Mode.MESSAGE, force_alice_prep="z0")
        d = json.loads(t.to_json())
        assert d["mode"] == "message" and d["bob_action"] == "encode_iy" and d["alice_prep"] == "z0"
        assert RoundTranscript.from_dict(d) == t

    @pytest.mark.parametrize("name,cfg", [
        ("session_no_eve.jsonl", ProtocolConfig(c=0.25, message_bits=12, master_seed=7)),
        ("session_ir_both.jsonl", ProtocolConfig(c=0.25, message_bits=12, master_seed=7,
                                                 eve=IR_BOTH)),
    ])
    def test_golden(self, name, cfg):
        buf = io.StringIO()
        write_transcripts(run_session(cfg).transcripts, buf)
        assert buf.getvalue() == (DATA / name).read_text()
