import numpy as np
import pytest

from qsdc import batch, rng
from qsdc.adversary import BasisPolicy, EveKind, EveStrategySpec, NO_EVE, SHIPPED_ATTACKS
from qsdc.protocol import (CONTROL_STATES, MaxRoundsExceeded, Mode, ProtocolConfig,
                           SessionStats, run_round, run_session)

SPECS = [NO_EVE, EveStrategySpec(EveKind.DOS_AB),
         EveStrategySpec(EveKind.INTERCEPT_RESEND_AB, BasisPolicy.FIXED_X),
         EveStrategySpec(EveKind.MEASURE_ONLY_BA, BasisPolicy.RANDOM_ZX), *SHIPPED_ATTACKS]
ids = [s.label for s in SPECS]


@pytest.mark.parametrize("spec", SPECS, ids=ids)
@pytest.mark.parametrize("force", [None, Mode.CONTROL, Mode.MESSAGE])
def test_rounds_match_scalar(spec, force):
    cfg = ProtocolConfig(c=0.4, eve=spec)
    seeds = rng.derive_seeds(31, np.arange(400))
    bits = (np.arange(400) % 3 == 0).astype(np.int8)
    rb = batch.simulate_rounds(cfg, seeds, 17, bits, force_mode=force)
    for i, seed in enumerate(seeds.tolist()):
        t = run_round(cfg, int(bits[i]), rng.RoundStreams(seed, 17), force_mode=force)
        assert rb.control[i] == (t.mode is Mode.CONTROL)
        assert "zx"[rb.alice_basis[i]] == t.alice_basis
        assert rb.alice_outcome[i] == t.alice_outcome
        assert rb.sifted[i] == t.sifted and rb.detected[i] == t.detected
        assert rb.decoded_bit[i] == (-1 if t.decoded_bit is None else t.decoded_bit)
        assert rb.bob_bit[i] == (-1 if t.bob_bit is None else t.bob_bit)
        expected_state = -1 if t.bob_state is None else CONTROL_STATES.index(t.bob_state)
        assert rb.bob_state[i] == expected_state
        assert rb.eve_guess[i] == (-1 if t.eve_guess is None else t.eve_guess)


@pytest.mark.parametrize("spec", SPECS, ids=ids)
def test_sessions_match_scalar(spec):
    cfg = ProtocolConfig(c=0.3, message_bits=6, eve=spec)
    seeds = rng.derive_seeds(2, np.arange(150))
    sb = batch.run_sessions(cfg, seeds)
    for i, seed in enumerate(seeds.tolist()):
        st = SessionStats.from_result(run_session(ProtocolConfig(
            c=0.3, message_bits=6, master_seed=seed, eve=spec)))
        assert (sb.aborted[i], sb.qubits_used[i], sb.delivered[i], sb.bit_errors[i],
                sb.control_rounds[i], sb.eve_guesses[i], sb.eve_correct[i]) == (
            st.aborted, st.qubits_used, st.delivered_bits, st.bit_errors,
            st.control_rounds, st.eve_guesses, st.eve_correct_guesses)
        assert sb.abort_round[i] == (-1 if st.abort_round is None else st.abort_round)


def test_message_bits_match_scalar():
    from qsdc.protocol import message_from_seed
    seeds = np.array([0, 1, 2 ** 63 + 5], dtype=np.uint64)
    got = batch.message_bits_for(seeds, 10)
    for i, s in enumerate(seeds.tolist()):
        assert got[i].tolist() == message_from_seed(s, 10)


def test_round_cap():
    with pytest.raises(MaxRoundsExceeded):
        batch.run_sessions(ProtocolConfig(c=1.0, message_bits=2), [1, 2])
