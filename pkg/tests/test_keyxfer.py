import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsdc import keyxfer, rng
from qsdc.adversary import BasisPolicy, EveKind, EveStrategySpec
from qsdc.analysis import SecurityParams, survival_one
from qsdc.keyxfer import KeySession, KeyStatus, privacy_amplify, run_key_transfer
from qsdc.protocol import ProtocolConfig

IR_BA = EveStrategySpec(EveKind.INTERCEPT_RESEND_BA, BasisPolicy.RANDOM_ZX)
DOS = EveStrategySpec(EveKind.DOS_AB)


def bitstrings(n):
    return st.lists(st.integers(0, 1), min_size=n, max_size=n).map(
        lambda b: np.array(b, dtype=np.uint8))


class TestToeplitz:
    def test_shape_and_structure(self):
        t = keyxfer.toeplitz_matrix(5, 4, 7)
        assert t.shape == (4, 7)
        for i in range(1, 4):
            for j in range(1, 7):
                assert t[i, j] == t[i - 1, j - 1]

    def test_seeded(self):
        assert (keyxfer.toeplitz_matrix(1, 8, 16) == keyxfer.toeplitz_matrix(1, 8, 16)).all()
        assert (keyxfer.toeplitz_matrix(1, 8, 16) != keyxfer.toeplitz_matrix(2, 8, 16)).any()


class TestAmplify:
    def test_zeros(self):
        assert not privacy_amplify(np.zeros(64, np.uint8), 9, 32).any()

    def test_too_long(self):
        with pytest.raises(ValueError):
            privacy_amplify(np.zeros(8, np.uint8), 0, 9)

    def test_output_length(self):
        assert privacy_amplify([1, 0, 1, 1], 3, 2).shape == (2,)

    @settings(max_examples=300)
    @given(bitstrings(48), bitstrings(48), st.integers(0, rng.MASK64), st.integers(1, 48))
    def test_linear(self, a, b, seed, m):
        lhs = privacy_amplify(a ^ b, seed, m)
        assert np.array_equal(lhs, privacy_amplify(a, seed, m) ^ privacy_amplify(b, seed, m))

    def test_bit_flip_avalanche(self):
        n, m, seeds = 256, 128, 2000
        gen = np.random.default_rng(4)
        flips = np.zeros(m)
        for s in range(seeds):
            raw = gen.integers(0, 2, n, dtype=np.uint8)
            other = raw.copy()
            other[gen.integers(n)] ^= 1
            flips += privacy_amplify(raw, s, m) != privacy_amplify(other, s, m)
        freq = flips / seeds
        assert abs(freq.mean() - 0.5) < 4 * np.sqrt(0.25 / (seeds * m))
        assert (np.abs(freq - 0.5) < 5 * np.sqrt(0.25 / seeds)).all()


class TestSession:
    @pytest.mark.parametrize("kw", [dict(raw_bits=0, final_bits=0), dict(raw_bits=4, final_bits=5),
                                    dict(raw_bits=4, final_bits=2, toeplitz_seed=-1)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            KeySession(**kw)

    def test_established_without_eve(self):
        out = run_key_transfer(ProtocolConfig(c=0.1, master_seed=3), KeySession(128, 64, 11))
        assert out.status is KeyStatus.ESTABLISHED and out.keys_match
        assert len(out.alice_key) == 64

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, rng.MASK64), st.integers(1, 64), st.data())
    def test_agreement_any_size(self, seed, n, data):
        m = data.draw(st.integers(1, n))
        out = run_key_transfer(ProtocolConfig(c=0.3, master_seed=seed), KeySession(n, m, seed))
        assert out.established and out.keys_match

    def test_attacked_aborts_without_key_material(self):
        out = run_key_transfer(ProtocolConfig(c=0.5, master_seed=1, eve=IR_BA), KeySession(128, 64))
        assert out.status is KeyStatus.ABORTED
        assert out.alice_key is None and out.bob_key is None and not out.keys_match

    def test_small_n_abort_rate(self):
        n, trials, c = 4, 3000, 0.5
        p = 1 - survival_one(SecurityParams(c, 1 / 8)) ** n
        aborts = sum(not run_key_transfer(ProtocolConfig(c=c, master_seed=s, eve=IR_BA),
                                          KeySession(n, 2)).established for s in range(trials))
        assert abs(aborts / trials - p) <= 4 * np.sqrt(p * (1 - p) / trials)

    def test_dos_mismatch(self):
        mism = 0
        for s in range(20):
            out = run_key_transfer(ProtocolConfig(c=0.1, master_seed=s, eve=DOS), KeySession(128, 64))
            assert out.established
            mism += not out.keys_match
        assert mism == 20

    def test_raw_bits_follow_config_length(self):
        out = run_key_transfer(ProtocolConfig(message_bits=3), KeySession(10, 5))
        assert len(out.session.delivered_bits) == 10


@pytest.mark.parametrize("bits,hexs", [([1, 0, 1, 0], "a"), ([0, 0, 0, 0, 1], "01"), ([], "")])
def test_hex(bits, hexs):
    assert keyxfer.to_hex(bits) == hexs
