import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindmix.errors import InvalidSymbolError, ShapeError
from blindmix.signal_chain import (
    QAM16_POINTS,
    ChannelImpulse,
    add_cyclic_prefix,
    cyclic_convolve,
    fourier_observation,
    lti_channel_output,
    ofdm_demodulate,
    ofdm_modulate,
    qam16_demodulate,
    qam16_modulate,
    receive_time_domain,
)

from conftest import cn


class TestQam:
    def test_spec_mapping_examples(self):
        out = qam16_modulate([0, 5, 15])
        expected = np.array([-3 - 3j, -1 - 1j, 3 + 3j]) / np.sqrt(10)
        assert np.allclose(out, expected, atol=1e-15)

    def test_zero_message(self):
        assert np.allclose(qam16_modulate([0, 0, 0, 0]), (-3 - 3j) / np.sqrt(10))

    def test_unit_average_power(self):
        assert abs(np.mean(np.abs(QAM16_POINTS) ** 2) - 1.0) < 1e-12

    def test_points_are_distinct_grid(self):
        pts = QAM16_POINTS * np.sqrt(10)
        assert len(set(np.round(pts, 9))) == 16
        assert set(np.round(pts.real).astype(int)) == {-3, -1, 1, 3}

    @pytest.mark.parametrize("bad", [[16], [-1], [0, 1.5]])
    def test_invalid_index(self, bad):
        with pytest.raises(InvalidSymbolError):
            qam16_modulate(bad)

    @given(st.lists(st.integers(0, 15), min_size=1, max_size=64))
    def test_round_trip(self, msg):
        x = ofdm_modulate(qam16_modulate(msg))
        assert np.array_equal(qam16_demodulate(x), msg)

    def test_small_phase_perturbation(self, rng):
        msg = rng.integers(0, 16, 32)
        x = ofdm_modulate(qam16_modulate(msg))
        assert np.array_equal(qam16_demodulate(np.exp(1e-6j) * x), msg)

    def test_zero_vector_tie_break(self):
        # the four innermost points are equidistant; the smallest index wins
        out = qam16_demodulate(np.zeros(5))
        inner = [i for i in range(16) if np.isclose(abs(QAM16_POINTS[i]), np.sqrt(0.2))]
        assert np.all(out == min(inner))


class TestOfdm:
    def test_basis_vector(self):
        x = ofdm_modulate(np.eye(6)[0])
        assert np.allclose(x, np.ones(6) / np.sqrt(6))

    def test_four_point_by_hand(self):
        assert np.allclose(ofdm_modulate([1, 1, 1, 1]), [2, 0, 0, 0])

    @given(st.integers(1, 40), st.integers(0, 2**31 - 1))
    def test_norm_preserved_and_inverse(self, n, seed):
        s = cn(np.random.default_rng(seed), n)
        x = ofdm_modulate(s)
        assert np.isclose(np.linalg.norm(x), np.linalg.norm(s))
        assert np.allclose(ofdm_demodulate(x), s)

    def test_empty_rejected(self):
        with pytest.raises(ShapeError):
            ofdm_modulate([])


class TestCyclicPrefix:
    def test_definition(self):
        assert np.array_equal(add_cyclic_prefix([1, 2, 3, 4], 2), [3, 4, 1, 2, 3, 4])

    def test_single_sample(self):
        assert np.array_equal(add_cyclic_prefix([7], 1), [7, 7])

    @pytest.mark.parametrize("Lp", [0, 5])
    def test_out_of_range(self, Lp):
        with pytest.raises(ValueError):
            add_cyclic_prefix([1, 2, 3, 4], Lp)


class TestConvolution:
    def test_impulse_identity(self, rng):
        f = cn(rng, 9)
        assert np.allclose(cyclic_convolve(f, np.eye(9)[0]), f)

    def test_two_term(self):
        assert np.allclose(cyclic_convolve([1, 1], [1, -1]), [0, 0])

    def test_against_direct_sum(self, rng):
        L = 11
        f, g = cn(rng, L), cn(rng, L)
        direct = [sum(f[m] * g[(n - m) % L] for m in range(L)) for n in range(L)]
        assert np.allclose(cyclic_convolve(f, g), direct, atol=1e-12)

    def test_unitary_convolution_theorem(self, rng):
        L = 64
        f, g = cn(rng, L), cn(rng, L)
        lhs = np.fft.fft(cyclic_convolve(f, g), norm="ortho")
        rhs = np.sqrt(L) * np.fft.fft(f, norm="ortho") * np.fft.fft(g, norm="ortho")
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            cyclic_convolve([1, 2, 3], [1, 2])


class TestLtiChannel:
    def test_unit_tap(self, rng):
        p = cn(rng, 8)
        d = add_cyclic_prefix(p, 2)
        assert np.allclose(lti_channel_output(d, [1, 0, 0]), p)

    def test_flat_gain(self, rng):
        p = cn(rng, 8)
        d = add_cyclic_prefix(p, 1)
        assert np.allclose(lti_channel_output(d, [2.5 - 1j], prefix_len=1), (2.5 - 1j) * p)

    @settings(max_examples=50)
    @given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31 - 1))
    def test_cyclic_extension_equivalence(self, Np, Lq, seed):
        if Lq > Np:
            Lq = Np
        rng = np.random.default_rng(seed)
        p, q = cn(rng, Np), cn(rng, Lq)
        out = lti_channel_output(add_cyclic_prefix(p, max(Lq - 1, 1)), q, prefix_len=max(Lq - 1, 1))
        qpad = np.concatenate([q, np.zeros(Np - Lq)])
        assert np.abs(out - cyclic_convolve(p, qpad)).max() < 1e-13 * max(1.0, np.abs(out).max())

    def test_short_prefix_rejected(self, rng):
        d = add_cyclic_prefix(cn(rng, 8), 1)
        with pytest.raises(ValueError):
            lti_channel_output(d, cn(rng, 4), prefix_len=1)


class TestReceiveChain:
    def test_identity_encoder_unit_channel(self, rng):
        L, N = 8, 8
        x, n = cn(rng, N), cn(rng, L)
        z = receive_time_domain([x], [np.eye(L, N)], [ChannelImpulse(np.array([1.0 + 0j]), L)], noise=n)
        assert np.allclose(z, x + n)

    def test_zero_signals(self, rng):
        L = 8
        z = receive_time_domain([np.zeros(3)] * 2, [cn(rng, L, 3)] * 2,
                                [ChannelImpulse(cn(rng, 2), L)] * 2)
        assert np.all(z == 0)

    def test_channel_padding(self, rng):
        ch = ChannelImpulse(cn(rng, 3), 10)
        assert np.array_equal(ch.g[:3], ch.h) and np.all(ch.g[3:] == 0)
        with pytest.raises(ShapeError):
            ChannelImpulse(cn(rng, 10), 10)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeError):
            receive_time_domain([cn(rng, 3)], [cn(rng, 8, 4)], [ChannelImpulse(cn(rng, 2), 8)])

    def test_fourier_observation_scaling(self, rng):
        z = cn(rng, 16)
        assert np.allclose(fourier_observation(z) * np.sqrt(16), np.fft.fft(z, norm="ortho"))
