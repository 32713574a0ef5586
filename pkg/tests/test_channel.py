"""信道模型：实等效、瑞利抽样、接收与信道文件。"""

import numpy as np
import pytest

from src.errors import DomainError
from src.phy.channel import (
    CEPoint,
    Channel,
    SymbolBlock,
    lift,
    load_channel_csv,
    rayleigh_channel,
    receive,
    save_channel_csv,
    stack_real,
)
from src.optim.solver import project

MOMENT_SAMPLES = 100_000


class TestLift:

    def test_real_scalar_channel(self):
        np.testing.assert_array_equal(lift(Channel(np.array([[1.0]]))).Hbar, [[1.0, 0.0], [0.0, 1.0]])

    def test_imaginary_unit_is_rotation(self):
        np.testing.assert_array_equal(lift(Channel(np.array([[1j]]))).Hbar, [[0.0, -1.0], [1.0, 0.0]])

    def test_matches_complex_product(self, rng):
        channel = rayleigh_channel(4, 8, rng)
        Hbar = lift(channel).Hbar
        for _ in range(100):
            x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            np.testing.assert_allclose(Hbar @ stack_real(x), stack_real(channel.H @ x), atol=1e-12)

    def test_norm_preserving(self, rng):
        channel = rayleigh_channel(3, 5, rng)
        X = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
        np.testing.assert_allclose(
            np.linalg.norm(lift(channel).Hbar @ stack_real(X)),
            np.linalg.norm(channel.H @ X),
            rtol=1e-12,
        )

    def test_dimensions(self, rng):
        real = lift(rayleigh_channel(3, 5, rng))
        assert real.Hbar.shape == (6, 10)
        assert (real.K, real.N) == (3, 5)


class TestRayleighChannel:

    def test_unit_average_power(self):
        channel = rayleigh_channel(100, 1000, np.random.default_rng(7))
        assert abs(np.mean(np.abs(channel.H) ** 2) - 1.0) < 0.02

    def test_component_variances(self):
        H = rayleigh_channel(100, 1000, np.random.default_rng(8)).H
        assert abs(np.var(H.real) - 0.5) < 0.01
        assert abs(np.var(H.imag) - 0.5) < 0.01

    def test_deterministic_for_seed(self):
        a = rayleigh_channel(4, 6, np.random.default_rng(3))
        b = rayleigh_channel(4, 6, np.random.default_rng(3))
        np.testing.assert_array_equal(a.H, b.H)

    def test_channel_owns_its_matrix(self):
        H = np.ones((2, 3), dtype=complex)
        channel = Channel(H)
        H[0, 0] = 5.0
        assert channel.H[0, 0] == 1.0
        with pytest.raises(ValueError):
            channel.H[0, 0] = 2.0

    def test_rejects_non_matrix(self):
        with pytest.raises(DomainError):
            Channel(np.ones(3))


class TestReceive:

    def test_noiseless(self, rng):
        channel = rayleigh_channel(3, 4, rng)
        X = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
        np.testing.assert_array_equal(receive(channel, X, 0.0, rng), channel.H @ X)

    def test_noise_variance(self):
        rng = np.random.default_rng(11)
        channel = Channel(np.array([[1.0]]))
        x = np.full((1, MOMENT_SAMPLES), 0.3 - 0.4j)
        sigma_n = 0.7
        noise = receive(channel, x, sigma_n, rng) - x
        assert abs(np.mean(np.abs(noise) ** 2) / sigma_n**2 - 1.0) < 0.02
        assert abs(np.var(noise.real) / (sigma_n**2 / 2) - 1.0) < 0.02
        assert abs(np.mean(noise)) < 0.01

    def test_accepts_ce_point(self, rng):
        channel = rayleigh_channel(2, 4, rng)
        z = project(0.0, rng.standard_normal((8, 3)), 1.0)
        point = CEPoint(Xbar=z.Xbar, P=1.0)
        np.testing.assert_allclose(receive(channel, point, 0.0, rng), channel.H @ point.to_complex())

    def test_independent_draws(self, rng):
        channel = rayleigh_channel(2, 4, rng)
        X = np.ones((4, 3), dtype=complex)
        Y = receive(channel, X, 0.1, rng, draws=6)
        assert Y.shape == (6, 2, 3)
        assert not np.allclose(Y[0], Y[1])

    def test_dimension_mismatch(self, rng):
        channel = rayleigh_channel(2, 4, rng)
        with pytest.raises(DomainError):
            receive(channel, np.ones((3, 2), dtype=complex), 0.1, rng)

    def test_negative_sigma(self, rng):
        channel = rayleigh_channel(2, 4, rng)
        with pytest.raises(DomainError):
            receive(channel, np.ones((4, 2), dtype=complex), -1.0, rng)

    def test_real_block_rejected(self, rng):
        channel = rayleigh_channel(2, 4, rng)
        with pytest.raises(DomainError):
            receive(channel, np.ones((4, 2)), 0.1, rng)


class TestCEPoint:

    def test_feasible_point_has_slot_power_P(self, rng):
        P = 2.5
        point = CEPoint(Xbar=project(0.0, rng.standard_normal((12, 4)), P).Xbar, P=P)
        assert point.is_feasible()
        np.testing.assert_allclose(np.sum(np.abs(point.to_complex()) ** 2, axis=0), P, rtol=1e-12)

    def test_infeasible_point(self, rng):
        assert not CEPoint(Xbar=rng.standard_normal((6, 2)), P=1.0).is_feasible()


class TestSymbolBlock:

    def test_stacked_form_matches_symbols(self, rng, qam16):
        S = qam16.sample((3, 5), rng)
        block = SymbolBlock(S)
        assert (block.K, block.T) == (3, 5)
        np.testing.assert_array_equal(block.Sbar, np.vstack([S.real, S.imag]))
        assert set(np.unique(block.Sbar)) <= {-3.0, -1.0, 1.0, 3.0}

    def test_read_only(self, rng, qam16):
        block = SymbolBlock(qam16.sample((2, 2), rng))
        with pytest.raises(ValueError):
            block.S[0, 0] = 0

    def test_rejects_vector(self):
        with pytest.raises(DomainError):
            SymbolBlock(np.ones(4, dtype=complex))


class TestChannelFile:

    def test_save_then_load(self, rng, tmp_path):
        channel = rayleigh_channel(3, 5, rng)
        path = tmp_path / "h.csv"
        save_channel_csv(channel, path)
        loaded = load_channel_csv(path)
        np.testing.assert_array_equal(loaded.H, channel.H)

    def test_odd_column_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,0.0,2.0\n")
        with pytest.raises(DomainError):
            load_channel_csv(path)

    def test_non_numeric_entry(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,abc\n")
        with pytest.raises(DomainError):
            load_channel_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DomainError):
            load_channel_csv(path)
