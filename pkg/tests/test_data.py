import math

import numpy as np
import pytest

from svhmc.data import (PriceSeries, SyntheticTruth, generate_artificial,
                        load_prices, load_returns, load_traces,
                        prices_to_returns, save_returns, save_trace)
from svhmc.diagnostics import ChainTrace
from svhmc.errors import PriceParseError
from svhmc.model import ReturnSeries, SvParams
from svhmc.rng import RngStream


class TestPriceSeries:
    def test_validation(self):
        with pytest.raises(ValueError, match="at least 3"):
            PriceSeries([1.0, 2.0])
        with pytest.raises(ValueError, match="index 1"):
            PriceSeries([1.0, -2.0, 3.0])
        with pytest.raises(ValueError, match="index 2"):
            PriceSeries([1.0, 2.0, math.inf])
        with pytest.raises(ValueError, match="labels"):
            PriceSeries([1.0, 2.0, 3.0], labels=["a", "b"])

    def test_labels_kept(self):
        series = PriceSeries([1.0, 2.0, 3.0], labels=["a", "b", "c"])
        assert series.labels == ["a", "b", "c"]
        assert len(series) == 3


class TestGenerateArtificial:
    def test_reproducible_and_typed(self):
        params = SvParams(mu=-1.0, phi=0.9, sigma_eta2=0.1)
        first = generate_artificial(RngStream(70), params, 50)
        second = generate_artificial(RngStream(70), params, 50)
        assert isinstance(first, SyntheticTruth)
        assert np.array_equal(first.path.values, second.path.values)
        assert np.array_equal(first.returns.values, second.returns.values)
        assert len(first.path) == len(first.returns) == 50
        assert first.params == params

    def test_minimum_length(self):
        with pytest.raises(ValueError, match="n must be"):
            generate_artificial(RngStream(0), SvParams(0.0, 0.5, 1.0), 1)

    def test_latent_path_follows_stationary_ar1(self):
        params = SvParams(mu=-1.0, phi=0.9, sigma_eta2=0.19)
        truth = generate_artificial(RngStream(71), params, 20_000)
        h = truth.path.values
        sd = math.sqrt(params.sigma_eta2 / (1.0 - params.phi ** 2))
        # tau_int of AR(1) at rho=0.9 is 9.5, so the mean has ~n/19
        # independent draws
        se_mean = sd * math.sqrt(2.0 * 9.5 / h.size)
        assert abs(h.mean() - params.mu) < 5.0 * se_mean
        assert h.std() == pytest.approx(sd, rel=0.05)
        centered = h - h.mean()
        lag1 = float(np.dot(centered[:-1], centered[1:])
                     / np.dot(centered, centered))
        assert lag1 == pytest.approx(params.phi, abs=0.02)

    def test_returns_are_scaled_noise(self):
        # y_t^2 e^{-h_t} recovers the squared observation noise exactly
        params = SvParams(mu=-1.0, phi=0.9, sigma_eta2=0.1)
        truth = generate_artificial(RngStream(72), params, 20_000)
        ratio = truth.returns.squared * np.exp(-truth.path.values)
        assert ratio.mean() == pytest.approx(1.0, abs=5.0 * math.sqrt(2.0 / 20_000))


class TestPricesToReturns:
    def test_hand_computed_example(self):
        prices = PriceSeries([100.0, 101.0, 99.5, 100.2])
        raw = [math.log(101.0 / 100.0), math.log(99.5 / 101.0),
               math.log(100.2 / 99.5)]
        mean = sum(raw) / 3.0
        expected = [100.0 * (r - mean) for r in raw]
        returns = prices_to_returns(prices)
        assert np.allclose(returns.values, expected, rtol=1e-15)
        assert len(returns) == 3
        assert abs(float(returns.values.sum())) < 1e-12


class TestLoadPrices:
    def write(self, tmp_path, text):
        target = tmp_path / "prices.csv"
        target.write_text(text, encoding="utf-8")
        return target

    def test_two_column_with_header(self, tmp_path):
        path = self.write(tmp_path,
                          "date,close\n2000-01-03,102.5\n2000-01-04,101.0\n"
                          "2000-01-05,103.25\n")
        series = load_prices(path)
        assert np.array_equal(series.prices, [102.5, 101.0, 103.25])
        assert series.labels == ["2000-01-03", "2000-01-04", "2000-01-05"]

    def test_single_column_no_header(self, tmp_path):
        path = self.write(tmp_path, "1.5\n2.5\n\n3.5\n")
        series = load_prices(path)
        assert np.array_equal(series.prices, [1.5, 2.5, 3.5])
        assert series.labels is None

    def test_malformed_first_row_is_not_a_header(self, tmp_path):
        # an ISO-dated row with a bad value must fail loudly, not be
        # skipped as a header
        path = self.write(tmp_path, "2000-03-01,abc\n2000-03-02,101.0\n")
        with pytest.raises(PriceParseError, match="line 1") as info:
            load_prices(path)
        assert info.value.line == 1

    def test_unparseable_later_row(self, tmp_path):
        path = self.write(tmp_path, "1.0\n2.0\nbogus\n4.0\n")
        with pytest.raises(PriceParseError, match="line 3"):
            load_prices(path)

    def test_nonpositive_price(self, tmp_path):
        path = self.write(tmp_path, "1.0\n0.0\n2.0\n")
        with pytest.raises(ValueError, match="line 2: price must be positive"):
            load_prices(path)

    def test_nonfinite_price(self, tmp_path):
        path = self.write(tmp_path, "1.0\ninf\n2.0\n")
        with pytest.raises(PriceParseError, match="line 2"):
            load_prices(path)

    def test_inconsistent_columns(self, tmp_path):
        path = self.write(tmp_path, "1.0\n2000-01-04,2.0\n3.0\n")
        with pytest.raises(PriceParseError, match="line 2"):
            load_prices(path)

    def test_too_many_columns(self, tmp_path):
        path = self.write(tmp_path, "a,b,c\n")
        with pytest.raises(PriceParseError, match="1 or 2 columns"):
            load_prices(path)

    def test_too_few_rows(self, tmp_path):
        path = self.write(tmp_path, "1.0\n2.0\n")
        with pytest.raises(ValueError, match="at least 3"):
            load_prices(path)


class TestReturnsRoundTrip:
    def test_bit_exact(self, tmp_path):
        gen = np.random.default_rng(73)
        returns = ReturnSeries(gen.standard_normal(50) * 1.7)
        target = tmp_path / "returns.csv"
        save_returns(returns, target)
        loaded = load_returns(target)
        assert np.array_equal(loaded.values, returns.values)
        assert target.read_text(encoding="utf-8").startswith("return\n")

    def test_load_without_header(self, tmp_path):
        target = tmp_path / "returns.csv"
        target.write_text("0.5\n-1.25\n", encoding="utf-8")
        assert np.array_equal(load_returns(target).values, [0.5, -1.25])

    def test_load_errors(self, tmp_path):
        target = tmp_path / "returns.csv"
        target.write_text("return\n1.0,2.0\n", encoding="utf-8")
        with pytest.raises(PriceParseError, match="line 2"):
            load_returns(target)
        target.write_text("return\n1.0\nbad\n", encoding="utf-8")
        with pytest.raises(PriceParseError, match="line 3"):
            load_returns(target)
        target.write_text("return\n1.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="at least 2"):
            load_returns(target)


class TestTraceRoundTrip:
    def test_bit_exact_with_names(self, tmp_path):
        gen = np.random.default_rng(74)
        traces = [ChainTrace("mu", gen.standard_normal(30)),
                  ChainTrace("h_100", gen.standard_normal(30) * 0.01)]
        target = tmp_path / "trace.csv"
        save_trace(traces, target)
        loaded = load_traces(target)
        assert [t.name for t in loaded] == ["mu", "h_100"]
        for original, reread in zip(traces, loaded):
            assert np.array_equal(original.values, reread.values)

    def test_accepts_name_value_pairs(self, tmp_path):
        target = tmp_path / "trace.csv"
        save_trace([("a", [1.5, 2.5]), ("b", [0.25, -0.5])], target)
        loaded = load_traces(target)
        assert [t.name for t in loaded] == ["a", "b"]
        assert np.array_equal(loaded[0].values, [1.5, 2.5])

    def test_single_row_is_writable(self, tmp_path):
        target = tmp_path / "trace.csv"
        save_trace([("mu", [1.5])], target)
        assert target.read_text(encoding="utf-8") == "mu\n1.5\n"

    def test_save_validation(self, tmp_path):
        target = tmp_path / "trace.csv"
        with pytest.raises(ValueError, match="no traces"):
            save_trace([], target)
        with pytest.raises(ValueError, match="length"):
            save_trace([("a", [1.0, 2.0]), ("b", [1.0])], target)

    def test_load_errors(self, tmp_path):
        target = tmp_path / "trace.csv"
        target.write_text("a,b\n1.0\n", encoding="utf-8")
        with pytest.raises(PriceParseError, match="line 2"):
            load_traces(target)
        target.write_text("a\n1.0\nbad\n", encoding="utf-8")
        with pytest.raises(PriceParseError, match="line 3"):
            load_traces(target)
