"""Chain diagnostics: autocorrelation, integrated autocorrelation time,
jackknife errors, and posterior summaries.

The ACF uses the biased truncated-sum estimator
ACF(t) = [1/N sum_{j<=N-t} (x_j - m)(x_{j+t} - m)] / var(x) with mean and
variance taken over the full trace; it is evaluated with an FFT, which
computes exactly that sum.  tau_int = 1/2 + sum_{t<=W} ACF(t) with the
self-consistent window W = min{t : t >= window_factor * tau_int(t)}
(window_factor 6 by default).  Errors on tau_int come from a
delete-one-block jackknife.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from svhmc.errors import DegenerateTraceError, InsufficientLagsError

DEFAULT_WINDOW_FACTOR = 6.0
DEFAULT_MAX_LAG = 1000
DEFAULT_JACKKNIFE_BLOCKS = 20


@dataclass
class ChainTrace:
    """A named scalar trace, one value per recorded sweep."""

    name: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("trace values must be one-dimensional")
        if arr.size < 2:
            raise ValueError(f"trace {self.name!r} needs at least 2 values")
        if not np.isfinite(arr).all():
            i = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise ValueError(f"non-finite value in trace {self.name!r} at index {i}")
        self.values = arr

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class ChainSummary:
    """Posterior mean, spread, and decorrelation cost of one trace."""

    name: str
    mean: float
    std_dev: float
    tau_int: float
    tau_int_error: float


def _acf_values(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")
    centered = x - x.mean()
    variance = float(np.dot(centered, centered)) / n
    if variance == 0.0:
        raise DegenerateTraceError("trace has zero variance")
    # zero-padded FFT evaluates the truncated cross-sums exactly
    nfft = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, nfft)
    autocov = np.fft.irfft(spectrum * np.conj(spectrum), nfft)[:max_lag + 1] / n
    return autocov / variance


def acf(trace: ChainTrace, max_lag: int) -> np.ndarray:
    """ACF at lags 0..max_lag (inclusive); ACF(0) = 1 up to round-off."""
    return _acf_values(trace.values, max_lag)


def integrated_autocorr_time(acf_values,
                             window_factor: float = DEFAULT_WINDOW_FACTOR) -> float:
    """tau_int = 1/2 + sum_{t<=W} ACF(t) with a self-consistent window.

    W is the smallest t with t >= window_factor * running tau_int(t).
    Raises InsufficientLagsError when no such t exists within the supplied
    lags; recompute the ACF with a larger max_lag and retry.
    """
    a = np.asarray(acf_values, dtype=np.float64)
    if a.ndim != 1 or a.size < 2:
        raise ValueError("need acf values for lag 0 and at least one more lag")
    if abs(a[0] - 1.0) > 1e-8:
        raise ValueError(f"acf_values[0] must be 1, got {a[0]!r}")
    if window_factor <= 0.0:
        raise ValueError(f"window_factor must be positive, got {window_factor}")
    tau = 0.5
    for t in range(1, a.size):
        tau += a[t]
        if t >= window_factor * tau:
            return tau
    raise InsufficientLagsError(
        f"no self-consistent window within {a.size - 1} lags; "
        "recompute the acf with a larger max_lag")


def jackknife_error(trace: ChainTrace, statistic, n_blocks: int) -> float:
    """Delete-one-block jackknife error of statistic(values).

    statistic maps a float array to a scalar.  The trace is cut into
    n_blocks contiguous blocks (dropping the remainder); the error is
    sqrt((k-1)/k * sum_k (s_(k) - s_bar)^2) over the leave-one-out values.
    """
    if n_blocks < 2:
        raise ValueError(f"n_blocks must be >= 2, got {n_blocks}")
    x = trace.values
    if n_blocks > x.size:
        raise ValueError(
            f"n_blocks {n_blocks} exceeds trace length {x.size}")
    block_len = x.size // n_blocks
    used = block_len * n_blocks
    estimates = np.empty(n_blocks)
    for k in range(n_blocks):
        kept = np.concatenate((x[:k * block_len], x[(k + 1) * block_len:used]))
        estimates[k] = statistic(kept)
    centered = estimates - estimates.mean()
    variance = (n_blocks - 1) / n_blocks * float(np.dot(centered, centered))
    return float(np.sqrt(variance))


def _tau_adaptive(x: np.ndarray, max_lag, window_factor: float) -> float:
    """tau_int of a raw array, doubling max_lag until the window closes."""
    limit = x.size - 1
    lag = min(DEFAULT_MAX_LAG if max_lag is None else max_lag, limit)
    while True:
        try:
            return integrated_autocorr_time(_acf_values(x, lag), window_factor)
        except InsufficientLagsError:
            if lag >= limit:
                raise
            lag = min(2 * lag, limit)


def summarize(trace: ChainTrace, n_blocks: int = DEFAULT_JACKKNIFE_BLOCKS,
              max_lag=None,
              window_factor: float = DEFAULT_WINDOW_FACTOR) -> ChainSummary:
    """Mean, standard deviation, tau_int, and jackknife error of tau_int.

    max_lag bounds the initial ACF length (default 1000, capped at N-1)
    and grows automatically while the tau_int window does not close.
    """
    x = trace.values
    tau = _tau_adaptive(x, max_lag, window_factor)
    error = jackknife_error(
        trace, lambda kept: _tau_adaptive(kept, max_lag, window_factor), n_blocks)
    return ChainSummary(name=trace.name,
                        mean=float(np.mean(x)),
                        std_dev=float(np.std(x)),
                        tau_int=tau,
                        tau_int_error=error)
