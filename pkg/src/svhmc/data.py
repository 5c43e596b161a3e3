"""Data generation and I/O.

Covers three jobs: generating artificial SV series from known parameters
(for sampler validation), turning daily price levels into mean-adjusted
percent log returns, and reading/writing the CSV formats used by the CLI
(prices in, returns and traces out).  All files are UTF-8 with LF line
endings; floats are written with repr so a round trip is bit-exact.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from svhmc.diagnostics import ChainTrace
from svhmc.errors import PriceParseError
from svhmc.model import LatentPath, ReturnSeries, SvParams
from svhmc.rng import RngStream

_ISO_DATE = re.compile(r"\d{4}-\d{2}-\d{2}$")


class PriceSeries:
    """Daily closing levels, strictly positive, with optional date labels."""

    def __init__(self, prices, labels=None):
        arr = np.asarray(prices, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("prices must be one-dimensional")
        if arr.size < 3:
            raise ValueError(f"need at least 3 prices, got {arr.size}")
        bad = np.flatnonzero(~(np.isfinite(arr) & (arr > 0.0)))
        if bad.size:
            i = int(bad[0])
            raise ValueError(f"price at index {i} must be positive and finite, "
                             f"got {arr[i]!r}")
        if labels is not None:
            labels = list(labels)
            if len(labels) != arr.size:
                raise ValueError(
                    f"{len(labels)} labels for {arr.size} prices")
        self.prices = arr
        self.labels = labels

    def __len__(self):
        return self.prices.size

    def __repr__(self):
        return f"PriceSeries(n={len(self)})"


@dataclass(frozen=True)
class SyntheticTruth:
    """Generator parameters, true latent path, and the returns they produced."""

    params: SvParams
    path: LatentPath
    returns: ReturnSeries


def generate_artificial(rng: RngStream, params: SvParams, n: int) -> SyntheticTruth:
    """Simulate n observations of the SV model.

    h_1 is drawn from the stationary AR(1) law Normal(mu,
    sigma_eta2/(1-phi^2)), subsequent h_t from the recursion, and
    y_t = exp(h_t/2) eps_t.  Draw order is fixed (initial normal, n-1
    innovation normals, n observation normals) so a seed pins down every
    field of the result.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    mu, phi, s2 = params.mu, params.phi, params.sigma_eta2
    z0 = rng.standard_normal()
    eta = math.sqrt(s2) * rng.standard_normal(n - 1)
    eps = rng.standard_normal(n)
    h = np.empty(n)
    h[0] = mu + math.sqrt(s2 / (1.0 - phi * phi)) * z0
    prev = h[0]
    for t in range(1, n):
        prev = mu + phi * (prev - mu) + eta[t - 1]
        h[t] = prev
    y = np.exp(0.5 * h) * eps
    return SyntheticTruth(params=params, path=LatentPath(h),
                          returns=ReturnSeries(y))


def prices_to_returns(prices: PriceSeries) -> ReturnSeries:
    """Mean-adjusted percent log returns: 100 (ln(p_t/p_{t-1}) - mean of those).

    Output length is len(prices) - 1 and its mean is zero by construction.
    """
    log_returns = np.diff(np.log(prices.prices))
    return ReturnSeries(100.0 * (log_returns - log_returns.mean()))


def _split_csv_line(raw: str):
    return [field.strip() for field in raw.split(",")]


def load_prices(path) -> PriceSeries:
    """Parse a price CSV: `date,price` or bare `price` rows, optional header.

    The first content line is taken as a header when its value field is
    not numeric and its first field does not look like an ISO date (so a
    malformed data row is an error, not a silently skipped header).
    Reports unparseable rows as PriceParseError with a 1-based line
    number; non-positive prices are ValueError.
    """
    text = Path(path).read_text(encoding="utf-8")
    prices = []
    labels = []
    n_fields = None
    may_be_header = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = _split_csv_line(line)
        if len(fields) == 1:
            label, value_text = None, fields[0]
        elif len(fields) == 2:
            label, value_text = fields
        else:
            raise PriceParseError(
                f"expected 1 or 2 columns, got {len(fields)}", line=lineno)
        try:
            value = float(value_text)
        except ValueError:
            if may_be_header and not _ISO_DATE.match(fields[0]):
                may_be_header = False
                continue
            raise PriceParseError(
                f"unparseable price {value_text!r}", line=lineno) from None
        may_be_header = False
        if not math.isfinite(value):
            raise PriceParseError(f"non-finite price {value_text!r}", line=lineno)
        if value <= 0.0:
            raise ValueError(f"line {lineno}: price must be positive, got {value!r}")
        if n_fields is None:
            n_fields = len(fields)
        elif len(fields) != n_fields:
            raise PriceParseError(
                f"inconsistent column count (expected {n_fields})", line=lineno)
        prices.append(value)
        labels.append(label)
    if len(prices) < 3:
        raise ValueError(f"need at least 3 prices, got {len(prices)}")
    return PriceSeries(prices, labels if n_fields == 2 else None)


def save_returns(returns: ReturnSeries, path) -> None:
    """Write a one-column returns CSV with a `return` header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("return\n")
        for value in returns.values:
            fh.write(repr(float(value)))
            fh.write("\n")


def load_returns(path) -> ReturnSeries:
    """Read a one-column returns CSV (optional non-numeric header)."""
    text = Path(path).read_text(encoding="utf-8")
    values = []
    may_be_header = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = _split_csv_line(line)
        if len(fields) != 1:
            raise PriceParseError(
                f"expected 1 column, got {len(fields)}", line=lineno)
        try:
            value = float(fields[0])
        except ValueError:
            if may_be_header:
                may_be_header = False
                continue
            raise PriceParseError(
                f"unparseable return {fields[0]!r}", line=lineno) from None
        may_be_header = False
        if not math.isfinite(value):
            raise PriceParseError(f"non-finite return {fields[0]!r}", line=lineno)
        values.append(value)
    if len(values) < 2:
        raise ValueError(f"need at least 2 returns, got {len(values)}")
    return ReturnSeries(values)


def save_trace(traces, path) -> None:
    """Write traces as CSV, one column per trace, header = trace names.

    Accepts ChainTrace objects or bare (name, values) pairs.  Values are
    repr floats, so reading the file back reproduces them bit-exactly.
    All traces must have equal lengths.
    """
    named = [(t.name, np.asarray(t.values, dtype=np.float64))
             if hasattr(t, "name") else (t[0], np.asarray(t[1], dtype=np.float64))
             for t in traces]
    if not named:
        raise ValueError("no traces to save")
    length = named[0][1].size
    for name, values in named:
        if values.ndim != 1:
            raise ValueError(f"trace {name!r} must be one-dimensional")
        if values.size != length:
            raise ValueError(
                f"trace {name!r} has length {values.size}, expected {length}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(name for name, _ in named))
        fh.write("\n")
        columns = [values for _, values in named]
        for row in range(length):
            fh.write(",".join(repr(float(col[row])) for col in columns))
            fh.write("\n")


def load_traces(path) -> list[ChainTrace]:
    """Read a trace CSV written by save_trace."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header:
            raise ValueError(f"{path}: empty trace file")
        names = _split_csv_line(header)
        columns = [[] for _ in names]
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            fields = _split_csv_line(line)
            if len(fields) != len(names):
                raise PriceParseError(
                    f"expected {len(names)} columns, got {len(fields)}", line=lineno)
            try:
                for col, text_value in zip(columns, fields):
                    col.append(float(text_value))
            except ValueError:
                raise PriceParseError(
                    f"unparseable value in row {fields!r}", line=lineno) from None
    return [ChainTrace(name, np.asarray(col)) for name, col in zip(names, columns)]
