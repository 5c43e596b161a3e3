"""Command-line experiment runner.

Subcommands: simulate (generate artificial returns plus a truth sidecar),
fit (run one chain and write summary/trace/ACF/metadata files), ingest
(price CSV to mean-adjusted percent returns), and compare (fit two
samplers on the same data and emit a side-by-side table plus paired ACF
columns).

Configuration precedence, lowest to highest: built-in defaults, a flat
`key = value` config file (--config), the SVHMC_OUTPUT_DIR environment
variable (output directory only), command-line flags.  Summary numbers
are recomputed from the trace.csv that was just written, so the emitted
table is self-consistent with the emitted trace by construction.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from svhmc import _kernels, __version__
from svhmc.chain import ChainResult, run_chain
from svhmc.data import (generate_artificial, load_prices, load_returns,
                        load_traces, prices_to_returns, save_returns,
                        save_trace)
from svhmc.diagnostics import ChainSummary, ChainTrace, acf, summarize
from svhmc.errors import DegenerateTraceError, InsufficientLagsError, SvhmcError
from svhmc.latent_sampler import HmcConfig, MetropolisConfig
from svhmc.model import SvParams
from svhmc.rng import RngStream

SAMPLERS = ("hmc", "metropolis")


@dataclass
class RunConfig:
    """Everything cmd_fit needs besides the data file."""

    seed: int = 12345
    sampler: str = "hmc"
    n_burn_in: int = 10000
    n_record: int = 200000
    thin: int = 1
    step_size: float = 0.1
    n_leapfrog_steps: int = 10
    target_acceptance: float = 0.5
    tune: bool = True
    proposal_width: float = 1.0
    sweeps_per_update: int = 1
    tracked_sites: Optional[tuple[int, ...]] = None
    acf_max_lag: int = 1000
    jackknife_blocks: int = 20
    initial_mu: float = 0.0
    initial_phi: float = 0.5
    initial_sigma_eta2: float = 1.0
    output_dir: str = "."

    def initial_params(self) -> SvParams:
        return SvParams(mu=self.initial_mu, phi=self.initial_phi,
                        sigma_eta2=self.initial_sigma_eta2)

    def hmc_config(self) -> HmcConfig:
        return HmcConfig(step_size=self.step_size,
                         n_leapfrog_steps=self.n_leapfrog_steps,
                         target_acceptance=self.target_acceptance,
                         tune_during_burn_in=self.tune)

    def metropolis_config(self) -> MetropolisConfig:
        return MetropolisConfig(proposal_width=self.proposal_width,
                                sweeps_per_update=self.sweeps_per_update,
                                target_acceptance=self.target_acceptance,
                                tune_during_burn_in=self.tune)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def parse_tracked_sites(text: str) -> tuple[int, ...]:
    try:
        sites = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValueError(f"tracked sites must be comma-separated integers, "
                         f"got {text!r}") from None
    if not sites:
        raise ValueError("tracked sites list is empty")
    return sites


_CONFIG_PARSERS = {
    "seed": int,
    "sampler": str,
    "n_burn_in": int,
    "n_record": int,
    "thin": int,
    "step_size": float,
    "n_leapfrog_steps": int,
    "target_acceptance": float,
    "tune": _parse_bool,
    "proposal_width": float,
    "sweeps_per_update": int,
    "tracked_sites": parse_tracked_sites,
    "acf_max_lag": int,
    "jackknife_blocks": int,
    "initial_mu": float,
    "initial_phi": float,
    "initial_sigma_eta2": float,
    "output_dir": str,
}


def read_config_file(path) -> dict:
    """Parse flat `key = value` lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(),
                                 start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_PARSERS:
            raise ValueError(f"{path}: line {lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value.strip())
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return values


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, environment, and flags (in that order)."""
    merged = dataclasses.asdict(RunConfig())
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    env_outdir = os.environ.get("SVHMC_OUTPUT_DIR")
    if env_outdir:
        merged["output_dir"] = env_outdir
    for key in _CONFIG_PARSERS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    config = RunConfig(**merged)
    if config.sampler not in SAMPLERS:
        raise ValueError(f"sampler must be one of {SAMPLERS}, got {config.sampler!r}")
    return config


def resolve_cli_tracked_sites(config: RunConfig, n: int) -> tuple[int, ...]:
    """Default to site 100, falling back to ceil(n/2) with a warning."""
    if config.tracked_sites is not None:
        return config.tracked_sites
    if n >= 100:
        return (100,)
    fallback = math.ceil(n / 2)
    print(f"warning: site 100 exceeds series length {n}; tracking site {fallback}",
          file=sys.stderr)
    return (fallback,)


def format_measurement(value: float, error: float) -> str:
    """value(err) notation: error in units of the value's last digit.

    Two significant error digits when the leading digit is 1 or 2, else
    one, as in 0.978(7), -0.92(26), 540(60).
    """
    if not (math.isfinite(value) and math.isfinite(error)) or error <= 0.0:
        return f"{value:.6g}(nan)" if not math.isfinite(error) or error < 0 \
            else f"{value:.6g}(0)"
    exponent = math.floor(math.log10(error))
    leading = int(error / 10.0 ** exponent)
    digits = 2 if leading in (1, 2) else 1
    decimals = digits - 1 - exponent
    if decimals <= 0:
        scale = 10.0 ** (-decimals)
        rounded = round(value / scale) * scale
        return f"{rounded:.0f}({round(error / scale) * int(scale)})"
    return f"{value:.{decimals}f}({round(error * 10.0 ** decimals)})"


def _summaries_for(traces: list[ChainTrace], config: RunConfig) -> list[ChainSummary]:
    summaries = []
    for trace in traces:
        n_blocks = min(config.jackknife_blocks, len(trace))
        try:
            summaries.append(summarize(trace, n_blocks=n_blocks,
                                       max_lag=config.acf_max_lag))
        except (DegenerateTraceError, InsufficientLagsError):
            summaries.append(ChainSummary(trace.name,
                                          float(np.mean(trace.values)),
                                          float(np.std(trace.values)),
                                          math.nan, math.nan))
    return summaries


def _write_table(path, header: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows
              else len(header[i]) for i in range(len(header))]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
        fh.write("\n")
        for row in rows:
            fh.write("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
            fh.write("\n")


def _write_summary(path, summaries: list[ChainSummary]) -> None:
    rows = [[s.name, f"{s.mean:.6g}", f"{s.std_dev:.6g}", f"{s.tau_int:.6g}",
             f"{s.tau_int_error:.6g}"] for s in summaries]
    _write_table(path, ["quantity", "mean", "std_dev", "tau_int", "tau_int_err"],
                 rows)


def _acf_columns(traces: list[ChainTrace], max_lag: int) -> tuple:
    lags = np.arange(max_lag + 1)
    columns = {}
    for trace in traces:
        try:
            columns[trace.name] = acf(trace, max_lag)
        except DegenerateTraceError:
            columns[trace.name] = np.full(max_lag + 1, math.nan)
    return lags, columns


def _write_acf_csv(path, lags, columns: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(["lag"] + [f"acf_{name}" for name in columns]))
        fh.write("\n")
        series = list(columns.values())
        for i, lag in enumerate(lags):
            fh.write(",".join([str(int(lag))] + [repr(float(col[i]))
                                                 for col in series]))
            fh.write("\n")


def _write_meta(path, pairs: list[tuple[str, object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in pairs:
            fh.write(f"{key} = {value}\n")


def _mean_exp_neg_delta_h(result: ChainResult) -> float:
    if not result.delta_h.size:
        return math.nan
    with np.errstate(over="ignore"):
        return float(np.mean(np.exp(-result.delta_h)))


def _result_meta(prefix: str, result: ChainResult) -> list[tuple[str, object]]:
    pairs = [
        (f"{prefix}latent_acceptance", f"{result.latent_acceptance:.6g}"),
        (f"{prefix}burn_in_acceptance", f"{result.burn_in_acceptance:.6g}"),
        (f"{prefix}phi_acceptance", f"{result.phi_acceptance:.6g}"),
        (f"{prefix}divergences", result.divergences),
        (f"{prefix}phi_proposal_undefined", result.phi_undefined),
    ]
    if result.sampler == "hmc":
        pairs += [
            (f"{prefix}tuned_step_size", repr(result.final_step_size)),
            (f"{prefix}tuned_n_leapfrog_steps", result.final_n_leapfrog_steps),
            (f"{prefix}mean_exp_neg_delta_h",
             f"{_mean_exp_neg_delta_h(result):.6g}"),
        ]
    else:
        pairs.append((f"{prefix}tuned_proposal_width",
                      repr(result.final_proposal_width)))
    return pairs


def _config_meta(config: RunConfig, data_path, n: int,
                 sites: tuple[int, ...]) -> list[tuple[str, object]]:
    pairs: list[tuple[str, object]] = [
        ("svhmc_version", __version__),
        ("kernel_backend", _kernels.BACKEND),
        ("data", data_path),
        ("n_observations", n),
        ("tracked_sites", ",".join(str(s) for s in sites)),
    ]
    for field in dataclasses.fields(RunConfig):
        value = getattr(config, field.name)
        if field.name == "tracked_sites":
            continue
        pairs.append((field.name, value))
    return pairs


def _fit_one(returns, config: RunConfig, sampler: str,
             sites: tuple[int, ...]) -> ChainResult:
    rng = RngStream(config.seed)
    return run_chain(
        rng, returns,
        sampler=sampler,
        n_burn_in=config.n_burn_in,
        n_record=config.n_record,
        thin=config.thin,
        initial_params=config.initial_params(),
        hmc_config=config.hmc_config(),
        metropolis_config=config.metropolis_config(),
        tracked_sites=sites,
    )


def _result_columns(result: ChainResult) -> list[tuple[str, np.ndarray]]:
    return [(name, result.traces[name]) for name in result.trace_names()]


def cmd_simulate(args) -> int:
    if args.n < 2:
        raise ValueError(f"n must be >= 2, got {args.n}")
    params = SvParams(mu=args.mu, phi=args.phi, sigma_eta2=args.sigma_eta2)
    truth = generate_artificial(RngStream(args.seed), params, args.n)
    save_returns(truth.returns, args.out)
    sidecar = f"{args.out}.truth.json"
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"mu": params.mu, "phi": params.phi,
                   "sigma_eta2": params.sigma_eta2, "n": args.n,
                   "seed": args.seed, "h": truth.path.values.tolist()}, fh)
        fh.write("\n")
    print(f"wrote {args.out} ({args.n} returns) and {sidecar}")
    return 0


def cmd_ingest(args) -> int:
    returns = prices_to_returns(load_prices(args.prices))
    save_returns(returns, args.out)
    print(f"wrote {args.out} ({len(returns)} returns)")
    return 0


def cmd_fit(args) -> int:
    config = build_run_config(args)
    returns = load_returns(args.data)
    sites = resolve_cli_tracked_sites(config, len(returns))
    result = _fit_one(returns, config, config.sampler, sites)

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    trace_path = outdir / "trace.csv"
    save_trace(_result_columns(result), trace_path)

    if config.n_record >= 2:
        reloaded = load_traces(trace_path)
        summaries = _summaries_for(reloaded, config)
        max_lag = min(config.acf_max_lag, config.n_record - 1)
        lags, columns = _acf_columns(reloaded, max_lag)
    else:
        summaries = [ChainSummary(name, float(values[0]), 0.0, math.nan, math.nan)
                     for name, values in _result_columns(result)]
        lags, columns = np.arange(0), {name: np.empty(0)
                                       for name, _ in _result_columns(result)}
    _write_summary(outdir / "summary.txt", summaries)
    _write_acf_csv(outdir / "acf.csv", lags, columns)
    meta = _config_meta(config, args.data, len(returns), sites)
    meta += _result_meta("", result)
    _write_meta(outdir / "meta.txt", meta)
    print(f"wrote {outdir / 'summary.txt'}, {trace_path}, "
          f"{outdir / 'acf.csv'}, {outdir / 'meta.txt'}")
    return 0


def cmd_compare(args) -> int:
    config = build_run_config(args)
    for name in (args.sampler_a, args.sampler_b):
        if name not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}, got {name!r}")
    labels = ((f"{args.sampler_a}_a", f"{args.sampler_b}_b")
              if args.sampler_a == args.sampler_b
              else (args.sampler_a, args.sampler_b))
    returns = load_returns(args.data)
    sites = resolve_cli_tracked_sites(config, len(returns))
    if config.n_record < 2:
        raise ValueError("compare needs n_record >= 2")

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    sides = []
    for sampler, label in zip((args.sampler_a, args.sampler_b), labels):
        result = _fit_one(returns, config, sampler, sites)
        trace_path = outdir / f"trace_{label}.csv"
        save_trace(_result_columns(result), trace_path)
        reloaded = load_traces(trace_path)
        summaries = {s.name: s for s in _summaries_for(reloaded, config)}
        traces = {t.name: t for t in reloaded}
        sides.append((label, result, summaries, traces))

    header = ["quantity"]
    for label, _, _, _ in sides:
        header += [f"{label}_mean(std)", f"{label}_tau_int(err)"]
    rows = []
    for name in sides[0][2]:
        row = [name]
        for _, _, summaries, _ in sides:
            s = summaries[name]
            row.append(format_measurement(s.mean, s.std_dev))
            row.append(format_measurement(s.tau_int, s.tau_int_error))
        rows.append(row)
    _write_table(outdir / "comparison.txt", header, rows)

    site_trace = f"h_{sites[0]}"
    max_lag = min(config.acf_max_lag, config.n_record - 1)
    acf_columns = {}
    for label, _, _, traces in sides:
        try:
            acf_columns[label] = acf(traces[site_trace], max_lag)
        except DegenerateTraceError:
            acf_columns[label] = np.full(max_lag + 1, math.nan)
    _write_acf_csv(outdir / "acf_compare.csv", np.arange(max_lag + 1), acf_columns)

    meta = _config_meta(config, args.data, len(returns), sites)
    meta.append(("compared_samplers", f"{args.sampler_a},{args.sampler_b}"))
    for label, result, _, _ in sides:
        meta += _result_meta(f"{label}_", result)
    _write_meta(outdir / "meta.txt", meta)
    print(f"wrote {outdir / 'comparison.txt'}, {outdir / 'acf_compare.csv'}, "
          f"{outdir / 'meta.txt'}")
    return 0


def _add_run_flags(parser: argparse.ArgumentParser, with_sampler: bool) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    if with_sampler:
        parser.add_argument("--sampler", choices=SAMPLERS)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n-burn-in", type=int, dest="n_burn_in")
    parser.add_argument("--n-record", type=int, dest="n_record")
    parser.add_argument("--thin", type=int)
    parser.add_argument("--step-size", type=float, dest="step_size")
    parser.add_argument("--n-leapfrog-steps", type=int, dest="n_leapfrog_steps")
    parser.add_argument("--target-acceptance", type=float, dest="target_acceptance")
    parser.add_argument("--no-tune", dest="tune", action="store_const", const=False,
                        help="disable burn-in step-size/width tuning")
    parser.add_argument("--proposal-width", type=float, dest="proposal_width")
    parser.add_argument("--sweeps-per-update", type=int, dest="sweeps_per_update")
    parser.add_argument("--tracked-sites", type=parse_tracked_sites,
                        dest="tracked_sites", metavar="S1[,S2,...]")
    parser.add_argument("--acf-max-lag", type=int, dest="acf_max_lag")
    parser.add_argument("--jackknife-blocks", type=int, dest="jackknife_blocks")
    parser.add_argument("--initial-mu", type=float, dest="initial_mu")
    parser.add_argument("--initial-phi", type=float, dest="initial_phi")
    parser.add_argument("--initial-sigma-eta2", type=float,
                        dest="initial_sigma_eta2")
    parser.add_argument("--output-dir", dest="output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svhmc",
        description="Stochastic volatility estimation with HMC and "
                    "Metropolis latent samplers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate artificial returns")
    p_sim.add_argument("--phi", type=float, default=0.97)
    p_sim.add_argument("--sigma-eta2", type=float, default=0.05,
                       dest="sigma_eta2")
    p_sim.add_argument("--mu", type=float, default=-1.0)
    p_sim.add_argument("--n", type=int, default=2000)
    p_sim.add_argument("--seed", type=int, default=12345)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="run one chain on a returns CSV")
    p_fit.add_argument("data", help="returns CSV (from simulate or ingest)")
    _add_run_flags(p_fit, with_sampler=True)
    p_fit.set_defaults(func=cmd_fit)

    p_ing = sub.add_parser("ingest", help="price CSV to mean-adjusted returns")
    p_ing.add_argument("prices", help="CSV of `date,price` or `price` rows")
    p_ing.add_argument("--out", required=True)
    p_ing.set_defaults(func=cmd_ingest)

    p_cmp = sub.add_parser("compare", help="fit two samplers on the same data")
    p_cmp.add_argument("data", help="returns CSV (from simulate or ingest)")
    p_cmp.add_argument("--sampler-a", default="hmc", dest="sampler_a",
                       choices=SAMPLERS)
    p_cmp.add_argument("--sampler-b", default="metropolis", dest="sampler_b",
                       choices=SAMPLERS)
    _add_run_flags(p_cmp, with_sampler=False)
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                            format="svhmc: %(message)s")
    try:
        return args.func(args)
    except (SvhmcError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
