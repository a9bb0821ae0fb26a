import json
import logging
import os
import platform
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import matplotlib
import numpy as np
import pandas as pd
import scipy

from emd import Imf, ImfSet, sift
from hilbert import count_timescale, mean_timescale
from metrics import CorrelationResult, DominantImf, correlate, dominant_imf, imf_correlations
from model import (
    PriceSeries,
    RecoveryShape,
    RegimeSchedule,
    antifragility,
    classify_recovery,
    sector_antifragility,
    simulate,
)
from sst import SstReport, classify_significance, normalize_series
from synthflow import SweepSummary, flow_table, gen_flow, run_sweep, spec_stream
from utils import consts
from utils.errors import ConfigError, NonOscillatory, NoSignificantImf, stage

from .config import ExperimentConfig, config_hash, dated_schedule, resolve_data_path, synthetic_schedule
from .csvfiles import (
    align,
    date_strings,
    load_financials,
    load_flows,
    load_prices,
    load_sector_flows,
    summarize_sector_flows,
    write_table,
)
from .plots import Panel, Series, write_svg

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationInputs:
    schedule: RegimeSchedule
    psi: np.ndarray
    p0: float
    dates: Optional[np.ndarray] = None
    original: Optional[PriceSeries] = None
    raw_flow: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ArtifactBundle:
    output_dir: str
    artifacts: tuple[str, ...]
    manifest: dict


def versions() -> dict:
    return {
        consts.PACKAGE_NAME: consts.PACKAGE_VERSION,
        "matplotlib": matplotlib.__version__,
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "python": platform.python_version(),
        "scipy": scipy.__version__,
    }


class ExperimentRun:
    """One config worked through the pipeline, each stage evaluated at most once.

    Errors raised inside a stage come out as ``StageError`` naming the stage.
    """

    def __init__(self, config: ExperimentConfig, data_dir: Optional[str] = None):
        self.config = config
        self.data_dir = data_dir

    def _path(self, path: str) -> str:
        return resolve_data_path(path, self.data_dir)

    @cached_property
    def phi(self) -> float:
        with stage("load"):
            if self.config.phi is not None:
                return float(self.config.phi)
            financials = self.config.financials
            if isinstance(financials, str):
                financials = load_financials(self._path(financials))
            phi = sector_antifragility([antifragility(f) for f in financials])
            logger.info("Sector antifragility %.4f from %d companies", phi, len(financials))
            return phi

    @cached_property
    def inputs(self) -> SimulationInputs:
        config = self.config
        if config.is_sweep:
            raise ConfigError("sweep configs have no single simulation input")
        if not config.is_file_based:
            with stage("synth"):
                schedule, specs = synthetic_schedule(config)
                psi = gen_flow(specs, spec_stream(config.seed, specs))
            return SimulationInputs(
                schedule=schedule,
                psi=psi,
                p0=consts.SYNTHETIC_P0 if config.p0 is None else float(config.p0),
            )
        with stage("load"):
            prices, flows = align(
                load_prices(self._path(config.flow.prices)), load_flows(self._path(config.flow.flows))
            )
            schedule, offset = dated_schedule(config, prices.dates)
        window = PriceSeries(values=prices.values[offset:], dates=prices.dates[offset:])
        # the flow of day t moves the price from t to t + 1
        return SimulationInputs(
            schedule=schedule,
            psi=flows.psi[offset:-1],
            p0=float(window.values[0]) if config.p0 is None else float(config.p0),
            dates=window.dates,
            original=window,
            raw_flow=flows.raw[offset:],
        )

    @cached_property
    def simulated(self) -> PriceSeries:
        inputs = self.inputs
        with stage("simulate"):
            return simulate(inputs.p0, inputs.psi, inputs.schedule, self.phi, dates=inputs.dates)

    @cached_property
    def existing_model(self) -> PriceSeries:
        inputs = self.inputs
        with stage("simulate"):
            return simulate(inputs.p0, inputs.psi, inputs.schedule, self.phi, sentiment=False, dates=inputs.dates)

    @cached_property
    def shape(self) -> RecoveryShape:
        with stage("classify"):
            return classify_recovery(self.simulated, self.inputs.schedule, self.config.shape)

    @cached_property
    def sweep(self) -> list[SweepSummary]:
        with stage("simulate"):
            return run_sweep(self.config.sweep, self.config.workers, self.config.shape)

    @property
    def target(self) -> PriceSeries:
        """The series the time-scale analysis runs on: observed prices when there are any."""
        original = self.inputs.original
        return self.simulated if original is None else original

    @cached_property
    def decomposition(self) -> tuple[ImfSet, ImfSet]:
        """IMFs of the unit-variance series and the same IMFs in price units."""
        values = self.target.values
        with stage("decompose"):
            normalized = sift(normalize_series(values), self.config.sift)
        scale, offset = values.std(), values.mean()
        in_price_units = ImfSet(
            imfs=tuple(Imf(index=imf.index, values=imf.values * scale) for imf in normalized.imfs),
            residue=normalized.residue * scale + offset,
        )
        logger.info("Decomposed %d samples into %d IMFs", values.size, len(normalized))
        return normalized, in_price_units

    @property
    def imfset(self) -> ImfSet:
        return self.decomposition[1]

    @cached_property
    def sst(self) -> SstReport:
        normalized, _ = self.decomposition
        with stage("sst"):
            return classify_significance(normalized, len(normalized.residue), self.config.confidence)

    @cached_property
    def timescales(self) -> list[tuple[float, float]]:
        """``(tau, tau_count)`` per IMF, NaN where the IMF does not oscillate."""
        rows = []
        with stage("timescale"):
            for imf in self.imfset.imfs:
                try:
                    rows.append((mean_timescale(imf).tau, count_timescale(imf)))
                except NonOscillatory as e:
                    logger.warning("IMF %d has no time scale: %s", imf.index, e)
                    rows.append((float("nan"), float("nan")))
        return rows

    @cached_property
    def imf_correlations(self) -> list[CorrelationResult]:
        with stage("correlate"):
            return imf_correlations(self.target, self.imfset)

    @cached_property
    def dominant(self) -> Optional[DominantImf]:
        with stage("correlate"):
            try:
                return dominant_imf(self.target, self.imfset, self.sst)
            except NoSignificantImf as e:
                logger.warning("No dominant IMF: %s", e)
                return None

    @cached_property
    def fit(self) -> dict[str, CorrelationResult]:
        """Observed against simulated prices, with and without sentiment."""
        original = self.inputs.original
        with stage("correlate"):
            if original is None:
                raise ConfigError("correlating simulated with observed prices needs a file flow source")
            return {
                "simulated": correlate(original, self.simulated),
                "existing_model": correlate(original, self.existing_model),
            }

    # Writers

    def _axis(self) -> tuple[str, list]:
        dates = self.inputs.dates
        if dates is None:
            return "day", list(range(self.inputs.schedule.total_length + 1))
        return "date", date_strings(dates)

    def _x(self) -> tuple[np.ndarray, bool]:
        dates = self.inputs.dates
        if dates is None:
            return np.arange(self.inputs.schedule.total_length + 1, dtype=float), False
        return dates.astype(int).astype(float), True

    def write_simulation(self, out: str) -> list[str]:
        if self.config.is_sweep:
            return self._write_sweep(out)
        axis, ticks = self._axis()
        columns = {axis: ticks}
        if self.inputs.original is not None:
            columns["original"] = self.inputs.original.values
        columns["simulated"] = self.simulated.values
        columns["existing_model"] = self.existing_model.values
        written = [write_table(pd.DataFrame(columns), os.path.join(out, consts.PATH_CSV_FILE_NAME))]

        x, x_dates = self._x()
        series = [Series("simulated", x, self.simulated.values)]
        if self.inputs.original is not None:
            series.insert(0, Series("original", x, self.inputs.original.values))
        series.append(Series("without sentiment", x, self.existing_model.values, dashed=True))
        panel = Panel(
            title=f"{self.config.name} (phi={self.phi:.3g})",
            series=series,
            x_label=axis,
            y_label="price",
            x_dates=x_dates,
        )
        written.append(write_svg([panel], os.path.join(out, consts.OVERLAY_SVG_FILE_NAME)))
        shapes = pd.DataFrame(
            [
                {
                    "name": self.config.name,
                    "phi": self.phi,
                    "shape": self.shape.value,
                    "terminal": self.simulated.terminal,
                }
            ]
        )
        written.append(write_table(shapes, os.path.join(out, consts.SHAPES_CSV_FILE_NAME)))
        return written

    def _write_sweep(self, out: str) -> list[str]:
        grid = self.config.sweep
        written, series, rows = [], [], []
        for summary in self.sweep:
            days = np.arange(summary.paths.shape[1])
            columns = {"day": days}
            for seed, path in zip(summary.seeds, summary.paths):
                columns[f"seed_{seed}"] = path
            columns["median"] = summary.median_path.values
            name = f"path_{grid.axis}={summary.value}.csv"
            written.append(write_table(pd.DataFrame(columns), os.path.join(out, name)))
            series.append(Series(f"{grid.axis}={summary.value}", days.astype(float), summary.median_path.values))
            rows.append(
                {
                    grid.axis: summary.value,
                    "shape": summary.shape.value,
                    "median_terminal": float(np.median(summary.terminal_prices)),
                    "mean_terminal": float(np.mean(summary.terminal_prices)),
                    "mean_recovery_rate": float(np.mean(summary.recovery_rates())),
                }
            )
        panel = Panel(
            title=f"{self.config.name}: median path per {grid.axis}", series=series, x_label="day", y_label="price"
        )
        written.append(write_svg([panel], os.path.join(out, consts.OVERLAY_SVG_FILE_NAME)))
        written.append(write_table(pd.DataFrame(rows), os.path.join(out, consts.SHAPES_CSV_FILE_NAME)))
        return written

    def write_flows(self, out: str) -> list[str]:
        path = os.path.join(out, consts.FLOW_CSV_FILE_NAME)
        if self.config.is_sweep:
            with stage("synth"):
                table = flow_table(self.config.sweep)
            frame = pd.DataFrame({"day": np.arange(len(next(iter(table.values())))), **table})
            return [write_table(frame, path)]
        axis, ticks = self._axis()
        columns = {axis: ticks[:-1], "psi": self.inputs.psi}
        if self.inputs.raw_flow is not None:
            columns["raw"] = self.inputs.raw_flow[:-1]
        columns["kind"] = [s.kind.value for s in self.inputs.schedule.segments for _ in range(s.length)]
        return [write_table(pd.DataFrame(columns), path)]

    def write_decomposition(self, out: str) -> list[str]:
        axis, ticks = self._axis()
        columns = {axis: ticks}
        for imf in self.imfset.imfs:
            columns[f"imf_{imf.index}"] = imf.values
        columns["residue"] = self.imfset.residue
        written = [write_table(pd.DataFrame(columns), os.path.join(out, consts.IMF_CSV_FILE_NAME))]

        x, x_dates = self._x()
        panels = [Panel(title="series", series=[Series("series", x, self.target.values)], x_dates=x_dates)]
        panels += [
            Panel(title=f"IMF{imf.index}", series=[Series(f"IMF{imf.index}", x, imf.values)], x_dates=x_dates)
            for imf in self.imfset.imfs
        ]
        panels.append(Panel(title="residue", series=[Series("residue", x, self.imfset.residue)], x_dates=x_dates))
        written.append(write_svg(panels, os.path.join(out, consts.IMF_SVG_FILE_NAME), title=self.config.name))
        return written

    def write_sst(self, out: str) -> list[str]:
        report = self.sst
        rows = []
        for stat, flag in zip(report.stats, report.significant):
            rows.append(
                {
                    "imf": stat.n,
                    "mean_period": stat.period,
                    "energy": stat.energy,
                    "ln_period": stat.x,
                    "ln_energy": stat.ln_energy,
                    "shifted_ln_energy": stat.y,
                    "significant": flag,
                    "excluded": stat.excluded,
                }
            )
        written = [write_table(pd.DataFrame(rows), os.path.join(out, consts.SST_CSV_FILE_NAME))]
        grid, lower, upper = report.spread
        points = [
            Series(
                f"IMF{s.n}",
                np.array([s.x]),
                np.array([s.y]),
                markers=True,
                color="#d62728" if flag else "#1f77b4",
            )
            for s, flag in zip(report.stats, report.significant)
        ]
        panel = Panel(
            title=f"{self.config.name}: {report.confidence:.0%} spread lines",
            series=[
                Series("-x", grid, -grid, color="#444444"),
                Series("upper", grid, upper, color="#7f7f7f", dashed=True),
                Series("lower", grid, lower, color="#7f7f7f", dashed=True),
                *points,
            ],
            x_label="ln mean period",
            y_label="shifted ln energy density",
        )
        written.append(write_svg([panel], os.path.join(out, consts.SST_SVG_FILE_NAME)))
        return written

    def write_timescale(self, out: str) -> list[str]:
        dominant = self.dominant.index if self.dominant is not None else None
        rows = []
        for imf, (tau, tau_count), result, flag in zip(
            self.imfset.imfs, self.timescales, self.imf_correlations, self.sst.significant
        ):
            rows.append(
                {
                    "imf": imf.index,
                    "tau": tau,
                    "tau_count": tau_count,
                    "nu": result.nu,
                    "p": result.p_formatted,
                    "log10_p": result.log10_p,
                    "significant": flag,
                    "dominant": imf.index == dominant,
                }
            )
        return [write_table(pd.DataFrame(rows), os.path.join(out, consts.TIMESCALE_CSV_FILE_NAME))]

    def write_correlation(self, out: str) -> list[str]:
        rows = [
            {
                "series": name,
                "nu": result.nu,
                "p": result.p_formatted,
                "log10_p": result.log10_p,
                "n": result.n,
            }
            for name, result in self.fit.items()
        ]
        return [write_table(pd.DataFrame(rows), os.path.join(out, consts.CORRELATION_CSV_FILE_NAME))]

    def write_dominant(self, out: str) -> list[str]:
        if self.dominant is None:
            return []
        x, x_dates = self._x()
        imf = self.imfset[self.dominant.index]
        series = [
            Series("original", x, self.target.values),
            Series(f"IMF{imf.index} + residue", x, imf.values + self.imfset.residue),
        ]
        if self.inputs.original is not None:
            series.append(Series("simulated", x, self.simulated.values, dashed=True))
        panel = Panel(
            title=f"{self.config.name}: dominant IMF{imf.index} (nu={self.dominant.correlation.nu:.3f})",
            series=series,
            x_dates=x_dates,
            y_label="price",
        )
        return [write_svg([panel], os.path.join(out, consts.DOMINANT_SVG_FILE_NAME))]

    def write_sector_flows(self, out: str) -> list[str]:
        if not self.config.sector_flows or self.inputs.dates is None:
            return []
        with stage("load"):
            flows = load_sector_flows(self._path(self.config.sector_flows))
        dates = self.inputs.dates
        windows = []
        for segment, start, end in self.inputs.schedule.bounds():
            if segment.length == 0:
                continue
            windows.append((segment.kind.value, dates[start], dates[end] if end < len(dates) - 1 else None))
        frame = summarize_sector_flows(flows, windows)
        return [write_table(frame, os.path.join(out, consts.SECTOR_FLOWS_CSV_FILE_NAME))]


def write_manifest(config: ExperimentConfig, out: str, artifacts: list[str]) -> dict:
    manifest = {
        "name": config.name,
        "config_hash": config_hash(config.source),
        "seed": config.seed,
        "versions": versions(),
        "artifacts": sorted(os.path.basename(a) for a in artifacts),
    }
    if config.sweep is not None:
        manifest["seeds"] = list(config.sweep.seeds)
    with open(os.path.join(out, consts.MANIFEST_FILE_NAME), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=4, sort_keys=True)
        f.write("\n")
    return manifest


def output_dir(config: ExperimentConfig, out: Optional[str] = None) -> str:
    path = out or config.output or os.path.join("out", config.name)
    os.makedirs(path, exist_ok=True)
    return path


def run_experiment(
    config: ExperimentConfig, out: Optional[str] = None, data_dir: Optional[str] = None
) -> ArtifactBundle:
    """Run every stage the config enables and write all artifacts plus a manifest."""
    out = output_dir(config, out)
    run = ExperimentRun(config, data_dir)
    artifacts = run.write_flows(out) + run.write_simulation(out)
    if not config.is_sweep:
        analysis = config.analysis
        if analysis.emd:
            artifacts += run.write_decomposition(out)
        if analysis.emd and analysis.sst:
            artifacts += run.write_sst(out)
        if analysis.emd and analysis.sst and (analysis.timescale or analysis.correlations):
            artifacts += run.write_timescale(out)
            artifacts += run.write_dominant(out)
        if analysis.correlations and config.is_file_based:
            artifacts += run.write_correlation(out)
        artifacts += run.write_sector_flows(out)
    manifest = write_manifest(config, out, artifacts)
    logger.info("Run '%s' wrote %d artifacts to '%s'", config.name, len(artifacts), out)
    return ArtifactBundle(output_dir=out, artifacts=tuple(artifacts), manifest=manifest)
