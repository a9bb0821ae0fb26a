import json
import os

import numpy as np
import pandas as pd
import pytest
import yaml

from dataio import (
    ExperimentRun,
    Panel,
    Series,
    align,
    config_hash,
    dated_schedule,
    load_config,
    load_financials,
    load_flows,
    load_prices,
    load_sector_flows,
    parse_config,
    render_svg,
    resolve_data_path,
    run_experiment,
    summarize_sector_flows,
    synthetic_schedule,
    write_flows,
    write_prices,
    write_svg,
)
from model import RegimeKind
from utils import consts
from utils.errors import (
    ConfigError,
    MissingFixture,
    NonMonotoneDates,
    NonPositivePrice,
    ParseError,
    RenderError,
    StageError,
)

from .conftest import synthetic_config, write_market


def write(path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


# CSV loading


def test_load_prices(tmp_path):
    prices = load_prices(write(tmp_path / "p.csv", "date,close\n2020-01-02,100.5\n2020-01-03,101\n"))
    assert len(prices) == 2
    assert prices.dates[0] == np.datetime64("2020-01-02")
    np.testing.assert_allclose(prices.values, [100.5, 101.0])


def test_load_prices_errors(tmp_path):
    with pytest.raises(NonMonotoneDates):
        load_prices(write(tmp_path / "dup.csv", "date,close\n2020-01-02,1\n2020-01-02,2\n"))
    with pytest.raises(NonPositivePrice):
        load_prices(write(tmp_path / "neg.csv", "date,close\n2020-01-02,1\n2020-01-03,0\n"))
    with pytest.raises(ParseError) as e:
        load_prices(write(tmp_path / "bad.csv", "date,close\n2020-01-02,1\n2020-01-03,abc\n"))
    assert e.value.row == 3
    assert e.value.column == "close"
    with pytest.raises(ParseError):
        load_prices(write(tmp_path / "date.csv", "date,close\n02/01/2020,1\n"))
    with pytest.raises(MissingFixture):
        load_prices(str(tmp_path / "absent.csv"))


def test_canonical_price_file_round_trips(tmp_path):
    text = "date,close\n2020-01-02,100.5\n2020-01-03,101\n2020-01-06,99.875\n"
    prices = load_prices(write(tmp_path / "in.csv", text))
    out = write_prices(prices, str(tmp_path / "out.csv"))
    assert (tmp_path / "out.csv").read_bytes() == text.encode("utf-8")
    assert out == str(tmp_path / "out.csv")


def test_canonical_flow_file_round_trips(tmp_path):
    text = "date,fii_net,dii_net\n2020-01-02,-1250.5,0\n2020-01-03,310.25,0\n2020-01-06,4000,0\n"
    flows = load_flows(write(tmp_path / "in.csv", text))
    write_flows(flows.dates, flows.raw, np.zeros(len(flows.raw)), str(tmp_path / "out.csv"))
    assert (tmp_path / "out.csv").read_bytes() == text.encode("utf-8")


def test_load_flows(tmp_path):
    flows = load_flows(write(tmp_path / "f.csv", "date,fii_net,dii_net\n2020-01-02,1,1\n2020-01-03,-2,0\n"))
    np.testing.assert_allclose(flows.raw, [2, -2])
    np.testing.assert_allclose(flows.psi, [1, -1])


def test_load_flows_missing_column(tmp_path):
    with pytest.raises(ParseError) as e:
        load_flows(write(tmp_path / "f.csv", "date,fii_net\n2020-01-02,1\n"))
    assert e.value.column == "dii_net"
    assert "dii_net" in str(e.value)


def test_align_keeps_common_dates(tmp_path):
    prices = load_prices(write(tmp_path / "p.csv", "date,close\n2020-01-02,1\n2020-01-03,2\n2020-01-06,3\n"))
    text = "date,fii_net,dii_net\n2020-01-03,4,0\n2020-01-06,-2,0\n2020-01-07,1,0\n"
    flows = load_flows(write(tmp_path / "f.csv", text))
    p, f = align(prices, flows)
    np.testing.assert_allclose(p.values, [2, 3])
    np.testing.assert_array_equal(p.dates, f.dates)
    np.testing.assert_allclose(f.psi, [1.0, -0.5])


def test_load_financials(tmp_path):
    text = "company,current_assets,current_liabilities,operating_expenses\nA,10,4,3\nB,5,5,2\n"
    financials = load_financials(write(tmp_path / "fin.csv", text))
    assert [f.company for f in financials] == ["A", "B"]
    assert financials[0].current_assets == 10


def test_sector_flows(tmp_path):
    text = "date,cadence,bank,it\n2020-01-31,monthly,100,-50\n2020-02-29,monthly,-200,25\n2020-03-31,monthly,50,50\n"
    flows = load_sector_flows(write(tmp_path / "s.csv", text))
    assert flows.sectors == ["bank", "it"]
    np.testing.assert_allclose(flows.psi["bank"], [0.5, -1.0, 0.25])
    windows = [
        ("normal", np.datetime64("2020-01-01"), np.datetime64("2020-03-01")),
        ("shock", np.datetime64("2020-03-01"), None),
    ]
    summary = summarize_sector_flows(flows, windows)
    bank = summary[summary.sector == "bank"].set_index("regime")
    assert bank.loc["normal", "periods"] == 2
    assert bank.loc["normal", "mean_psi"] == pytest.approx(-0.25)
    assert bank.loc["shock", "mean_psi"] == pytest.approx(0.25)


def test_sector_flows_single_cadence(tmp_path):
    text = "date,cadence,bank\n2020-01-15,fortnightly,1\n2020-01-31,monthly,2\n"
    with pytest.raises(ParseError):
        load_sector_flows(write(tmp_path / "s.csv", text))


# Configuration


def test_parse_synthetic_config():
    config = parse_config(synthetic_config())
    assert not config.is_file_based
    assert not config.is_sweep
    schedule, specs = synthetic_schedule(config)
    assert schedule.total_length == 335
    assert specs[1].mu == pytest.approx(-0.237)
    assert config.confidence == consts.DEFAULT_CONFIDENCE


def test_segment_overrides_flow_law():
    mapping = synthetic_config()
    mapping["segments"][3] = {"kind": "recovery", "length": 100, "lambda": 0.6, "mu": 0.3, "sigma": 0.2}
    _, specs = synthetic_schedule(parse_config(mapping))
    assert (specs[3].mu, specs[3].sigma) == (0.3, 0.2)


@pytest.mark.parametrize(
    "change",
    [
        {"colour": "red"},
        {"phi": None},
        {"financials": [{"current_assets": 1, "current_liabilities": 1, "operating_expenses": 1}]},
        {"segments": [{"kind": "shock", "lambda": 0.4}]},
        {"segments": [{"kind": "shock", "length": 5, "start": "2020-03-02", "lambda": 0.4}]},
        {"segments": [{"kind": "crash", "length": 5, "lambda": 0.4}]},
        {"segments": [{"kind": "shock", "length": 5, "lambda": 1.4}]},
        {"segments": [{"kind": "shock", "length": 5, "lambda": 0.4, "speed": 2}]},
        {"segments": [{"kind": "shock", "start": "2020-03-02", "lambda": 0.4}]},
        {"segments": []},
        {"flow": {"source": "ftp"}},
        {"flow": {"source": "file", "prices": "p.csv"}},
        {"analysis": {"wavelets": True}},
        {"sweep": {"axis": "phi", "values": [1.0], "seeds": [0], "seed_count": 3}},
    ],
)
def test_invalid_configs(change):
    mapping = synthetic_config()
    mapping.update(change)
    if mapping.get("phi") is None:
        mapping.pop("phi")
    with pytest.raises(ConfigError):
        parse_config(mapping)


def test_sweep_config():
    mapping = {"name": "s", "seed": 10, "sweep": {"axis": "T_N", "values": [25, 50], "seed_count": 3}}
    config = parse_config(mapping)
    assert config.is_sweep
    assert config.sweep.seeds == (10, 11, 12)
    assert parse_config(mapping, seed=0).sweep.seeds == (0, 1, 2)
    assert config.sweep.recovery_end is None
    mapping["sweep"]["recovery_end"] = 225
    assert parse_config(mapping).sweep.recovery_end == 225


def test_financials_config():
    config = parse_config(
        synthetic_config(
            phi=None,
            financials=[
                {"current_assets": 10, "current_liabilities": 4, "operating_expenses": 3},
                {"current_assets": 5, "current_liabilities": 5, "operating_expenses": 2},
            ],
        )
    )
    # per-company phi (10 - 4) / 3 = 2.0 and 0.0
    assert ExperimentRun(config).phi == pytest.approx(1.0)


def test_config_hash():
    a = synthetic_config()
    b = dict(reversed(list(synthetic_config().items())))
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(synthetic_config(seed=4))
    assert parse_config(a, seed=9).config_hash() == config_hash({**a, "seed": 9})


def test_load_config(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(synthetic_config()), encoding="utf-8")
    config = load_config(str(path), seed=5, output=str(tmp_path / "out"))
    assert config.seed == 5
    assert config.output == str(tmp_path / "out")
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.yaml"))
    with pytest.raises(ConfigError):
        load_config(write(tmp_path / "bad.yaml", "name: [unclosed\n"))


def test_shipped_scenario_configs_parse():
    configs = os.path.join(os.path.dirname(__file__), os.pardir, "experiments", "configs")
    for name in ("phi_sweep", "ts_sweep", "tn_sweep", "lambda_sweep", "bank", "financial", "realty", "it"):
        config = load_config(os.path.join(configs, f"{name}.yaml"))
        assert config.name == name


def test_resolve_data_path(monkeypatch, tmp_path):
    monkeypatch.setenv(consts.DATA_DIR_ENV_VAR, "/data")
    assert resolve_data_path("x.csv") == "/data/x.csv"
    assert resolve_data_path("x.csv", str(tmp_path)) == str(tmp_path / "x.csv")
    assert resolve_data_path("/abs/x.csv") == "/abs/x.csv"
    monkeypatch.delenv(consts.DATA_DIR_ENV_VAR)
    assert resolve_data_path("x.csv") == "x.csv"


def test_dated_schedule_snaps_to_trading_days(tmp_path):
    config = parse_config(write_market(tmp_path))
    prices = load_prices(str(tmp_path / "prices.csv"))
    schedule, offset = dated_schedule(config, prices.dates)
    assert offset == 0
    assert schedule.total_length == len(prices) - 1
    shock = schedule.start_of(RegimeKind.SHOCK)
    assert prices.dates[shock] == np.datetime64("2020-03-02")
    assert schedule.length_of(RegimeKind.SHOCK) == 21


def test_dated_schedule_errors(tmp_path):
    mapping = write_market(tmp_path)
    mapping["segments"][4]["start"] = "2022-01-03"
    config = parse_config(mapping)
    prices = load_prices(str(tmp_path / "prices.csv"))
    with pytest.raises(ConfigError, match="segment 5"):
        dated_schedule(config, prices.dates)
    mapping["segments"][4]["start"] = "2020-03-03"
    with pytest.raises(ConfigError, match="not after"):
        dated_schedule(parse_config(mapping), prices.dates)


# Rendering


def test_render_svg_is_deterministic():
    x = np.arange(50.0)
    panels = [
        Panel(title="a & b", series=[Series("price", x, np.sqrt(x + 1)), Series("dash", x, x, dashed=True)]),
        Panel(title="points", series=[Series("p", np.array([1.0]), np.array([2.0]), markers=True)]),
    ]
    svg = render_svg(panels, title="chart")
    assert svg.startswith("<?xml")
    assert "<svg" in svg
    assert "a &amp; b" in svg
    assert "<dc:date>" not in svg
    assert svg == render_svg(panels, title="chart")


def test_render_svg_date_axis(tmp_path):
    days = np.arange(np.datetime64("2020-03-02"), np.datetime64("2020-04-01")).astype(float)
    panel = Panel(title="dated", series=[Series("close", days, np.linspace(1, 2, days.size))], x_dates=True)
    path = write_svg([panel], str(tmp_path / "dated.svg"))
    assert open(path, encoding="utf-8").read() == render_svg([panel])


def test_render_svg_needs_a_panel():
    with pytest.raises(RenderError):
        render_svg([])


# Runs


def test_synthetic_run_writes_artifacts(tmp_path):
    config = parse_config(synthetic_config(), output=str(tmp_path / "out"))
    bundle = run_experiment(config)
    names = {p.rsplit("/", 1)[-1] for p in bundle.artifacts}
    assert {"flows.csv", "simulated_path.csv", "overlay.svg", "shapes.csv", "imfs.csv", "sst.csv"} <= names
    assert "correlation.csv" not in names

    path = pd.read_csv(tmp_path / "out" / "simulated_path.csv")
    assert list(path.columns) == ["day", "simulated", "existing_model"]
    assert len(path) == 336
    assert path["simulated"].iloc[0] == pytest.approx(0.5)

    imfs = pd.read_csv(tmp_path / "out" / "imfs.csv")
    reconstructed = imfs.filter(like="imf_").sum(axis=1) + imfs["residue"]
    np.testing.assert_allclose(reconstructed, path["simulated"], rtol=1e-8)

    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["config_hash"] == config.config_hash()
    assert manifest["seed"] == 3
    assert "numpy" in manifest["versions"]
    assert "manifest.json" not in manifest["artifacts"]


def test_sweep_run_writes_one_path_file_per_value(tmp_path):
    mapping = {"name": "sweep", "sweep": {"axis": "phi", "values": [0.6, 1.2], "seed_count": 2}}
    bundle = run_experiment(parse_config(mapping), out=str(tmp_path))
    names = sorted(p.rsplit("/", 1)[-1] for p in bundle.artifacts)
    assert "path_phi=0.6.csv" in names
    assert "path_phi=1.2.csv" in names
    frame = pd.read_csv(tmp_path / "path_phi=0.6.csv")
    assert list(frame.columns) == ["day", "seed_0", "seed_1", "median"]
    flows = pd.read_csv(tmp_path / "flows.csv")
    np.testing.assert_array_equal(flows["phi=0.6"], flows["phi=1.2"])
    assert json.loads((tmp_path / "manifest.json").read_text())["seeds"] == [0, 1]


def test_file_run(tmp_path):
    config = parse_config(write_market(tmp_path), output=str(tmp_path / "out"))
    run = ExperimentRun(config)
    assert run.simulated.values[0] == pytest.approx(run.inputs.original.values[0])
    assert len(run.simulated) == len(run.inputs.original)
    assert -1 <= run.fit["simulated"].nu <= 1

    bundle = run_experiment(config)
    names = {p.rsplit("/", 1)[-1] for p in bundle.artifacts}
    assert {"correlation.csv", "timescale.csv", "sst.svg", "imfs.svg"} <= names
    table = pd.read_csv(tmp_path / "out" / "timescale.csv")
    assert list(table.columns) == ["imf", "tau", "tau_count", "nu", "p", "log10_p", "significant", "dominant"]
    assert table["dominant"].sum() <= 1
    path = pd.read_csv(tmp_path / "out" / "simulated_path.csv")
    assert list(path.columns) == ["date", "original", "simulated", "existing_model"]
    assert path["date"].iloc[0] == "2019-07-01"


def test_runs_are_byte_identical(tmp_path):
    mapping = write_market(tmp_path)
    first = run_experiment(parse_config(mapping), out=str(tmp_path / "a"))
    second = run_experiment(parse_config(mapping), out=str(tmp_path / "b"))
    names = sorted(p.rsplit("/", 1)[-1] for p in first.artifacts)
    assert names == sorted(p.rsplit("/", 1)[-1] for p in second.artifacts)
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()


def test_missing_data_is_tagged_with_stage(tmp_path):
    mapping = write_market(tmp_path)
    mapping["flow"]["prices"] = str(tmp_path / "absent.csv")
    run = ExperimentRun(parse_config(mapping))
    with pytest.raises(StageError) as e:
        _ = run.simulated
    assert e.value.stage == "load"
    assert isinstance(e.value.cause, MissingFixture)
    assert str(e.value).startswith("load: ")


def test_correlation_needs_observed_prices(tmp_path):
    run = ExperimentRun(parse_config(synthetic_config()))
    with pytest.raises(StageError, match="correlate"):
        run.write_correlation(str(tmp_path))
