import hashlib

import numpy as np
import pytest

from chainfigures import FigureSpec, SchemaError, load_columns, render
from chainfigures.render import main

DYNAMICS_CSV = """t,fidelity_initial,eof
0,1,0
0.5,0.9,0.1
1,0.4,0.62
1.5,0.2,0.97
"""

ORACLE_CSV = """t,eof_analytic
0,0
0.75,0.5
1.5,0.99
"""

STORAGE_CSV = """t,fidelity_initial,fidelity_reference,eof
0,1,0.24,0
10,0.8,0.5,0.55
20,0.3,0.95,0.93
"""

ASYNC_CSV = """delay_fraction,eof
0,0.99
0.1,0.93
0.2,0.81
"""

DISORDER_CSV = """kind,level_E,n,mean_eof,std,sem,scenario
offdiagonal,0,20,0.99,0.001,0.0002,1
offdiagonal,0.25,20,0.8,0.1,0.02,1
offdiagonal,0.5,20,0.6,0.2,0.04,1
offdiagonal,0,20,0.995,0.001,0.0002,2
offdiagonal,0.25,20,0.93,0.05,0.01,2
offdiagonal,0.5,20,0.88,0.08,0.016,2
"""


@pytest.fixture
def workdir(tmp_path):
    files = {
        "dynamics.csv": DYNAMICS_CSV,
        "oracle.csv": ORACLE_CSV,
        "storage.csv": STORAGE_CSV,
        "async.csv": ASYNC_CSV,
        "disorder.csv": DISORDER_CSV,
    }
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    return tmp_path


def line_by_label(fig, label):
    for ax in fig.axes:
        for line in ax.lines:
            if line.get_label() == label:
                return line
    raise AssertionError(f"no line labelled {label!r}")


class TestRender:
    def test_dynamics_series_match_csv(self, workdir):
        out = workdir / "fig.png"
        fig = render(
            FigureSpec(
                inputs=(str(workdir / "dynamics.csv"), str(workdir / "oracle.csv")),
                kind="dynamics",
                output=str(out),
            )
        )
        assert out.exists()
        data = load_columns(workdir / "dynamics.csv", ("t",))
        for label in ("fidelity_initial", "eof"):
            line = line_by_label(fig, label)
            assert np.array_equal(line.get_xdata(), data["t"])
            assert np.array_equal(line.get_ydata(), data[label])
        overlay = load_columns(workdir / "oracle.csv", ("t",))
        dashed = line_by_label(fig, "eof_analytic")
        assert np.array_equal(dashed.get_ydata(), overlay["eof_analytic"])

    def test_storage_series_match_csv(self, workdir):
        out = workdir / "storage.pdf"
        fig = render(
            FigureSpec(inputs=(str(workdir / "storage.csv"),), kind="storage", output=str(out))
        )
        assert out.exists()
        data = load_columns(workdir / "storage.csv", ("t",))
        for label in ("fidelity_initial", "fidelity_reference", "eof"):
            assert np.array_equal(line_by_label(fig, label).get_ydata(), data[label])

    def test_async_series_match_csv(self, workdir):
        out = workdir / "async.png"
        fig = render(
            FigureSpec(inputs=(str(workdir / "async.csv"),), kind="async", output=str(out))
        )
        data = load_columns(workdir / "async.csv", ("delay_fraction",))
        line = line_by_label(fig, "eof")
        assert np.array_equal(line.get_xdata(), data["delay_fraction"])
        assert np.array_equal(line.get_ydata(), data["eof"])

    def test_disorder_scenario_curves(self, workdir):
        out = workdir / "disorder.png"
        fig = render(
            FigureSpec(inputs=(str(workdir / "disorder.csv"),), kind="disorder", output=str(out))
        )
        data = load_columns(workdir / "disorder.csv", ("level_E", "mean_eof", "scenario"))
        for scenario in (1, 2):
            mask = data["scenario"] == scenario
            line = line_by_label(fig, f"scenario {scenario}")
            assert np.array_equal(line.get_xdata(), data["level_E"][mask])
            assert np.array_equal(line.get_ydata(), data["mean_eof"][mask])

    def test_inputs_unmodified_and_replot_identical(self, workdir):
        path = workdir / "dynamics.csv"
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        spec = FigureSpec(inputs=(str(path),), kind="dynamics", output=str(workdir / "a.png"))
        first = render(spec)
        second = render(
            FigureSpec(inputs=(str(path),), kind="dynamics", output=str(workdir / "b.png"))
        )
        assert hashlib.sha256(path.read_bytes()).hexdigest() == digest
        for label in ("fidelity_initial", "eof"):
            assert np.array_equal(
                line_by_label(first, label).get_ydata(),
                line_by_label(second, label).get_ydata(),
            )


class TestErrors:
    def test_schema_mismatch_names_columns(self, workdir):
        with pytest.raises(SchemaError, match="fidelity_reference"):
            render(
                FigureSpec(
                    inputs=(str(workdir / "dynamics.csv"),),
                    kind="storage",
                    output=str(workdir / "x.png"),
                )
            )
        assert not (workdir / "x.png").exists()

    def test_empty_csv_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("t,fidelity_initial,eof\n")
        out = tmp_path / "nope.png"
        with pytest.raises(SchemaError, match="no data rows"):
            render(FigureSpec(inputs=(str(empty),), kind="dynamics", output=str(out)))
        assert not out.exists()

    def test_unknown_kind(self, workdir):
        with pytest.raises(SchemaError):
            FigureSpec(inputs=("x.csv",), kind="volume", output="y.png")

    def test_cli_exit_codes(self, workdir, capsys):
        ok = main(
            [
                "--in", str(workdir / "async.csv"),
                "--out", str(workdir / "cli.png"),
                "--kind", "async",
            ]
        )
        assert ok == 0
        bad = main(
            [
                "--in", str(workdir / "async.csv"),
                "--out", str(workdir / "cli2.png"),
                "--kind", "storage",
            ]
        )
        assert bad == 2
        assert "column" in capsys.readouterr().err
        assert not (workdir / "cli2.png").exists()
