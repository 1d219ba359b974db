"""Turn simulator CSV artifacts into figures.

This package never runs the simulator: its only input contract is the CSV
column schema, one figure kind per schema.

  dynamics   t, fidelity_initial, eof     (optional second CSV: t, eof_analytic)
  disorder   kind, level_E, n, mean_eof, std, sem, scenario
  storage    t, fidelity_initial, fidelity_reference, eof
  async      delay_fraction, eof

Data series are plotted exactly as read, in file order, with no resampling.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """Input CSV does not match the expected column schema."""


REQUIRED_COLUMNS = {
    "dynamics": ("t", "fidelity_initial", "eof"),
    "disorder": ("kind", "level_E", "n", "mean_eof", "std", "sem", "scenario"),
    "storage": ("t", "fidelity_initial", "fidelity_reference", "eof"),
    "async": ("delay_fraction", "eof"),
}

KINDS = tuple(REQUIRED_COLUMNS)


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    output: str
    xlabel: str | None = None
    ylabel: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def load_columns(path: str | Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read one CSV into named columns; numeric where every entry parses."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        rows = list(reader)
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {missing}; found columns {header}"
        )
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    columns: dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        values = [row[i] for row in rows]
        try:
            columns[name] = np.array([float(v) for v in values])
        except ValueError:
            columns[name] = np.array(values)
    return columns


def _plot_dynamics(ax, spec: FigureSpec) -> None:
    data = load_columns(spec.inputs[0], REQUIRED_COLUMNS["dynamics"])
    ax.plot(data["t"], data["fidelity_initial"], color="firebrick", label="fidelity_initial")
    ax.plot(data["t"], data["eof"], color="seagreen", label="eof")
    if len(spec.inputs) > 1:
        overlay = load_columns(spec.inputs[1], ("t", "eof_analytic"))
        ax.plot(
            overlay["t"], overlay["eof_analytic"],
            color="black", linestyle="--", label="eof_analytic",
        )
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "fidelity / EoF")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(loc="center left")


def _plot_storage(ax, spec: FigureSpec) -> None:
    data = load_columns(spec.inputs[0], REQUIRED_COLUMNS["storage"])
    ax.plot(data["t"], data["fidelity_initial"], color="firebrick", label="fidelity_initial")
    ax.plot(data["t"], data["fidelity_reference"], color="black", label="fidelity_reference")
    ax.plot(data["t"], data["eof"], color="seagreen", label="eof")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "fidelity / EoF")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(loc="center left")


def _plot_async(ax, spec: FigureSpec) -> None:
    data = load_columns(spec.inputs[0], REQUIRED_COLUMNS["async"])
    ax.plot(data["delay_fraction"], data["eof"], marker="o", color="royalblue", label="eof")
    ax.set_xlabel(spec.xlabel or "delay fraction of t_M")
    ax.set_ylabel(spec.ylabel or "EoF at t_M")


def _plot_disorder(fig, spec: FigureSpec) -> None:
    merged: dict[str, list[np.ndarray]] = {}
    for path in spec.inputs:
        data = load_columns(path, REQUIRED_COLUMNS["disorder"])
        for name, col in data.items():
            merged.setdefault(name, []).append(col)
    data = {name: np.concatenate(cols) for name, cols in merged.items()}
    chain_kinds = list(dict.fromkeys(data["kind"]))  # first-seen order
    axes = fig.subplots(1, len(chain_kinds), squeeze=False)[0]
    palette = {1: "royalblue", 2: "black"}
    shade = {1: "lightsteelblue", 2: "silver"}
    for ax, chain_kind in zip(axes, chain_kinds):
        for scenario in (1, 2):
            mask = (data["kind"] == chain_kind) & (data["scenario"] == scenario)
            if not np.any(mask):
                continue
            levels = data["level_E"][mask]
            mean = data["mean_eof"][mask]
            std = data["std"][mask]
            sem = data["sem"][mask]
            color = palette[scenario]
            ax.fill_between(levels, mean - std, mean + std, color=shade[scenario], alpha=0.5)
            ax.errorbar(levels, mean, yerr=sem, color=color, capsize=3, linestyle="none")
            ax.plot(levels, mean, color=color, marker="o", label=f"scenario {scenario}")
        ax.set_title(chain_kind)
        ax.set_xlabel(spec.xlabel or "disorder level E")
        ax.set_ylabel(spec.ylabel or "mean EoF")
        ax.set_ylim(-0.02, 1.05)
        ax.legend()


def render(spec: FigureSpec):
    """Render one figure and write it to ``spec.output``; returns the Figure.

    Inputs are opened read-only; nothing is written unless every input parses
    against the kind's schema.
    """
    fig = plt.figure(figsize=(7.0, 4.2))
    try:
        if spec.kind == "disorder":
            _plot_disorder(fig, spec)
        else:
            ax = fig.add_subplot(111)
            {"dynamics": _plot_dynamics, "storage": _plot_storage, "async": _plot_async}[
                spec.kind
            ](ax, spec)
        fig.tight_layout()
        fig.savefig(spec.output)
    except Exception:
        plt.close(fig)
        raise
    return fig


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="chain-figures", description="Render a figure from simulator CSV artifacts."
    )
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output image path (png, pdf, svg)")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    args = parser.parse_args(argv)
    try:
        fig = render(
            FigureSpec(
                inputs=tuple(args.inputs),
                kind=args.kind,
                output=args.out,
                xlabel=args.xlabel,
                ylabel=args.ylabel,
            )
        )
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
