"""File formats: incidence CSV, calibration files, experiment configs, reports."""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibration import CalibrationRecord
from .simulator import SUMMARY_COLUMNS, ExperimentConfig, SimulationSummary
from .survey import IncidenceMatrix, SurveyValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

DATA_DIR = Path(__file__).parent / "data"
WEED_SURVEY = DATA_DIR / "weed_survey.csv"
CONFIG_DIR = DATA_DIR / "configs"


class DataFormatError(ValueError):
    """Malformed input file."""


def parse_incidence_csv(path, header: bool | None = None) -> IncidenceMatrix:
    """Read a species x unit 0/1 table.

    The first column holds species labels. A header row of unit names is
    detected automatically (any non-0/1 cell after the first column) unless
    ``header`` forces the choice. Blank lines are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        try:
            rows = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
        except csv.Error as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    if header is None:
        header = any(cell.strip() not in ("0", "1") for cell in rows[0][1:])
    first_line = 1
    width = len(rows[0])
    if header:
        rows = rows[1:]
        first_line = 2
    if not rows:
        raise DataFormatError(f"{path}: no species rows")
    if width < 2:
        raise DataFormatError(f"{path}: need a label column and at least one unit column")
    labels, det = [], []
    for n, row in enumerate(rows, start=first_line):
        if len(row) != width:
            raise DataFormatError(f"{path}: line {n} has {len(row)} fields, expected {width}")
        label = row[0].strip()
        cells = []
        for col, cell in enumerate(row[1:], start=2):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise SurveyValidationError(
                    f"{path}: non-binary cell {cell!r} at line {n}, column {col} (species {label!r})"
                )
            cells.append(int(cell))
        if sum(cells) == 0:
            raise SurveyValidationError(f"{path}: species {label!r} at line {n} has no detections")
        if label in labels:
            raise SurveyValidationError(f"{path}: duplicate species label {label!r} at line {n}")
        labels.append(label)
        det.append(cells)
    return IncidenceMatrix(labels, np.array(det, dtype=np.uint8), T=width - 1)


def write_incidence_csv(m: IncidenceMatrix, path, unit_prefix: str = "unit") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["species"] + [f"{unit_prefix}{t + 1}" for t in range(m.T)])
        for lab, row in zip(m.species_labels, m.detections):
            w.writerow([lab] + [int(v) for v in row])


def _read_names(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip() and not line.startswith("#")]


def load_calibration(path) -> CalibrationRecord:
    """Load a calibration record from JSON.

    Either ``{"S_sub": 40, "S_sub_e": 35, "f_sub_0": 1}`` or
    ``{"truth": [...], "recorded": [...]}`` with species-name lists.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if not isinstance(d, dict):
        raise DataFormatError(f"{path}: expected a JSON object")
    try:
        if "truth" in d or "recorded" in d:
            return CalibrationRecord.from_lists(d["truth"], d["recorded"])
        return CalibrationRecord(int(d["S_sub"]), int(d["S_sub_e"]), int(d["f_sub_0"]))
    except KeyError as exc:
        raise DataFormatError(f"{path}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def calibration_from_name_files(truth_path, recorded_path) -> CalibrationRecord:
    return CalibrationRecord.from_lists(_read_names(truth_path), _read_names(recorded_path))


def load_experiment_config(path) -> ExperimentConfig:
    """Read an experiment config from TOML (``.toml``) or JSON."""
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as fh:
                d = tomllib.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    try:
        return ExperimentConfig.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: invalid config: {exc}") from exc


@dataclass
class ReportRow:
    method: str
    S_obs: float
    Q1: float
    Q2: float
    S_hat: float
    se_hat: float


REPORT_COLUMNS = (
    "method", "S_obs", "Q1", "Q2", "S_hat", "se_hat", "T",
    "S_sub", "S_sub_e", "f_sub_0", "e_bar", "r", "residual", "boundary_flag",
)


@dataclass
class AnalysisReport:
    """Observed row always; adjusted row when error rates were available."""

    T: int
    rows: list = field(default_factory=list)
    calibration: CalibrationRecord | None = None
    e_bar: float | None = None
    r: float | None = None
    residual: float | None = None
    boundary_flag: str | None = None

    def row(self, method: str) -> ReportRow:
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)

    def to_dict(self) -> dict:
        cal = self.calibration
        return {
            "T": self.T,
            "calibration": None if cal is None else {
                "S_sub": cal.S_sub, "S_sub_e": cal.S_sub_e, "f_sub_0": cal.f_sub_0,
            },
            "e_bar": self.e_bar,
            "r": self.r,
            "residual": self.residual,
            "boundary_flag": self.boundary_flag,
            "rows": [vars(row).copy() for row in self.rows],
        }

    def format_table(self) -> str:
        lines = []
        if self.e_bar is not None:
            lines.append(f"e_bar={self.e_bar:.2f} r={self.r:.2f} T={self.T}"
                         + (f" ({self.boundary_flag})" if self.boundary_flag else ""))
        else:
            lines.append(f"T={self.T}")
        lines.append(f"{'Method':<10}{'S_obs':>8}{'Q1':>8}{'Q2':>8}{'S_hat':>9}{'se_hat':>9}")
        for row in self.rows:
            lines.append(
                f"{row.method.capitalize():<10}{row.S_obs:>8.1f}{row.Q1:>8.1f}{row.Q2:>8.1f}"
                f"{row.S_hat:>9.1f}{row.se_hat:>9.2f}"
            )
        return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report_csv(report: AnalysisReport, path) -> None:
    cal = report.calibration
    shared = [
        report.T,
        None if cal is None else cal.S_sub,
        None if cal is None else cal.S_sub_e,
        None if cal is None else cal.f_sub_0,
        report.e_bar, report.r, report.residual, report.boundary_flag,
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for row in report.rows:
            w.writerow([_fmt(v) for v in
                        [row.method, row.S_obs, row.Q1, row.Q2, row.S_hat, row.se_hat] + shared])


def read_report_csv(path) -> AnalysisReport:
    with open(path, newline="", encoding="utf-8") as fh:
        records = list(csv.DictReader(fh))
    if not records:
        raise DataFormatError(f"{path}: no report rows")

    def opt(rec, key, conv):
        return conv(rec[key]) if rec[key] != "" else None

    first = records[0]
    cal = None
    if first["S_sub"] != "":
        cal = CalibrationRecord(int(first["S_sub"]), int(first["S_sub_e"]), int(first["f_sub_0"]))
    report = AnalysisReport(
        T=int(first["T"]),
        calibration=cal,
        e_bar=opt(first, "e_bar", float),
        r=opt(first, "r", float),
        residual=opt(first, "residual", float),
        boundary_flag=opt(first, "boundary_flag", str),
    )
    for rec in records:
        report.rows.append(ReportRow(
            rec["method"], float(rec["S_obs"]), float(rec["Q1"]), float(rec["Q2"]),
            float(rec["S_hat"]), float(rec["se_hat"]),
        ))
    return report


def write_report_json(report: AnalysisReport, path) -> None:
    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v
    d = report.to_dict()
    d["residual"] = clean(d["residual"])
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(d, fh, indent=2)
        fh.write("\n")


def write_summary_csv(summary: SimulationSummary, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in summary.rows:
        w.writerow([_fmt(v) for v in row.as_tuple()])


def format_summary(summary: SimulationSummary) -> str:
    head = (f"{'e_bar':>6}{'e_real':>8}{'e_hat':>8}  {'method':<9}{'S_obs':>7}{'Q1':>7}{'Q2':>7}"
            f"{'S_hat':>8}{'bias':>8}{'se':>7}{'se_hat':>8}{'rmse':>7}")
    lines = [head]
    for row in summary.rows:
        lines.append(
            f"{row.e_bar_target:>6.2f}{row.e_bar_realized:>8.3f}{row.e_hat_mean:>8.3f}  "
            f"{row.method:<9}{row.S_obs:>7.1f}{row.Q1:>7.1f}{row.Q2:>7.1f}{row.S_hat:>8.1f}"
            f"{row.bias:>8.1f}{row.se:>7.2f}{row.se_hat:>8.2f}{row.rmse:>7.2f}"
        )
    return "\n".join(lines)
