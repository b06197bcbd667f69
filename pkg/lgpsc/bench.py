"""Benchmark harness: fit every (dataset, model, grid cell, repeat), score, report.

Output directory layout:

- ``records.csv``: one line per fit, appended as fits finish, rewritten in
  canonical order at the end
- ``summary.csv`` / ``summary.txt``: reduced table plus per-model averages
- ``quantiles.txt``: min/q1/median/q3/max of NMI and ARI per dataset and model
- ``run.json``: run metadata and errors
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Any, Literal

import numpy as np
from scipy.linalg import LinAlgError

from .config import BenchmarkSpec, DatasetSpec, ModelConfig, ModelSpec, format_params, parse_params
from .data import LabeledDataset, generate, load_builtin, load_delimited
from .errors import DatasetError, LgpscError
from .kmeans import KMeansConfig
from .metrics import ari, nmi
from .models import get_model

logger = logging.getLogger(__name__)

Reduction = Literal["best", "mean"]

RECORD_HEADER = ("dataset", "model", "params", "repeat", "nmi", "ari", "seconds")
SUMMARY_HEADER = ("dataset", "model", "params", "nmi", "ari", "seconds", "count")
AVERAGE_ROW = "(average)"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def new_run_id() -> str:
    return f"{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S%fZ')}_{os.getpid()}"


def _write_json(path: Path, obj: dict):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
    os.replace(tmp, path)


def repeat_seed(seed: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ResultRecord:
    dataset: str
    model: str
    params: dict[str, Any]
    repeat: int
    nmi: float
    ari: float
    seconds: float
    cell: int = 0

    def __post_init__(self):
        if not 0.0 <= self.nmi <= 1.0:
            raise ValueError(f"nmi out of range: {self.nmi}")
        if not -1.0 <= self.ari <= 1.0:
            raise ValueError(f"ari out of range: {self.ari}")
        if self.seconds < 0:
            raise ValueError(f"negative wall time: {self.seconds}")

    @property
    def params_text(self) -> str:
        return format_params(self.params)

    def row(self) -> list[str]:
        return [
            self.dataset,
            self.model,
            self.params_text,
            str(self.repeat),
            f"{self.nmi:.6f}",
            f"{self.ari:.6f}",
            f"{self.seconds:.6f}",
        ]


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    model: str
    params: str
    nmi: float
    ari: float
    seconds: float
    count: int

    def row(self) -> list[str]:
        return [
            self.dataset,
            self.model,
            self.params,
            f"{self.nmi:.4f}",
            f"{self.ari:.4f}",
            f"{self.seconds:.4f}",
            str(self.count),
        ]


@dataclass(frozen=True)
class Summary:
    reduction: Reduction
    rows: tuple[SummaryRow, ...] = ()
    model_averages: tuple[SummaryRow, ...] = ()
    records: tuple[ResultRecord, ...] = ()
    trend_flags: tuple[str, ...] = ()

    @classmethod
    def empty(cls, reduction: Reduction = "best") -> Summary:
        return cls(reduction=reduction)


@dataclass
class FitError:
    dataset: str
    model: str | None
    params: str | None
    repeat: int | None
    error: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "model": self.model,
            "params": self.params,
            "repeat": self.repeat,
            "error": self.error,
        }


def load_dataset(ds: DatasetSpec, *, base_dir: Path | None = None) -> LabeledDataset:
    source = ds.source.strip()
    if source.startswith("builtin:"):
        loaded = load_builtin(source.split(":", 1)[1])
    elif source.startswith("gen:"):
        loaded = generate(source.split(":", 1)[1], ds.params)
    else:
        path = Path(source).expanduser()
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        loaded = load_delimited(path, ds.label_column, ds.delimiter, ds.has_header)
    return LabeledDataset(X=loaded.X, labels=loaded.labels, name=ds.name)


@dataclass
class BenchmarkRunner:
    """Runs a spec sequentially; records come out in canonical order."""

    spec: BenchmarkSpec
    output_dir: Path | None = None
    base_dir: Path | None = None
    run_id: str = field(default_factory=new_run_id)
    records: list[ResultRecord] = field(default_factory=list)
    errors: list[FitError] = field(default_factory=list)

    def __post_init__(self):
        self._started_at = _now_iso()
        self._records_fh: IO[str] | None = None
        self._records_writer: Any = None

    def run(self) -> list[ResultRecord]:
        self.records.clear()
        self.errors.clear()
        self._open_outputs()
        try:
            for ds_spec in self.spec.datasets:
                try:
                    dataset = load_dataset(ds_spec, base_dir=self.base_dir)
                except (LgpscError, OSError) as e:
                    logger.error(f"dataset {ds_spec.name!r} failed to load: {e}")
                    self.errors.append(FitError(ds_spec.name, None, None, None, str(e)))
                    continue
                logger.info(
                    f"dataset {dataset.name}: n={dataset.n} m={dataset.m} d={dataset.d_true}"
                )
                for model_spec in self.spec.models:
                    self._run_model(dataset, model_spec)
        finally:
            self._close_outputs()
        return list(self.records)

    def _run_model(self, dataset: LabeledDataset, model_spec: ModelSpec):
        fit = get_model(model_spec.id)
        for cell_idx, cell in enumerate(model_spec.cells()):
            params = {**model_spec.fixed, **cell}
            logger.info(f"{dataset.name}/{model_spec.id} cell {cell_idx}: {format_params(params)}")
            for repeat in range(self.spec.repeats):
                cfg = ModelConfig(
                    d=dataset.d_true,
                    kmeans=KMeansConfig(
                        d=dataset.d_true,
                        seed=repeat_seed(self.spec.seed, repeat),
                        restarts=self.spec.restarts,
                    ),
                    **params,
                )
                t0 = time.perf_counter()
                try:
                    labels = fit(dataset.X, cfg)
                except (LgpscError, LinAlgError) as e:
                    logger.warning(f"{dataset.name}/{model_spec.id} {format_params(params)} repeat {repeat}: {e}")
                    self.errors.append(
                        FitError(dataset.name, model_spec.id, format_params(params), repeat, str(e))
                    )
                    continue
                seconds = time.perf_counter() - t0
                record = ResultRecord(
                    dataset=dataset.name,
                    model=model_spec.id,
                    params=params,
                    repeat=repeat,
                    nmi=nmi(dataset.labels, labels),
                    ari=ari(dataset.labels, labels),
                    seconds=seconds,
                    cell=cell_idx,
                )
                self.records.append(record)
                self._append_record(record)

    def _open_outputs(self):
        if self.output_dir is None:
            return
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self._records_fh = open(self.output_dir / "records.csv", "w", newline="", encoding="utf-8")
        self._records_writer = csv.writer(self._records_fh, lineterminator="\n")
        self._records_writer.writerow(RECORD_HEADER)
        self._records_fh.flush()
        self.write_metadata()

    def _append_record(self, record: ResultRecord):
        if self._records_writer is None or self._records_fh is None:
            return
        try:
            self._records_writer.writerow(record.row())
            self._records_fh.flush()
        except OSError as e:
            logger.warning(f"cannot append record: {e}")

    def _close_outputs(self):
        if self._records_fh is not None:
            try:
                self._records_fh.close()
            except OSError:
                pass
            self._records_fh = None
            self._records_writer = None
        if self.output_dir is not None:
            self.write_metadata(finished_at=_now_iso())

    def write_metadata(self, finished_at: str | None = None):
        if self.output_dir is None:
            return
        meta = {
            "run_id": self.run_id,
            "started_at": self._started_at,
            "finished_at": finished_at,
            "seed": self.spec.seed,
            "repeats": self.spec.repeats,
            "spec": self.spec.model_dump(mode="json"),
            "record_count": len(self.records),
            "errors": [e.as_dict() for e in self.errors],
        }
        if finished_at is None:
            meta.pop("finished_at")
        _write_json(self.output_dir / "run.json", meta)


def run_benchmark(
    spec: BenchmarkSpec,
    *,
    output_dir: str | os.PathLike[str] | None = None,
    base_dir: str | os.PathLike[str] | None = None,
) -> list[ResultRecord]:
    runner = BenchmarkRunner(
        spec=spec,
        output_dir=Path(output_dir) if output_dir is not None else None,
        base_dir=Path(base_dir) if base_dir is not None else None,
    )
    return runner.run()


def _grouped(records: Iterable[ResultRecord], key) -> dict[Any, list[ResultRecord]]:
    groups: dict[Any, list[ResultRecord]] = {}
    for r in records:
        groups.setdefault(key(r), []).append(r)
    return groups


def _mean(values: Iterable[float]) -> float:
    return float(np.mean(list(values)))


def summarize(records: Iterable[ResultRecord], reduction: Reduction = "best") -> Summary:
    """Reduce records to one row per (dataset, model) plus per-model averages.

    ``best``: the grid cell with the highest mean NMI over repeats (first cell
    wins ties). ``mean``: the mean over every record of the pair.
    """
    recs = tuple(records)
    if not recs:
        raise LgpscError("cannot summarize an empty record set")
    if reduction not in ("best", "mean"):
        raise LgpscError(f"unknown reduction {reduction!r}")

    rows: list[SummaryRow] = []
    for (dataset, model), group in _grouped(recs, lambda r: (r.dataset, r.model)).items():
        if reduction == "best":
            cells = _grouped(group, lambda r: r.params_text)
            best_params, best_cell = max(
                cells.items(), key=lambda kv: _mean(r.nmi for r in kv[1])
            )
            chosen, params = best_cell, best_params
        else:
            chosen, params = group, "*"
        rows.append(
            SummaryRow(
                dataset=dataset,
                model=model,
                params=params,
                nmi=_mean(r.nmi for r in chosen),
                ari=_mean(r.ari for r in chosen),
                seconds=_mean(r.seconds for r in chosen),
                count=len(chosen),
            )
        )

    averages = tuple(
        SummaryRow(
            dataset=AVERAGE_ROW,
            model=model,
            params="*",
            nmi=_mean(r.nmi for r in group),
            ari=_mean(r.ari for r in group),
            seconds=_mean(r.seconds for r in group),
            count=len(group),
        )
        for model, group in _grouped(rows, lambda r: r.model).items()
    )
    return Summary(
        reduction=reduction,
        rows=tuple(rows),
        model_averages=averages,
        records=recs,
        trend_flags=tuple(trend_flags(rows)),
    )


def trend_flags(rows: Iterable[SummaryRow]) -> list[str]:
    """Datasets where multilevel falls below SC or SC-PCA more than 0.01 below it."""
    flags: list[str] = []
    by_dataset = _grouped(rows, lambda r: r.dataset)
    for dataset, group in by_dataset.items():
        nmi_by_model = {r.model: r.nmi for r in group}
        sc = nmi_by_model.get("sc")
        if sc is None:
            continue
        ml = nmi_by_model.get("multilevel")
        if ml is not None and ml < sc:
            flags.append(f"{dataset}: multilevel NMI {ml:.4f} < sc NMI {sc:.4f}")
        pca = nmi_by_model.get("scpca")
        if pca is not None and pca < sc - 0.01:
            flags.append(f"{dataset}: scpca NMI {pca:.4f} < sc NMI {sc:.4f} - 0.01")
    return flags


def format_table(header: Iterable[str], rows: Iterable[Iterable[str]]) -> str:
    head = list(header)
    body = [list(r) for r in rows]
    widths = [len(h) for h in head]
    for r in body:
        widths = [max(w, len(c)) for w, c in zip(widths, r)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(head, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_summary(summary: Summary) -> str:
    rows = [r.row() for r in summary.rows + summary.model_averages]
    text = f"reduction: {summary.reduction}\n\n" + format_table(SUMMARY_HEADER, rows)
    if summary.trend_flags:
        text += "\ntrend flags:\n" + "".join(f"  {f}\n" for f in summary.trend_flags)
    return text


QUANTILE_HEADER = ("metric", "dataset", "model", "min", "q1", "median", "q3", "max")


def quantile_rows(records: Iterable[ResultRecord]) -> list[list[str]]:
    recs = list(records)
    out: list[list[str]] = []
    for metric in ("nmi", "ari"):
        for (dataset, model), group in _grouped(recs, lambda r: (r.dataset, r.model)).items():
            values = np.asarray([getattr(r, metric) for r in group], dtype=np.float64)
            qs = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
            out.append([metric, dataset, model] + [f"{q:.4f}" for q in qs])
    return out


def _write_csv(path: Path, header: Iterable[str], rows: Iterable[Iterable[str]]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for r in rows:
            writer.writerow(list(r))


def emit_reports(summary: Summary, output_dir: str | os.PathLike[str]) -> list[Path]:
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise LgpscError(f"cannot create output directory {out}: {e.strerror or e}") from e

    records = _canonical(summary.records)
    paths = [out / "records.csv", out / "summary.csv", out / "summary.txt", out / "quantiles.txt"]
    try:
        _write_csv(paths[0], RECORD_HEADER, (r.row() for r in records))
        _write_csv(paths[1], SUMMARY_HEADER, (r.row() for r in summary.rows + summary.model_averages))
        paths[2].write_text(render_summary(summary), encoding="utf-8")
        paths[3].write_text(format_table(QUANTILE_HEADER, quantile_rows(records)), encoding="utf-8")
    except OSError as e:
        raise LgpscError(f"cannot write reports to {out}: {e.strerror or e}") from e
    logger.info(f"wrote {len(records)} records and summary to {out}")
    return paths


def _canonical(records: Iterable[ResultRecord]) -> list[ResultRecord]:
    """Sort by dataset, model (first-appearance order), grid cell, repeat."""
    recs = list(records)
    ds_rank: dict[str, int] = {}
    model_rank: dict[str, int] = {}
    for r in recs:
        ds_rank.setdefault(r.dataset, len(ds_rank))
        model_rank.setdefault(r.model, len(model_rank))
    return sorted(recs, key=lambda r: (ds_rank[r.dataset], model_rank[r.model], r.cell, r.repeat))


def read_records(path: str | os.PathLike[str]) -> list[ResultRecord]:
    p = Path(path)
    try:
        fh = open(p, newline="", encoding="utf-8")
    except OSError as e:
        raise DatasetError(f"cannot open: {e.strerror or e}", path=str(p)) from e
    records: list[ResultRecord] = []
    cell_ids: dict[tuple[str, str], dict[str, int]] = {}
    with fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if lineno == 1:
                if tuple(fields) != RECORD_HEADER:
                    raise DatasetError(f"unexpected header {fields}", path=str(p), line=lineno)
                continue
            if not fields:
                continue
            if len(fields) != len(RECORD_HEADER):
                raise DatasetError(f"expected {len(RECORD_HEADER)} fields", path=str(p), line=lineno)
            dataset, model, params, repeat, nmi_s, ari_s, sec_s = fields
            cells = cell_ids.setdefault((dataset, model), {})
            try:
                records.append(
                    ResultRecord(
                        dataset=dataset,
                        model=model,
                        params=parse_params(params),
                        repeat=int(repeat),
                        nmi=float(nmi_s),
                        ari=float(ari_s),
                        seconds=float(sec_s),
                        cell=cells.setdefault(params, len(cells)),
                    )
                )
            except ValueError as e:
                raise DatasetError(str(e), path=str(p), line=lineno) from None
    return records
