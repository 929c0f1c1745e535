"""Result-file ingestion, fold aggregation, and per-tag summaries.

Two input shapes are accepted.  Long CSV carries one row per
(dataset, model, fold) measurement and is aggregated by
:func:`aggregate_folds`; wide CSV carries one pre-aggregated row per dataset.
An :class:`ExperimentManifest` names the models, their metadata tags, the
metric direction, and the significance level.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import warnings
from dataclasses import dataclass
from statistics import fmean
from typing import Sequence

import numpy as np

from .errors import DroppedDatasetsWarning, IncompleteDesignError, ValidationError
from .procedure import NemenyiResult
from .ranks import AverageRanks, Direction, ModelId, PerformanceMatrix

LONG_HEADER = ("dataset", "model", "fold", "value")

# Plain decimal or scientific notation only; inf/nan, underscores, and
# locale separators are rejected.
_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def _parse_value(text: str, where: str) -> float:
    if not _NUMBER_RE.fullmatch(text):
        raise ValidationError(f"{where}: non-numeric value {text!r}")
    value = float(text)
    if not math.isfinite(value):
        raise ValidationError(f"{where}: value {text!r} overflows to non-finite")
    return value


def _rows(text: str) -> "csv.reader":
    return csv.reader(io.StringIO(text, newline=""))


def _is_blank(row: Sequence[str]) -> bool:
    return not row or all(cell.strip() == "" for cell in row)


@dataclass(frozen=True)
class FoldRecord:
    """One cross-validation fold score for one (dataset, model) pair."""

    dataset_id: str
    model_label: str
    fold_id: str
    metric_value: float

    def __post_init__(self):
        for name in ("dataset_id", "model_label", "fold_id"):
            v = getattr(self, name)
            if not isinstance(v, str) or not v:
                raise ValidationError(f"{name} must be a non-empty string, got {v!r}")
        if not math.isfinite(self.metric_value):
            raise ValidationError(f"metric_value must be finite, got {self.metric_value!r}")


@dataclass(frozen=True)
class ExperimentManifest:
    """Names the compared models and how to read their metric.

    ``models`` fixes the column order of every matrix built from this
    manifest; ``direction`` says whether larger metric values are better.
    """

    metric_name: str
    direction: Direction
    models: tuple
    alpha: float = 0.05

    def __post_init__(self):
        if not isinstance(self.metric_name, str) or not self.metric_name:
            raise ValidationError("metric_name must be a non-empty string")
        object.__setattr__(self, "direction", Direction.parse(self.direction))
        models = tuple(self.models)
        if not models:
            raise ValidationError("manifest must list at least one model")
        labels = [m.label for m in models]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValidationError(f"duplicate model label(s) in manifest: {', '.join(dupes)}")
        object.__setattr__(self, "models", models)
        if not (isinstance(self.alpha, float) and 0.0 < self.alpha < 1.0):
            raise ValidationError(f"alpha must lie strictly in (0, 1), got {self.alpha!r}")

    @property
    def labels(self) -> tuple:
        return tuple(m.label for m in self.models)


def parse_manifest(text: str) -> ExperimentManifest:
    """Parse a manifest JSON document.

    Expected shape::

        {"metric_name": "accuracy", "direction": "maximize", "alpha": 0.05,
         "models": [{"label": "cart_clickstream",
                     "tags": {"algorithm": "cart", "feature_set": "clickstream"}}, ...]}

    ``alpha`` defaults to 0.05 and ``tags`` to an empty mapping.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"manifest is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError("manifest must be a JSON object")
    for key in ("metric_name", "direction", "models"):
        if key not in data:
            raise ValidationError(f"manifest is missing required key {key!r}")
    raw_models = data["models"]
    if not isinstance(raw_models, list):
        raise ValidationError("manifest 'models' must be a list")
    models = []
    for i, entry in enumerate(raw_models):
        if not isinstance(entry, dict) or "label" not in entry:
            raise ValidationError(f"manifest model #{i} must be an object with a 'label'")
        tags = entry.get("tags", {})
        if not isinstance(tags, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in tags.items()
        ):
            raise ValidationError(
                f"manifest model {entry['label']!r}: tags must map strings to strings"
            )
        models.append(ModelId(label=entry["label"], tags=tags))
    alpha = data.get("alpha", 0.05)
    if isinstance(alpha, int) and not isinstance(alpha, bool):
        alpha = float(alpha)
    return ExperimentManifest(
        metric_name=data["metric_name"],
        direction=data["direction"],
        models=tuple(models),
        alpha=alpha,
    )


def parse_long_csv(text: str) -> list:
    """Parse long-format CSV: header ``dataset,model,fold,value``.

    Blank rows are skipped.  Malformed rows, duplicate
    (dataset, model, fold) triples, and non-numeric values raise
    :class:`ValidationError` naming the offending line.
    """
    reader = _rows(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty document: expected header 'dataset,model,fold,value'") from None
    if tuple(h.strip() for h in header) != LONG_HEADER:
        raise ValidationError(
            f"line 1: header must be 'dataset,model,fold,value', got {','.join(header)!r}"
        )
    records = []
    seen = set()
    for row in reader:
        if _is_blank(row):
            continue
        line = reader.line_num
        if len(row) != 4:
            raise ValidationError(f"line {line}: expected 4 fields, got {len(row)}")
        dataset, model, fold, raw = (cell.strip() for cell in row)
        if not dataset or not model or not fold:
            raise ValidationError(f"line {line}: dataset, model, and fold must be non-empty")
        value = _parse_value(raw, f"line {line}")
        key = (dataset, model, fold)
        if key in seen:
            raise ValidationError(f"line {line}: duplicate record for {key!r}")
        seen.add(key)
        records.append(FoldRecord(dataset, model, fold, value))
    return records


def parse_wide_csv(text: str, direction: "str | Direction" = Direction.MAXIMIZE) -> PerformanceMatrix:
    """Parse wide-format CSV: header ``dataset,<model labels...>``.

    Every data row must carry one value per model column.  Dataset rows are
    sorted lexicographically so the matrix is independent of file row order.
    """
    reader = _rows(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty document: expected header 'dataset,<model labels...>'") from None
    fields = [h.strip() for h in header]
    if len(fields) < 2 or fields[0] != "dataset":
        raise ValidationError(
            f"line 1: header must be 'dataset,<model labels...>', got {','.join(header)!r}"
        )
    labels = fields[1:]
    if any(not l for l in labels):
        raise ValidationError("line 1: model column labels must be non-empty")
    if len(set(labels)) != len(labels):
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        raise ValidationError(f"line 1: duplicate model column(s): {', '.join(dupes)}")

    rows = {}
    for row in reader:
        if _is_blank(row):
            continue
        line = reader.line_num
        if len(row) != len(fields):
            raise ValidationError(f"line {line}: expected {len(fields)} fields, got {len(row)}")
        dataset = row[0].strip()
        if not dataset:
            raise ValidationError(f"line {line}: dataset id must be non-empty")
        if dataset in rows:
            raise ValidationError(f"line {line}: duplicate dataset id {dataset!r}")
        rows[dataset] = [
            _parse_value(cell.strip(), f"line {line}, column {labels[j]!r}")
            for j, cell in enumerate(row[1:])
        ]
    if not rows:
        raise ValidationError("no data rows")

    datasets = tuple(sorted(rows))
    values = np.array([rows[d] for d in datasets], dtype=float)
    return PerformanceMatrix(
        datasets=datasets,
        models=tuple(ModelId(label) for label in labels),
        values=values,
        direction=direction,
    )


def aggregate_folds(
    records: Sequence[FoldRecord],
    manifest: ExperimentManifest,
    *,
    drop_incomplete: bool = False,
) -> PerformanceMatrix:
    """Average fold scores into one matrix cell per (dataset, model) pair.

    Datasets are ordered lexicographically and models per the manifest.  By
    default the design must be complete: every pair needs at least one fold,
    otherwise :class:`IncompleteDesignError` lists every missing pair.  With
    ``drop_incomplete`` the offending datasets are dropped instead and a
    :class:`DroppedDatasetsWarning` names them.
    """
    if not records:
        raise ValidationError("no fold records to aggregate")
    labels = manifest.labels
    known = set(labels)
    cells = {}
    for rec in records:
        if rec.model_label not in known:
            raise ValidationError(
                f"record for dataset {rec.dataset_id!r} names model "
                f"{rec.model_label!r}, which is not in the manifest"
            )
        cells.setdefault((rec.dataset_id, rec.model_label), []).append(rec.metric_value)

    datasets = sorted({d for d, _ in cells})
    missing = [(d, l) for d in datasets for l in labels if (d, l) not in cells]
    if missing:
        if not drop_incomplete:
            raise IncompleteDesignError(missing)
        dropped = sorted({d for d, _ in missing})
        datasets = [d for d in datasets if d not in set(dropped)]
        if not datasets:
            raise ValidationError(
                "every dataset is missing at least one (dataset, model) pair; "
                "nothing remains after dropping incomplete datasets"
            )
        warnings.warn(
            DroppedDatasetsWarning(
                f"dropped {len(dropped)} incomplete dataset(s): {', '.join(dropped)}"
            ),
            stacklevel=2,
        )

    values = np.array(
        [[fmean(cells[(d, l)]) for l in labels] for d in datasets], dtype=float
    )
    return PerformanceMatrix(
        datasets=tuple(datasets),
        models=manifest.models,
        values=values,
        direction=manifest.direction,
    )


def apply_manifest(matrix: PerformanceMatrix, manifest: ExperimentManifest) -> PerformanceMatrix:
    """Reorder a matrix's columns to manifest order and attach model tags.

    The matrix's labels and the manifest's must be equal as sets.
    """
    have = set(matrix.labels)
    want = set(manifest.labels)
    if have != want:
        extra = sorted(have - want)
        absent = sorted(want - have)
        parts = []
        if extra:
            parts.append(f"not in manifest: {', '.join(extra)}")
        if absent:
            parts.append(f"missing from data: {', '.join(absent)}")
        raise ValidationError(f"model labels disagree with manifest ({'; '.join(parts)})")
    col = {label: j for j, label in enumerate(matrix.labels)}
    order = [col[label] for label in manifest.labels]
    return PerformanceMatrix(
        datasets=matrix.datasets,
        models=manifest.models,
        values=matrix.values[:, order],
        direction=manifest.direction,
    )


@dataclass(frozen=True)
class TagSummary:
    """Rank summary for one value of a tag (e.g. feature_set=clickstream)."""

    tag_value: str
    members: tuple
    mean_rank: float
    best_rank: float
    fully_separated: bool
    separated_from: tuple

    def to_dict(self) -> dict:
        return {
            "tag_value": self.tag_value,
            "members": list(self.members),
            "mean_rank": self.mean_rank,
            "best_rank": self.best_rank,
            "fully_separated": self.fully_separated,
            "separated_from": list(self.separated_from),
        }


def summarize_by_tag(
    ranks: AverageRanks,
    result: NemenyiResult,
    manifest: ExperimentManifest,
    tag_key: str,
) -> list:
    """Summarize average ranks per value of one tag dimension.

    ``ranks`` and ``result`` must be indexed in manifest model order.  A tag
    value counts as separated from another when every cross pair between
    their member models is significant; ``fully_separated`` means separated
    from every other tag value.  Summaries are sorted by (mean rank, tag
    value), best first.
    """
    models = manifest.models
    if len(ranks) != len(models):
        raise ValidationError(f"{len(ranks)} ranks for {len(models)} manifest models")
    groups = {}
    for j, m in enumerate(models):
        if tag_key not in m.tags:
            raise ValidationError(f"model {m.label!r} is missing tag {tag_key!r}")
        groups.setdefault(m.tags[tag_key], []).append(j)

    summaries = []
    for value, idx in groups.items():
        separated = tuple(
            sorted(
                other
                for other, other_idx in groups.items()
                if other != value
                and all(result.significant[i, j] for i in idx for j in other_idx)
            )
        )
        summaries.append(
            TagSummary(
                tag_value=value,
                members=tuple(models[j].label for j in idx),
                mean_rank=fmean(ranks[j] for j in idx),
                best_rank=min(ranks[j] for j in idx),
                fully_separated=len(separated) == len(groups) - 1,
                separated_from=separated,
            )
        )
    summaries.sort(key=lambda s: (s.mean_rank, s.tag_value))
    return summaries


def records_to_long_csv(records: Sequence[FoldRecord]) -> str:
    """Serialize fold records back to long CSV (inverse of parse_long_csv)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LONG_HEADER)
    for rec in records:
        writer.writerow(
            [rec.dataset_id, rec.model_label, rec.fold_id, repr(float(rec.metric_value))]
        )
    return buf.getvalue()


def matrix_to_wide_csv(matrix: PerformanceMatrix) -> str:
    """Serialize a matrix back to wide CSV (inverse of parse_wide_csv)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", *matrix.labels])
    for i, dataset in enumerate(matrix.datasets):
        writer.writerow([dataset, *(repr(float(v)) for v in matrix.values[i])])
    return buf.getvalue()
