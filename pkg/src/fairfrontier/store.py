"""Canonical artifact serialization, validating loader, and the selection log."""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import LogisticModel
from .dataset import DefendantRecord, Normalization
from .frontier import Candidate, FrontierPoint, FrontierSet, GridPoint
from .metrics import ConfusionCounts, GroupConfusion, SweepCurve, SweepPoint, disparity

SCHEMA_VERSION = 1
RECORDS_SCHEMA_VERSION = 1
SELECTION_VIEWS = ("matrix", "text")


class SchemaVersionError(ValueError):
    """The document's schema_version is not one this code understands."""


class ArtifactIntegrityError(ValueError):
    """A loaded artifact violates one of its invariants."""


class SelectionValidationError(ValueError):
    """A selection record does not match the served artifact."""

    def __init__(self, reasons: list[tuple[str, str]]):
        super().__init__("; ".join(f"{field}: {msg}" for field, msg in reasons))
        self.reasons = reasons


def _tkey(threshold: float) -> str:
    return repr(float(threshold))


def _canonical(doc) -> bytes:
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True, eq=False)
class ModelFamilyArtifact:
    """The serialized model family plus its precomputed evaluations."""

    schema_version: int
    metadata: dict
    models: dict[str, Candidate]
    normalization: Normalization
    sweep: SweepCurve
    frontiers: dict[str, dict[float, FrontierSet]]
    evaluations: dict[str, dict[float, GroupConfusion]]

    @property
    def attributes(self) -> list[str]:
        return sorted(self.frontiers)

    @property
    def thresholds(self) -> list[float]:
        return [float(t) for t in self.metadata["thresholds"]]

    def frontier(self, attribute: str, threshold: float) -> FrontierSet | None:
        return self.frontiers.get(attribute, {}).get(float(threshold))

    def evaluation(self, model_id: str, threshold: float) -> GroupConfusion | None:
        return self.evaluations.get(model_id, {}).get(float(threshold))


def _counts_doc(c: ConfusionCounts) -> dict:
    return {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}


def _counts_from(doc: dict) -> ConfusionCounts:
    return ConfusionCounts(tp=int(doc["tp"]), fp=int(doc["fp"]), fn=int(doc["fn"]), tn=int(doc["tn"]))


def _jsonsafe(value):
    if isinstance(value, dict):
        return {str(k): _jsonsafe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonsafe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonsafe(v) for v in value.tolist()]
    return value


def export_artifact(artifact: ModelFamilyArtifact) -> bytes:
    """Canonical document bytes: stable key order, repr float formatting.

    Identical artifacts export to identical bytes, and export(load(x)) == x.
    """
    metadata = dict(_jsonsafe(artifact.metadata))
    metadata["normalization"] = {
        "feature_names": list(artifact.normalization.feature_names),
        "means": _jsonsafe(artifact.normalization.means),
        "stds": _jsonsafe(artifact.normalization.stds),
    }
    models = []
    for model_id in sorted(artifact.models):
        cand = artifact.models[model_id]
        models.append(
            {
                "model_id": model_id,
                "alpha": float(cand.grid.alpha),
                "beta": float(cand.grid.beta),
                "coefficients": _jsonsafe(cand.model.coefficients),
                "intercept": float(cand.model.intercept),
                "l2_lambda": float(cand.model.l2_lambda),
                "iterations": int(cand.model.iterations),
                "final_gradient_norm": float(cand.model.final_gradient_norm),
            }
        )
    sweep = [
        {"threshold": float(p.threshold), **_counts_doc(p.counts)} for p in artifact.sweep.points
    ]
    frontiers = {
        attribute: {
            _tkey(t): {
                "threshold": float(t),
                "points": [
                    {"model_id": p.model_id, "errors": p.errors, "disparity": p.disparity}
                    for p in fs.points
                ],
            }
            for t, fs in by_threshold.items()
        }
        for attribute, by_threshold in artifact.frontiers.items()
    }
    evaluations = {
        model_id: {
            _tkey(t): {"a0": _counts_doc(gc.group_a0), "a1": _counts_doc(gc.group_a1)}
            for t, gc in by_threshold.items()
        }
        for model_id, by_threshold in artifact.evaluations.items()
    }
    return _canonical(
        {
            "schema_version": artifact.schema_version,
            "metadata": metadata,
            "models": models,
            "sweep": sweep,
            "frontiers": frontiers,
            "evaluations": evaluations,
        }
    )


def load_artifact(data: bytes) -> ModelFamilyArtifact:
    """Parse and fully re-validate an artifact document.

    Schema mismatches raise SchemaVersionError; any violated invariant
    raises ArtifactIntegrityError naming the invariant.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"artifact document is not parseable: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("artifact document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"schema_version {version!r}, expected {SCHEMA_VERSION}")

    metadata = dict(doc["metadata"])
    norm_doc = metadata.pop("normalization")
    normalization = Normalization(
        feature_names=tuple(norm_doc["feature_names"]),
        means=np.array(norm_doc["means"], dtype=np.float64),
        stds=np.array(norm_doc["stds"], dtype=np.float64),
    )
    normalization.means.setflags(write=False)
    normalization.stds.setflags(write=False)

    models: dict[str, Candidate] = {}
    for entry in doc["models"]:
        coefficients = np.array(entry["coefficients"], dtype=np.float64)
        coefficients.setflags(write=False)
        if coefficients.shape[0] != len(normalization.feature_names):
            raise ArtifactIntegrityError(
                f"coefficient length mismatch for model {entry['model_id']!r}"
            )
        models[entry["model_id"]] = Candidate(
            model_id=entry["model_id"],
            grid=GridPoint(alpha=float(entry["alpha"]), beta=float(entry["beta"])),
            model=LogisticModel(
                coefficients=coefficients,
                intercept=float(entry["intercept"]),
                normalization=normalization,
                l2_lambda=float(entry["l2_lambda"]),
                iterations=int(entry["iterations"]),
                final_gradient_norm=float(entry["final_gradient_norm"]),
            ),
        )

    evaluations: dict[str, dict[float, GroupConfusion]] = {}
    group_sizes = metadata.get("eval_group_sizes")
    attribute = metadata["attribute"]
    for model_id, by_threshold in doc["evaluations"].items():
        if model_id not in models:
            raise ArtifactIntegrityError(f"evaluation references unknown model {model_id!r}")
        evaluations[model_id] = {}
        for tkey, gc_doc in by_threshold.items():
            gc = GroupConfusion(
                attribute=attribute,
                group_a0=_counts_from(gc_doc["a0"]),
                group_a1=_counts_from(gc_doc["a1"]),
            )
            if group_sizes is not None and [gc.group_a0.total, gc.group_a1.total] != list(group_sizes):
                raise ArtifactIntegrityError(
                    f"group totals for model {model_id!r} at threshold {tkey} "
                    f"do not match eval_group_sizes"
                )
            evaluations[model_id][float(tkey)] = gc

    frontiers: dict[str, dict[float, FrontierSet]] = {}
    for attr, by_threshold in doc["frontiers"].items():
        frontiers[attr] = {}
        for tkey, fs_doc in by_threshold.items():
            threshold = float(fs_doc["threshold"])
            if _tkey(threshold) != tkey:
                raise ArtifactIntegrityError(f"frontier key {tkey!r} does not match its threshold")
            points = []
            for p_doc in fs_doc["points"]:
                model_id = p_doc["model_id"]
                if model_id not in models:
                    raise ArtifactIntegrityError(
                        f"frontier references unknown model {model_id!r}"
                    )
                gc = evaluations.get(model_id, {}).get(threshold)
                if gc is None:
                    raise ArtifactIntegrityError(
                        f"frontier point {model_id!r} at threshold {tkey} has no evaluation"
                    )
                point = FrontierPoint(
                    model_id=model_id,
                    grid=models[model_id].grid,
                    threshold=threshold,
                    errors=int(p_doc["errors"]),
                    disparity=int(p_doc["disparity"]),
                    group_confusion=gc,
                )
                if point.errors != gc.overall.errors:
                    raise ArtifactIntegrityError(
                        f"errors for {model_id!r} at threshold {tkey} disagree with counts"
                    )
                if point.disparity != disparity(gc):
                    raise ArtifactIntegrityError(
                        f"disparity for {model_id!r} at threshold {tkey} disagrees with counts"
                    )
                points.append(point)
            _check_pareto(points, tkey)
            frontiers[attr][threshold] = FrontierSet(
                attribute=attr, threshold=threshold, points=tuple(points)
            )

    thresholds = {float(t) for t in metadata.get("thresholds", [])}
    for model_id in models:
        covered = set(evaluations.get(model_id, {}))
        if covered != thresholds:
            raise ArtifactIntegrityError(
                f"model {model_id!r} lacks evaluations for the full threshold grid"
            )

    sweep_points = []
    for entry in doc["sweep"]:
        sweep_points.append(
            SweepPoint(threshold=float(entry["threshold"]), counts=_counts_from(entry))
        )
    _check_sweep(sweep_points)

    unweighted = metadata.get("unweighted_model_id")
    if unweighted is not None and unweighted not in models:
        raise ArtifactIntegrityError(f"unweighted_model_id {unweighted!r} is not a known model")

    return ModelFamilyArtifact(
        schema_version=version,
        metadata=metadata,
        models=models,
        normalization=normalization,
        sweep=SweepCurve(points=tuple(sweep_points)),
        frontiers=frontiers,
        evaluations=evaluations,
    )


def _check_pareto(points: list[FrontierPoint], tkey: str) -> None:
    # Deliberately a brute-force all-pairs check, independent of the skyline
    # construction that produced the set.
    for i, p in enumerate(points):
        if i > 0 and points[i - 1].disparity >= p.disparity:
            raise ArtifactIntegrityError(f"frontier at threshold {tkey} is not ascending in disparity")
        for q in points:
            if q is p:
                continue
            if (
                q.errors <= p.errors
                and q.disparity <= p.disparity
                and (q.errors < p.errors or q.disparity < p.disparity)
            ):
                raise ArtifactIntegrityError(
                    f"frontier at threshold {tkey} contains dominated point {p.model_id!r}"
                )


def _check_sweep(points: list[SweepPoint]) -> None:
    for prev, cur in zip(points, points[1:]):
        if not prev.threshold < cur.threshold:
            raise ArtifactIntegrityError("sweep thresholds are not strictly increasing")
        if cur.counts.fp > prev.counts.fp:
            raise ArtifactIntegrityError("sweep false positives increase with threshold")
        if cur.counts.fn < prev.counts.fn:
            raise ArtifactIntegrityError("sweep false negatives decrease with threshold")


# -- canonical dataset file ---------------------------------------------------


def export_records(records, provenance: dict) -> bytes:
    """Canonical document for filtered defendant records plus ingest provenance."""
    doc = {
        "schema_version": RECORDS_SCHEMA_VERSION,
        "kind": "recidivism_records",
        "provenance": _jsonsafe(provenance),
        "records": [
            {
                "id": r.id,
                "age": r.age,
                "sex": r.sex,
                "race": r.race,
                "priors_count": r.priors_count,
                "juv_fel_count": r.juv_fel_count,
                "juv_misd_count": r.juv_misd_count,
                "juv_other_count": r.juv_other_count,
                "charge_degree": r.charge_degree,
                "is_recid": r.is_recid,
                "recidivated": r.recidivated,
            }
            for r in records
        ],
    }
    return _canonical(doc)


def load_records(data: bytes) -> tuple[tuple[DefendantRecord, ...], dict]:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"dataset document is not parseable: {exc}") from exc
    version = doc.get("schema_version")
    if version != RECORDS_SCHEMA_VERSION:
        raise SchemaVersionError(f"schema_version {version!r}, expected {RECORDS_SCHEMA_VERSION}")
    if doc.get("kind") != "recidivism_records":
        raise ValueError(f"not a dataset document: kind={doc.get('kind')!r}")
    records = tuple(DefendantRecord(**entry) for entry in doc["records"])
    return records, doc.get("provenance", {})


# -- selection log ------------------------------------------------------------


@dataclass(frozen=True)
class SelectionRecord:
    """One model-selection event captured from the explorer."""

    timestamp: str
    session_id: str
    attribute: str | None
    threshold: float
    model_id: str
    view: str
    rationale: str | None = None


def validate_selection(record: SelectionRecord, artifact: ModelFamilyArtifact) -> None:
    reasons: list[tuple[str, str]] = []
    if record.model_id not in artifact.models:
        reasons.append(("model_id", f"unknown model {record.model_id!r}"))
    if float(record.threshold) not in artifact.thresholds:
        reasons.append(("threshold", f"{record.threshold} is not on the served grid"))
    if record.attribute is not None and record.attribute not in artifact.attributes:
        reasons.append(("attribute", f"unknown attribute {record.attribute!r}"))
    if record.view not in SELECTION_VIEWS:
        reasons.append(("view", f"view must be one of {SELECTION_VIEWS}"))
    if not record.session_id:
        reasons.append(("session_id", "must be non-empty"))
    if not record.timestamp:
        reasons.append(("timestamp", "must be non-empty"))
    if reasons:
        raise SelectionValidationError(reasons)


def _selection_line(record: SelectionRecord) -> bytes:
    return _canonical(
        {
            "timestamp": record.timestamp,
            "session_id": record.session_id,
            "attribute": record.attribute,
            "threshold": float(record.threshold),
            "model_id": record.model_id,
            "view": record.view,
            "rationale": record.rationale,
        }
    )


def append_selection(record: SelectionRecord, log_path: str | Path) -> int:
    """Append one record as one line, durably, and return its sequence number.

    Appends are serialized through an exclusive file lock, so concurrent
    writers (threads or processes) produce intact, non-interleaved lines and
    strictly increasing sequence numbers.
    """
    path = Path(log_path)
    line = _selection_line(record)
    with open(path, "a+b") as fh:
        fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
        try:
            fh.seek(0)
            sequence = sum(1 for _ in fh) + 1
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        finally:
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
    return sequence


def read_selections(log_path: str | Path) -> list[SelectionRecord]:
    """Parse every line of the log; malformed lines raise with their line number."""
    records: list[SelectionRecord] = []
    with open(log_path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                doc = json.loads(raw.decode("utf-8"))
                records.append(
                    SelectionRecord(
                        timestamp=str(doc["timestamp"]),
                        session_id=str(doc["session_id"]),
                        attribute=doc.get("attribute"),
                        threshold=float(doc["threshold"]),
                        model_id=str(doc["model_id"]),
                        view=str(doc["view"]),
                        rationale=doc.get("rationale"),
                    )
                )
            except (ValueError, KeyError) as exc:
                raise ValueError(f"invalid selection record at line {lineno}: {exc}") from exc
    return records
