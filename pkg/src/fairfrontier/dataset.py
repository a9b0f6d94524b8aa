"""Ingest, filter, balance, encode, and split the two-year recidivism table."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

REQUIRED_COLUMNS: tuple[str, ...] = (
    "id",
    "age",
    "sex",
    "race",
    "priors_count",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "c_charge_degree",
    "is_recid",
    "two_year_recid",
)

ATTRIBUTES: tuple[str, ...] = ("race", "gender")

# Group value pairs per protected attribute; index 0 is group a0, index 1 is a1.
GROUP_LABELS: dict[str, tuple[str, str]] = {
    "race": ("african_american", "white"),
    "gender": ("female", "male"),
}

NUMERIC_FEATURES: tuple[str, ...] = (
    "age",
    "priors_count",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
)

_RACE_ALIASES = {"african-american": "african_american", "caucasian": "white"}
_CHARGE_ALIASES = {"f": "felony", "m": "misdemeanor", "o": "ordinary_traffic"}
_COUNT_FIELDS = ("priors_count", "juv_fel_count", "juv_misd_count", "juv_other_count")


class MissingColumnsError(ValueError):
    """The input table lacks one or more required columns."""


class GroupTooSmallError(ValueError):
    """A group has fewer eligible records than the requested sample size."""


class StratumTooSmallError(ValueError):
    """A (group, label) stratum is too small to split."""


def _slug(value: str) -> str:
    return value.strip().lower().replace("-", "_").replace(" ", "_")


def _normalize_race(value: str) -> str:
    key = value.strip().lower()
    return _RACE_ALIASES.get(key, _slug(value))


def _normalize_charge(value: str) -> str:
    key = value.strip().lower()
    if key in _CHARGE_ALIASES:
        return _CHARGE_ALIASES[key]
    if key.startswith("(mo") or key.startswith("mo"):
        return "municipal_ordinance"
    return _slug(value)


@dataclass(frozen=True)
class DefendantRecord:
    """One defendant row: demographics, criminal history, two-year outcome."""

    id: str
    age: int
    sex: str
    race: str
    priors_count: int
    juv_fel_count: int
    juv_misd_count: int
    juv_other_count: int
    charge_degree: str
    is_recid: int
    recidivated: int


@dataclass(frozen=True)
class RowReject:
    line: int
    reason: str


@dataclass(frozen=True)
class ParseResult:
    records: tuple[DefendantRecord, ...]
    rejects: tuple[RowReject, ...]


def parse_raw(csv_bytes: bytes) -> ParseResult:
    """Parse a comma-separated defendant table into records plus a rejects report.

    A missing required column is fatal; a malformed row goes to the rejects
    report with the offending line number, never silently dropped.
    """
    text = csv_bytes.decode("utf-8-sig")
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise MissingColumnsError(f"missing required columns: {', '.join(missing)}")

    records: list[DefendantRecord] = []
    rejects: list[RowReject] = []
    for row in reader:
        line = reader.line_num
        try:
            records.append(_parse_row(row))
        except ValueError as exc:
            rejects.append(RowReject(line=line, reason=str(exc)))
    return ParseResult(records=tuple(records), rejects=tuple(rejects))


def _parse_row(row: dict[str, str]) -> DefendantRecord:
    values: dict[str, str] = {}
    for col in REQUIRED_COLUMNS:
        raw = (row.get(col) or "").strip()
        if not raw:
            raise ValueError(f"empty field: {col}")
        values[col] = raw

    def as_int(col: str) -> int:
        try:
            return int(values[col])
        except ValueError:
            raise ValueError(f"non-integer field: {col}={values[col]!r}") from None

    age = as_int("age")
    if age < 0:
        raise ValueError(f"negative field: age={age}")
    counts = {}
    for col in _COUNT_FIELDS:
        n = as_int(col)
        if n < 0:
            raise ValueError(f"negative field: {col}={n}")
        counts[col] = n
    label = as_int("two_year_recid")
    if label not in (0, 1):
        raise ValueError(f"label out of range: two_year_recid={label}")
    is_recid = as_int("is_recid")
    if is_recid not in (-1, 0, 1):
        raise ValueError(f"field out of range: is_recid={is_recid}")

    return DefendantRecord(
        id=values["id"],
        age=age,
        sex=_slug(values["sex"]),
        race=_normalize_race(values["race"]),
        priors_count=counts["priors_count"],
        juv_fel_count=counts["juv_fel_count"],
        juv_misd_count=counts["juv_misd_count"],
        juv_other_count=counts["juv_other_count"],
        charge_degree=_normalize_charge(values["c_charge_degree"]),
        is_recid=is_recid,
        recidivated=label,
    )


@dataclass(frozen=True)
class FilterResult:
    records: tuple[DefendantRecord, ...]
    removed: dict[str, int]


def filter_records(records: list[DefendantRecord] | tuple[DefendantRecord, ...]) -> FilterResult:
    """Drop incomplete records, traffic/ordinance charges, and non-binary groups.

    Pure filter: returns the kept records plus per-rule removal counts.
    """
    removed = {
        "incomplete": 0,
        "traffic_or_ordinance": 0,
        "nonbinary_race": 0,
        "nonbinary_gender": 0,
        "underage": 0,
    }
    kept: list[DefendantRecord] = []
    for rec in records:
        if rec.is_recid == -1:
            removed["incomplete"] += 1
        elif rec.charge_degree not in ("felony", "misdemeanor"):
            removed["traffic_or_ordinance"] += 1
        elif rec.race not in GROUP_LABELS["race"]:
            removed["nonbinary_race"] += 1
        elif rec.sex not in GROUP_LABELS["gender"]:
            removed["nonbinary_gender"] += 1
        elif rec.age < 18:
            removed["underage"] += 1
        else:
            kept.append(rec)
    return FilterResult(records=tuple(kept), removed=removed)


def group_value(record: DefendantRecord, attribute: str) -> str:
    if attribute == "race":
        return record.race
    if attribute == "gender":
        return record.sex
    raise ValueError(f"unknown attribute: {attribute!r}")


@dataclass(frozen=True)
class BalancedDataset:
    """Equal-sized samples of the two groups under one protected attribute."""

    attribute: str
    records: tuple[DefendantRecord, ...]
    seed: int

    @property
    def group_labels(self) -> tuple[str, str]:
        return GROUP_LABELS[self.attribute]

    def group_of(self, record: DefendantRecord) -> int:
        return self.group_labels.index(group_value(record, self.attribute))

    def group_vector(self) -> np.ndarray:
        return np.array([self.group_of(r) for r in self.records], dtype=np.int64)

    def label_vector(self) -> np.ndarray:
        return np.array([r.recidivated for r in self.records], dtype=np.int64)


def build_balanced(
    records: list[DefendantRecord] | tuple[DefendantRecord, ...],
    attribute: str,
    per_group_n: int,
    seed: int,
) -> BalancedDataset:
    """Sample per_group_n records per group uniformly without replacement.

    Deterministic for a fixed seed. Raises GroupTooSmallError naming the
    deficient group when a group has too few eligible records.
    """
    if attribute not in ATTRIBUTES:
        raise ValueError(f"unknown attribute: {attribute!r}")
    if per_group_n < 1:
        raise ValueError("per_group_n must be >= 1")
    labels = GROUP_LABELS[attribute]
    pools: dict[str, list[DefendantRecord]] = {g: [] for g in labels}
    for rec in records:
        value = group_value(rec, attribute)
        if value in pools:
            pools[value].append(rec)

    rng = np.random.default_rng(seed)
    sampled: list[DefendantRecord] = []
    for group in labels:
        pool = pools[group]
        if len(pool) < per_group_n:
            raise GroupTooSmallError(
                f"group {group!r} has {len(pool)} eligible records, need {per_group_n}"
            )
        picks = rng.choice(len(pool), size=per_group_n, replace=False)
        sampled.extend(pool[i] for i in sorted(picks.tolist()))
    return BalancedDataset(attribute=attribute, records=tuple(sampled), seed=seed)


@dataclass(frozen=True, eq=False)
class Normalization:
    """Per-feature centering/scaling statistics from the fitting split."""

    feature_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray

    def apply(self, raw: np.ndarray) -> np.ndarray:
        return (raw - self.means) / self.stds


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Encoded dataset: scaled rows plus the raw values they came from."""

    rows: np.ndarray
    raw: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    normalization: Normalization
    dropped: tuple[str, ...]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.normalization.feature_names


def encode(dataset: BalancedDataset, fit_split: np.ndarray) -> FeatureMatrix:
    """One-hot categoricals, z-score numerics with statistics from fit_split rows.

    The protected attribute under analysis never enters the feature vector;
    it is exposed only through the groups vector. Constant numeric columns
    (zero stddev on the fitting split) are dropped and reported.
    """
    if not dataset.records:
        raise ValueError("cannot encode an empty dataset")
    fit_idx = np.asarray(fit_split, dtype=np.int64)
    if fit_idx.size == 0:
        raise ValueError("fit_split must be non-empty")

    numeric = list(NUMERIC_FEATURES)
    onehot: list[tuple[str, str, str]] = []  # (column name, field, matching value)
    if dataset.attribute != "gender":
        onehot += [("sex=female", "sex", "female"), ("sex=male", "sex", "male")]
    onehot += [
        ("charge_degree=felony", "charge_degree", "felony"),
        ("charge_degree=misdemeanor", "charge_degree", "misdemeanor"),
    ]

    n = len(dataset.records)
    num_block = np.empty((n, len(numeric)), dtype=np.float64)
    for j, name in enumerate(numeric):
        num_block[:, j] = [getattr(r, name) for r in dataset.records]
    cat_block = np.empty((n, len(onehot)), dtype=np.float64)
    for j, (_, fld, val) in enumerate(onehot):
        cat_block[:, j] = [1.0 if getattr(r, fld) == val else 0.0 for r in dataset.records]

    means = num_block[fit_idx].mean(axis=0)
    stds = num_block[fit_idx].std(axis=0)
    keep = stds > 0.0
    dropped = tuple(name for name, ok in zip(numeric, keep) if not ok)

    raw = np.hstack([num_block[:, keep], cat_block])
    names = tuple(np.array(numeric)[keep]) + tuple(name for name, _, _ in onehot)
    all_means = np.concatenate([means[keep], np.zeros(len(onehot))])
    all_stds = np.concatenate([stds[keep], np.ones(len(onehot))])
    norm = Normalization(feature_names=names, means=all_means, stds=all_stds)

    fm = FeatureMatrix(
        rows=norm.apply(raw),
        raw=raw,
        labels=dataset.label_vector(),
        groups=dataset.group_vector(),
        normalization=norm,
        dropped=dropped,
    )
    for arr in (fm.rows, fm.raw, fm.labels, fm.groups, norm.means, norm.stds):
        arr.setflags(write=False)
    return fm


def split(
    dataset: BalancedDataset, train_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified train/test index split by (group, label), deterministic per seed.

    Allocates round(train_fraction * n) training rows exactly, spreading them
    across strata by largest remainder so each stratum keeps at least one row
    on each side.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(dataset.records)
    groups = dataset.group_vector()
    labels = dataset.label_vector()

    strata: dict[tuple[int, int], list[int]] = {}
    for i in range(n):
        strata.setdefault((int(groups[i]), int(labels[i])), []).append(i)
    keys = sorted(strata)
    for key in keys:
        if len(strata[key]) < 2:
            raise StratumTooSmallError(
                f"stratum (group={key[0]}, label={key[1]}) has "
                f"{len(strata[key])} records, need at least 2"
            )

    total_train = int(round(train_fraction * n))
    sizes = [len(strata[k]) for k in keys]
    quotas = [int(np.floor(train_fraction * s)) for s in sizes]
    remainders = [train_fraction * s - q for s, q in zip(sizes, quotas)]
    order = sorted(range(len(keys)), key=lambda i: (-remainders[i], i))
    leftover = total_train - sum(quotas)
    for i in order:
        if leftover <= 0:
            break
        if quotas[i] < sizes[i] - 1:
            quotas[i] += 1
            leftover -= 1
    # Respect the one-per-side floor; rebalance if a stratum bottomed out.
    for i in range(len(keys)):
        while quotas[i] < 1:
            donor = max(range(len(keys)), key=lambda j: quotas[j])
            if quotas[donor] <= 1:
                raise StratumTooSmallError("strata too small for the requested split")
            quotas[donor] -= 1
            quotas[i] += 1
    if leftover > 0 or any(not 1 <= q <= s - 1 for q, s in zip(quotas, sizes)):
        raise StratumTooSmallError("strata too small for the requested split")

    rng = np.random.default_rng(seed)
    train: list[int] = []
    test: list[int] = []
    for key, quota in zip(keys, quotas):
        perm = rng.permutation(np.array(strata[key], dtype=np.int64))
        train.extend(perm[:quota].tolist())
        test.extend(perm[quota:].tolist())
    return np.array(sorted(train), dtype=np.int64), np.array(sorted(test), dtype=np.int64)
