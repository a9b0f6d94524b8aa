import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairfrontier.dataset import (
    DefendantRecord,
    GroupTooSmallError,
    MissingColumnsError,
    StratumTooSmallError,
    build_balanced,
    encode,
    filter_records,
    parse_raw,
    split,
)

HEADER = (
    "id,age,sex,race,priors_count,juv_fel_count,juv_misd_count,juv_other_count,"
    "c_charge_degree,is_recid,two_year_recid"
)


def csv_row(**overrides) -> str:
    fields = {
        "id": "1",
        "age": "30",
        "sex": "Male",
        "race": "African-American",
        "priors_count": "2",
        "juv_fel_count": "0",
        "juv_misd_count": "0",
        "juv_other_count": "1",
        "c_charge_degree": "F",
        "is_recid": "1",
        "two_year_recid": "1",
    }
    fields.update(overrides)
    return ",".join(fields[c] for c in HEADER.split(","))


def make_csv(*rows: str, header: str = HEADER) -> bytes:
    return ("\n".join([header, *rows]) + "\n").encode()


def record(**overrides) -> DefendantRecord:
    fields = dict(
        id="r1",
        age=30,
        sex="male",
        race="african_american",
        priors_count=2,
        juv_fel_count=0,
        juv_misd_count=0,
        juv_other_count=0,
        charge_degree="felony",
        is_recid=1,
        recidivated=1,
    )
    fields.update(overrides)
    return DefendantRecord(**fields)


class TestParse:
    def test_single_well_formed_row(self):
        result = parse_raw(make_csv(csv_row()))
        assert len(result.records) == 1
        assert not result.rejects
        rec = result.records[0]
        assert rec.sex == "male"
        assert rec.race == "african_american"
        assert rec.charge_degree == "felony"
        assert rec.recidivated == 1

    def test_empty_label_is_rejected(self):
        result = parse_raw(make_csv(csv_row(two_year_recid="")))
        assert not result.records
        assert len(result.rejects) == 1
        assert "two_year_recid" in result.rejects[0].reason

    def test_missing_column_is_fatal(self):
        broken = HEADER.replace("priors_count,", "")
        row = csv_row().split(",")
        del row[4]
        with pytest.raises(MissingColumnsError, match="priors_count"):
            parse_raw(make_csv(",".join(row), header=broken))

    def test_non_integer_field_is_rejected(self):
        result = parse_raw(make_csv(csv_row(priors_count="two")))
        assert len(result.rejects) == 1
        assert "priors_count" in result.rejects[0].reason

    def test_negative_count_is_rejected(self):
        result = parse_raw(make_csv(csv_row(juv_fel_count="-1")))
        assert len(result.rejects) == 1

    def test_out_of_range_is_recid_rejected(self):
        result = parse_raw(make_csv(csv_row(is_recid="3")))
        assert len(result.rejects) == 1

    def test_rejects_carry_line_numbers(self):
        result = parse_raw(make_csv(csv_row(), csv_row(age="x"), csv_row()))
        assert len(result.records) == 2
        assert result.rejects[0].line == 3

    def test_extra_columns_are_ignored(self):
        header = HEADER + ",decile_score,name"
        row = csv_row() + ",7,somebody"
        result = parse_raw(make_csv(row, header=header))
        assert len(result.records) == 1

    def test_charge_code_normalization(self):
        result = parse_raw(
            make_csv(csv_row(c_charge_degree="O"), csv_row(id="2", c_charge_degree="(MO3)"))
        )
        assert result.records[0].charge_degree == "ordinary_traffic"
        assert result.records[1].charge_degree == "municipal_ordinance"

    def test_synthetic_file_parses_fully(self, synthetic_csv):
        result = parse_raw(synthetic_csv)
        assert len(result.records) == 7214
        assert not result.rejects

    def test_public_file_parses_over_7000_records(self):
        from conftest import real_csv_path

        path = real_csv_path()
        if path is None:
            pytest.skip("public two-year recidivism file not available")
        result = parse_raw(path.read_bytes())
        assert len(result.records) > 7000


class TestFilter:
    def test_traffic_and_ordinance_removed(self):
        result = filter_records(
            [record(charge_degree="ordinary_traffic"), record(charge_degree="municipal_ordinance")]
        )
        assert not result.records
        assert result.removed["traffic_or_ordinance"] == 2

    def test_nonbinary_race_removed(self):
        result = filter_records([record(race="hispanic")])
        assert not result.records
        assert result.removed["nonbinary_race"] == 1

    def test_incomplete_record_removed(self):
        result = filter_records([record(is_recid=-1)])
        assert not result.records
        assert result.removed["incomplete"] == 1

    def test_underage_removed(self):
        result = filter_records([record(age=17)])
        assert result.removed["underage"] == 1

    def test_empty_input(self):
        result = filter_records([])
        assert result.records == ()

    def test_survivors_satisfy_invariants(self, eligible_records):
        for rec in eligible_records:
            assert rec.race in ("african_american", "white")
            assert rec.sex in ("female", "male")
            assert rec.charge_degree in ("felony", "misdemeanor")
            assert rec.age >= 18
            assert rec.is_recid in (0, 1)
            assert rec.recidivated in (0, 1)


class TestBalance:
    def test_race_dataset_sizes(self, race_dataset):
        assert len(race_dataset.records) == 3000
        groups = race_dataset.group_vector()
        assert int(np.sum(groups == 0)) == 1500
        assert int(np.sum(groups == 1)) == 1500

    def test_gender_dataset_sizes(self, eligible_records):
        ds = build_balanced(eligible_records, "gender", 800, seed=0)
        assert len(ds.records) == 1600
        assert int(np.sum(ds.group_vector() == 0)) == 800

    def test_insufficient_group_names_the_group(self):
        records = [record(id=str(i)) for i in range(5)] + [
            record(id=f"w{i}", race="white") for i in range(20)
        ]
        with pytest.raises(GroupTooSmallError, match="african_american.*5"):
            build_balanced(records, "race", 10, seed=0)

    def test_deterministic_for_fixed_seed(self, eligible_records):
        a = build_balanced(eligible_records, "race", 200, seed=11)
        b = build_balanced(eligible_records, "race", 200, seed=11)
        assert [r.id for r in a.records] == [r.id for r in b.records]

    def test_seed_changes_sample(self, eligible_records):
        a = build_balanced(eligible_records, "race", 200, seed=11)
        b = build_balanced(eligible_records, "race", 200, seed=12)
        assert [r.id for r in a.records] != [r.id for r in b.records]

    def test_group_of(self, race_dataset):
        for rec in race_dataset.records[:10]:
            expected = 0 if rec.race == "african_american" else 1
            assert race_dataset.group_of(rec) == expected


def _tiny_dataset(attribute="race"):
    ages = [20, 40, 25, 35, 20, 40, 25, 35]
    records = []
    for i, age in enumerate(ages):
        records.append(
            record(
                id=str(i),
                age=age,
                race="african_american" if i % 2 == 0 else "white",
                sex="male" if i % 4 < 2 else "female",
                priors_count=i,
                recidivated=i % 2,
                charge_degree="felony" if i % 3 else "misdemeanor",
            )
        )
    return build_balanced(records, attribute, 4, seed=0)


class TestEncode:
    def test_z_score_arithmetic(self):
        # Fit rows have age mean 30 and stddev 10, so age 40 encodes to 1.0.
        ds = _tiny_dataset()
        age_of_row = [r.age for r in ds.records]
        fit = np.array([age_of_row.index(20), age_of_row.index(40)], dtype=np.int64)
        fm = encode(ds, fit)
        age_col = fm.feature_names.index("age")
        forty = age_of_row.index(40)
        assert fm.rows[forty, age_col] == pytest.approx(1.0)

    def test_charge_one_hot(self):
        ds = _tiny_dataset()
        fm = encode(ds, np.arange(len(ds.records)))
        fel = fm.feature_names.index("charge_degree=felony")
        mis = fm.feature_names.index("charge_degree=misdemeanor")
        for i, rec in enumerate(ds.records):
            expected = 1.0 if rec.charge_degree == "felony" else 0.0
            assert fm.raw[i, fel] == expected
            assert fm.raw[i, mis] == 1.0 - expected

    def test_groups_vector_matches_race_dataset(self, race_dataset):
        fm = encode(race_dataset, np.arange(3000))
        assert fm.groups.shape == (3000,)
        assert fm.labels.shape == (3000,)

    def test_protected_attribute_excluded(self, race_dataset, eligible_records):
        fm_race = encode(race_dataset, np.arange(len(race_dataset.records)))
        assert not any(name.startswith("race") for name in fm_race.feature_names)
        assert any(name.startswith("sex=") for name in fm_race.feature_names)

        gender = build_balanced(eligible_records, "gender", 100, seed=3)
        fm_gender = encode(gender, np.arange(len(gender.records)))
        assert not any(name.startswith("sex") for name in fm_gender.feature_names)

    def test_constant_column_dropped_with_warning(self):
        ds = _tiny_dataset()
        fm = encode(ds, np.arange(len(ds.records)))
        # juv counts are all zero in the tiny dataset
        assert "juv_fel_count" in fm.dropped
        assert "juv_fel_count" not in fm.feature_names

    def test_scaled_rows_match_normalization_of_raw(self, small_race_dataset):
        fm = encode(small_race_dataset, np.arange(0, 300))
        assert np.array_equal(fm.rows, fm.normalization.apply(fm.raw))


class TestSplit:
    def test_exact_70_30_on_3000(self, race_dataset):
        train, test = split(race_dataset, 0.7, seed=0)
        assert train.size == 2100
        assert test.size == 900

    def test_disjoint_and_exhaustive(self, race_dataset):
        train, test = split(race_dataset, 0.7, seed=0)
        merged = np.concatenate([train, test])
        assert np.array_equal(np.sort(merged), np.arange(3000))

    def test_single_member_strata_error(self):
        records = [
            record(id="1", race="african_american", recidivated=0),
            record(id="2", race="african_american", recidivated=1),
            record(id="3", race="white", recidivated=0),
            record(id="4", race="white", recidivated=1),
        ]
        ds = build_balanced(records, "race", 2, seed=0)
        with pytest.raises(StratumTooSmallError):
            split(ds, 0.5, seed=0)

    def test_deterministic(self, race_dataset):
        a = split(race_dataset, 0.7, seed=5)
        b = split(race_dataset, 0.7, seed=5)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_stratified_proportions(self, race_dataset):
        train, _ = split(race_dataset, 0.7, seed=0)
        groups = race_dataset.group_vector()
        labels = race_dataset.label_vector()
        in_train = np.zeros(3000, dtype=bool)
        in_train[train] = True
        for g in (0, 1):
            for y in (0, 1):
                stratum = (groups == g) & (labels == y)
                got = int(np.sum(stratum & in_train))
                want = 0.7 * int(np.sum(stratum))
                assert abs(got - want) <= 1.0

    def test_bad_fraction(self, race_dataset):
        with pytest.raises(ValueError):
            split(race_dataset, 1.0, seed=0)

    @given(st.integers(2, 30), st.integers(2, 30), st.integers(0, 1000))
    def test_partition_property(self, n_pos, n_neg, seed):
        records = []
        for g, race in enumerate(("african_american", "white")):
            for i in range(n_pos):
                records.append(record(id=f"{race}p{i}", race=race, recidivated=1, age=20 + i))
            for i in range(n_neg):
                records.append(record(id=f"{race}n{i}", race=race, recidivated=0, age=20 + i))
        ds = build_balanced(records, "race", n_pos + n_neg, seed=0)
        train, test = split(ds, 0.5, seed=seed)
        merged = np.sort(np.concatenate([train, test]))
        assert np.array_equal(merged, np.arange(len(ds.records)))
        assert np.intersect1d(train, test).size == 0


def test_pipeline_determinism(synthetic_csv):
    def run():
        records = filter_records(parse_raw(synthetic_csv).records).records
        ds = build_balanced(records, "race", 400, seed=9)
        train, test = split(ds, 0.7, seed=9)
        return [r.id for r in ds.records], train, test

    ids_a, train_a, test_a = run()
    ids_b, train_b, test_b = run()
    assert ids_a == ids_b
    assert np.array_equal(train_a, train_b)
    assert np.array_equal(test_a, test_b)
