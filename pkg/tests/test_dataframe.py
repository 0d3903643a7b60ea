# twocultures/tests/test_dataframe.py

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dataframe import (Column, Dataset, bootstrap, decode, encode, load_csv, load_schema, make_folds,
                       sort_levels, split_terms, CATEGORICAL, NUMERIC)
from shared.errors import CsvParseError, FormulaError, SchemaError, ValidationError


def _write(tmp_path, text, name='data.csv'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


def _toy():
    return Dataset('toy', (
        Column('y', NUMERIC, [1.0, 2.0, 3.0, 4.0]),
        Column.categorical('sex', ['F', 'M', 'M', 'F']),
        Column('dis', NUMERIC, [1.5, 3.0, 2.0, 0.5]),
        Column('age', NUMERIC, [20.0, 30.0, 40.0, 50.0]),
    ))


# ── load_csv ──────────────────────────────────────────────
def test_load_csv_types_and_levels(tmp_path):
    path = _write(tmp_path, "y,sex\n1.5,F\n2.0,M\n3.25,F\n")
    ds = load_csv(path)
    assert ds.n_rows == 3
    assert ds.column('y').kind == NUMERIC
    sex = ds.column('sex')
    assert sex.kind == CATEGORICAL
    assert sex.levels == ('F', 'M')
    assert sex.labels() == ['F', 'M', 'F']


def test_load_csv_mixed_column_is_categorical(tmp_path):
    ds = load_csv(_write(tmp_path, "a\n1\n2\nx\n"))
    col = ds.column('a')
    assert col.kind == CATEGORICAL
    assert len(col.levels) == 3


def test_load_csv_ragged_row_reports_row(tmp_path):
    with pytest.raises(CsvParseError) as err:
        load_csv(_write(tmp_path, "a,b\n1,2\n3\n"))
    assert err.value.row == 3


def test_load_csv_empty_file(tmp_path):
    with pytest.raises(CsvParseError):
        load_csv(_write(tmp_path, ""))


def test_load_csv_rejects_missing(tmp_path):
    with pytest.raises(CsvParseError):
        load_csv(_write(tmp_path, "a,b\n1,NA\n2,3\n"))


def test_schema_override(tmp_path):
    schema_path = _write(tmp_path, "# 우편번호는 범주형\ncode = categorical\n\n", 'schema.txt')
    schema = load_schema(schema_path)
    assert schema == {'code': CATEGORICAL}
    ds = load_csv(_write(tmp_path, "code,v\n10,1\n20,2\n10,3\n"), schema)
    assert ds.column('code').levels == ('10', '20')


def test_schema_bad_line(tmp_path):
    with pytest.raises(SchemaError):
        load_schema(_write(tmp_path, "code numeric\n", 'schema.txt'))


def test_sort_levels_reorders_reference():
    ds = Dataset('d', (Column.categorical('c', ['b', 'a', 'c', 'a']),
                       Column('y', NUMERIC, [1.0, 2.0, 3.0, 4.0])))
    sorted_ds = sort_levels(ds)
    col = sorted_ds.column('c')
    assert col.levels == ('a', 'b', 'c')
    assert col.labels() == ['b', 'a', 'c', 'a']


# ── encode ────────────────────────────────────────────────
def test_encode_dummies_and_intercept():
    dm = encode(_toy(), 'y', 'sex, dis')
    assert dm.column_names == ('(Intercept)', 'sexM', 'dis')
    np.testing.assert_array_equal(dm.x[:, 1], [0, 1, 1, 0])
    assert dm.encoding_map['sex'].reference == 'F'


def test_encode_hinge_square_interaction():
    dm = encode(_toy(), 'y', 'hinge(dis, 2), square(age), dis:age')
    np.testing.assert_allclose(dm.x[:, dm.col('hinge(dis,2)')], [0.0, 1.0, 0.0, 0.0])
    np.testing.assert_allclose(dm.x[:, dm.col('square(age)')], [400, 900, 1600, 2500])
    np.testing.assert_allclose(dm.x[:, dm.col('dis:age')], np.array([1.5, 3.0, 2.0, 0.5]) * [20, 30, 40, 50])


def test_encode_cut_labels_r_style():
    ds = Dataset('d', (Column('y', NUMERIC, [0, 1, 0, 1]),
                       Column('amount', NUMERIC, [500.0, 4000.0, 4001.0, 12000.0])))
    dm = encode(ds, 'y', 'cut(amount, 0, 4000, Inf)')
    assert dm.column_names == ('(Intercept)', 'amount(4e+03,Inf]')
    np.testing.assert_array_equal(dm.x[:, 1], [0, 0, 1, 1])


def test_encode_all_excludes_response_and_excluded():
    dm = encode(_toy(), 'y', 'all', exclude=['age'])
    assert dm.column_names == ('(Intercept)', 'sexM', 'dis')


def test_encode_derived_responses():
    dm = encode(_toy(), 'gt(y, 2)', 'dis')
    assert dm.binary
    np.testing.assert_array_equal(dm.y, [0, 0, 1, 1])
    np.testing.assert_array_equal(dm.pm_view(), [-1, -1, 1, 1])
    dm_log = encode(_toy(), 'log(y)', 'dis')
    np.testing.assert_allclose(dm_log.y, np.log([1, 2, 3, 4]))


def test_encode_errors():
    with pytest.raises(FormulaError):
        encode(_toy(), 'y', 'missing')
    with pytest.raises(FormulaError):
        encode(_toy(), 'y', 'y:dis')
    with pytest.raises(FormulaError):
        encode(_toy(), 'y', 'dis, dis')


def test_split_terms_respects_parentheses():
    assert split_terms("a, hinge(b, 2), cut(c, 0, 1, Inf)") == ['a', 'hinge(b, 2)', 'cut(c, 0, 1, Inf)']


def test_decode_round_trip():
    ds = Dataset('d', (Column('y', NUMERIC, np.arange(6.0)),
                       Column.categorical('g', ['u', 'v', 'w', 'v', 'u', 'w'])))
    dm = encode(ds, 'y', 'g')
    assert decode(dm, 'g') == ['u', 'v', 'w', 'v', 'u', 'w']
    assert decode(dm, 'g', rows=[1, 2]) == ['v', 'w']


def test_standardize_round_trip(rng):
    x = rng.normal(3.0, 2.0, size=(30, 3))
    ds = Dataset('d', tuple([Column('y', NUMERIC, rng.normal(size=30))]
                            + [Column(f"x{j}", NUMERIC, x[:, j]) for j in range(3)]))
    dm = encode(ds, 'y', 'all')
    std = dm.standardize()
    np.testing.assert_allclose(std.x[:, 1:].mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(std.unstandardize().x, dm.x, rtol=1e-12)
    np.testing.assert_allclose(std.unstandardize().standardize().x, std.x, rtol=1e-12, atol=1e-12)


# ── folds / bootstrap ─────────────────────────────────────
@given(n=st.integers(2, 300), k=st.integers(2, 20), seed=st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_folds_balanced_partition(n, k, seed):
    if k > n:
        with pytest.raises(ValidationError):
            make_folds(n, k, seed)
        return
    plan = make_folds(n, k, seed)
    sizes = plan.sizes()
    assert sizes.sum() == n
    assert sizes.max() - sizes.min() <= 1
    assert set(plan.assignment.tolist()) == set(range(1, k + 1))


def test_folds_deterministic_and_loocv():
    a = make_folds(506, 10, 7)
    b = make_folds(506, 10, 7)
    assert a.fold_hash() == b.fold_hash()
    assert sorted(a.sizes().tolist()) == [50] * 4 + [51] * 6
    loo = make_folds(10, 10, 3)
    assert loo.sizes().tolist() == [1] * 10


def test_stratified_folds_spread_classes(rng):
    y = (rng.uniform(size=200) < 0.1).astype(int)
    plan = make_folds(200, 5, 1, strata=y)
    for j in range(1, 6):
        counts = y[plan.test_rows(j)].sum()
        assert abs(counts - y.sum() / 5) <= 1
    assert plan.sizes().max() - plan.sizes().min() <= 1


def test_bootstrap_single_row():
    b = bootstrap(1, 0)
    assert b.in_bag.tolist() == [0]
    assert b.out_of_bag.size == 0


def test_bootstrap_oob_fraction():
    fractions = [bootstrap(5000, s).oob_fraction for s in range(100)]
    assert abs(np.mean(fractions) - np.exp(-1)) < 0.01
    again = bootstrap(5000, 3)
    np.testing.assert_array_equal(again.in_bag, bootstrap(5000, 3).in_bag)
