from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from epochsim.contracts import PSI_BOUNDS, RHO_BOUNDS, TAU_BOUNDS, check_variable
from epochsim.datasets import (
    ConsumptionRow,
    Delay,
    DuplicateZero,
    MultiNull,
    SingleNull,
    WeatherProfile,
    WeatherRow,
    dumps,
    generate_consumption,
    generate_dataset,
    generate_weather,
    inject,
    loads,
    parse_fault,
    read_csv,
    write_csv,
    write_files,
)
from epochsim.exceptions import DatasetError, InjectionError
from epochsim.contracts import PredictorModel
from epochsim.values import NULL, ZERO, Sample, num


@pytest.fixture(scope="module")
def ds():
    return generate_dataset(1)


def test_parse_rows():
    (r,) = loads("day,hour,temperature,pressure,humidity\n2,05,20.000,1000.000,50.000\n")
    assert r == WeatherRow(2, 5, num(20), num(1000), num(50))
    (r,) = loads("day,hour,temperature,pressure,humidity\n2,05,,1000.000,50.000\n")
    assert r.temperature is NULL


@pytest.mark.parametrize("body, row", [
    ("2,25,1.000,1000.000,50.000", 2),
    ("x,05,1.000,1000.000,50.000", 2),
    ("2,05,abc,1000.000,50.000", 2),
    ("2,05,1.000,1000.000", 2),
    ("2,05,1.000,1000.000,50.000\n2,04,1.000,1000.000,50.000", 3),
])
def test_schema_errors_carry_row(body, row):
    with pytest.raises(DatasetError) as info:
        loads("day,hour,temperature,pressure,humidity\n" + body + "\n")
    assert info.value.row == row


def test_bad_header_and_empty():
    with pytest.raises(DatasetError):
        loads("a,b\n")
    with pytest.raises(DatasetError):
        loads("")


def test_duplicate_datetimes_are_allowed():
    text = "day,hour,temperature,pressure,humidity\n2,05,1.000,1000.000,50.000\n2,05,0.000,0.000,0.000\n"
    assert len(loads(text)) == 2


def test_round_trip_is_byte_exact(tmp_path, ds):
    for rows in (ds.weather["u0"], ds.consumption, inject(ds.weather["u2"], SingleNull(2, 2))):
        p = tmp_path / "f.csv"
        write_csv(p, rows)
        assert read_csv(p) == rows
        text = p.read_text()
        write_csv(p, read_csv(p))
        assert p.read_text() == text


def test_generation_is_deterministic():
    assert dumps(generate_weather(3)) == dumps(generate_weather(3))
    assert dumps(generate_weather(3)) != dumps(generate_weather(4))
    a, b = generate_dataset(2), generate_dataset(2)
    assert dumps(a.consumption) == dumps(b.consumption)


def test_generated_shape(ds):
    assert len(ds.truth) == 720
    assert [(r.day, r.hour) for r in ds.truth[:2]] == [(2, 0), (2, 1)]
    assert len(ds.consumption) == 30 and all(r.hour == 23 for r in ds.consumption)


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_clean_data_needs_no_clamping(seed):
    ds = generate_dataset(seed)
    for u, rows in ds.weather.items():
        for r in rows:
            s = Sample(*r.channels(), r.hour, r.day, u)
            assert check_variable(s) == s
            assert -10 <= r.temperature <= 30 and 960 <= r.pressure <= 1040 and 20 <= r.humidity <= 95


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_sources_agree_within_half_tolerance(seed):
    ds = generate_dataset(seed)
    half = [num(t) / 2 for t in WeatherProfile().tolerances]
    for a, b in combinations(["u0", "u1", "u2"], 2):
        for ra, rb in zip(ds.weather[a], ds.weather[b]):
            for x, y, h in zip(ra.channels(), rb.channels(), half):
                assert abs(x - y) <= h


def test_consumption_without_noise_or_saving_matches_model():
    truth = generate_weather(1)
    rows = generate_consumption(1, truth, noise=0.0, saving=(0.0, 0.0))
    m = PredictorModel()
    for r in rows:
        assert r.consumption_kwh == m.predict([w.temperature for w in truth if w.day == r.day])


# -- injection -------------------------------------------------------------------

def _changed(before, after):
    return [i for i, (a, b) in enumerate(zip(before, after)) if a != b]


def test_single_null(ds):
    rows = ds.weather["u2"]
    out = inject(rows, SingleNull(2, 2))
    assert out[2] == WeatherRow(2, 2, NULL, NULL, NULL)
    assert _changed(rows, out) == [2]


def test_multi_null_is_seeded_and_local(ds):
    rows = ds.weather["u2"]
    out = inject(rows, MultiNull("u2", 27, seed=5))
    idx = _changed(rows, out)
    assert len(idx) == 27 and all(out[i].temperature is NULL for i in idx)
    assert out == inject(rows, MultiNull("u2", 27, seed=5))
    assert out != inject(rows, MultiNull("u2", 27, seed=6))


def test_duplicate_zero(ds):
    rows = ds.weather["u0"]
    out = inject(rows, DuplicateZero("u0", 27, seed=1))
    assert len(out) == 747
    zeros = [i for i, r in enumerate(out) if r.channels() == (ZERO, ZERO, ZERO)]
    assert len(zeros) == 27
    for i in zeros:
        assert out[i - 1].datetime == out[i].datetime
    assert [r for r in out if r.channels() != (ZERO, ZERO, ZERO)] == rows


def test_delay(ds):
    out = inject(ds.consumption, Delay())
    moved = {r.day - 1: r for r in out if r.hour == 1}
    assert sorted(moved) == [3, 11, 16, 25, 27, 30]
    assert len(out) == 30
    assert out == sorted(out, key=lambda r: r.datetime)


@pytest.mark.parametrize("spec, rows", [
    (SingleNull(1, 0), "weather"),
    (Delay((31,)), "consumption"),
    (Delay((5,)), "weather"),
    (SingleNull(2, 2), "consumption"),
])
def test_injection_errors(ds, spec, rows):
    with pytest.raises(InjectionError):
        inject(ds.weather["u0"] if rows == "weather" else ds.consumption, spec)


def test_fault_count_bounds():
    with pytest.raises(ValueError):
        MultiNull(count=24)
    with pytest.raises(ValueError):
        DuplicateZero(count=31)


@pytest.mark.parametrize("text, spec", [
    ("single-null:day=2,hour=2", SingleNull(2, 2, "u2")),
    ("multi-null:count=26,seed=3", MultiNull("u2", 26, 3)),
    ("duplicate-zero", DuplicateZero()),
    ("delay:days=3+11,hours=2", Delay((3, 11), 2)),
])
def test_parse_fault(text, spec):
    assert parse_fault(text) == spec


@pytest.mark.parametrize("text", ["nope", "single-null:day", "delay:foo=1"])
def test_parse_fault_errors(text):
    with pytest.raises(ValueError):
        parse_fault(text)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(25, 30))
def test_multi_null_only_touches_chosen_rows(seed, count):
    rows = generate_weather(1)
    out = inject(rows, MultiNull("u2", count, seed))
    assert len(out) == len(rows)
    for a, b in zip(rows, out):
        assert b == a or (b.datetime == a.datetime and b.channels() == (NULL, NULL, NULL))


def test_write_files_all_or_nothing(tmp_path, ds):
    files = ds.files(1)
    written = write_files(tmp_path, files)
    assert sorted(p.name for p in written) == sorted(files)
    assert len(files) == 5
    with pytest.raises(OSError):
        write_files(tmp_path / "missing", files)
    assert not (tmp_path / "missing").exists()
