"""Source datasets: CSV I/O, seeded synthetic generation and fault injection.

Weather files have the header ``day,hour,temperature,pressure,humidity`` and
consumption files ``day,hour,consumption_kwh``. Hours are two-digit, values
carry exactly three decimals and an empty field is a null reading.
"""

from __future__ import annotations

import csv
import io
import math
import os
import random
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import NamedTuple, Sequence, Union

from .contracts import METER, STAKEHOLDERS, PredictorModel
from .exceptions import DatasetError, InjectionError
from .values import NULL, ZERO, fmt, num, opt_num

WEATHER_HEADER = ("day", "hour", "temperature", "pressure", "humidity")
CONSUMPTION_HEADER = ("day", "hour", "consumption_kwh")

FIRST_DAY = 2
LAST_DAY = 31
HOURS = 24

SOURCE_NAMES = {"u0": "esco", "u1": "meteo", "u2": "client", "u3": "meter", "truth": "truth"}


class WeatherRow(NamedTuple):
    day: int
    hour: int
    temperature: object
    pressure: object
    humidity: object

    @property
    def datetime(self) -> tuple:
        return (self.day, self.hour)

    def channels(self) -> tuple:
        return (self.temperature, self.pressure, self.humidity)


class ConsumptionRow(NamedTuple):
    day: int
    hour: int
    consumption_kwh: object

    @property
    def datetime(self) -> tuple:
        return (self.day, self.hour)


Row = Union[WeatherRow, ConsumptionRow]


# -- CSV -----------------------------------------------------------------------


def _cell(v) -> str:
    return "" if v is NULL else fmt(v)


def dumps(rows: Sequence[Row]) -> str:
    """Render rows in canonical CSV form; the kind is taken from the first row."""
    consumption = bool(rows) and isinstance(rows[0], ConsumptionRow)
    header = CONSUMPTION_HEADER if consumption else WEATHER_HEADER
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join([str(r.day), f"{r.hour:02d}"] + [_cell(v) for v in r[2:]]))
    return "\n".join(lines) + "\n"


def write_csv(path, rows: Sequence[Row], kind: str | None = None) -> None:
    text = dumps(rows)
    if not rows and kind == "consumption":
        text = ",".join(CONSUMPTION_HEADER) + "\n"
    Path(path).write_text(text, encoding="ascii", newline="")


def _parse_int(text: str, lo: int, hi: int, what: str, row: int, path) -> int:
    t = text.strip()
    if not t.isdigit():
        raise DatasetError(f"malformed {what} {text!r}", row, path)
    v = int(t)
    if not lo <= v <= hi:
        raise DatasetError(f"{what} {v} outside [{lo}, {hi}]", row, path)
    return v


def loads(text: str, path=None) -> list[Row]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise DatasetError("empty file", None, path) from None
    if header == WEATHER_HEADER:
        make, width = WeatherRow, 5
    elif header == CONSUMPTION_HEADER:
        make, width = ConsumptionRow, 3
    else:
        raise DatasetError(f"unknown header {','.join(header)!r}", 1, path)
    rows: list[Row] = []
    prev = None
    for lineno, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != width:
            raise DatasetError(f"expected {width} fields, got {len(fields)}", lineno, path)
        day = _parse_int(fields[0], 1, LAST_DAY, "day", lineno, path)
        hour = _parse_int(fields[1], 0, HOURS - 1, "hour", lineno, path)
        values = []
        for f in fields[2:]:
            try:
                values.append(opt_num(f))
            except (ArithmeticError, ValueError):
                raise DatasetError(f"non-numeric field {f!r}", lineno, path) from None
        if prev is not None and (day, hour) < prev:
            raise DatasetError(f"row {day},{hour:02d} is out of datetime order", lineno, path)
        prev = (day, hour)
        rows.append(make(day, hour, *values))
    return rows


def read_csv(path) -> list[Row]:
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError:
        raise DatasetError("file is not ASCII text", None, path) from None
    return loads(text, path)


# -- generation ----------------------------------------------------------------


@dataclass(frozen=True)
class WeatherProfile:
    """Shape of the synthetic month. Ranges are (low, high) for a seeded draw."""

    mean_temperature: tuple = (2.0, 10.0)
    diurnal_amplitude: tuple = (3.0, 5.0)
    warmest_hour: int = 15
    day_to_day_sd: float = 1.5
    hourly_sd: float = 0.3
    pressure_mean: tuple = (1005.0, 1020.0)
    pressure_sd: float = 4.0
    humidity_mean: tuple = (65.0, 80.0)
    # voting tolerances the source variants must respect
    tolerances: tuple = (1.0, 5.0, 5.0)
    # scale of per-source deviation; 0 makes every source equal to the truth
    source_spread: float = 1.0

    def margins(self) -> tuple:
        return tuple(round(self.source_spread * t / 4, 3) for t in self.tolerances)


TEMPERATURE_RANGE = (-10.0, 30.0)
PRESSURE_RANGE = (960.0, 1040.0)
HUMIDITY_RANGE = (20.0, 95.0)

# each source deviates from the truth inside its own band, in units of the
# channel margin; bands keep any two sources within half the tolerance
SOURCE_BANDS = {"u0": (0.4, 1.0), "u1": (-0.2, 0.2), "u2": (-1.0, -0.4)}


def _clip(x: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, x))


def generate_weather(seed: int, profile: WeatherProfile | None = None) -> list[WeatherRow]:
    """True hourly weather for days 2 to 31 (720 rows)."""
    p = profile or WeatherProfile()
    rng = random.Random(f"{seed}/weather")
    m_tau, m_psi, m_rho = p.margins()
    month_mean = rng.uniform(*p.mean_temperature)
    amplitude = rng.uniform(*p.diurnal_amplitude)
    pressure = rng.uniform(*p.pressure_mean)
    pressure_mean = pressure
    humidity_mean = rng.uniform(*p.humidity_mean)
    anomaly = 0.0
    rows = []
    for day in range(FIRST_DAY, LAST_DAY + 1):
        anomaly = 0.6 * anomaly + rng.gauss(0.0, p.day_to_day_sd)
        day_mean = _clip(month_mean + anomaly, -5.0, 14.0)
        for hour in range(HOURS):
            phase = math.cos(2 * math.pi * (hour - p.warmest_hour) / HOURS)
            tau = day_mean + amplitude * phase + rng.gauss(0.0, p.hourly_sd)
            pressure = pressure + 0.1 * (pressure_mean - pressure) + rng.gauss(0.0, p.pressure_sd / 4)
            rho = humidity_mean - 2.5 * amplitude * phase + rng.gauss(0.0, 2.0)
            rows.append(WeatherRow(
                day, hour,
                num(_clip(tau, TEMPERATURE_RANGE[0] + m_tau, TEMPERATURE_RANGE[1] - m_tau)),
                num(_clip(pressure, PRESSURE_RANGE[0] + m_psi, PRESSURE_RANGE[1] - m_psi)),
                num(_clip(rho, HUMIDITY_RANGE[0] + m_rho, HUMIDITY_RANGE[1] - m_rho)),
            ))
    return rows


def source_variant(truth: Sequence[WeatherRow], source: str, seed: int,
                   profile: WeatherProfile | None = None) -> list[WeatherRow]:
    """What stakeholder ``source`` measures: the truth plus a source-specific deviation."""
    p = profile or WeatherProfile()
    lo, hi = SOURCE_BANDS[source]
    rng = random.Random(f"{seed}/{source}")
    margins = [num(m) for m in p.margins()]
    out = []
    for row in truth:
        channels = []
        for value, margin in zip(row.channels(), margins):
            if value is NULL:
                channels.append(NULL)
                continue
            offset = num(rng.uniform(lo, hi) * float(margin))
            offset = max(-margin, min(margin, offset))
            channels.append(num(value + offset))
        out.append(WeatherRow(row.day, row.hour, *channels))
    return out


def generate_consumption(seed: int, weather: Sequence[WeatherRow], model: PredictorModel | None = None,
                         noise: float = 1.0, saving: tuple = (3.0, 9.0)) -> list[ConsumptionRow]:
    """Daily meter readings at hour 23: the model's prediction on the true weather
    minus a seeded achieved saving, plus symmetric noise."""
    model = model or PredictorModel()
    rng = random.Random(f"{seed}/consumption")
    by_day: dict[int, list] = {}
    for row in weather:
        by_day.setdefault(row.day, []).append(row.temperature)
    rows = []
    for day in sorted(by_day):
        predicted = model.predict(by_day[day])
        achieved = rng.uniform(*saving)
        jitter = rng.uniform(-noise, noise) if noise else 0.0
        kwh = max(ZERO, num(float(predicted) - achieved + jitter))
        rows.append(ConsumptionRow(day, HOURS - 1, kwh))
    return rows


@dataclass
class Dataset:
    """Inputs for one run: three stakeholder weather series, the meter series and the truth."""

    weather: dict
    consumption: list
    truth: list = field(default_factory=list)

    def files(self, seed: int, fault: str | None = None) -> dict[str, list]:
        suffix = f"_{fault}" if fault else ""
        out = {}
        for src in STAKEHOLDERS:
            out[f"{SOURCE_NAMES[src]}_seed{seed}{suffix}.csv"] = self.weather[src]
        out[f"{SOURCE_NAMES['truth']}_seed{seed}.csv"] = self.truth
        out[f"{SOURCE_NAMES[METER]}_seed{seed}{suffix}.csv"] = self.consumption
        return out


def generate_dataset(seed: int, profile: WeatherProfile | None = None, model: PredictorModel | None = None,
                     noise: float = 1.0, saving: tuple = (3.0, 9.0)) -> Dataset:
    truth = generate_weather(seed, profile)
    weather = {u: source_variant(truth, u, seed, profile) for u in STAKEHOLDERS}
    return Dataset(weather, generate_consumption(seed, truth, model, noise, saving), truth)


# -- fault injection -----------------------------------------------------------


def _check_count(count: int) -> None:
    if not 25 <= count <= 30:
        raise ValueError(f"fault count must be within [25, 30], got {count}")


@dataclass(frozen=True)
class SingleNull:
    day: int
    hour: int
    source: str = "u2"
    label = "single-null"


@dataclass(frozen=True)
class MultiNull:
    source: str = "u2"
    count: int = 27
    seed: int = 0
    label = "multi-null"

    def __post_init__(self):
        _check_count(self.count)


@dataclass(frozen=True)
class DuplicateZero:
    source: str = "u0"
    count: int = 27
    seed: int = 0
    label = "duplicate-zero"

    def __post_init__(self):
        _check_count(self.count)


@dataclass(frozen=True)
class Delay:
    days: tuple = (3, 11, 16, 25, 27, 30)
    delay_hours: int = 2
    label = "delay"

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        if self.delay_hours < 1:
            raise ValueError("delay_hours must be >= 1")


FaultSpec = Union[SingleNull, MultiNull, DuplicateZero, Delay]


def _null_row(row: WeatherRow) -> WeatherRow:
    return WeatherRow(row.day, row.hour, NULL, NULL, NULL)


def _pick_datetimes(rows: Sequence[Row], count: int, seed: int, tag: str) -> set:
    datetimes = sorted({r.datetime for r in rows})
    if count > len(datetimes):
        raise InjectionError(f"{tag}: asked for {count} rows, dataset has {len(datetimes)}")
    rng = random.Random(f"{seed}/{tag}")
    return set(rng.sample(datetimes, count))


def _require_weather(rows, spec) -> None:
    if rows and not isinstance(rows[0], WeatherRow):
        raise InjectionError(f"{spec.label} applies to weather datasets")


def inject(rows: Sequence[Row], spec: FaultSpec) -> list[Row]:
    """Return a copy of ``rows`` with ``spec`` applied; untouched rows are kept as is."""
    rows = list(rows)
    if isinstance(spec, SingleNull):
        _require_weather(rows, spec)
        for i, r in enumerate(rows):
            if r.datetime == (spec.day, spec.hour):
                rows[i] = _null_row(r)
                return rows
        raise InjectionError(f"no row at day {spec.day} hour {spec.hour:02d}")

    if isinstance(spec, MultiNull):
        _require_weather(rows, spec)
        chosen = _pick_datetimes(rows, spec.count, spec.seed, spec.label)
        done = set()
        for i, r in enumerate(rows):
            if r.datetime in chosen and r.datetime not in done:
                rows[i] = _null_row(r)
                done.add(r.datetime)
        return rows

    if isinstance(spec, DuplicateZero):
        _require_weather(rows, spec)
        chosen = _pick_datetimes(rows, spec.count, spec.seed, spec.label)
        out = []
        for r in rows:
            out.append(r)
            if r.datetime in chosen:
                out.append(WeatherRow(r.day, r.hour, ZERO, ZERO, ZERO))
                chosen.discard(r.datetime)
        return out

    if isinstance(spec, Delay):
        if rows and not isinstance(rows[0], ConsumptionRow):
            raise InjectionError("delay applies to consumption datasets")
        pending = set(spec.days)
        for i, r in enumerate(rows):
            if r.day in pending:
                step = (r.day - 1) * HOURS + r.hour + spec.delay_hours
                day, hour = divmod(step, HOURS)
                if day + 1 > LAST_DAY:
                    raise InjectionError(f"delaying day {r.day} by {spec.delay_hours}h leaves the month")
                rows[i] = ConsumptionRow(day + 1, hour, r.consumption_kwh)
                pending.discard(r.day)
        if pending:
            raise InjectionError(f"no consumption row for day(s) {sorted(pending)}")
        return sorted(rows, key=lambda r: r.datetime)

    raise TypeError(f"unknown fault spec {spec!r}")


def parse_fault(text: str) -> FaultSpec:
    """Parse ``kind[:key=value,...]``.

    Kinds: ``single-null`` (day, hour, source), ``multi-null`` and
    ``duplicate-zero`` (source, count, seed), ``delay`` (days joined with
    ``+``, hours). Example: ``delay:days=3+11+16,hours=2``.
    """
    kind, _, rest = text.strip().partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"bad fault parameter {item!r}")
        params[key.strip()] = value.strip()

    def ints(name, default):
        return int(params.pop(name)) if name in params else default

    if kind == SingleNull.label:
        spec = SingleNull(ints("day", 2), ints("hour", 2), params.pop("source", "u2"))
    elif kind == MultiNull.label:
        spec = MultiNull(params.pop("source", "u2"), ints("count", 27), ints("seed", 0))
    elif kind == DuplicateZero.label:
        spec = DuplicateZero(params.pop("source", "u0"), ints("count", 27), ints("seed", 0))
    elif kind == Delay.label:
        days = params.pop("days", None)
        parsed = tuple(int(d) for d in days.replace(";", "+").split("+")) if days else Delay().days
        spec = Delay(parsed, ints("hours", 2))
    else:
        raise ValueError(f"unknown fault kind {kind!r}")
    if params:
        raise ValueError(f"unexpected fault parameters: {', '.join(sorted(params))}")
    return spec


def write_files(out_dir, files: dict[str, list]) -> list[Path]:
    """Write every file or none: content is rendered first, partial output is removed on failure."""
    out = Path(out_dir)
    rendered = {name: dumps(rows) for name, rows in files.items()}
    written = []
    try:
        for name, text in rendered.items():
            target = out / name
            tmp = out / f".{name}.tmp"
            tmp.write_text(text, encoding="ascii", newline="")
            os.replace(tmp, target)
            written.append(target)
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        for name in rendered:
            (out / f".{name}.tmp").unlink(missing_ok=True)
        raise
    return written
