"""Contract values: fixed-point numbers, a first-class null, and sample records.

Numbers are :class:`decimal.Decimal` instances quantized to three fractional
digits. Every arithmetic helper here re-quantizes with round-half-even so a run
is bit-exact on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from typing import Any, Iterable, Union

from .exceptions import NullValueError

QUANTUM = Decimal("0.001")
ZERO = Decimal("0.000")


class NullType:
    """The null contract value.

    Any arithmetic or ordering comparison involving it raises
    :class:`NullValueError`, which is how faulty sensor samples surface as
    contract exceptions. Test for it with ``value is NULL``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NULL"

    def __reduce__(self):
        return "NULL"

    def _fault(self, *args):
        raise NullValueError()

    __add__ = __radd__ = __sub__ = __rsub__ = _fault
    __mul__ = __rmul__ = __truediv__ = __rtruediv__ = _fault
    __neg__ = __pos__ = __abs__ = _fault
    __lt__ = __le__ = __gt__ = __ge__ = _fault
    __bool__ = _fault
    __float__ = __int__ = _fault

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return 0x5EED


NULL = NullType()

Number = Decimal
Value = Union[Decimal, NullType, bool, str, "Sample", "ConsumptionSample", "QualifiedSample", tuple]


def num(x: Any) -> Decimal:
    """Coerce ``x`` to a quantized fixed-point number.

    Floats go through their 3-digit decimal rendering first, so ``num(0.1)`` is
    exactly ``0.100``. Negative zero is normalized.
    """
    if isinstance(x, Decimal):
        d = x
    elif isinstance(x, bool):
        raise TypeError("bool is not a number")
    elif isinstance(x, int):
        d = Decimal(x)
    elif isinstance(x, float):
        d = Decimal(format(x, ".3f"))
    elif isinstance(x, str):
        d = Decimal(x.strip())
    else:
        raise TypeError(f"cannot convert {type(x).__name__} to a number")
    if not d.is_finite():
        raise ValueError(f"non-finite number: {x!r}")
    d = d.quantize(QUANTUM, rounding=ROUND_HALF_EVEN)
    return ZERO if d == 0 else d


def opt_num(x: Any):
    """Like :func:`num` but maps ``None``/``NULL``/empty text to ``NULL``."""
    if x is None or x is NULL or (isinstance(x, str) and not x.strip()):
        return NULL
    return num(x)


def q(x: Decimal) -> Decimal:
    """Re-quantize an arithmetic result (raises on NULL like any arithmetic)."""
    if x is NULL:
        raise NullValueError()
    with localcontext() as ctx:
        ctx.prec = 34
        d = x.quantize(QUANTUM, rounding=ROUND_HALF_EVEN)
    return ZERO if d == 0 else d


def div(a: Decimal, b) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 34
        return q(a / b)


def mean(values: Iterable[Decimal]) -> Decimal:
    vals = list(values)
    if not vals:
        raise ValueError("mean of empty sequence")
    total = ZERO
    for v in vals:
        total = total + v
    return div(total, len(vals))


def fmt(x: Decimal) -> str:
    return f"{x:.3f}"


@dataclass(frozen=True)
class Sample:
    """One hourly weather sample from an authorized stakeholder.

    ``tau`` is temperature in degrees C, ``psi`` pressure in hPa and ``rho``
    relative humidity in %. Any channel may be ``NULL``.
    """

    tau: Any
    psi: Any
    rho: Any
    hour: int
    day: int
    source: str

    def channels(self) -> tuple:
        return (self.tau, self.psi, self.rho)

    def with_channels(self, tau, psi, rho) -> "Sample":
        return Sample(tau, psi, rho, self.hour, self.day, self.source)

    def has_null(self) -> bool:
        return any(c is NULL for c in self.channels())


@dataclass(frozen=True)
class ConsumptionSample:
    kwh: Any
    day: int
    source: str


@dataclass(frozen=True)
class QualifiedSample:
    tau: Any
    psi: Any
    rho: Any
    reliability: Decimal

    def channels(self) -> tuple:
        return (self.tau, self.psi, self.rho)


EMPTY_QUALIFIED = QualifiedSample(NULL, NULL, NULL, ZERO)


def encode(value: Any) -> Any:
    """Canonical JSON-ready form of a contract value."""
    if value is NULL or value is None:
        return None
    if isinstance(value, bool):
        return value
    if isinstance(value, Decimal):
        return fmt(value)
    if isinstance(value, (str, int)):
        return value
    if isinstance(value, Sample):
        return {"type": "sample", "tau": encode(value.tau), "psi": encode(value.psi),
                "rho": encode(value.rho), "hour": value.hour, "day": value.day, "source": value.source}
    if isinstance(value, ConsumptionSample):
        return {"type": "consumption", "kwh": encode(value.kwh), "day": value.day, "source": value.source}
    if isinstance(value, QualifiedSample):
        return {"type": "qualified", "tau": encode(value.tau), "psi": encode(value.psi),
                "rho": encode(value.rho), "reliability": encode(value.reliability)}
    if isinstance(value, (tuple, list)):
        return [encode(v) for v in value]
    raise TypeError(f"not a contract value: {value!r}")
