"""The energy performance contract suite: DataQualifier, Predictor, Aggregator, Validator.

Storage layout (paths are relative to the owning contract):

=========================  =============================================
``weights/<source>``       voting weight of a stakeholder
``pi/<source>/dDD/hHH``    checked hourly sample of ``source`` for a day/hour
``pi/u3/dDD``              Client Meter consumption for a day
``gamma/hHH``              qualified sample of the last processed day
``sigma_d/<i>``            i-th daily saving (Aggregator)
``sigma_m/<i>``            i-th monthly saving (Aggregator)
``sigma_d/len`` etc.       list lengths
=========================  =============================================

Hourly slots carry the day so the midnight clean-up of a finished day never
touches the keys the new day's hour-0 samples write in the same block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from itertools import combinations
from typing import Optional, Sequence

from .ledger import Address, AddressKind, StateKey
from .runtime import CallContext, Contract, ContractRegistry, entry
from .values import (
    EMPTY_QUALIFIED,
    NULL,
    ZERO,
    ConsumptionSample,
    QualifiedSample,
    Sample,
    mean,
    num,
    q,
)

HOURS_PER_DAY = 24

TAU_BOUNDS = (Decimal(-30), Decimal(60))
PSI_BOUNDS = (Decimal(850), Decimal(1060))
RHO_BOUNDS = (Decimal(0), Decimal(100))

STAKEHOLDERS = ("u0", "u1", "u2")
METER = "u3"
ORACLE = "oracle"

DATA_QUALIFIER = Address(AddressKind.CONTRACT, "DataQualifier")
PREDICTOR = Address(AddressKind.CONTRACT, "Predictor")
AGGREGATOR = Address(AddressKind.CONTRACT, "Aggregator")
VALIDATOR = Address(AddressKind.CONTRACT, "Validator")


@dataclass(frozen=True)
class PredictorModel:
    """Heating-degree-day baseline: ``base_load + hdd_coefficient * HDD``.

    HDD is ``max(0, base_temperature - mean temperature)`` over the non-null
    hourly temperatures of a day. With no temperature at all the prediction
    is the base load.
    """

    base_load: Decimal = Decimal("50")
    hdd_coefficient: Decimal = Decimal("10")
    base_temperature: Decimal = Decimal("18")

    def __post_init__(self):
        for name in ("base_load", "hdd_coefficient", "base_temperature"):
            object.__setattr__(self, name, num(getattr(self, name)))
        if self.base_load < 0 or self.hdd_coefficient < 0:
            raise ValueError("base_load and hdd_coefficient must be non-negative")

    def predict(self, temperatures: Sequence) -> Decimal:
        temps = [t for t in temperatures if t is not NULL]
        if not temps:
            return self.base_load
        hdd = max(ZERO, q(self.base_temperature - mean(temps)))
        return q(self.base_load + self.hdd_coefficient * hdd)

    def to_dict(self) -> dict:
        return {"a": str(self.base_load), "b": str(self.hdd_coefficient), "t_base": str(self.base_temperature)}


@dataclass(frozen=True)
class VotingConfig:
    """Per-channel agreement tolerances and per-stakeholder weights."""

    tolerances: tuple = (Decimal("1.000"), Decimal("5.000"), Decimal("5.000"))
    weights: tuple = (Decimal("1.000"), Decimal("1.000"), Decimal("1.000"))

    def __post_init__(self):
        tol = tuple(num(t) for t in self.tolerances)
        w = tuple(num(x) for x in self.weights)
        if len(tol) != 3 or len(w) != 3:
            raise ValueError("need three tolerances and three weights")
        if any(t < 0 for t in tol):
            raise ValueError("tolerances must be non-negative")
        if any(x <= 0 for x in w):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "tolerances", tol)
        object.__setattr__(self, "weights", w)

    def to_dict(self) -> dict:
        return {
            "tolerances": [str(t) for t in self.tolerances],
            "weights": [str(x) for x in self.weights],
        }


# -- pure helpers (also used directly by tests) -------------------------------


def _clamp(value, bounds):
    lo, hi = bounds
    if value <= lo:
        return num(lo)
    elif value >= hi:
        return num(hi)
    return value


def check_variable(sample: Sample) -> Sample:
    """Clamp each channel to its validity range; a null channel faults."""
    tau = _clamp(sample.tau, TAU_BOUNDS)
    psi = _clamp(sample.psi, PSI_BOUNDS)
    rho = _clamp(sample.rho, RHO_BOUNDS)
    return sample.with_channels(tau, psi, rho)


def agree(a: Sample, b: Sample, tolerances: Sequence[Decimal]) -> bool:
    """Two samples agree when every channel non-null in both is within tolerance."""
    for x, y, tol in zip(a.channels(), b.channels(), tolerances):
        if x is NULL or y is NULL:
            continue
        if abs(x - y) > tol:
            return False
    return True


def _average(members: Sequence[Sample], channel: int):
    vals = [m.channels()[channel] for m in members]
    vals = [v for v in vals if v is not NULL]
    return mean(vals) if vals else NULL


def qualify_by_voting(samples: Sequence[Optional[Sample]], weights: Sequence[Decimal],
                      tolerances: Sequence[Decimal]) -> QualifiedSample:
    """Weighted vote over up to three stakeholder samples for one hour.

    The winning group is the heaviest set of present sources that pairwise
    agree and whose complement also agrees, i.e. one side of a split into at
    most two agreeing groups. If no such split exists every source stands
    alone. Ties go to the group whose sorted source indices compare lowest,
    so a group containing the lowest-indexed source wins. The qualified value
    is the per-channel plain average of the group and the reliability is the
    group's total weight.
    """
    present = [i for i, s in enumerate(samples) if s is not None]
    if not present:
        return EMPTY_QUALIFIED

    ok = {(i, j): agree(samples[i], samples[j], tolerances) for i, j in combinations(present, 2)}

    def clique(group) -> bool:
        return all(ok[p] for p in combinations(group, 2))

    if clique(present):
        candidates = [tuple(present)]
    else:
        pairs = [p for p in combinations(present, 2) if ok[p]]
        candidates = list(pairs)
        for i in present:
            rest = [j for j in present if j != i]
            if not pairs or clique(rest):
                candidates.append((i,))

    def weight(group) -> Decimal:
        total = ZERO
        for i in group:
            total += weights[i]
        return total

    best = candidates[0]
    for g in candidates[1:]:
        wg, wb = weight(g), weight(best)
        if wg > wb or (wg == wb and g < best):
            best = g

    members = [samples[i] for i in best]
    return QualifiedSample(
        _average(members, 0),
        _average(members, 1),
        _average(members, 2),
        weight(best),
    )


def pi_path(source: str, day: int, hour: int | None = None) -> str:
    if hour is None:
        return f"pi/{source}/d{day:02d}"
    return f"pi/{source}/d{day:02d}/h{hour:02d}"


# -- contracts -----------------------------------------------------------------


class Validator(Contract):
    def __init__(self, id: str = VALIDATOR.id):
        super().__init__(id)

    @entry("checkVariable")
    def check_variable(self, ctx: CallContext, sample):
        ctx.require(isinstance(sample, Sample), "checkVariable expects a sample")
        return check_variable(sample)

    @entry("validateMonthlySaving")
    def validate_monthly_saving(self, ctx: CallContext, saving) -> bool:
        return saving >= 0


class Aggregator(Contract):
    def __init__(self, id: str = AGGREGATOR.id, predictor: Address = PREDICTOR,
                 data_qualifier: Address = DATA_QUALIFIER):
        super().__init__(id)
        self.predictor = predictor
        self.data_qualifier = data_qualifier

    def _append(self, ctx: CallContext, name: str, value) -> int:
        n = ctx.read(f"{name}/len")
        n = 0 if n is NULL else n
        ctx.write(f"{name}/{n}", value)
        ctx.write(f"{name}/len", n + 1)
        return n

    def _list(self, ctx: CallContext, name: str) -> tuple:
        n = ctx.read(f"{name}/len")
        n = 0 if n is NULL else n
        return tuple(ctx.read(f"{name}/{i}") for i in range(n))

    @entry("addDailySaving")
    def add_daily_saving(self, ctx: CallContext, saving):
        ctx.require(ctx.caller == self.predictor, f"addDailySaving not allowed for {ctx.caller.id}")
        return self._append(ctx, "sigma_d", saving)

    @entry("addMonthlySaving")
    def add_monthly_saving(self, ctx: CallContext, saving):
        ctx.require(ctx.caller == self.data_qualifier, f"addMonthlySaving not allowed for {ctx.caller.id}")
        return self._append(ctx, "sigma_m", saving)

    @entry("getDailySavings")
    def get_daily_savings(self, ctx: CallContext) -> tuple:
        return self._list(ctx, "sigma_d")

    @entry("getMonthlySavings")
    def get_monthly_savings(self, ctx: CallContext) -> tuple:
        return self._list(ctx, "sigma_m")


class Predictor(Contract):
    def __init__(self, id: str = PREDICTOR.id, model: PredictorModel | None = None,
                 aggregator: Address = AGGREGATOR, data_qualifier: Address = DATA_QUALIFIER):
        super().__init__(id)
        self.model = model or PredictorModel()
        self.aggregator = aggregator
        self.data_qualifier = data_qualifier

    @entry("predictCons")
    def predict_cons(self, ctx: CallContext, gamma) -> Decimal:
        return self.model.predict([g.tau for g in gamma])

    @entry("predictDailyCons")
    def predict_daily_cons(self, ctx: CallContext, gamma, consumption):
        ctx.require(ctx.caller == self.data_qualifier, f"predictDailyCons not allowed for {ctx.caller.id}")
        kwh = consumption.kwh if isinstance(consumption, ConsumptionSample) else consumption
        if kwh is NULL:
            # no meter reading for the day: the day is recorded as zero saving
            saving = ZERO
        else:
            saving = q(self.predict_cons(ctx, gamma) - kwh)
        ctx.call(self.aggregator, "addDailySaving", saving)
        return saving

    @entry("computeMonthlySaving")
    def compute_monthly_saving(self, ctx: CallContext) -> Decimal:
        total = ZERO
        for z in ctx.call(self.aggregator, "getDailySavings"):
            total = total + z
        return total


class DataQualifier(Contract):
    """Collects samples, qualifies them by vote each midnight and drives the other contracts."""

    def __init__(self, id: str = DATA_QUALIFIER.id, voting: VotingConfig | None = None,
                 predictor: Address = PREDICTOR, aggregator: Address = AGGREGATOR,
                 validator: Address = VALIDATOR, stakeholders: Sequence[str] = STAKEHOLDERS,
                 meter: str = METER, oracle: str = ORACLE, hours_per_day: int = HOURS_PER_DAY):
        super().__init__(id)
        self.voting = voting or VotingConfig()
        self.predictor = predictor
        self.aggregator = aggregator
        self.validator = validator
        self.stakeholders = tuple(stakeholders)
        self.meter = meter
        self.oracle = oracle
        self.hours_per_day = hours_per_day

    def genesis(self) -> dict:
        """Storage written at deployment (the stakeholder weights)."""
        return {self.key(f"weights/{u}"): w for u, w in zip(self.stakeholders, self.voting.weights)}

    def _is_source(self, ctx: CallContext, ids) -> bool:
        return ctx.caller.kind is AddressKind.SOURCE and ctx.caller.id in ids

    def _is_oracle(self, ctx: CallContext) -> bool:
        return ctx.caller.kind is AddressKind.ORACLE and ctx.caller.id == self.oracle

    @entry("addHourlySample")
    def add_hourly_sample(self, ctx: CallContext, sample):
        ctx.require(self._is_source(ctx, self.stakeholders), f"{ctx.caller.id} may not add hourly samples")
        ctx.require(isinstance(sample, Sample), "addHourlySample expects a sample")
        ctx.require(0 <= sample.hour < self.hours_per_day and sample.day >= 1, "sample datetime out of range")
        checked = ctx.call(self.validator, "checkVariable", sample)
        path = pi_path(ctx.caller.id, sample.day, sample.hour)
        ctx.read(path)  # the slot is part of the store being extended
        ctx.write(path, checked)
        return True

    @entry("addDailySample")
    def add_daily_sample(self, ctx: CallContext, consumption):
        ctx.require(self._is_source(ctx, (self.meter,)), f"{ctx.caller.id} may not add daily samples")
        ctx.require(isinstance(consumption, ConsumptionSample), "addDailySample expects a consumption sample")
        path = pi_path(self.meter, consumption.day)
        ctx.read(path)
        ctx.write(path, consumption)
        return True

    def calculate_qualified_daily_samples(self, ctx: CallContext, day: int) -> tuple:
        weights = [ctx.read(f"weights/{u}") for u in self.stakeholders]
        gamma = []
        for h in range(self.hours_per_day):
            slots = []
            for u in self.stakeholders:
                s = ctx.read(pi_path(u, day, h))
                slots.append(None if s is NULL else s)
            g = qualify_by_voting(slots, weights, self.voting.tolerances)
            ctx.write(f"gamma/h{h:02d}", g)
            gamma.append(g)
        return tuple(gamma)

    def qualify_by_voting(self, ctx: CallContext, s0, s1, s2) -> QualifiedSample:
        weights = [ctx.read(f"weights/{u}") for u in self.stakeholders]
        return qualify_by_voting((s0, s1, s2), weights, self.voting.tolerances)

    @entry("midnightProcess")
    def midnight_process(self, ctx: CallContext):
        ctx.require(self._is_oracle(ctx), f"{ctx.caller.id} may not trigger midnightProcess")
        day = ctx.now // self.hours_per_day  # the day that just ended
        gamma = self.calculate_qualified_daily_samples(ctx, day)
        consumption = ctx.read(pi_path(self.meter, day))
        saving = ctx.call(self.predictor, "predictDailyCons", gamma, consumption)
        for u in self.stakeholders:
            for h in range(self.hours_per_day):
                path = pi_path(u, day, h)
                if ctx.read(path) is not NULL:
                    ctx.write(path, NULL)
        if consumption is not NULL:
            ctx.write(pi_path(self.meter, day), NULL)
        return saving

    @entry("monthEndProcess")
    def month_end_process(self, ctx: CallContext) -> bool:
        ctx.require(self._is_oracle(ctx), f"{ctx.caller.id} may not trigger monthEndProcess")
        saving = ctx.call(self.predictor, "computeMonthlySaving")
        valid = ctx.call(self.validator, "validateMonthlySaving", saving)
        ctx.call(self.aggregator, "addMonthlySaving", saving)
        return valid

    @entry("validateMonthlySaving")
    def validate_monthly_saving(self, ctx: CallContext) -> bool:
        # the oracle's name for the month-end trigger
        return self.month_end_process(ctx)


@dataclass
class TepcSuite:
    data_qualifier: DataQualifier
    predictor: Predictor
    aggregator: Aggregator
    validator: Validator
    genesis: dict = field(default_factory=dict)


def deploy_tepc(registry: ContractRegistry, step: int, model: PredictorModel | None = None,
                voting: VotingConfig | None = None) -> TepcSuite:
    """Deploy the DataQualifier, which brings up the other three contracts.

    Returns the suite plus the genesis writes the caller must commit.
    """
    dq = DataQualifier(voting=voting)
    suite = TepcSuite(dq, Predictor(model=model), Aggregator(), Validator(), dq.genesis())
    for c in (suite.data_qualifier, suite.predictor, suite.aggregator, suite.validator):
        registry.deploy(c, step)
    return suite


def daily_savings(state, aggregator: Address = AGGREGATOR) -> list:
    n = state.value(StateKey(aggregator, "sigma_d/len"), 0)
    return [state.value(StateKey(aggregator, f"sigma_d/{i}")) for i in range(n)]


def monthly_savings(state, aggregator: Address = AGGREGATOR) -> list:
    n = state.value(StateKey(aggregator, "sigma_m/len"), 0)
    return [state.value(StateKey(aggregator, f"sigma_m/{i}")) for i in range(n)]
