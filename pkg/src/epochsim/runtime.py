"""Deterministic contract execution.

Contracts are plain Python classes whose callable surface is declared with the
:func:`entry` decorator. A transaction runs inside one :class:`ExecutionSession`
that every nested contract-to-contract call shares, so the whole call tree
produces a single read/write set and fails as a unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping

from .exceptions import ContractException, ErrorKind
from .ledger import Address, AddressKind, Entry, ReadWriteSet, StateKey, Transaction
from .values import NULL

MAX_CALL_DEPTH = 8


def entry(name: str) -> Callable:
    """Expose a contract method under its on-chain ``name``."""

    def mark(fn):
        fn._entry_name = name
        return fn

    return mark


class Contract:
    """Base class for compiled-in contracts.

    Entry points receive a :class:`CallContext` followed by the transaction or
    call arguments.
    """

    _entries: dict = {}

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        entries = {}
        for klass in reversed(cls.__mro__):
            for attr, fn in vars(klass).items():
                name = getattr(fn, "_entry_name", None)
                if name is not None:
                    entries[name] = attr
        cls._entries = entries

    def __init__(self, id: str):
        self.address = Address(AddressKind.CONTRACT, id)

    @property
    def id(self) -> str:
        return self.address.id

    def key(self, path: str) -> StateKey:
        return StateKey(self.address, path)

    def dispatch(self, method: str) -> Callable:
        attr = self._entries.get(method)
        if attr is None:
            raise ContractException(ErrorKind.UNKNOWN_METHOD, f"{self.id} has no method {method!r}", self.id)
        return getattr(self, attr)

    @classmethod
    def methods(cls) -> list[str]:
        return sorted(cls._entries)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.id!r})"


class ContractRegistry:
    def __init__(self):
        self._contracts: dict[Address, Contract] = {}
        self._deployed_at: dict[Address, int] = {}

    def deploy(self, contract: Contract, step: int) -> Contract:
        if contract.address in self._contracts:
            raise ValueError(f"{contract.id} already deployed")
        self._contracts[contract.address] = contract
        self._deployed_at[contract.address] = step
        return contract

    def deployment_step(self, address: Address) -> int | None:
        return self._deployed_at.get(address)

    def lookup(self, address: Address, now: int) -> Contract:
        c = self._contracts.get(address)
        if c is None:
            raise ContractException(ErrorKind.NOT_DEPLOYED, f"no contract at {address.id}")
        if now < self._deployed_at[address]:
            raise ContractException(
                ErrorKind.NOT_DEPLOYED,
                f"{address.id} is deployed at step {self._deployed_at[address]}, called at step {now}",
            )
        return c

    def __contains__(self, address) -> bool:
        return address in self._contracts

    def __iter__(self):
        return iter(self._contracts.values())

    def __len__(self) -> int:
        return len(self._contracts)


class ExecutionSession:
    """Shared state of one transaction's call tree.

    ``base`` is any mapping of StateKey to Entry and is never mutated. Writes
    stay in ``rwset.writes`` and later reads of the same key see them. A write
    to a key that was not read first still records the base version in
    ``rwset.reads``, so validation treats blind writes like read-modify-write.
    """

    def __init__(self, registry: ContractRegistry, base: Mapping[StateKey, Entry], now: int):
        self.registry = registry
        self.base = base
        self.now = now
        self.rwset = ReadWriteSet()
        self.call_depth = 0

    def _base_version(self, key: StateKey):
        e = self.base.get(key)
        return None if e is None else e.version

    def read(self, key: StateKey):
        writes = self.rwset.writes
        if key in writes:
            return writes[key]
        e = self.base.get(key)
        reads = self.rwset.reads
        if key not in reads:
            reads[key] = None if e is None else e.version
        return NULL if e is None else e.value

    def write(self, key: StateKey, value) -> None:
        reads = self.rwset.reads
        if key not in reads:
            reads[key] = self._base_version(key)
        self.rwset.writes[key] = value

    def call_contract(self, caller: Address, callee: Address, method: str, args: tuple) -> Any:
        if self.call_depth >= MAX_CALL_DEPTH:
            raise ContractException(
                ErrorKind.DEPTH_EXCEEDED,
                f"call depth {self.call_depth + 1} exceeds {MAX_CALL_DEPTH}",
                caller.id if caller.kind is AddressKind.CONTRACT else None,
            )
        target = self.registry.lookup(callee, self.now)
        fn = target.dispatch(method)
        self.call_depth += 1
        try:
            return fn(CallContext(self, target, caller), *args)
        except ContractException as exc:
            if exc.origin is None:
                exc.origin = target.id
            raise
        finally:
            self.call_depth -= 1


class CallContext:
    """What a running contract method sees: its own storage, its caller, the clock."""

    __slots__ = ("session", "contract", "caller")

    def __init__(self, session: ExecutionSession, contract: Contract, caller: Address):
        self.session = session
        self.contract = contract
        self.caller = caller

    @property
    def now(self) -> int:
        return self.session.now

    @property
    def depth(self) -> int:
        return self.session.call_depth

    def read(self, path: str):
        return self.session.read(StateKey(self.contract.address, path))

    def write(self, path: str, value) -> None:
        self.session.write(StateKey(self.contract.address, path), value)

    def call(self, callee: Address, method: str, *args) -> Any:
        return self.session.call_contract(self.contract.address, callee, method, args)

    def require(self, condition: bool, message: str) -> None:
        if not condition:
            raise ContractException(ErrorKind.BAD_ARGUMENT, message, self.contract.id)


@dataclass(frozen=True)
class Execution:
    rwset: ReadWriteSet
    result: Any = None


def execute(registry: ContractRegistry, base: Mapping[StateKey, Entry], tx: Transaction) -> Execution:
    """Run ``tx`` against ``base`` and return its read/write set and result.

    Raises :class:`ContractException` on any fault; nothing is written in
    that case because ``base`` is never touched.
    """
    session = ExecutionSession(registry, base, tx.proposed_at_step)
    result = session.call_contract(tx.proposer, tx.target, tx.method, tx.args)
    return Execution(session.rwset, result)


def call_contract(session: ExecutionSession, caller: Address, callee: Address, method: str, args=()) -> Any:
    return session.call_contract(caller, callee, method, tuple(args))
