import pytest

from epochsim.contracts import VALIDATOR, Validator, deploy_tepc
from epochsim.exceptions import ContractException, ErrorKind
from epochsim.ledger import Address, AddressKind, StateKey, TxFactory, WorldState, contract
from epochsim.runtime import MAX_CALL_DEPTH, CallContext, Contract, ContractRegistry, ExecutionSession, entry, execute
from epochsim.values import NULL, Sample, num

SRC = Address(AddressKind.SOURCE, "u0")


class Echo(Contract):
    @entry("write_then_read")
    def write_then_read(self, ctx: CallContext, v):
        ctx.write("x", v)
        return ctx.read("x")

    @entry("recurse")
    def recurse(self, ctx: CallContext, n):
        ctx.write(f"depth/{n}", n)
        return ctx.call(self.address, "recurse", n + 1)

    @entry("partial")
    def partial(self, ctx: CallContext):
        ctx.write("y", 1)
        return ctx.read("missing") + 1


def _registry(step=0):
    reg = ContractRegistry()
    reg.deploy(Echo("Echo"), step)
    deploy_tepc(reg, 12)
    return reg


def _tx(target, method, *args, step=20):
    return TxFactory().make(SRC, target, method, args, step)


def test_validate_monthly_saving_has_no_writes():
    ex = execute(_registry(), WorldState(), _tx(VALIDATOR, "validateMonthlySaving", num(5)))
    assert ex.result is True
    assert ex.rwset.writes == {}


def test_null_sample_faults_in_check_variable():
    tx = _tx(VALIDATOR, "checkVariable", Sample(NULL, num(1000), num(50), 1, 2, "u0"))
    with pytest.raises(ContractException) as info:
        execute(_registry(), WorldState(), tx)
    assert info.value.kind is ErrorKind.NULL_VALUE
    assert info.value.origin == "Validator"


def test_call_before_deployment_is_not_deployed():
    with pytest.raises(ContractException) as info:
        execute(_registry(), WorldState(), _tx(VALIDATOR, "validateMonthlySaving", num(5), step=10))
    assert info.value.kind is ErrorKind.NOT_DEPLOYED


def test_unknown_contract_and_method():
    with pytest.raises(ContractException) as info:
        execute(_registry(), WorldState(), _tx(contract("Nope"), "x"))
    assert info.value.kind is ErrorKind.NOT_DEPLOYED
    with pytest.raises(ContractException) as info:
        execute(_registry(), WorldState(), _tx(VALIDATOR, "nope"))
    assert info.value.kind is ErrorKind.UNKNOWN_METHOD


def test_in_range_check_variable_returns_sample_unchanged():
    s = Sample(num(20), num(1000), num(50), 7, 2, "u1")
    assert execute(_registry(), WorldState(), _tx(VALIDATOR, "checkVariable", s)).result == s


def test_read_your_writes_without_touching_base():
    base = WorldState()
    ex = execute(_registry(), base, _tx(contract("Echo"), "write_then_read", num(3)))
    assert ex.result == num(3)
    assert len(base) == 0
    key = StateKey(contract("Echo"), "x")
    assert ex.rwset.reads == {key: None}  # blind write recorded at the base version


def test_depth_guard():
    with pytest.raises(ContractException) as info:
        execute(_registry(), WorldState(), _tx(contract("Echo"), "recurse", 1))
    assert info.value.kind is ErrorKind.DEPTH_EXCEEDED
    assert str(MAX_CALL_DEPTH) in info.value.message


def test_fault_leaves_base_untouched():
    base = WorldState()
    with pytest.raises(ContractException):
        execute(_registry(), base, _tx(contract("Echo"), "partial"))
    assert len(base) == 0


def test_execution_is_deterministic():
    tx = _tx(contract("Echo"), "write_then_read", num(9))
    a = execute(_registry(), WorldState(), tx)
    b = execute(_registry(), WorldState(), tx)
    assert a == b


def test_double_deploy_rejected():
    reg = ContractRegistry()
    reg.deploy(Validator(), 0)
    with pytest.raises(ValueError):
        reg.deploy(Validator(), 1)
    assert VALIDATOR in reg and len(reg) == 1


def test_session_records_first_read_version():
    key = StateKey(contract("Echo"), "x")
    base = WorldState()
    base.apply({key: 1})
    base.apply({key: 2})
    s = ExecutionSession(_registry(), base, 20)
    assert s.read(key) == 2
    s.write(key, 5)
    assert s.read(key) == 5
    assert s.rwset.reads == {key: 1}


def test_entries_listed():
    assert Validator.methods() == ["checkVariable", "validateMonthlySaving"]
