"""Shared helpers for driving VMs and comparing against the oracle."""

from __future__ import annotations

import polyvm
from polyvm.kernel import GuestObject
from polyvm.values import ForeignRef, ObjectRef

from reference_eval import RefObject


def run_source(language, source, budget=10_000, bindings=None, vm=None):
    """Spawn and drive one program; returns (vm, process)."""
    if vm is None:
        vm = polyvm.VM(budget=budget)
    pid = vm.spawn_process(language, source, bindings)
    return vm, vm.run_process(pid)


def run_to_end(vm, pid, max_traps=100):
    """Drive to termination, proceeding through traps (headless style)."""
    proc = vm.processes[pid]
    for _ in range(max_traps):
        vm.run_process(pid)
        if proc.state == "terminated":
            return proc
        vm.debugger.proceed(proc.session.session_id)
    raise RuntimeError(f"process {pid} did not settle")


def values_match(ctx, vm_value, ref_value):
    """Structural agreement between a VM value and a reference-evaluator value."""
    if isinstance(ref_value, RefObject):
        if not isinstance(vm_value, (ObjectRef, ForeignRef)):
            return False
        entry = ctx.deref(vm_value)
        if not isinstance(entry, GuestObject):
            return False
        if entry.cls.name != ref_value.cls.name:
            return False
        if set(entry.slots) != set(ref_value.slots):
            return False
        return all(values_match(ctx, entry.slots[k], ref_value.slots[k])
                   for k in entry.slots)
    if isinstance(ref_value, list):
        return (isinstance(vm_value, list) and len(vm_value) == len(ref_value)
                and all(values_match(ctx, a, b)
                        for a, b in zip(vm_value, ref_value)))
    return type(vm_value) == type(ref_value) and vm_value == ref_value


AVERAGE_PROGRAM = """\
def average(iterable):
    total = 0
    for x in iterable:
        total = total + x
    return total / len(iterable)
average([])
"""

GUARDED_AVERAGE = """\
def average(iterable):
    if len(iterable) == 0:
        return 0
    total = 0
    for x in iterable:
        total = total + x
    return total / len(iterable)
"""
