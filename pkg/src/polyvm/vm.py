"""Green processes and the cooperative scheduler.

One logical lane runs every interpreter. External callers (service, CLI,
other threads) interact only by posting commands onto a thread-safe queue;
the scheduler drains all pending commands before granting the next quantum,
which bounds command latency to at most one quantum of guest instructions.
"""

from __future__ import annotations

import queue
import time
from concurrent.futures import Future
from dataclasses import dataclass, field

from . import kernel
from .debug import Debugger
from .errors import InvalidBudget, NotInterruptible, NotRunnable, UnknownLanguage
from .plugins import standard_registry
from .values import ConversionPolicy

DEFAULT_BUDGET = 10_000


class GreenProcess:
    """A schedulable unit: one language-tagged frame stack plus accounting."""

    def __init__(self, pid, language, task):
        self.id = pid
        self.language = language
        self.task = task
        self.state = "runnable"  # runnable running suspended blocked terminated
        self.wake = None
        self.consumed = 0
        self.result = None
        self.failed = False
        self.event = None
        self.session = None

    @property
    def frames(self):
        return self.task.frames

    @property
    def transcript(self):
        return "".join(self.task.transcript)

    def current_line(self):
        if self.task.frames:
            return self.task.frames[-1].line
        return None

    def __repr__(self):
        return f"<process {self.id} {self.language} {self.state}>"


@dataclass
class TickReport:
    ran: object = None  # pid or None
    outcome: object = None
    drained: int = 0
    idle: bool = True
    woken: list = field(default_factory=list)


class VM:
    """The virtual machine: plugin registry, processes, scheduler, debugger."""

    def __init__(self, registry=None, budget=DEFAULT_BUDGET, policy=None,
                 clock=None):
        self.registry = registry if registry is not None else standard_registry()
        self.ctx = kernel.ExecContext(self.registry.plugins,
                                      policy or ConversionPolicy(), clock)
        self._check_budget(budget)
        self.budget = budget
        self.processes = {}
        self._next_pid = 1
        self._last_ran = 0
        self.commands = queue.Queue()
        self._subscribers = []
        self._termination_listeners = []
        self.debugger = Debugger(self)
        self.tick_seq = 0

    # --- plumbing ---

    def register_plugin(self, plugin):
        language = self.registry.register(plugin)
        self.ctx.add_plugin(plugin)
        return language

    def subscribe(self, callback):
        self._subscribers.append(callback)
        return callback

    def unsubscribe(self, callback):
        if callback in self._subscribers:
            self._subscribers.remove(callback)

    def emit(self, event):
        for callback in list(self._subscribers):
            callback(event)

    def add_termination_listener(self, callback):
        self._termination_listeners.append(callback)

    def post(self, fn):
        """Enqueue a command from any thread; returns a Future for its result."""
        future = Future()
        self.commands.put((fn, future, self.tick_seq))
        return future

    def allocate_pid(self):
        pid = self._next_pid
        self._next_pid += 1
        return pid

    # --- processes ---

    def spawn_process(self, language, source, bindings=None):
        plugin = self.registry.get(language)
        if plugin is None:
            raise UnknownLanguage(language)
        unit = plugin.compile_module(source)
        task = kernel.Task(self.ctx)
        task.frames.append(kernel.Frame(unit, locals_=dict(bindings or {})))
        pid = self.allocate_pid()
        self.processes[pid] = GreenProcess(pid, language, task)
        return pid

    def set_budget(self, quantum):
        self._check_budget(quantum)
        previous, self.budget = self.budget, quantum
        return previous

    @staticmethod
    def _check_budget(quantum):
        if type(quantum) is not int or quantum < 1:
            raise InvalidBudget(quantum)

    def process(self, pid):
        proc = self.processes.get(pid)
        if proc is None:
            raise NotRunnable(pid)
        return proc

    def run_quantum(self, pid):
        proc = self.process(pid)
        if proc.state != "runnable":
            raise NotRunnable(pid)
        proc.state = "running"
        out = kernel.step(proc.task, self.budget)
        proc.consumed += out.executed
        if out.kind == "yielded":
            proc.state = "runnable"
        elif out.kind == "blocked":
            proc.state = "blocked"
            proc.wake = out.wake
        elif out.kind == "trapped":
            self.debugger.on_trap(proc, out.exc, out.snapshot)
        else:
            self.finish_process(proc, out)
        return out

    def finish_process(self, proc, out):
        proc.state = "terminated"
        proc.wake = None
        if out.kind == "failed":
            proc.result = out.exc
            proc.failed = True
        else:
            proc.result = out.value
        self.emit({"event": "completed", "pid": proc.id, "value": proc.result,
                   "failed": proc.failed, "language": proc.language})
        for listener in list(self._termination_listeners):
            listener(proc)

    def interrupt(self, pid):
        proc = self.process(pid)
        if proc.state not in ("runnable", "blocked"):
            raise NotInterruptible(pid, proc.state)
        return self.debugger.on_interrupt(proc)

    # --- scheduling ---

    def _drain_commands(self):
        drained = 0
        while True:
            try:
                fn, future, _enqueued_at = self.commands.get_nowait()
            except queue.Empty:
                return drained
            drained += 1
            if not future.set_running_or_notify_cancel():
                continue
            try:
                future.set_result(fn(self))
            except BaseException as exc:  # noqa: BLE001 - relay to the caller
                future.set_exception(exc)

    def _wake_blocked(self):
        now = self.ctx.clock()
        woken = []
        for proc in self.processes.values():
            if proc.state == "blocked" and proc.wake is not None and proc.wake <= now:
                proc.state = "runnable"
                proc.wake = None
                woken.append(proc.id)
        return woken

    def _next_runnable(self):
        pids = sorted(p for p, proc in self.processes.items()
                      if proc.state == "runnable")
        if not pids:
            return None
        for pid in pids:
            if pid > self._last_ran:
                return pid
        return pids[0]

    def scheduler_tick(self):
        """Drain commands, wake sleepers, then grant one quantum round-robin."""
        self.tick_seq += 1
        drained = self._drain_commands()
        woken = self._wake_blocked()
        pid = self._next_runnable()
        if pid is None:
            return TickReport(drained=drained, idle=True, woken=woken)
        self._last_ran = pid
        outcome = self.run_quantum(pid)
        return TickReport(ran=pid, outcome=outcome, drained=drained, idle=False,
                          woken=woken)

    # --- drive helpers (used by CLI, tests, and the synchronous pipeline) ---

    def has_runnable(self):
        return any(p.state == "runnable" for p in self.processes.values())

    def next_wake(self):
        wakes = [p.wake for p in self.processes.values()
                 if p.state == "blocked" and p.wake is not None]
        return min(wakes) if wakes else None

    def drive(self, until=None, max_ticks=10_000_000, wait_for_wake=True):
        """Tick until `until()` is true or nothing can make progress.

        Returns True when the predicate was met. Sleeping processes are
        waited for (in real time) unless wait_for_wake is false.
        """
        for _ in range(max_ticks):
            if until is not None and until():
                return True
            if not self.has_runnable() and self.commands.empty():
                wake = self.next_wake()
                if wake is None:
                    return until() if until is not None else True
                delay = wake - self.ctx.clock()
                if delay > 0:
                    if not wait_for_wake:
                        return until() if until is not None else True
                    time.sleep(min(delay, 0.05))
            self.scheduler_tick()
        return False

    def run_process(self, pid, max_ticks=10_000_000):
        """Drive until the process is terminated or suspended; returns it."""
        proc = self.process(pid)
        self.drive(until=lambda: proc.state in ("terminated", "suspended"),
                   max_ticks=max_ticks)
        return proc
