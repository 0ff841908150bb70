"""Debug sessions over trapped processes: inspect, proceed, restart, step.

A trap (unhandled exception or user interrupt) suspends its process with
the frame stack intact and opens a session. Session commands run on the
VM lane between quanta, so the suspended stack is never mutated
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernel
from .errors import NotSteppable, SessionClosed
from .plugins import mop_reflect
from .values import (
    ExceptionValue,
    ForeignRef,
    ObjectRef,
    neutral_type_name,
    snapshot_value,
)

STEP_CAP = 2_000_000  # instructions one step_over may execute before giving up


@dataclass
class DebugEvent:
    kind: str  # UnhandledException | UserInterrupt
    pid: int
    stack: list  # FrameView list, top first, captured at trap time
    title: str
    exception: ExceptionValue = None
    snapshot: bytes = None


@dataclass
class DebugSession:
    session_id: int
    event: DebugEvent
    selected_frame: int = 0
    open: bool = True
    repaired: bool = False
    resume_state: tuple = ("runnable", None)
    process: object = field(default=None, repr=False)


@dataclass
class InspectView:
    class_name: str
    display: str
    slots: list
    viewer_language: str


def inspect_value(ctx, value, viewer_language):
    """Reflect any value for the inspector; live state, never cached."""
    if isinstance(value, (ObjectRef, ForeignRef)):
        view = mop_reflect(ctx, value)
        return InspectView(view.class_name, view.display, view.slots,
                           viewer_language)
    display = ctx.display(value, viewer_language)
    slots = []
    if type(value) is list:
        slots = [(str(i), snapshot_value(v)) for i, v in enumerate(value)]
    elif type(value) is ExceptionValue:
        slots = [("message", value.message)]
    return InspectView(neutral_type_name(value), display, slots, viewer_language)


class Debugger:
    """Owns all open sessions of one VM."""

    def __init__(self, vm):
        self.vm = vm
        self.sessions = {}
        self._next_id = 1

    def _new_session(self, event, proc, resume_state):
        session = DebugSession(session_id=self._next_id, event=event,
                               resume_state=resume_state, process=proc)
        self._next_id += 1
        self.sessions[session.session_id] = session
        proc.state = "suspended"
        proc.event = event
        proc.session = session
        self.vm.emit({"event": "trap", "session": session.session_id,
                      "pid": proc.id, "kind": event.kind, "title": event.title})
        return session

    def on_trap(self, proc, exc, snapshot):
        event = DebugEvent(kind="UnhandledException", pid=proc.id,
                           stack=kernel.stack_view(proc.task.frames),
                           title=f"{exc.class_name}: {exc.message}",
                           exception=exc, snapshot=snapshot)
        return self._new_session(event, proc, ("runnable", None))

    def on_interrupt(self, proc):
        resume = (proc.state, proc.wake)
        event = DebugEvent(kind="UserInterrupt", pid=proc.id,
                           stack=kernel.stack_view(proc.task.frames),
                           title="User Interrupt")
        self._new_session(event, proc, resume)
        return event

    def get(self, session_id):
        session = self.sessions.get(session_id)
        if session is None or not session.open:
            raise SessionClosed(session_id)
        return session

    def close(self, session):
        session.open = False

    def stack(self, session_id):
        session = self.get(session_id)
        return kernel.stack_view(session.process.task.frames)

    def _internal_index(self, session, view_index):
        frames = session.process.task.frames
        from .errors import BadIndex

        if not 0 <= view_index < len(frames):
            raise BadIndex(view_index)
        return len(frames) - 1 - view_index

    def evaluate(self, session_id, view_index, source):
        session = self.get(session_id)
        frames = session.process.task.frames
        internal = self._internal_index(session, view_index)
        return kernel.evaluate_in_frame(self.vm.ctx, frames, internal, source)

    def restart(self, session_id, view_index, new_source=None):
        session = self.get(session_id)
        proc = session.process
        internal = self._internal_index(session, view_index)
        kernel.restart_frame(self.vm.ctx, proc.task.frames, internal, new_source)
        proc.task.unwinding = False
        session.repaired = True
        session.selected_frame = view_index
        return kernel.stack_view(proc.task.frames)

    def proceed(self, session_id):
        """Resume an interrupt, or unwind a trapped exception to termination."""
        session = self.get(session_id)
        proc = session.process
        self.close(session)
        proc.event = None
        proc.session = None
        if session.event.kind == "UserInterrupt" or session.repaired:
            state, wake = session.resume_state
            if session.repaired:
                state, wake = "runnable", None
            proc.state = state
            proc.wake = wake
            return {"resumed": True}
        exc = session.event.exception
        out = kernel.start_unwind(proc.task, exc)
        if out is None:
            # an ensure block took over; the process runs it to termination
            proc.state = "runnable"
            return {"resumed": True}
        self.vm.finish_process(proc, out)
        return {"result": exc}

    def step_over(self, session_id):
        """Run the selected frame to its next source line (or its return)."""
        session = self.get(session_id)
        if session.event.kind != "UserInterrupt" and not session.repaired:
            raise NotSteppable()
        proc = session.process
        task = proc.task
        frames = task.frames
        internal = self._internal_index(session, session.selected_frame)
        target_depth = internal + 1
        start_line = frames[internal].line
        steps = 0
        while steps < STEP_CAP:
            if len(frames) == target_depth and steps > 0:
                top = frames[-1]
                if top.ip < len(top.code.instructions):
                    next_line = top.code.line_table[top.ip]
                    if next_line != start_line:
                        top.line = next_line
                        break
            out = kernel.step(task, 1)
            steps += out.executed
            proc.consumed += out.executed
            if out.kind == "yielded":
                if len(frames) < target_depth:
                    break  # selected frame returned
                continue
            if out.kind == "blocked":
                continue  # sleeps do not wait under the stepper
            if out.kind == "trapped":
                exc = out.exc
                session.event = DebugEvent(
                    kind="UnhandledException", pid=proc.id,
                    stack=kernel.stack_view(frames),
                    title=f"{exc.class_name}: {exc.message}",
                    exception=exc, snapshot=out.snapshot)
                session.repaired = False
                proc.event = session.event
                break
            # completed or failed: the process ended under the stepper
            self.close(session)
            proc.event = None
            proc.session = None
            self.vm.finish_process(proc, out)
            return []
        session.selected_frame = 0
        return kernel.stack_view(frames)
