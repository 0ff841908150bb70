"""Cross-language calls and the pipeline runner.

`xeval` is the in-guest escape hatch: it compiles foreign source and pushes
its root frame onto the *calling* process's stack, so mixed-language stacks
stay one ordinary frame walk and budgets/interrupts apply uniformly.
Pipelines chain per-cell processes, handing each cell the previous result
as the local `it`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CompileError, UnknownLanguage
from .kernel import Frame, FramePush, GuestError
from .plugins import mop_invoke
from .values import ExceptionValue


def xeval_builtin(task, frame, args):
    """Guest builtin xeval(language, source, argument=nil)."""
    ctx = task.ctx
    plugin = ctx.plugin(frame.language)
    if len(args) not in (2, 3):
        raise GuestError(plugin.exc_arity("xeval", 2, len(args)))
    language, source = args[0], args[1]
    argument = args[2] if len(args) == 3 else None
    if type(language) is not str or type(source) is not str:
        raise GuestError(ExceptionValue(
            "TypeError", "xeval(language, source, argument) takes text arguments"))
    try:
        target = ctx.plugin(language)
    except UnknownLanguage:
        raise GuestError(ExceptionValue(
            "ForeignCompileError", f"unknown language '{language}'")) from None
    try:
        unit = target.compile_module(source)
    except CompileError as err:
        raise GuestError(ExceptionValue("ForeignCompileError", str(err))) from None
    bound = ctx.convert(argument, language, source=frame.language)
    nested = Frame(unit, locals_={"it": bound}, return_mode="xeval")
    return FramePush(nested)


def cross_invoke(ctx, target, selector, args, policy=None, caller=None):
    """Invoke a method through a foreign reference from tool context."""
    return mop_invoke(ctx, target, selector, args, caller=caller, policy=policy)


# --- pipelines ---


@dataclass
class PipelineCell:
    language: str
    source: str


@dataclass
class PipelineResult:
    per_cell: list  # ordered (index, value, display)
    final: object


SEPARATOR_PREFIX = "--- "


def parse_pipeline_file(text):
    """Cells separated by `--- <language>` lines; leading header ignored."""
    cells = []
    current = None
    for raw in text.split("\n"):
        if raw.startswith(SEPARATOR_PREFIX):
            language = raw[len(SEPARATOR_PREFIX):].strip()
            if not language:
                raise ValueError("separator names no language")
            if current is not None:
                cells.append(PipelineCell(current[0], "\n".join(current[1])))
            current = (language, [])
        elif current is not None:
            current[1].append(raw)
    if current is not None:
        cells.append(PipelineCell(current[0], "\n".join(current[1])))
    if not cells:
        raise ValueError("pipeline file has no `--- <language>` separators")
    return cells


class PipelineRun:
    """Sequential per-cell processes; a trap in a cell pauses the chain."""

    def __init__(self, vm, cells, initial=None, policy=None):
        if not cells:
            raise ValueError("a pipeline needs at least one cell")
        self.vm = vm
        self.cells = [PipelineCell(c.language, c.source) if not isinstance(c, PipelineCell)
                      else c for c in cells]
        self.policy = policy
        self.id = vm.allocate_pid()
        self.per_cell = []
        self.cell_pids = []
        self.state = "running"  # running | done | failed
        self.final = None
        self.index = -1
        self.current_pid = None
        self._prev_value = initial
        self._prev_language = None
        # every cell must compile before anything runs; later cells start
        # from inside the scheduler, where a raise has no caller to reach
        for index, cell in enumerate(self.cells):
            plugin = vm.registry.get(cell.language)
            if plugin is None:
                raise UnknownLanguage(cell.language)
            try:
                plugin.compile_module(cell.source)
            except CompileError as err:
                raise CompileError(err.line, err.column,
                                   f"cell {index}: {err.message}") from None
        vm.add_termination_listener(self._on_terminated)
        self._start_next()

    def _start_next(self):
        self.index += 1
        cell = self.cells[self.index]
        bound = self.vm.ctx.convert(
            self._prev_value, cell.language,
            source=self._prev_language or cell.language, policy=self.policy)
        self.current_pid = self.vm.spawn_process(cell.language, cell.source,
                                                 {"it": bound})
        self.cell_pids.append(self.current_pid)

    def _on_terminated(self, proc):
        if proc.id != self.current_pid or self.state != "running":
            return
        if proc.failed:
            self.state = "failed"
            self.final = proc.result
            self.vm.emit({"event": "completed", "pid": self.id,
                          "failed": True, "value": proc.result,
                          "language": self.cells[self.index].language,
                          "pipeline": True})
            return
        cell = self.cells[self.index]
        display = self.vm.ctx.display(proc.result, cell.language)
        self.per_cell.append((self.index, proc.result, display))
        self.vm.emit({"event": "cell", "pid": self.id, "index": self.index,
                      "display": display})
        if self.index + 1 == len(self.cells):
            self.state = "done"
            self.final = proc.result
            self.vm.emit({"event": "completed", "pid": self.id, "failed": False,
                          "value": proc.result, "language": cell.language,
                          "pipeline": True})
        else:
            self._prev_value = proc.result
            self._prev_language = cell.language
            self._start_next()

    @property
    def paused(self):
        if self.state != "running" or self.current_pid is None:
            return False
        return self.vm.processes[self.current_pid].state == "suspended"

    def result(self):
        return PipelineResult(per_cell=list(self.per_cell), final=self.final)


def run_pipeline(vm, cells, initial=None, policy=None):
    """Start a pipeline and drive the VM until it finishes or pauses.

    Returns the PipelineRun; check `.state` ("done"/"failed") or `.paused`.
    """
    run = PipelineRun(vm, cells, initial=initial, policy=policy)
    vm.drive(until=lambda: run.state in ("done", "failed") or run.paused)
    return run
