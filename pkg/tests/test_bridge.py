"""Cross-language calls, mixed stacks, and the pipeline runner."""

import pytest

from polyvm import bridge, plugins
from polyvm.errors import CompileError
from polyvm.values import ConversionPolicy, ForeignRef

from support import run_source

STACK_RB = (
    "class Holder\n"
    "  def initialize\n"
    "    @items = [1, 2, 3]\n"
    "  end\n"
    "  def pop\n"
    "    n = @items.size\n"
    "    v = @items[n - 1]\n"
    "    i = 0\n"
    "    fresh = []\n"
    "    while i < n - 1\n"
    "      fresh.push(@items[i])\n"
    "      i = i + 1\n"
    "    end\n"
    "    @items = fresh\n"
    "    v\n"
    "  end\n"
    "end\n"
    "Holder.new\n")


class TestXeval:
    def test_minipy_calls_minirb_downcase(self, vm):
        _, proc = run_source("minipy",
                             'xeval("minirb", "it.downcase", "HeLLo")', vm=vm)
        assert proc.result == "hello"

    def test_minirb_calls_minipy_len(self, vm):
        _, proc = run_source("minirb", 'xeval("minipy", "len(it)", [1, 2, 3])',
                             vm=vm)
        assert proc.result == 3

    def test_unknown_language_raises_foreign_compile_error(self, vm):
        source = (
            "try:\n"
            "    xeval('nosuch', '1')\n"
            "except ForeignCompileError as e:\n"
            "    str(e)\n")
        _, proc = run_source("minipy", source, vm=vm)
        assert proc.state == "terminated"
        assert "nosuch" in proc.result

    def test_compile_error_surfaces_as_guest_exception(self, vm):
        source = (
            "try:\n"
            "    xeval('minirb', 'def broken(')\n"
            "except ForeignCompileError as e:\n"
            "    'caught'\n")
        _, proc = run_source("minipy", source, vm=vm)
        assert proc.result == "caught"

    def test_mixed_stack_language_order_on_trap(self, vm):
        source = 'xeval("minirb", "xeval(\\"minipy\\", \\"1 / 0\\")")'
        _, proc = run_source("minipy", source, vm=vm)
        assert proc.state == "suspended"
        langs = [view.language for view in proc.event.stack]
        assert langs == ["minipy", "minirb", "minipy"]

    def test_nested_xeval_depth_groups(self, vm):
        source = (
            'xeval("minirb", "xeval(\\"minipy\\", \\"it + 1\\", 1 + it)", 40)')
        _, proc = run_source("minipy", source, vm=vm)
        assert proc.result == 42

    def test_scalar_round_trip_through_noop_xeval(self, vm):
        _, proc = run_source("minipy", 'xeval("minirb", "it", "text")', vm=vm)
        assert proc.result == "text"

    def test_raise_propagates_to_caller_handler(self, vm):
        source = (
            "try:\n"
            "    xeval('minirb', 'raise CustomError, \"from rb\"')\n"
            "except CustomError as e:\n"
            "    str(e)\n")
        _, proc = run_source("minipy", source, vm=vm)
        assert proc.result == "from rb"


class TestCrossInvoke:
    def test_pop_through_foreign_ref(self, vm):
        _, proc = run_source("minirb", STACK_RB, vm=vm)
        foreign = vm.ctx.convert(proc.result, "minipy", source="minirb")
        assert isinstance(foreign, ForeignRef)
        value = bridge.cross_invoke(vm.ctx, foreign, "pop", [], caller="minipy")
        assert value == 3
        assert plugins.mop_slot_get(vm.ctx, proc.result, "@items") == [1, 2]

    def test_auto_convert_off_returns_foreign_ref(self, vm):
        _, proc = run_source("minirb", STACK_RB, vm=vm)
        foreign = vm.ctx.convert(proc.result, "minipy", source="minirb")
        policy = ConversionPolicy(auto_convert=False)
        value = bridge.cross_invoke(vm.ctx, foreign, "pop", [], policy=policy,
                                    caller="minipy")
        assert isinstance(value, ForeignRef)

    def test_guest_exception_crosses_into_caller_handler(self, vm):
        source = (
            "class Thrower\n"
            "  def go\n"
            "    raise CustomError, \"boom\"\n"
            "  end\n"
            "end\n"
            "Thrower.new\n")
        _, proc = run_source("minirb", source, vm=vm)
        ref = proc.result
        py = (
            "try:\n"
            "    target.go()\n"
            "except CustomError as e:\n"
            "    'handled ' + str(e)\n")
        foreign = vm.ctx.convert(ref, "minipy", source="minirb")
        _, proc2 = run_source("minipy", py, bindings={"target": foreign}, vm=vm)
        assert proc2.result == "handled boom"

    def test_unhandled_raise_in_method_traps_with_mixed_stack(self, vm):
        source = (
            "class Thrower\n"
            "  def go\n"
            "    raise CustomError, \"boom\"\n"
            "  end\n"
            "end\n"
            "Thrower.new\n")
        _, proc = run_source("minirb", source, vm=vm)
        foreign = vm.ctx.convert(proc.result, "minipy", source="minirb")
        _, proc2 = run_source("minipy", "target.go()",
                              bindings={"target": foreign}, vm=vm)
        assert proc2.state == "suspended"
        langs = [v.language for v in proc2.event.stack]
        assert langs == ["minirb", "minipy"]


class TestPipelineFile:
    def test_parse_with_header(self):
        text = ("notes ignored\n"
                "--- minipy\n"
                "1 + 1\n"
                "--- minirb\n"
                "it * 2\n")
        cells = bridge.parse_pipeline_file(text)
        assert [(c.language, c.source.strip()) for c in cells] == [
            ("minipy", "1 + 1"), ("minirb", "it * 2")]

    def test_separator_without_language_fails(self):
        with pytest.raises(ValueError):
            bridge.parse_pipeline_file("--- \nx\n")

    def test_no_separator_fails(self):
        with pytest.raises(ValueError):
            bridge.parse_pipeline_file("just text\n")


class TestPipelineRun:
    def test_single_cell_equals_plain_eval(self, vm):
        run = bridge.run_pipeline(vm, [bridge.PipelineCell("minipy", "1 + 2")])
        assert run.state == "done"
        assert run.final == 3
        assert run.result().per_cell[0][2] == "3"

    def test_values_flow_between_cells(self, vm):
        cells = [
            bridge.PipelineCell("minipy", "'HeLLo World'"),
            bridge.PipelineCell("minirb", 'it.downcase.split(" ")'),
            bridge.PipelineCell("minipy", "len(it)"),
        ]
        run = bridge.run_pipeline(vm, cells)
        assert run.state == "done"
        assert run.final == 2

    def test_initial_value_bound_to_it(self, vm):
        run = bridge.run_pipeline(vm, [bridge.PipelineCell("minipy", "it * 2")],
                                  initial=21)
        assert run.final == 42

    def test_cell_locality_no_leakage(self, vm):
        cells = [
            bridge.PipelineCell("minipy", "secret = 99\nsecret"),
            bridge.PipelineCell("minipy", "secret"),
        ]
        run = bridge.run_pipeline(vm, cells)
        assert run.paused  # NameError trap in cell 2
        proc = vm.processes[run.current_pid]
        assert proc.event.exception.class_name == "NameError"

    def test_trap_pauses_then_restart_completes(self, vm):
        cells = [
            bridge.PipelineCell("minipy", "6"),
            bridge.PipelineCell("minirb", "it / 0"),
            bridge.PipelineCell("minipy", "it + 1"),
        ]
        run = bridge.run_pipeline(vm, cells)
        assert run.paused
        proc = vm.processes[run.current_pid]
        session = proc.session
        vm.debugger.restart(session.session_id, 0, "it / 2")
        vm.debugger.proceed(session.session_id)
        vm.drive(until=lambda: run.state in ("done", "failed"))
        assert run.state == "done"
        assert run.final == 4  # (6 / 2) + 1

    def test_compile_error_names_cell(self, vm):
        with pytest.raises(CompileError) as err:
            bridge.PipelineRun(vm, [bridge.PipelineCell("minipy", "def f(:")])
        assert "cell 0" in err.value.message

    def test_compile_error_in_later_cell_caught_before_start(self, vm):
        # later cells start inside the scheduler, so their sources must be
        # rejected up front rather than blowing up the VM lane mid-tick
        with pytest.raises(CompileError) as err:
            bridge.PipelineRun(vm, [
                bridge.PipelineCell("minipy", "1"),
                bridge.PipelineCell("minirb", "def broken("),
            ])
        assert "cell 1" in err.value.message
        assert vm.processes == {}  # rejected before anything started

    def test_per_cell_events_emitted(self, vm):
        events = []
        vm.subscribe(events.append)
        cells = [bridge.PipelineCell("minipy", "1"),
                 bridge.PipelineCell("minipy", "it + 1")]
        run = bridge.run_pipeline(vm, cells)
        assert run.state == "done"
        kinds = [(e["event"], e.get("index")) for e in events
                 if e.get("pid") == run.id]
        assert ("cell", 0) in kinds and ("cell", 1) in kinds
        assert any(e["event"] == "completed" and e.get("pipeline")
                   for e in events if e.get("pid") == run.id)
