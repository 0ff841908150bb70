"""Headless entry points: run guest files, pipelines, the server, a REPL.

Exit statuses: 0 normal, 1 guest program failed with an exception,
2 usage/format errors. Transcript goes to stdout, diagnostics to stderr.
Traps auto-proceed in headless mode so batch runs never hang.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import bridge
from .debug import inspect_value
from .errors import CompileError, VmError
from .values import ConversionPolicy
from .vm import DEFAULT_BUDGET, VM

EXTENSIONS = {".mpy": "minipy", ".mrb": "minirb"}


def _usage_error(message):
    print(f"polyvm: {message}", file=sys.stderr)
    return 2


def _budget_from_env():
    raw = os.environ.get("POLYVM_BUDGET")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        return -1
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=None,
                        help="instructions per scheduling quantum")
    common.add_argument("--lang", default=None,
                        help="override the language chosen by file extension")
    common.add_argument("--no-auto-convert", action="store_true",
                        help="pass every boundary value as a foreign reference")
    parser = argparse.ArgumentParser(prog="polyvm",
                                     description="cooperative multi-language VM")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a guest source file")
    run.add_argument("path")
    pipe = sub.add_parser("pipeline", parents=[common],
                          help="run a multi-cell pipeline file")
    pipe.add_argument("path")
    serve = sub.add_parser("serve", parents=[common],
                           help="serve the wire protocol and web UI")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    repl = sub.add_parser("repl", parents=[common], help="interactive session")
    repl.add_argument("language", nargs="?", default="minipy")
    return parser


def make_vm(args):
    budget = args.budget
    if budget is None:
        budget = _budget_from_env()
        if budget == -1:
            raise ValueError("POLYVM_BUDGET is not an integer")
    if budget is None:
        budget = DEFAULT_BUDGET
    if budget < 1:
        raise ValueError("budget must be >= 1")
    policy = ConversionPolicy(auto_convert=not args.no_auto_convert)
    return VM(budget=budget, policy=policy)


def _drain_transcript(proc, printed):
    text = proc.transcript
    if len(text) > printed:
        sys.stdout.write(text[printed:])
        sys.stdout.flush()
    return len(text)


def _drive_headless(vm, pid):
    """Run to termination, auto-proceeding traps; returns the process."""
    proc = vm.processes[pid]
    printed = 0
    last_event = None
    while True:
        vm.run_process(pid)
        printed = _drain_transcript(proc, printed)
        if proc.state == "terminated":
            return proc, last_event
        last_event = proc.session.event
        vm.debugger.proceed(proc.session.session_id)


def _print_failure(proc, event):
    exc = proc.result
    print(f"UNHANDLED {exc.class_name}: {exc.message}", file=sys.stderr)
    if event is not None:
        for view in event.stack:
            print(f"  [{view.language}] {view.name} (line {view.line})",
                  file=sys.stderr)


def cmd_run(args):
    path = args.path
    if not os.path.isfile(path):
        return _usage_error(f"no such file: {path}")
    language = args.lang
    if language is None:
        language = EXTENSIONS.get(os.path.splitext(path)[1])
    if language is None:
        return _usage_error(
            f"cannot infer language from {path!r}; use --lang")
    try:
        vm = make_vm(args)
    except ValueError as err:
        return _usage_error(str(err))
    with open(path, encoding="utf-8") as handle:
        source = handle.read()
    try:
        pid = vm.spawn_process(language, source)
    except CompileError as err:
        print(f"polyvm: compile error: {err}", file=sys.stderr)
        return 1
    except VmError as err:
        return _usage_error(str(err))
    proc, event = _drive_headless(vm, pid)
    if proc.failed:
        _print_failure(proc, event)
        return 1
    return 0


def cmd_pipeline(args):
    path = args.path
    if not os.path.isfile(path):
        return _usage_error(f"no such file: {path}")
    try:
        vm = make_vm(args)
    except ValueError as err:
        return _usage_error(str(err))
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        cells = bridge.parse_pipeline_file(text)
    except ValueError as err:
        return _usage_error(str(err))
    unknown = [c.language for c in cells
               if vm.registry.get(c.language) is None]
    if unknown:
        return _usage_error(f"unknown language in pipeline: {unknown[0]}")
    try:
        run = bridge.PipelineRun(vm, cells)
    except CompileError as err:
        print(f"polyvm: compile error: {err}", file=sys.stderr)
        return 1
    printed_cells = 0
    printed_chars = {}
    last_event = None

    def flush_cells(limit):
        nonlocal printed_cells
        while printed_cells < limit:
            pid = run.cell_pids[printed_cells]
            proc = vm.processes[pid]
            count = printed_chars.get(pid, 0)
            printed_chars[pid] = _drain_transcript(proc, count)
            print(run.per_cell[printed_cells][2])
            printed_cells += 1

    while run.state == "running":
        vm.drive(until=lambda: run.state != "running" or run.paused)
        flush_cells(len(run.per_cell))
        proc = vm.processes[run.current_pid]
        count = printed_chars.get(proc.id, 0)
        printed_chars[proc.id] = _drain_transcript(proc, count)
        if run.paused:
            last_event = proc.session.event
            vm.debugger.proceed(proc.session.session_id)
    flush_cells(len(run.per_cell))
    if run.state == "failed":
        proc = vm.processes[run.current_pid]
        _print_failure(proc, last_event)
        return 1
    print(vm.ctx.display(run.final, cells[-1].language))
    return 0


def cmd_serve(args):
    from .service import PortInUse, serve

    try:
        vm = make_vm(args)
    except ValueError as err:
        return _usage_error(str(err))
    print(f"polyvm serving on http://{args.host}:{args.port}/ "
          f"(protocol at /ws)", file=sys.stderr)
    try:
        serve(args.port, vm=vm, host=args.host)
    except PortInUse as err:
        return _usage_error(str(err))
    return 0


def cmd_repl(args):
    try:
        vm = make_vm(args)
    except ValueError as err:
        return _usage_error(str(err))
    language = args.language
    if vm.registry.get(language) is None:
        return _usage_error(f"unknown language {language!r}")
    bindings = {}
    while True:
        try:
            line = input(f"{language}> ")
        except EOFError:
            print()
            return 0
        except KeyboardInterrupt:
            print()
            return 0
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith(":lang"):
            parts = line.split()
            if len(parts) == 2 and vm.registry.get(parts[1]) is not None:
                target = parts[1]
                bindings = {name: vm.ctx.convert(value, target, source=language)
                            for name, value in bindings.items()}
                language = target
            else:
                print("usage: :lang <minipy|minirb>", file=sys.stderr)
            continue
        if line.startswith(":inspect"):
            parts = line.split()
            if len(parts) != 2 or parts[1] not in bindings:
                print("usage: :inspect <bound name>", file=sys.stderr)
                continue
            view = inspect_value(vm.ctx, bindings[parts[1]], language)
            print(f"{view.class_name}: {view.display}")
            for name, value in view.slots:
                print(f"  {name} = {vm.ctx.display(value, language)}")
            continue
        if line == ":quit":
            return 0
        try:
            pid = vm.spawn_process(language, line, bindings)
        except CompileError as err:
            print(f"error: {err}", file=sys.stderr)
            continue
        proc, _event = _drive_headless(vm, pid)
        if proc.failed:
            exc = proc.result
            print(f"error: {exc.class_name}: {exc.message}", file=sys.stderr)
            continue
        if proc.task.final_locals is not None:
            bindings = {name: value
                        for name, value in proc.task.final_locals.items()
                        if not name.startswith("$")}
        print(vm.ctx.display(proc.result, language))


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return 2 if exit_.code not in (0, None) else 0
    handlers = {"run": cmd_run, "pipeline": cmd_pipeline,
                "serve": cmd_serve, "repl": cmd_repl}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
