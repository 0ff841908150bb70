"""Wire-protocol server: one JSON object per message over a WebSocket.

Every client request (id > 0) gets exactly one reply with the same id;
server pushes use id 0. The socket handlers never touch VM state directly:
requests become commands on the VM's queue and events fan out from a
per-client outbound queue, upholding the single-lane concurrency contract.
"""

from __future__ import annotations

import functools
import json
import math
import queue
import socket
import threading
import time
from contextlib import asynccontextmanager
from pathlib import Path

import anyio
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, HTMLResponse
from fastapi.staticfiles import StaticFiles

from . import bridge, kernel
from .debug import inspect_value
from .errors import EvaluationError, VmError
from .values import ExceptionValue, ForeignRef, ObjectRef
from .vm import VM

PROTOCOL_VERSION = "1"

PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>polyvm</title></head>
<body><h1>polyvm service</h1>
<p>The web UI assets are not built. Connect a client to <code>/ws</code>
speaking the wire protocol (version 1).</p></body></html>
"""


class PortInUse(VmError):
    def __init__(self, port):
        super().__init__(f"port {port} is already in use")
        self.port = port


# --- value encoding ---


def encode_value(value):
    if type(value) is float and not math.isfinite(value):
        return {"opaque": repr(value)}  # JSON has no NaN/Infinity
    if value is None or type(value) in (bool, int, float, str):
        return value
    if type(value) is list:
        return [encode_value(v) for v in value]
    if type(value) is ObjectRef:
        return {"ref": {"lang": value.language, "handle": value.handle}}
    if type(value) is ForeignRef:
        return {"ref": {"lang": value.language, "handle": value.handle,
                        "foreign": True}}
    if type(value) is ExceptionValue:
        return {"exc": {"class": value.class_name, "message": value.message}}
    return {"opaque": repr(value)}


def decode_value(payload):
    if isinstance(payload, dict):
        if "ref" in payload:
            ref = payload["ref"]
            cls = ForeignRef if ref.get("foreign") else ObjectRef
            return cls(ref["lang"], int(ref["handle"]))
        if "exc" in payload:
            return ExceptionValue(payload["exc"]["class"],
                                  payload["exc"].get("message", ""))
        raise ValueError("unrecognized value encoding")
    if isinstance(payload, list):
        return [decode_value(v) for v in payload]
    return payload


class Session:
    """Service-side state shared by all clients of one VM."""

    def __init__(self, vm):
        self.vm = vm
        self.eval_modes = {}  # pid -> "doIt" | "printIt"
        self.clients = set()
        self.clients_lock = threading.Lock()
        vm.subscribe(self._on_vm_event)

    # fanout (runs on the VM lane)

    def _on_vm_event(self, event):
        message = self._wire_event(event)
        if message is None:
            return
        data = json.dumps(message)
        with self.clients_lock:
            targets = list(self.clients)
        for client in targets:
            client.put(data)

    def _wire_event(self, event):
        kind = event.get("event")
        if kind == "completed":
            out = {"id": 0, "event": "completed", "pid": event["pid"]}
            if event.get("failed"):
                exc = event["value"]
                out["error"] = f"{exc.class_name}: {exc.message}"
            else:
                out["value"] = encode_value(event["value"])
                mode = self.eval_modes.get(event["pid"], "printIt")
                if mode == "printIt":
                    out["display"] = self.vm.ctx.display(event["value"],
                                                         event["language"])
            return out
        if kind == "cell":
            return {"id": 0, "event": "cell", "pid": event["pid"],
                    "index": event["index"], "display": event["display"]}
        if kind == "trap":
            return {"id": 0, "event": "trap", "session": event["session"],
                    "pid": event["pid"], "kind": event["kind"],
                    "title": event["title"]}
        return None

    def attach(self, client_queue):
        with self.clients_lock:
            self.clients.add(client_queue)

    def detach(self, client_queue):
        with self.clients_lock:
            self.clients.discard(client_queue)

    # --- the op catalog; every handler runs on the VM lane ---

    def execute(self, op, params):
        handler = getattr(self, "op_" + op, None)
        if handler is None:
            raise UnknownOp(op)
        return handler(self.vm, params)

    def op_hello(self, vm, params):
        languages = [{
            "id": plugin.descriptor.id,
            "display_name": plugin.descriptor.display_name,
            "file_extension": plugin.descriptor.file_extension,
        } for plugin in vm.registry.plugins.values()]
        return {"version": PROTOCOL_VERSION, "languages": languages,
                "budget": vm.budget}

    def op_eval(self, vm, params):
        mode = params.get("mode", "printIt")
        if mode not in ("doIt", "printIt"):
            raise BadParams(f"unknown eval mode {mode!r}")
        bindings = {name: decode_value(value)
                    for name, value in params.get("bindings", {}).items()}
        pid = vm.spawn_process(params["language"], params["source"], bindings)
        self.eval_modes[pid] = mode
        return {"pid": pid}

    def op_inspect(self, vm, params):
        value = decode_value(params["value"])
        language = params.get("language") or getattr(value, "language", "minipy")
        view = inspect_value(vm.ctx, value, language)
        return self._inspect_payload(view)

    def _inspect_payload(self, view):
        return {
            "class_name": view.class_name,
            "display": view.display,
            "viewer_language": view.viewer_language,
            "slots": [{"name": name, "display": self.vm.ctx.display(
                value, view.viewer_language), "value": encode_value(value)}
                for name, value in view.slots],
        }

    def op_inspect_eval(self, vm, params):
        value = decode_value(params["value"])
        language = params.get("language") or getattr(value, "language", "minipy")
        plugin = vm.ctx.plugin(language)
        unit = plugin.compile_eval(params["source"])
        scratch = kernel.Task(vm.ctx, scratch=True)
        scratch.frames.append(kernel.Frame(unit, locals_={"it": value}))
        result = kernel.run_to_completion(scratch)
        view = inspect_value(vm.ctx, value, language)
        return {"display": vm.ctx.display(result, language),
                "refreshed": self._inspect_payload(view)}

    def op_processes(self, vm, params):
        rows = []
        for pid, proc in sorted(vm.processes.items()):
            row = {"pid": pid, "language": proc.language, "state": proc.state}
            line = proc.current_line()
            if line is not None:
                row["current_line"] = line
            if proc.state == "terminated":
                row["result"] = vm.ctx.display(proc.result, proc.language)
                row["failed"] = proc.failed
            if proc.session is not None and proc.session.open:
                row["session"] = proc.session.session_id
            rows.append(row)
        return {"processes": rows}

    def op_interrupt(self, vm, params):
        vm.interrupt(int(params["pid"]))
        return {}

    def op_stack(self, vm, params):
        views = vm.debugger.stack(int(params["session"]))
        return {"stack": [self._frame_summary(v) for v in views]}

    @staticmethod
    def _frame_summary(view):
        return {"index": view.index, "language": view.language,
                "name": view.name, "line": view.line}

    def op_frame(self, vm, params):
        session = vm.debugger.get(int(params["session"]))
        views = kernel.stack_view(session.process.task.frames)
        index = int(params["index"])
        if not 0 <= index < len(views):
            raise BadParams(f"no frame {index}")
        view = views[index]
        language = view.language
        return {
            "index": view.index, "language": language, "name": view.name,
            "line": view.line, "source": view.source,
            "locals": {name: {"display": vm.ctx.display(value, language),
                              "value": encode_value(value)}
                       for name, value in view.locals.items()},
            "pseudo": [[name, text] for name, text in view.pseudo],
        }

    def op_eval_in_frame(self, vm, params):
        session_id = int(params["session"])
        index = int(params["index"])
        session = vm.debugger.get(session_id)
        try:
            value = vm.debugger.evaluate(session_id, index, params["source"])
        except EvaluationError as err:
            return {"error": {"class": err.exception.class_name,
                              "message": err.exception.message}}
        except VmError as err:
            return {"error": {"class": type(err).__name__, "message": str(err)}}
        language = session.process.task.frames[-1 - index].language
        return {"display": vm.ctx.display(value, language)}

    def op_restart_frame(self, vm, params):
        views = vm.debugger.restart(int(params["session"]), int(params["index"]),
                                    params.get("source"))
        return {"stack": [self._frame_summary(v) for v in views]}

    def op_proceed(self, vm, params):
        session = vm.debugger.get(int(params["session"]))
        language = session.process.language
        outcome = vm.debugger.proceed(session.session_id)
        if "result" in outcome:
            return {"result_display": vm.ctx.display(outcome["result"], language)}
        return {}

    def op_step_over(self, vm, params):
        views = vm.debugger.step_over(int(params["session"]))
        return {"stack": [self._frame_summary(v) for v in views]}

    def op_set_budget(self, vm, params):
        quantum = params["quantum"]
        if type(quantum) is not int:
            raise BadParams("quantum must be an integer")
        return {"previous": vm.set_budget(quantum)}

    def op_highlight(self, vm, params):
        plugin = vm.ctx.plugin(params["language"])
        tokens = plugin.tokenize(params["source"])
        return {"tokens": [{"kind": t.kind, "line": t.line, "start": t.start,
                            "end": t.end}
                           for t in tokens if t.end > t.start]}

    def op_pipeline(self, vm, params):
        cells = [bridge.PipelineCell(c["language"], c["source"])
                 for c in params["cells"]]
        initial = decode_value(params.get("initial"))
        run = bridge.PipelineRun(vm, cells, initial=initial)
        return {"pid": run.id}


class UnknownOp(VmError):
    code = "unknown_op"

    def __init__(self, op):
        super().__init__(f"unknown operation {op!r}")


class BadParams(VmError):
    code = "bad_params"


def error_reply(msg_id, code, message):
    return {"id": msg_id, "error": {"code": code, "message": message}}


def create_app(vm=None, assets_dir=None):
    """FastAPI app exposing /ws plus the web UI's static assets."""
    vm = vm or VM()
    session = Session(vm)
    stop_flag = threading.Event()

    def vm_loop():
        while not stop_flag.is_set():
            report = vm.scheduler_tick()
            if report.idle:
                time.sleep(0.002)

    @asynccontextmanager
    async def lifespan(app):
        thread = threading.Thread(target=vm_loop, name="polyvm-lane",
                                  daemon=True)
        thread.start()
        try:
            yield
        finally:
            stop_flag.set()
            thread.join(timeout=5)

    app = FastAPI(lifespan=lifespan)
    app.state.vm = vm
    app.state.session = session

    def handle_text(text, respond):
        """Validate a client message and queue its command.

        Replies are enqueued from the VM lane inside the command itself, so
        the reply to a request always precedes any events that request
        caused.
        """
        try:
            msg = json.loads(text)
        except ValueError:
            respond(error_reply(0, "bad_params", "message is not valid JSON"))
            return
        if not isinstance(msg, dict):
            respond(error_reply(0, "bad_params", "message must be a JSON object"))
            return
        msg_id = msg.get("id", 0)
        if type(msg_id) is not int or msg_id <= 0:
            respond(error_reply(0, "bad_params", "id must be a positive integer"))
            return
        op = msg.get("op")
        if not isinstance(op, str):
            respond(error_reply(msg_id, "bad_params", "missing op"))
            return
        params = msg.get("params") or {}
        if not isinstance(params, dict):
            respond(error_reply(msg_id, "bad_params", "params must be an object"))
            return

        def command(machine):
            try:
                result = session.execute(op, params)
            except VmError as err:
                respond(error_reply(msg_id, err.code, str(err)))
                return
            except (KeyError, TypeError, ValueError) as err:
                respond(error_reply(msg_id, "bad_params", repr(err)))
                return
            respond({"id": msg_id, "result": result})

        vm.post(command)

    @app.websocket("/ws")
    async def websocket_endpoint(websocket: WebSocket):
        await websocket.accept()
        outbound = queue.Queue()
        session.attach(outbound)

        def respond(payload):
            outbound.put(json.dumps(payload))

        async def pump():
            while True:
                try:
                    data = await anyio.to_thread.run_sync(
                        functools.partial(outbound.get, True, 0.1),
                        abandon_on_cancel=True)
                except queue.Empty:
                    continue
                await websocket.send_text(data)

        try:
            async with anyio.create_task_group() as group:
                group.start_soon(pump)
                while True:
                    try:
                        text = await websocket.receive_text()
                    except WebSocketDisconnect:
                        break
                    handle_text(text, respond)
                group.cancel_scope.cancel()
        finally:
            session.detach(outbound)

    assets = _resolve_assets(assets_dir)
    if assets is not None:
        app.mount("/assets", StaticFiles(directory=str(assets)), name="assets")

        @app.get("/")
        async def index():
            page = assets / "index.html"
            if page.exists():
                return FileResponse(str(page))
            return HTMLResponse(PLACEHOLDER_PAGE)
    else:

        @app.get("/")
        async def placeholder():
            return HTMLResponse(PLACEHOLDER_PAGE)

    return app


def _resolve_assets(assets_dir):
    import os

    candidates = []
    if assets_dir:
        candidates.append(Path(assets_dir))
    env = os.environ.get("POLYVM_WEBUI")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parents[2] / "frontend" / "dist")
    for candidate in candidates:
        if candidate.is_dir():
            return candidate
    return None


class ServerHandle:
    def __init__(self, server, thread, vm):
        self._server = server
        self._thread = thread
        self.vm = vm

    def stop(self):
        self._server.should_exit = True
        self._thread.join(timeout=10)


def serve(port, vm=None, host="127.0.0.1", assets_dir=None, block=True):
    """Serve the protocol and UI assets; returns a handle when block=False."""
    import uvicorn

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError:
        raise PortInUse(port) from None
    finally:
        probe.close()

    vm = vm or VM()
    app = create_app(vm=vm, assets_dir=assets_dir)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    if block:
        server.run()
        return None
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started and time.time() < deadline:
        time.sleep(0.01)
    return ServerHandle(server, thread, vm)
