import { describe, expect, test } from "vitest";

import { WireClient } from "../src/protocol.js";
import {
  DebuggerWindow,
  InspectorWindow,
  UiSession,
} from "../src/state.js";
import { FakeSocket, Responder, settle } from "./fake.js";

const HELLO = {
  version: "1",
  budget: 10_000,
  languages: [
    { id: "minipy", display_name: "MiniPy", file_extension: ".mpy" },
    { id: "minirb", display_name: "MiniRb", file_extension: ".mrb" },
  ],
};

async function makeApp(respond: Responder): Promise<{
  app: UiSession;
  socket: FakeSocket;
}> {
  const socket = new FakeSocket((msg) =>
    msg.op === "hello" ? HELLO : respond(msg));
  const app = UiSession.wrap(WireClient.wrap(socket));
  await app.start();
  return { app, socket };
}

describe("UiSession", () => {
  test("hello populates languages and budget", async () => {
    const { app } = await makeApp(() => ({}));
    expect(app.connection).toBe("open");
    expect(app.budget).toBe(10_000);
    expect(app.languages.map((l) => l.id)).toEqual(["minipy", "minirb"]);
  });

  test("printIt routes the completion display into the cell", async () => {
    const { app, socket } = await makeApp((msg) => {
      if (msg.op === "eval") return { pid: 7 };
      return {};
    });
    const ws = app.openWorkspace();
    const cell = ws.cells[0];
    cell.source = "1 + 2";
    await ws.run(cell, "printIt");
    expect(cell.running).toBe(true);
    socket.push({ event: "completed", pid: 7, display: "3", value: 3 });
    await settle();
    expect(cell.running).toBe(false);
    expect(cell.output).toEqual({ kind: "display", text: "3" });
  });

  test("compile errors land inline in the cell", async () => {
    const { app } = await makeApp((msg) => {
      if (msg.op === "eval") {
        return { error: { code: "compile_error", message: "line 1: nope" } };
      }
      return {};
    });
    const ws = app.openWorkspace();
    const cell = ws.cells[0];
    cell.source = "def f(:";
    await ws.run(cell, "printIt");
    expect(cell.output?.kind).toBe("error");
    expect(cell.output?.text).toContain("line 1: nope");
  });

  test("inspectIt opens an inspector on the pushed result value", async () => {
    const ref = { ref: { lang: "minipy", handle: 4 } };
    const { app, socket } = await makeApp((msg) => {
      if (msg.op === "eval") return { pid: 9 };
      if (msg.op === "inspect") {
        expect(msg.params.value).toEqual(ref);
        return {
          class_name: "DataStack", display: "<DataStack object>",
          viewer_language: "minipy",
          slots: [{ name: "items", display: "[1, 2]", value: [1, 2] }],
        };
      }
      return {};
    });
    const ws = app.openWorkspace();
    const cell = ws.cells[0];
    cell.source = "DataStack()";
    await ws.run(cell, "inspectIt");
    socket.push({ event: "completed", pid: 9, value: ref });
    await settle();
    await settle();
    const inspector = app.windows.find(
      (w): w is InspectorWindow => w.kind === "inspector");
    expect(inspector).toBeDefined();
    expect(inspector!.view?.class_name).toBe("DataStack");
    expect(inspector!.title).toBe("DataStack: <DataStack object>");
  });

  test("inspector pane evaluation applies the refreshed view", async () => {
    const { app } = await makeApp((msg) => {
      if (msg.op === "inspect") {
        return { class_name: "List", display: "[1, 2]",
                 viewer_language: "minipy",
                 slots: [{ name: "0", display: "1", value: 1 }] };
      }
      if (msg.op === "inspect_eval") {
        return {
          display: "2",
          refreshed: { class_name: "List", display: "[1]",
                       viewer_language: "minipy", slots: [] },
        };
      }
      return {};
    });
    const inspector = app.openInspector([1, 2], "minipy");
    await settle();
    await inspector.evalInPane("it.pop()");
    expect(inspector.paneResult).toBe("2");
    expect(inspector.view?.display).toBe("[1]");
  });

  test("a trap push opens exactly one debugger window and loads it", async () => {
    const { app, socket } = await makeApp((msg) => {
      if (msg.op === "stack") {
        return { stack: [
          { index: 0, language: "minipy", name: "average", line: 5 },
          { index: 1, language: "minipy", name: "<string>", line: 6 },
        ] };
      }
      if (msg.op === "frame") {
        return { index: 0, language: "minipy", name: "average", line: 5,
                 source: "def average(iterable): ...",
                 locals: { iterable: { display: "[]", value: [] } },
                 pseudo: [["(thisContext)", "<frame>"], ["(source)", "..."]] };
      }
      return {};
    });
    socket.push({ event: "trap", session: 3, pid: 12,
                  kind: "UnhandledException",
                  title: "ZeroDivisionError: integer division by zero" });
    socket.push({ event: "trap", session: 3, pid: 12,
                  kind: "UnhandledException",
                  title: "ZeroDivisionError: integer division by zero" });
    await settle();
    await settle();
    const debuggers = app.windows.filter((w) => w.kind === "debugger");
    expect(debuggers).toHaveLength(1);
    const dbg = debuggers[0] as DebuggerWindow;
    expect(dbg.title).toContain("ZeroDivisionError");
    expect(dbg.stack.map((f) => f.name)).toEqual(["average", "<string>"]);
    expect(dbg.detail?.locals.iterable.display).toBe("[]");
    expect(dbg.editedSource).toBe("def average(iterable): ...");
  });

  test("saving sends edited source; restart errors stay in-window", async () => {
    const sent: Array<Record<string, unknown>> = [];
    const { app, socket } = await makeApp((msg) => {
      if (msg.op === "stack") {
        return { stack: [{ index: 0, language: "minipy", name: "f", line: 1 }] };
      }
      if (msg.op === "frame") {
        return { index: 0, language: "minipy", name: "f", line: 1,
                 source: "original", locals: {}, pseudo: [] };
      }
      if (msg.op === "restart_frame") {
        sent.push(msg.params);
        if (msg.params.source === "broken(") {
          return { error: { code: "compile_error", message: "bad edit" } };
        }
        return { stack: [{ index: 0, language: "minipy", name: "f", line: 1 }] };
      }
      return {};
    });
    socket.push({ event: "trap", session: 8, pid: 2, kind: "UserInterrupt",
                  title: "User Interrupt" });
    await settle();
    await settle();
    const dbg = app.debuggerFor(8)!;
    // unchanged source: restart without a source parameter
    await dbg.saveAndRestart();
    expect(sent[0].source).toBeUndefined();
    // edited source travels; a bad edit surfaces without closing the window
    dbg.editedSource = "broken(";
    await dbg.saveAndRestart();
    expect(sent[1].source).toBe("broken(");
    expect(dbg.lastError).toContain("compile_error");
    expect(app.debuggerFor(8)).toBe(dbg);
  });

  test("closing a debugger proceeds only on explicit choice", async () => {
    const ops: string[] = [];
    const { app, socket } = await makeApp((msg) => {
      ops.push(msg.op);
      if (msg.op === "stack") {
        return { stack: [{ index: 0, language: "minirb", name: "<main>", line: 1 }] };
      }
      if (msg.op === "frame") {
        return { index: 0, language: "minirb", name: "<main>", line: 1,
                 source: "", locals: {}, pseudo: [] };
      }
      return {};
    });
    socket.push({ event: "trap", session: 5, pid: 3, kind: "UserInterrupt",
                  title: "User Interrupt" });
    await settle();
    await settle();
    const dbg = app.debuggerFor(5)!;
    await app.closeWindow(dbg);
    expect(ops.filter((op) => op === "proceed")).toHaveLength(0);
    expect(app.windows).not.toContain(dbg);

    socket.push({ event: "trap", session: 6, pid: 4, kind: "UserInterrupt",
                  title: "User Interrupt" });
    await settle();
    await settle();
    const second = app.debuggerFor(6)!;
    await app.closeWindow(second, { proceed: true });
    expect(ops.filter((op) => op === "proceed")).toHaveLength(1);
  });

  test("completed push marks a debugger window finished", async () => {
    const { app, socket } = await makeApp((msg) => {
      if (msg.op === "stack") {
        return { stack: [{ index: 0, language: "minipy", name: "<string>", line: 1 }] };
      }
      if (msg.op === "frame") {
        return { index: 0, language: "minipy", name: "<string>", line: 1,
                 source: "", locals: {}, pseudo: [] };
      }
      return {};
    });
    socket.push({ event: "trap", session: 9, pid: 40, kind: "UserInterrupt",
                  title: "User Interrupt" });
    await settle();
    await settle();
    const dbg = app.debuggerFor(9)!;
    socket.push({ event: "completed", pid: 40, display: "42", value: 42 });
    await settle();
    expect(dbg.finished).toBe(true);
    expect(dbg.resultDisplay).toBe("42");
  });

  test("process browser refresh and interrupt issue cataloged ops", async () => {
    const ops: string[] = [];
    const { app } = await makeApp((msg) => {
      ops.push(msg.op);
      if (msg.op === "processes") {
        return { processes: [
          { pid: 1, language: "minipy", state: "runnable", current_line: 3 },
        ] };
      }
      return {};
    });
    const browser = app.openProcessBrowser();
    await settle();
    expect(browser.rows).toHaveLength(1);
    await browser.interrupt(1);
    expect(ops).toContain("interrupt");
  });
});
