// @vitest-environment happy-dom

import { describe, expect, test } from "vitest";

import { WireClient } from "../src/protocol.js";
import { DebuggerWindow, UiSession } from "../src/state.js";
import { debuggerView, processBrowserView, workspaceView } from "../src/views.js";
import { FakeSocket, Responder, settle } from "./fake.js";

const HELLO = {
  version: "1",
  budget: 10_000,
  languages: [
    { id: "minipy", display_name: "MiniPy", file_extension: ".mpy" },
    { id: "minirb", display_name: "MiniRb", file_extension: ".mrb" },
  ],
};

async function makeApp(respond: Responder) {
  const socket = new FakeSocket((msg) =>
    msg.op === "hello" ? HELLO : respond(msg));
  const app = UiSession.wrap(WireClient.wrap(socket));
  await app.start();
  return { app, socket };
}

describe("views", () => {
  test("workspace renders the three gestures and inline output", async () => {
    const { app, socket } = await makeApp((msg) => {
      if (msg.op === "eval") return { pid: 1 };
      return {};
    });
    const ws = app.openWorkspace();
    const view = workspaceView(app, ws);
    const labels = Array.from(view.root.querySelectorAll("button"))
      .map((b) => b.textContent);
    expect(labels).toContain("do it");
    expect(labels).toContain("print it");
    expect(labels).toContain("inspect it");
    ws.cells[0].source = "1 + 2";
    await ws.run(ws.cells[0], "printIt");
    socket.push({ event: "completed", pid: 1, display: "3", value: 3 });
    await settle();
    view.update();
    expect(view.root.querySelector(".cell-output")?.textContent).toBe("3");
    view.dispose();
  });

  test("debugger renders language chips and the current-line marker", async () => {
    const { app, socket } = await makeApp((msg) => {
      if (msg.op === "stack") {
        return { stack: [
          { index: 0, language: "minirb", name: "<main>", line: 2 },
          { index: 1, language: "minipy", name: "<string>", line: 1 },
        ] };
      }
      if (msg.op === "frame") {
        return { index: 0, language: "minirb", name: "<main>", line: 2,
                 source: "i = 0\nwhile true\nend",
                 locals: { i: { display: "7", value: 7 } },
                 pseudo: [["(thisContext)", "<frame <main> @ line 2>"],
                          ["(source)", "i = 0"]] };
      }
      return {};
    });
    socket.push({ event: "trap", session: 1, pid: 5, kind: "UserInterrupt",
                  title: "User Interrupt" });
    await settle();
    await settle();
    const dbg = app.debuggerFor(1) as DebuggerWindow;
    const view = debuggerView(app, dbg);
    view.update();
    const chips = Array.from(view.root.querySelectorAll(".frame .chip"))
      .map((c) => c.textContent);
    expect(chips).toEqual(["minirb", "minipy"]);
    const current = view.root.querySelector(".gutter .cur");
    expect(current?.textContent).toContain("2");
    const rows = Array.from(view.root.querySelectorAll(".locals tr"))
      .map((r) => r.textContent);
    expect(rows.some((r) => r?.includes("i") && r.includes("7"))).toBe(true);
    expect(rows.some((r) => r?.includes("(thisContext)"))).toBe(true);
    const buttons = Array.from(view.root.querySelectorAll(".debug-buttons button"))
      .map((b) => b.textContent);
    expect(buttons).toEqual(["Proceed", "Restart", "Step Over"]);
    view.dispose();
  });

  test("process browser renders rows with interrupt buttons", async () => {
    const { app } = await makeApp((msg) => {
      if (msg.op === "processes") {
        return { processes: [
          { pid: 1, language: "minipy", state: "runnable", current_line: 3 },
          { pid: 2, language: "minirb", state: "terminated", result: "42" },
        ] };
      }
      return {};
    });
    const browser = app.openProcessBrowser();
    await settle();
    const view = processBrowserView(app, browser);
    view.update();
    const rows = Array.from(view.root.querySelectorAll("tr")).slice(1);
    expect(rows).toHaveLength(2);
    expect(rows[0].querySelector("button")?.textContent).toBe("Interrupt");
    expect(rows[1].querySelector("button")).toBeNull();
    expect(rows[1].textContent).toContain("42");
    view.dispose();
  });
});
