// DOM views over the window models. Each view builds its shell once and
// refreshes dynamic regions on update(), so editors keep focus and text.

import { clear, chip, el } from "./dom.js";
import { segmentLines } from "./highlight.js";
import {
  DebuggerWindow,
  InspectorWindow,
  ProcessBrowserWindow,
  ToolWindow,
  UiSession,
  WorkspaceCell,
  WorkspaceWindow,
} from "./state.js";

export interface WindowView {
  root: HTMLElement;
  update(): void;
  dispose(): void;
}

function windowShell(
  app: UiSession,
  win: ToolWindow,
  body: HTMLElement,
  onClose?: () => void,
): { root: HTMLElement; titleNode: HTMLElement } {
  const titleNode = el("span", { class: "win-title" }, win.title);
  const close = el("button", {
    class: "win-close",
    click: () => {
      if (onClose) {
        onClose();
      } else {
        void app.closeWindow(win);
      }
    },
  }, "×");
  const root = el("section", { class: `window win-${win.kind}` },
    el("header", { class: "win-bar" }, titleNode, close), body);
  return { root, titleNode };
}

// --- workspace ---

export function workspaceView(app: UiSession, win: WorkspaceWindow): WindowView {
  const body = el("div", { class: "workspace" });
  const cellNodes = new Map<WorkspaceCell, { output: HTMLElement; preview: HTMLElement }>();

  function buildCell(cell: WorkspaceCell): HTMLElement {
    const select = el("select", {
      change: () => {
        cell.language = (select as HTMLSelectElement).value;
        void recolor();
      },
    });
    for (const lang of app.languages) {
      select.append(el("option", { value: lang.id }, lang.display_name));
    }
    (select as HTMLSelectElement).value = cell.language;
    const editor = el("textarea", {
      class: "cell-editor",
      rows: "5",
      input: () => {
        cell.source = (editor as HTMLTextAreaElement).value;
        scheduleRecolor();
      },
    }) as HTMLTextAreaElement;
    const preview = el("div", { class: "hl-preview" });
    const output = el("div", { class: "cell-output" });
    let timer: ReturnType<typeof setTimeout> | null = null;

    function scheduleRecolor() {
      if (timer) clearTimeout(timer);
      timer = setTimeout(() => void recolor(), 250);
    }

    async function recolor() {
      if (!cell.source) {
        clear(preview);
        return;
      }
      try {
        const tokens = await win.highlight(cell);
        clear(preview);
        for (const line of segmentLines(cell.source, tokens)) {
          const row = el("div", { class: "hl-line" });
          for (const seg of line) {
            row.append(seg.kind
              ? el("span", { class: `tok-${seg.kind}` }, seg.text)
              : document.createTextNode(seg.text));
          }
          preview.append(row);
        }
      } catch {
        // highlighting is cosmetic; ignore transport hiccups
      }
    }

    const buttons = el("div", { class: "cell-buttons" },
      el("button", { click: () => void win.run(cell, "doIt") }, "do it"),
      el("button", { click: () => void win.run(cell, "printIt") }, "print it"),
      el("button", { click: () => void win.run(cell, "inspectIt") }, "inspect it"),
    );
    cellNodes.set(cell, { output, preview });
    return el("div", { class: "cell" }, select, editor, buttons, preview, output);
  }

  for (const cell of win.cells) body.append(buildCell(cell));
  body.append(el("button", {
    class: "add-cell",
    click: () => {
      const cell = win.addCell();
      body.insertBefore(buildCell(cell), body.lastElementChild);
    },
  }, "+ cell"));

  const { root } = windowShell(app, win, body);
  return {
    root,
    update() {
      for (const cell of win.cells) {
        const nodes = cellNodes.get(cell);
        if (!nodes) continue;
        clear(nodes.output);
        if (cell.running) {
          nodes.output.append(el("em", {}, "running…"));
        } else if (cell.output) {
          nodes.output.append(el("span",
            { class: cell.output.kind === "error" ? "output-error" : "output-ok" },
            cell.output.text));
        }
      }
    },
    dispose() {},
  };
}

// --- inspector ---

export function inspectorView(app: UiSession, win: InspectorWindow): WindowView {
  const display = el("div", { class: "inspect-display" });
  const slots = el("ul", { class: "slot-list" });
  const paneInput = el("input", {
    class: "pane-input", placeholder: "evaluate with `it` bound…",
  }) as HTMLInputElement;
  const paneResult = el("div", { class: "pane-result" });
  const body = el("div", { class: "inspector" },
    display, slots,
    el("div", { class: "pane" }, paneInput,
      el("button", {
        click: () => void win.evalInPane(paneInput.value),
      }, "print it")),
    paneResult);
  const { root, titleNode } = windowShell(app, win, body);
  return {
    root,
    update() {
      titleNode.textContent = win.title;
      root.classList.toggle("stale", win.stale);
      clear(display).append(win.view ? win.view.display : "…");
      clear(slots);
      win.view?.slots.forEach((slot, index) => {
        slots.append(el("li", {},
          el("button", { class: "slot", click: () => void win.drill(index) },
            slot.name),
          ` = ${slot.display}`));
      });
      clear(paneResult);
      if (win.paneError) {
        paneResult.append(el("span", { class: "output-error" }, win.paneError));
      } else if (win.paneResult !== null) {
        paneResult.append(el("span", { class: "output-ok" }, win.paneResult));
      }
    },
    dispose() {},
  };
}

// --- debugger ---

export function debuggerView(app: UiSession, win: DebuggerWindow): WindowView {
  const frames = el("ul", { class: "frame-list" });
  const gutter = el("div", { class: "gutter" });
  const editor = el("textarea", {
    class: "source-editor", rows: "12",
    input: () => { win.editedSource = editor.value; },
  }) as HTMLTextAreaElement;
  const locals = el("table", { class: "locals" });
  const paneInput = el("input", {
    class: "pane-input", placeholder: "evaluate in frame…",
  }) as HTMLInputElement;
  const paneResult = el("div", { class: "pane-result" });
  const status = el("div", { class: "debug-status" });
  const buttons = el("div", { class: "debug-buttons" },
    el("button", { click: () => void win.proceed() }, "Proceed"),
    el("button", { click: () => void win.saveAndRestart() }, "Restart"),
    el("button", { click: () => void win.stepOver() }, "Step Over"),
  );
  const body = el("div", { class: "debugger" },
    frames,
    el("div", { class: "source-pane" }, gutter, editor),
    locals,
    el("div", { class: "pane" }, paneInput,
      el("button", { click: () => void win.evalInFrame(paneInput.value) },
        "print it")),
    paneResult, buttons, status);
  const { root, titleNode } = windowShell(app, win, body, () => {
    if (win.finished) {
      void app.closeWindow(win);
      return;
    }
    const choice = window.confirm(
      "Proceed the suspended process before closing?");
    void app.closeWindow(win, { proceed: choice });
  });
  let shownSource: string | null = null;
  return {
    root,
    update() {
      titleNode.textContent = win.finished && win.resultDisplay !== null
        ? `${win.title} → ${win.resultDisplay}`
        : win.title;
      clear(frames);
      win.stack.forEach((frame) => {
        const item = el("li", {
          class: frame.index === win.selected ? "frame selected" : "frame",
          click: () => void win.select(frame.index),
        }, chip(frame.language), ` ${frame.name} (line ${frame.line})`);
        frames.append(item);
      });
      if (win.detail && win.detail.source !== shownSource) {
        shownSource = win.detail.source;
        editor.value = win.detail.source;
      }
      clear(gutter);
      if (win.detail) {
        const total = win.detail.source.split("\n").length;
        for (let line = 1; line <= total; line++) {
          gutter.append(el("div", {
            class: line === win.detail.line ? "ln cur" : "ln",
          }, line === win.detail.line ? `▶ ${line}` : String(line)));
        }
      }
      clear(locals);
      if (win.detail) {
        for (const [name, entry] of Object.entries(win.detail.locals)) {
          locals.append(el("tr", {}, el("td", {}, name),
            el("td", {}, entry.display)));
        }
        for (const [name, text] of win.detail.pseudo) {
          locals.append(el("tr", { class: "pseudo" }, el("td", {}, name),
            el("td", {}, text)));
        }
      }
      clear(paneResult);
      if (win.paneResult !== null) paneResult.append(win.paneResult);
      clear(status);
      if (win.lastError) {
        status.append(el("span", { class: "output-error" }, win.lastError));
      } else if (win.finished) {
        status.append(el("span", { class: "output-ok" },
          `process finished: ${win.resultDisplay ?? ""}`));
      }
    },
    dispose() {},
  };
}

// --- process browser ---

export function processBrowserView(
  app: UiSession, win: ProcessBrowserWindow,
): WindowView {
  const table = el("table", { class: "proc-table" });
  const body = el("div", { class: "processes" }, table);
  const { root } = windowShell(app, win, body);
  const timer = setInterval(() => void win.refresh(), 500);
  return {
    root,
    update() {
      clear(table);
      table.append(el("tr", {},
        el("th", {}, "pid"), el("th", {}, "language"), el("th", {}, "state"),
        el("th", {}, "line"), el("th", {}, "result"), el("th", {}, "")));
      for (const row of win.rows) {
        const actions = el("td", {});
        if (row.state === "runnable" || row.state === "blocked") {
          actions.append(el("button", {
            click: () => void win.interrupt(row.pid),
          }, "Interrupt"));
        }
        table.append(el("tr", {},
          el("td", {}, String(row.pid)),
          el("td", {}, chip(row.language)),
          el("td", {}, row.state),
          el("td", {}, row.current_line === undefined ? "" : String(row.current_line)),
          el("td", {}, row.result ?? ""),
          actions));
      }
    },
    dispose() {
      clearInterval(timer);
    },
  };
}

export function viewFor(app: UiSession, win: ToolWindow): WindowView {
  switch (win.kind) {
    case "workspace":
      return workspaceView(app, win);
    case "inspector":
      return inspectorView(app, win);
    case "debugger":
      return debuggerView(app, win);
    case "processes":
      return processBrowserView(app, win);
  }
}
