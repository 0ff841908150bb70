// Tool-window models: everything the views render is held here, and every
// mutation goes through a cataloged protocol op, so a protocol transcript
// fully determines UI effects. The end-to-end test drives this layer
// directly; the DOM layer is thin rendering over it.

import { ProtocolError, PushMessage, SocketFactory, WireClient } from "./protocol.js";

export interface LanguageInfo {
  id: string;
  display_name: string;
  file_extension: string;
}

export interface TokenSpan {
  kind: string;
  line: number;
  start: number;
  end: number;
}

export interface FrameSummary {
  index: number;
  language: string;
  name: string;
  line: number;
}

export interface SlotView {
  name: string;
  display: string;
  value: unknown;
}

export interface InspectPayload {
  class_name: string;
  display: string;
  viewer_language: string;
  slots: SlotView[];
}

export interface LocalEntry {
  display: string;
  value: unknown;
}

export interface FrameDetail extends FrameSummary {
  source: string;
  locals: Record<string, LocalEntry>;
  pseudo: [string, string][];
}

export interface ProcessRow {
  pid: number;
  language: string;
  state: string;
  current_line?: number;
  result?: string;
  failed?: boolean;
  session?: number;
}

export type CellOutput =
  | { kind: "display"; text: string }
  | { kind: "error"; text: string }
  | null;

export class WorkspaceCell {
  language = "minipy";
  source = "";
  running = false;
  output: CellOutput = null;
}

type EvalRoute = {
  mode: "doIt" | "printIt" | "inspectIt";
  cell: WorkspaceCell | null;
  language: string;
};

export class WorkspaceWindow {
  readonly kind = "workspace";
  title = "Workspace";
  cells: WorkspaceCell[] = [new WorkspaceCell()];

  constructor(private app: UiSession) {}

  addCell(): WorkspaceCell {
    const cell = new WorkspaceCell();
    this.cells.push(cell);
    this.app.changed();
    return cell;
  }

  async highlight(cell: WorkspaceCell): Promise<TokenSpan[]> {
    const out = await this.app.client.request<{ tokens: TokenSpan[] }>(
      "highlight", { language: cell.language, source: cell.source });
    return out.tokens;
  }

  async run(cell: WorkspaceCell, mode: "doIt" | "printIt" | "inspectIt") {
    cell.running = true;
    cell.output = null;
    this.app.changed();
    try {
      const out = await this.app.client.request<{ pid: number }>("eval", {
        language: cell.language,
        source: cell.source,
        mode: mode === "inspectIt" ? "doIt" : mode,
      });
      this.app.routeEval(out.pid, { mode, cell, language: cell.language });
    } catch (err) {
      cell.running = false;
      cell.output = { kind: "error", text: describeError(err) };
      this.app.changed();
    }
  }
}

export class InspectorWindow {
  readonly kind = "inspector";
  view: InspectPayload | null = null;
  stale = false;
  paneResult: string | null = null;
  paneError: string | null = null;

  constructor(
    private app: UiSession,
    public value: unknown,
    public viewerLanguage: string,
  ) {}

  get title(): string {
    if (this.view === null) return "Inspector";
    return `${this.view.class_name}: ${this.view.display}`;
  }

  async refresh(): Promise<void> {
    try {
      this.view = await this.app.client.request<InspectPayload>("inspect", {
        value: this.value,
        language: this.viewerLanguage,
      });
      this.stale = false;
    } catch (err) {
      if (err instanceof ProtocolError && err.code === "stale_handle") {
        this.stale = true;
      } else {
        throw err;
      }
    }
    this.app.changed();
  }

  async evalInPane(source: string): Promise<void> {
    this.paneError = null;
    try {
      const out = await this.app.client.request<{
        display: string;
        refreshed: InspectPayload;
      }>("inspect_eval", {
        value: this.value,
        source,
        language: this.viewerLanguage,
      });
      this.paneResult = out.display;
      this.view = out.refreshed; // live refresh of representation and slots
    } catch (err) {
      this.paneError = describeError(err);
    }
    this.app.changed();
  }

  drill(index: number): InspectorWindow {
    if (!this.view) throw new Error("nothing inspected yet");
    const slot = this.view.slots[index];
    return this.app.openInspector(slot.value, this.viewerLanguage);
  }
}

export class DebuggerWindow {
  readonly kind = "debugger";
  stack: FrameSummary[] = [];
  selected = 0;
  detail: FrameDetail | null = null;
  editedSource = "";
  paneResult: string | null = null;
  lastError: string | null = null;
  finished = false;
  resultDisplay: string | null = null;

  constructor(
    private app: UiSession,
    public session: number,
    public pid: number,
    public eventKind: string,
    public title: string,
  ) {}

  async load(): Promise<void> {
    const out = await this.app.client.request<{ stack: FrameSummary[] }>(
      "stack", { session: this.session });
    this.stack = out.stack;
    await this.select(0);
  }

  async select(index: number): Promise<void> {
    this.selected = index;
    this.detail = await this.app.client.request<FrameDetail>("frame", {
      session: this.session,
      index,
    });
    this.editedSource = this.detail.source;
    this.app.changed();
  }

  async evalInFrame(source: string): Promise<void> {
    const out = await this.app.client.request<{
      display?: string;
      error?: { class: string; message: string };
    }>("eval_in_frame", { session: this.session, index: this.selected, source });
    if (out.error) {
      this.paneResult = `${out.error.class}: ${out.error.message}`;
    } else {
      this.paneResult = out.display ?? "";
    }
    this.app.changed();
  }

  // saving the edited source pane is the restart gesture
  async saveAndRestart(): Promise<void> {
    this.lastError = null;
    try {
      const source =
        this.detail && this.editedSource !== this.detail.source
          ? this.editedSource
          : undefined;
      const out = await this.app.client.request<{ stack: FrameSummary[] }>(
        "restart_frame",
        source === undefined
          ? { session: this.session, index: this.selected }
          : { session: this.session, index: this.selected, source });
      this.stack = out.stack;
      await this.select(Math.min(this.selected, this.stack.length - 1));
    } catch (err) {
      this.lastError = describeError(err); // session intact on bad edits
      this.app.changed();
    }
  }

  async stepOver(): Promise<void> {
    this.lastError = null;
    try {
      const out = await this.app.client.request<{ stack: FrameSummary[] }>(
        "step_over", { session: this.session });
      this.stack = out.stack;
      if (this.stack.length > 0) {
        await this.select(0);
      }
    } catch (err) {
      this.lastError = describeError(err);
      this.app.changed();
    }
  }

  async proceed(): Promise<void> {
    this.lastError = null;
    try {
      const out = await this.app.client.request<{ result_display?: string }>(
        "proceed", { session: this.session });
      if (out.result_display !== undefined) {
        this.finished = true;
        this.resultDisplay = out.result_display;
      }
      this.app.changed();
    } catch (err) {
      this.lastError = describeError(err);
      this.app.changed();
    }
  }

  noteCompleted(display: string | null, error: string | null): void {
    this.finished = true;
    this.resultDisplay = error ?? display;
    this.app.changed();
  }
}

export class ProcessBrowserWindow {
  readonly kind = "processes";
  title = "Processes";
  rows: ProcessRow[] = [];

  constructor(private app: UiSession) {}

  async refresh(): Promise<void> {
    const out = await this.app.client.request<{ processes: ProcessRow[] }>(
      "processes");
    this.rows = out.processes;
    this.app.changed();
  }

  async interrupt(pid: number): Promise<void> {
    await this.app.client.request("interrupt", { pid });
    await this.refresh();
  }
}

export type ToolWindow =
  | WorkspaceWindow
  | InspectorWindow
  | DebuggerWindow
  | ProcessBrowserWindow;

export class UiSession {
  connection: "connecting" | "open" | "closed" = "connecting";
  languages: LanguageInfo[] = [];
  budget = 0;
  windows: ToolWindow[] = [];
  client!: WireClient;
  private listeners: Array<() => void> = [];
  private evalRoutes = new Map<number, EvalRoute>();
  // completions can outrun the eval reply that names their pid; keep the
  // most recent orphans until a route claims them
  private orphanCompletions = new Map<number, PushMessage>();

  static async connect(url: string, factory?: SocketFactory): Promise<UiSession> {
    const app = new UiSession();
    app.client = await WireClient.connect(url, factory);
    await app.start();
    return app;
  }

  static wrap(client: WireClient): UiSession {
    const app = new UiSession();
    app.client = client;
    return app;
  }

  async start(): Promise<void> {
    this.client.onPush((push) => this.handlePush(push));
    this.client.onClose(() => {
      this.connection = "closed";
      this.changed();
    });
    const hello = await this.client.request<{
      version: string;
      languages: LanguageInfo[];
      budget: number;
    }>("hello");
    this.languages = hello.languages;
    this.budget = hello.budget;
    this.connection = "open";
    this.changed();
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  changed(): void {
    for (const listener of this.listeners.slice()) listener();
  }

  routeEval(pid: number, route: EvalRoute): void {
    this.evalRoutes.set(pid, route);
    const orphan = this.orphanCompletions.get(pid);
    if (orphan) {
      this.orphanCompletions.delete(pid);
      this.handlePush(orphan);
    }
  }

  // --- window management ---

  openWorkspace(): WorkspaceWindow {
    const win = new WorkspaceWindow(this);
    this.windows.push(win);
    this.changed();
    return win;
  }

  openInspector(value: unknown, viewerLanguage: string): InspectorWindow {
    const win = new InspectorWindow(this, value, viewerLanguage);
    this.windows.push(win);
    this.changed();
    void win.refresh();
    return win;
  }

  openProcessBrowser(): ProcessBrowserWindow {
    const win = new ProcessBrowserWindow(this);
    this.windows.push(win);
    this.changed();
    void win.refresh();
    return win;
  }

  debuggerFor(session: number): DebuggerWindow | undefined {
    return this.windows.find(
      (w): w is DebuggerWindow => w.kind === "debugger" && w.session === session);
  }

  // closing a debugger window never implicitly proceeds; callers pass an
  // explicit choice when the user picked one
  async closeWindow(win: ToolWindow, opts: { proceed?: boolean } = {}) {
    if (win.kind === "debugger" && opts.proceed && !win.finished) {
      await win.proceed();
    }
    const i = this.windows.indexOf(win);
    if (i >= 0) this.windows.splice(i, 1);
    this.changed();
  }

  // --- pushes ---

  handlePush(push: PushMessage): void {
    if (push.event === "trap") {
      const session = push.session as number;
      if (!this.debuggerFor(session)) {
        const win = new DebuggerWindow(
          this, session, push.pid as number, push.kind as string,
          push.title as string);
        this.windows.push(win);
        this.changed();
        void win.load();
      }
      return;
    }
    if (push.event === "completed") {
      const pid = push.pid as number;
      const display = (push.display as string | undefined) ?? null;
      const error = (push.error as string | undefined) ?? null;
      const route = this.evalRoutes.get(pid);
      if (!route && !this.windows.some(
          (w) => w.kind === "debugger" && w.pid === pid)) {
        this.orphanCompletions.set(pid, push);
        if (this.orphanCompletions.size > 64) {
          const oldest = this.orphanCompletions.keys().next().value as number;
          this.orphanCompletions.delete(oldest);
        }
        return;
      }
      if (route) {
        this.evalRoutes.delete(pid);
        if (route.cell) {
          route.cell.running = false;
          if (error !== null) {
            route.cell.output = { kind: "error", text: error };
          } else if (route.mode === "printIt") {
            route.cell.output = { kind: "display", text: display ?? "" };
          }
        }
        if (route.mode === "inspectIt" && error === null) {
          this.openInspector(push.value, route.language);
        }
        this.changed();
      }
      for (const win of this.windows) {
        if (win.kind === "debugger" && win.pid === pid && !win.finished) {
          win.noteCompleted(display, error);
        }
      }
    }
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ProtocolError) return `${err.code}: ${err.message}`;
  return String(err instanceof Error ? err.message : err);
}
