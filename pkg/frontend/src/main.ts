// Boot: connect to the VM on the serving host and manage window views.

import { ToolWindow, UiSession } from "./state.js";
import { viewFor, WindowView } from "./views.js";

async function boot(): Promise<void> {
  const desk = document.getElementById("desk")!;
  const statusNode = document.getElementById("status")!;
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  let app: UiSession;
  try {
    app = await UiSession.connect(`${scheme}://${location.host}/ws`);
  } catch (err) {
    statusNode.textContent = `connection failed: ${err}`;
    return;
  }

  const views = new Map<ToolWindow, WindowView>();

  function sync(): void {
    statusNode.textContent = app.connection === "open"
      ? `connected · budget ${app.budget}`
      : "disconnected";
    for (const [win, view] of views) {
      if (!app.windows.includes(win)) {
        view.dispose();
        view.root.remove();
        views.delete(win);
      }
    }
    for (const win of app.windows) {
      if (!views.has(win)) {
        const view = viewFor(app, win);
        views.set(win, view);
        desk.append(view.root);
      }
    }
    for (const view of views.values()) view.update();
  }

  app.onChange(sync);
  document.getElementById("new-workspace")!.addEventListener("click", () => {
    app.openWorkspace();
  });
  document.getElementById("open-processes")!.addEventListener("click", () => {
    app.openProcessBrowser();
  });

  app.openWorkspace();
  app.openProcessBrowser();
  sync();
}

void boot();
