// Console shell: queue + case detail + dashboard tabs, keyboard shortcuts,
// auto-advance through the review queue after each accepted verdict.

import { ApiClient } from "./api.js";
import { CaseView } from "./caseview.js";
import { DashboardView } from "./dashboard.js";
import { QueueView } from "./queue.js";

export function createConsole(root: HTMLElement, api: ApiClient = new ApiClient()) {
  const doc = root.ownerDocument;
  root.innerHTML = "";

  const topbar = doc.createElement("header");
  topbar.className = "topbar";
  topbar.innerHTML = `<span class="brand">jointscope review console</span>`;

  const filter = doc.createElement("select");
  filter.className = "state-filter";
  for (const state of ["in_review", "reviewed_defect", "reviewed_pass", "auto_defect", "auto_pass", ""]) {
    const option = doc.createElement("option");
    option.value = state;
    option.textContent = state === "" ? "all states" : state.replace(/_/g, " ");
    filter.appendChild(option);
  }
  topbar.appendChild(filter);

  const operatorInput = doc.createElement("input");
  operatorInput.className = "operator-name";
  operatorInput.value = "operator";
  operatorInput.title = "operator name recorded with verdicts";
  topbar.appendChild(operatorInput);

  const queueTab = doc.createElement("button");
  queueTab.textContent = "Queue";
  const dashTab = doc.createElement("button");
  dashTab.textContent = "Dashboard";
  topbar.appendChild(queueTab);
  topbar.appendChild(dashTab);
  root.appendChild(topbar);

  const layout = doc.createElement("main");
  layout.className = "layout";
  root.appendChild(layout);

  const caseView = new CaseView(api, {
    onVerdictAccepted: () => void advance(),
    onConflict: () => void queueView.load(currentFilter()),
  }, doc);

  const queueView = new QueueView(api, {
    onOpenCase: (id) => void caseView.show(id),
  }, doc);

  const dashboard = new DashboardView(api, doc);

  const currentFilter = () => (filter.value === "" ? undefined : filter.value);

  async function advance(): Promise<void> {
    // a verdict moved the case out of in_review: refresh and open the next one
    await queueView.load(currentFilter());
    const page = queueView.currentPage;
    const next = page?.cases.find((c) => c.state === "in_review");
    if (next) await caseView.show(next.id);
  }

  function showQueue(): void {
    layout.innerHTML = "";
    layout.appendChild(queueView.element);
    layout.appendChild(caseView.element);
    void queueView.load(currentFilter());
  }

  function showDashboard(): void {
    layout.innerHTML = "";
    layout.appendChild(dashboard.element);
    void dashboard.load();
  }

  queueTab.addEventListener("click", showQueue);
  dashTab.addEventListener("click", showDashboard);
  filter.addEventListener("change", () => void queueView.load(currentFilter()));
  operatorInput.addEventListener("change", () => {
    caseView.operator = operatorInput.value || "operator";
  });

  doc.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement) return;
    // keyboard and button paths share the same methods, hence identical requests
    if (event.key === "o") caseView.toggleOverlay();
    if (event.key === "d") void caseView.submitVerdict("defective");
    if (event.key === "n") void caseView.submitVerdict("non_defective");
  });

  showQueue();
  return { queueView, caseView, dashboard };
}

declare global {
  interface Window {
    jointscopeConsole?: ReturnType<typeof createConsole>;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.jointscopeConsole = createConsole(document.getElementById("app")!);
}
