// Metrics / trust / explanation-map dashboard. Every figure is a response
// field rendered as-is; panels that need oracle labels degrade to a notice
// while the queue keeps working.

import { ApiClient, ScatterPoint, TrustReport } from "./api.js";
import { percent1 } from "./format.js";

const KIND_COLORS = [
  "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2", "#9d755d",
];

export class DashboardView {
  readonly element: HTMLElement;

  constructor(private readonly api: ApiClient, doc: Document = document) {
    this.element = doc.createElement("div");
    this.element.className = "dashboard";
  }

  async load(): Promise<void> {
    const doc = this.element.ownerDocument;
    this.element.innerHTML = "";
    await Promise.all([
      this.renderMetrics(doc),
      this.renderTrust(doc),
      this.renderScatter(doc),
    ]);
  }

  private panel(doc: Document, title: string): HTMLElement {
    const panel = doc.createElement("section");
    panel.className = "panel";
    const heading = doc.createElement("h3");
    heading.textContent = title;
    panel.appendChild(heading);
    this.element.appendChild(panel);
    return panel;
  }

  private async renderMetrics(doc: Document): Promise<void> {
    const panel = this.panel(doc, "Inspection metrics");
    try {
      const report = await this.api.getMetrics();
      const table = doc.createElement("table");
      table.className = "metrics-table";
      table.innerHTML =
        `<thead><tr><th>Accuracy (%)</th><th>Overkill (%)</th><th>Escape (%)</th><th>n</th></tr></thead>`;
      const row = doc.createElement("tr");
      for (const value of [report.accuracy, report.overkill, report.escape]) {
        const cell = doc.createElement("td");
        cell.className = "metric-value";
        cell.textContent = percent1(value);
        row.appendChild(cell);
      }
      const nCell = doc.createElement("td");
      nCell.textContent = String(report.n);
      row.appendChild(nCell);
      const body = doc.createElement("tbody");
      body.appendChild(row);
      table.appendChild(body);
      panel.appendChild(table);
    } catch {
      const note = doc.createElement("div");
      note.className = "labels-required";
      note.textContent = "labels required";
      panel.appendChild(note);
    }
  }

  private async renderTrust(doc: Document): Promise<void> {
    const panel = this.panel(doc, "Trust");
    try {
      const report: TrustReport = await this.api.getTrust();
      const score = doc.createElement("div");
      score.className = "net-trust";
      score.textContent = `net trust score ${report.net_trust_score.toFixed(3)} (n=${report.n})`;
      panel.appendChild(score);

      const table = doc.createElement("table");
      table.className = "trust-matrix";
      const header = doc.createElement("tr");
      header.innerHTML = "<th></th><th>pred good</th><th>pred defect</th>";
      table.appendChild(header);
      const rowNames = ["truly good", "truly defect"];
      for (let o = 0; o < 2; o++) {
        const row = doc.createElement("tr");
        const name = doc.createElement("th");
        name.textContent = rowNames[o];
        row.appendChild(name);
        for (let p = 0; p < 2; p++) {
          const cell = doc.createElement("td");
          const value = report.matrix[o][p];
          if (value === null) {
            cell.className = "trust-cell null-cell"; // hatched via CSS, no numeral
          } else {
            cell.className = "trust-cell";
            cell.textContent = value.toFixed(3);
            const green = Math.round(value * 200);
            cell.style.backgroundColor = `rgb(${230 - green}, ${80 + green}, 90)`;
            cell.title = `n=${report.counts[o][p]}`;
          }
          row.appendChild(cell);
        }
        table.appendChild(row);
      }
      panel.appendChild(table);
    } catch {
      const note = doc.createElement("div");
      note.className = "labels-required";
      note.textContent = "labels required";
      panel.appendChild(note);
    }
  }

  private async renderScatter(doc: Document): Promise<void> {
    const panel = this.panel(doc, "Explanation map");
    let points: ScatterPoint[];
    try {
      points = await this.api.getSoxai();
    } catch {
      const note = doc.createElement("div");
      note.className = "labels-required";
      note.textContent = "scatter unavailable";
      panel.appendChild(note);
      return;
    }
    const canvas = doc.createElement("canvas");
    canvas.className = "soxai-canvas";
    canvas.width = 640;
    canvas.height = 480;
    canvas.dataset.pointCount = String(points.length);
    panel.appendChild(canvas);

    const kinds = [...new Set(points.map((p) => p.kind))].sort();
    const legend = doc.createElement("div");
    legend.className = "legend";
    kinds.forEach((kind, i) => {
      const entry = doc.createElement("span");
      entry.className = "legend-entry";
      entry.textContent = `● ${kind}`;
      entry.style.color = KIND_COLORS[i % KIND_COLORS.length];
      legend.appendChild(entry);
    });
    panel.appendChild(legend);

    // read-only pan/zoom over a static point set
    let scale = 1;
    let offsetX = 0;
    let offsetY = 0;
    const draw = () => {
      const ctx = canvas.getContext("2d");
      if (!ctx) return; // no 2d context under the test DOM
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      const xs = points.map((p) => p.x);
      const ys = points.map((p) => p.y);
      const pad = 20;
      const sx = (canvas.width - 2 * pad) / Math.max(1e-9, Math.max(...xs) - Math.min(...xs));
      const sy = (canvas.height - 2 * pad) / Math.max(1e-9, Math.max(...ys) - Math.min(...ys));
      const s = Math.min(sx, sy) * scale;
      for (const point of points) {
        const cx = pad + (point.x - Math.min(...xs)) * s + offsetX;
        const cy = pad + (point.y - Math.min(...ys)) * s + offsetY;
        ctx.fillStyle = KIND_COLORS[kinds.indexOf(point.kind) % KIND_COLORS.length];
        ctx.beginPath();
        ctx.arc(cx, cy, 4, 0, Math.PI * 2);
        ctx.fill();
      }
    };
    canvas.addEventListener("wheel", (event) => {
      event.preventDefault();
      scale *= event.deltaY < 0 ? 1.1 : 0.9;
      draw();
    });
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    canvas.addEventListener("mousedown", (event) => {
      dragging = true;
      lastX = event.clientX;
      lastY = event.clientY;
    });
    canvas.addEventListener("mousemove", (event) => {
      if (!dragging) return;
      offsetX += event.clientX - lastX;
      offsetY += event.clientY - lastY;
      lastX = event.clientX;
      lastY = event.clientY;
      draw();
    });
    canvas.addEventListener("mouseup", () => {
      dragging = false;
    });
    draw();
  }
}
