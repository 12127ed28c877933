import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { DashboardView } from "../src/dashboard.js";
import { FakeService } from "./fake_service.js";

let service: FakeService;
let api: ApiClient;

beforeEach(() => {
  service = new FakeService();
  service.install();
  api = new ApiClient();
  document.body.innerHTML = "";
});

describe("dashboard", () => {
  it("renders the reference metrics report verbatim at one decimal", async () => {
    service.metrics = { n: 100, accuracy: 0.91, overkill: 0.05, escape: 0.04, threshold: 0.5 };
    const dash = new DashboardView(api);
    await dash.load();
    const values = [...dash.element.querySelectorAll(".metric-value")].map((el) => el.textContent);
    expect(values).toEqual(["91.0", "5.0", "4.0"]);
  });

  it("hatches null trust cells without numerals and shows the net score", async () => {
    service.metrics = { n: 4, accuracy: 1.0, overkill: 0.0, escape: 0.0, threshold: 0.5 };
    service.trust = {
      matrix: [
        [0.93, null],
        [null, 0.88],
      ],
      counts: [
        [2, 0],
        [0, 2],
      ],
      net_trust_score: 0.905,
      n: 4,
      params: { alpha: 1, beta: 1 },
    };
    const dash = new DashboardView(api);
    await dash.load();
    const nulls = dash.element.querySelectorAll(".null-cell");
    expect(nulls.length).toBe(2);
    for (const cell of nulls) expect(cell.textContent).toBe("");
    const filled = [...dash.element.querySelectorAll(".trust-cell")]
      .filter((el) => !el.classList.contains("null-cell"))
      .map((el) => el.textContent);
    expect(filled).toEqual(["0.930", "0.880"]);
    expect(dash.element.querySelector(".net-trust")?.textContent).toContain("0.905");
  });

  it("plots one marker per scatter point, colored by kind", async () => {
    service.scatter = Array.from({ length: 60 }, (_, i) => ({
      id: `p${i}`,
      x: Math.cos(i),
      y: Math.sin(i),
      kind: ["splash", "burn", "fiber"][i % 3],
      thumbnail_path: "",
    }));
    const dash = new DashboardView(api);
    await dash.load();
    const canvas = dash.element.querySelector<HTMLCanvasElement>(".soxai-canvas")!;
    expect(canvas.dataset.pointCount).toBe("60");
    const legend = [...dash.element.querySelectorAll(".legend-entry")].map((el) => el.textContent);
    expect(legend).toEqual(["● burn", "● fiber", "● splash"]);
  });

  it("degrades to 'labels required' panels when metrics are unavailable", async () => {
    const dash = new DashboardView(api);
    await dash.load();
    const notes = [...dash.element.querySelectorAll(".labels-required")].map((el) => el.textContent);
    expect(notes).toContain("labels required");
    expect(dash.element.querySelectorAll(".metric-value").length).toBe(0);
  });
});
