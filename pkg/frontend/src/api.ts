// Typed client over the review service JSON API. The console never computes
// metrics, triage, trust, or explanations itself -- every number it shows is
// a field from one of these responses.

export interface JointCase {
  id: string;
  confidence: number | null;
  triage: string | null;
  state: string;
  verdict_by: string | null;
  verdict_decision: string | null;
  verdict_note: string | null;
  oracle_label: number | null;
  kind: string | null;
  has_explanation: boolean;
  error: string | null;
  timestamps: Record<string, number>;
}

export interface QueuePage {
  cases: JointCase[];
  page: number;
  page_size: number;
  total: number;
}

export interface EvalReport {
  n: number;
  accuracy: number;
  overkill: number;
  escape: number;
  threshold: number;
}

export interface TrustReport {
  matrix: (number | null)[][];
  counts: number[][];
  net_trust_score: number;
  n: number;
  params: { alpha: number; beta: number };
}

export interface ScatterPoint {
  id: string;
  x: number;
  y: number;
  kind: string;
  thumbnail_path: string;
}

export interface FactorSummary {
  cells: number[][];
  impact?: number;
  bbox?: number[];
  heatmap_png_path?: string;
}

export interface Explanation {
  grid_size: number;
  cell_px: number;
  base_confidence: number;
  cell_deltas: number[];
  mass_fraction: number;
  factors: FactorSummary[];
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  url(path: string): string {
    return this.base + path;
  }

  getQueue(state?: string, page = 1, pageSize = 100): Promise<QueuePage> {
    const params = new URLSearchParams({ page: String(page), page_size: String(pageSize) });
    if (state) params.set("state", state);
    return fetch(this.url(`/api/queue?${params}`)).then((r) => asJson<QueuePage>(r));
  }

  getCase(id: string): Promise<JointCase> {
    return fetch(this.url(`/api/cases/${id}`)).then((r) => asJson<JointCase>(r));
  }

  caseImageUrl(id: string): string {
    return this.url(`/api/cases/${id}/image`);
  }

  caseOverlayUrl(id: string): string {
    return this.url(`/api/cases/${id}/overlay`);
  }

  getExplanation(id: string): Promise<Explanation> {
    return fetch(this.url(`/api/cases/${id}/explanation`)).then((r) => asJson<Explanation>(r));
  }

  submitVerdict(id: string, decision: string, operator: string, note?: string): Promise<JointCase> {
    return fetch(this.url(`/api/cases/${id}/verdict`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ decision, operator, note: note ?? null }),
    }).then((r) => asJson<JointCase>(r));
  }

  getMetrics(threshold = 0.5): Promise<EvalReport> {
    return fetch(this.url(`/api/metrics?threshold=${threshold}`)).then((r) => asJson<EvalReport>(r));
  }

  getTrust(): Promise<TrustReport> {
    return fetch(this.url(`/api/trust`)).then((r) => asJson<TrustReport>(r));
  }

  getSoxai(): Promise<ScatterPoint[]> {
    return fetch(this.url(`/api/soxai`)).then((r) => asJson<ScatterPoint[]>(r));
  }
}
