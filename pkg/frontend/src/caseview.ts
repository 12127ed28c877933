// Case detail: base image with a cached overlay toggle, factor summaries,
// and verdict submission. Verdicts only mutate the view after a 2xx; a 409
// surfaces as a conflict notice plus a state refresh, never silently.

import { ApiClient, ApiError, Explanation, JointCase } from "./api.js";
import { confidenceBadge, stateLabel } from "./format.js";

export interface CaseHandlers {
  onVerdictAccepted(id: string): void;
  onConflict(id: string): void;
}

export class CaseView {
  readonly element: HTMLElement;
  private current: JointCase | null = null;
  private overlayVisible = true;
  private overlayImg: HTMLImageElement | null = null;
  private notice: HTMLElement | null = null;
  // explanations are cached per case: toggling the overlay never refetches
  private readonly explanationCache = new Map<string, Explanation | null>();
  operator = "operator";

  constructor(
    private readonly api: ApiClient,
    private readonly handlers: CaseHandlers,
    doc: Document = document,
  ) {
    this.element = doc.createElement("div");
    this.element.className = "case-view";
  }

  get caseId(): string | null {
    return this.current?.id ?? null;
  }

  get isOverlayVisible(): boolean {
    return this.overlayVisible;
  }

  async show(id: string): Promise<void> {
    const joint = await this.api.getCase(id);
    let explanation = this.explanationCache.get(id);
    if (explanation === undefined) {
      if (joint.has_explanation) {
        try {
          explanation = await this.api.getExplanation(id);
        } catch {
          explanation = null;
        }
      } else {
        explanation = null;
      }
      this.explanationCache.set(id, explanation);
    }
    this.current = joint;
    this.overlayVisible = explanation !== null; // defaults to visible when present
    this.render(joint, explanation);
  }

  private render(joint: JointCase, explanation: Explanation | null): void {
    const doc = this.element.ownerDocument;
    this.element.innerHTML = "";
    this.overlayImg = null;
    this.notice = null;

    const title = doc.createElement("h2");
    title.textContent = joint.id;
    this.element.appendChild(title);

    const meta = doc.createElement("div");
    meta.className = "case-meta";
    meta.textContent =
      `state ${stateLabel(joint.state)} · confidence ${confidenceBadge(joint.confidence)}` +
      (joint.kind ? ` · kind ${joint.kind}` : "");
    this.element.appendChild(meta);

    const stage = doc.createElement("div");
    stage.className = "image-stage";
    const base = doc.createElement("img");
    base.className = "base-image";
    base.src = this.api.caseImageUrl(joint.id);
    base.alt = `${joint.id} image`;
    stage.appendChild(base);
    if (explanation !== null) {
      const overlay = doc.createElement("img");
      overlay.className = "overlay-image";
      overlay.src = this.api.caseOverlayUrl(joint.id);
      overlay.alt = `${joint.id} overlay`;
      overlay.style.display = this.overlayVisible ? "block" : "none";
      stage.appendChild(overlay);
      this.overlayImg = overlay;
    }
    this.element.appendChild(stage);

    const toggle = doc.createElement("button");
    toggle.className = "overlay-toggle";
    if (explanation === null) {
      toggle.disabled = true;
      toggle.textContent = "no explanation for this case";
    } else {
      toggle.textContent = this.overlayVisible ? "hide explanation (o)" : "show explanation (o)";
      toggle.addEventListener("click", () => this.toggleOverlay());
    }
    this.element.appendChild(toggle);

    if (explanation !== null) {
      const factors = doc.createElement("ul");
      factors.className = "factor-list";
      explanation.factors.forEach((factor, i) => {
        const item = doc.createElement("li");
        const impact = factor.impact !== undefined ? ` · impact ${factor.impact.toFixed(4)}` : "";
        item.textContent = `factor ${i + 1}: ${factor.cells.length} cell(s)${impact}`;
        factors.appendChild(item);
      });
      this.element.appendChild(factors);
    }

    const actions = doc.createElement("div");
    actions.className = "verdict-actions";
    for (const [decision, label, key] of [
      ["defective", "defective (d)", "d"],
      ["non_defective", "not defective (n)", "n"],
    ] as const) {
      const button = doc.createElement("button");
      button.className = `verdict verdict-${decision}`;
      button.textContent = label;
      button.dataset.key = key;
      button.disabled = joint.state !== "in_review";
      button.addEventListener("click", () => void this.submitVerdict(decision));
      actions.appendChild(button);
    }
    this.element.appendChild(actions);
  }

  toggleOverlay(): void {
    if (!this.overlayImg) return;
    // pure visibility flip on the already-loaded element: no refetch, and the
    // base view underneath is untouched
    this.overlayVisible = !this.overlayVisible;
    this.overlayImg.style.display = this.overlayVisible ? "block" : "none";
    const toggle = this.element.querySelector<HTMLButtonElement>(".overlay-toggle");
    if (toggle) toggle.textContent = this.overlayVisible ? "hide explanation (o)" : "show explanation (o)";
  }

  async submitVerdict(decision: "defective" | "non_defective"): Promise<void> {
    if (!this.current || this.current.state !== "in_review") return;
    const id = this.current.id;
    try {
      const updated = await this.api.submitVerdict(id, decision, this.operator);
      this.current = updated;
      this.render(updated, this.explanationCache.get(id) ?? null);
      this.showNotice(`verdict recorded: ${stateLabel(updated.state)}`, "ok");
      this.handlers.onVerdictAccepted(id);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else reviewed it first; show the conflict and refresh
        const fresh = await this.api.getCase(id);
        this.current = fresh;
        this.render(fresh, this.explanationCache.get(id) ?? null);
        this.showNotice(`conflict: ${err.detail}`, "conflict");
        this.handlers.onConflict(id);
      } else {
        this.showNotice(`verdict not submitted: ${String(err)}`, "error");
      }
    }
  }

  private showNotice(text: string, kind: string): void {
    if (!this.notice) {
      this.notice = this.element.ownerDocument.createElement("div");
      this.element.appendChild(this.notice);
    }
    this.notice.className = `notice notice-${kind}`;
    this.notice.textContent = text;
  }
}
