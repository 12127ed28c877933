// Review queue: one card per case, confidence and state taken verbatim from
// the API. A fetch failure shows a retry banner and never a stale success.

import { ApiClient, QueuePage } from "./api.js";
import { confidenceBadge, stateLabel } from "./format.js";

export interface QueueHandlers {
  onOpenCase(id: string): void;
}

export class QueueView {
  readonly element: HTMLElement;
  private lastPage: QueuePage | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly handlers: QueueHandlers,
    doc: Document = document,
  ) {
    this.element = doc.createElement("div");
    this.element.className = "queue";
  }

  async load(stateFilter?: string): Promise<void> {
    try {
      const page = await this.api.getQueue(stateFilter);
      this.lastPage = page;
      this.render(page, stateFilter);
    } catch (err) {
      this.renderError(stateFilter, String(err));
    }
  }

  private render(page: QueuePage, stateFilter?: string): void {
    this.element.innerHTML = "";
    const heading = this.element.ownerDocument.createElement("div");
    heading.className = "queue-heading";
    heading.textContent = `${page.total} case(s)` + (stateFilter ? ` in ${stateLabel(stateFilter)}` : "");
    this.element.appendChild(heading);

    if (page.cases.length === 0) {
      const empty = this.element.ownerDocument.createElement("div");
      empty.className = "empty-state";
      empty.textContent = "Queue is empty.";
      this.element.appendChild(empty);
      return;
    }

    const list = this.element.ownerDocument.createElement("div");
    list.className = "card-list";
    for (const item of page.cases) {
      const card = this.element.ownerDocument.createElement("button");
      card.className = "case-card";
      card.dataset.caseId = item.id;
      const thumb = this.element.ownerDocument.createElement("img");
      thumb.className = "thumb";
      thumb.src = this.api.caseImageUrl(item.id);
      thumb.alt = item.id;
      card.appendChild(thumb);

      const label = this.element.ownerDocument.createElement("div");
      label.className = "card-label";
      label.textContent = item.id;
      card.appendChild(label);

      const conf = this.element.ownerDocument.createElement("span");
      conf.className = "confidence";
      conf.textContent = confidenceBadge(item.confidence);
      card.appendChild(conf);

      const badge = this.element.ownerDocument.createElement("span");
      badge.className = `state-badge state-${item.state}`;
      badge.textContent = stateLabel(item.state);
      card.appendChild(badge);

      card.addEventListener("click", () => this.handlers.onOpenCase(item.id));
      list.appendChild(card);
    }
    this.element.appendChild(list);
  }

  private renderError(stateFilter: string | undefined, message: string): void {
    this.element.innerHTML = "";
    const banner = this.element.ownerDocument.createElement("div");
    banner.className = "error-banner";
    banner.textContent = `Service unreachable: ${message}`;
    const retry = this.element.ownerDocument.createElement("button");
    retry.className = "retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void this.load(stateFilter));
    banner.appendChild(retry);
    this.element.appendChild(banner);
  }

  get currentPage(): QueuePage | null {
    return this.lastPage;
  }
}
