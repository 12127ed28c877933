// Presentation helpers. Formatting only -- values always come from the API.

export function percent1(fraction: number): string {
  return (fraction * 100).toFixed(1);
}

export function confidenceBadge(confidence: number | null): string {
  return confidence === null ? "–" : confidence.toFixed(3);
}

export function stateLabel(state: string): string {
  return state.replace(/_/g, " ");
}
