/** Display formatting. Endpoints are always rendered through these helpers
 * so what the user reads is exactly the service value at display precision,
 * never a recomputed quantity. */

export const TIME_DECIMALS = 1;

export function formatTime(value: number): string {
  return value.toFixed(TIME_DECIMALS);
}

export function formatInterval(lower: number, upper: number | null, capped: boolean): string {
  if (upper === null) {
    return `≥ ${formatTime(lower)}`;
  }
  const tail = capped ? "+" : "";
  return `${formatTime(lower)} – ${formatTime(upper)}${tail}`;
}

export function formatPercent(value: number): string {
  return `${(100 * value).toFixed(0)}%`;
}
