/** Render a raw API score for display: always four decimals, no rounding
 * logic of our own beyond Number.prototype.toFixed. */
export function formatScore(score: number): string {
  return score.toFixed(4);
}
