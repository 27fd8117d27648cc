// Formatting helpers shared by the views and asserted by the tests.

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function fmtInt(value: number): string {
  return value.toLocaleString("en-US");
}

export function fmtRatio(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

export function fmtMeters(value: number): string {
  return `${value.toFixed(1)} m`;
}

export function fmtDays(value: number): string {
  return `${value.toFixed(1)} d`;
}

export function fmtNumber(value: number): string {
  return Number.isInteger(value) ? fmtInt(value) : value.toFixed(2);
}

export function fmtDelta(value: number): string {
  const body = Number.isInteger(value) ? fmtInt(Math.abs(value)) : Math.abs(value).toFixed(2);
  if (value > 0) return `+${body}`;
  if (value < 0) return `−${body}`;
  return "0";
}

/** Shade bucket for a stack: 0 (empty) .. maxTier, on the block's fixed scale. */
export function shadeLevel(height: number, maxTier: number): number {
  if (maxTier <= 0) return 0;
  return Math.max(0, Math.min(height, maxTier));
}

export function shadeColor(height: number, maxTier: number): string {
  const level = shadeLevel(height, maxTier);
  if (level === 0) return "transparent";
  const alpha = 0.15 + 0.85 * (level / maxTier);
  return `rgba(37, 99, 235, ${alpha.toFixed(3)})`;
}
