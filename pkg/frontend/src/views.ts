// Pure view functions: data in, HTML string out. The mount layer only
// attaches these strings to the DOM and wires events, so everything the
// operator reads is testable against raw API payloads.

import {
  escapeHtml,
  fmtDays,
  fmtDelta,
  fmtInt,
  fmtMeters,
  fmtNumber,
  fmtRatio,
  shadeColor,
  shadeLevel,
} from "./format.js";
import type {
  BayDetail,
  KpiComparison,
  KpiReport,
  Layout,
  SlotDetail,
  Snapshot,
  SnapshotBlock,
} from "./types.js";

export function kpiHeader(report: KpiReport | null, error?: string): string {
  if (error !== undefined) {
    return `<div class="banner error" role="alert">
      <span>${escapeHtml(error)}</span>
      <button type="button" data-action="retry-kpi">Retry</button>
    </div>`;
  }
  if (report === null) {
    return `<div class="kpi-tiles loading">Loading KPIs…</div>`;
  }
  const tiles: [string, string, string][] = [
    ["unproductive", "Unproductive moves", fmtInt(report.unproductive_moves)],
    ["ratio", "Unproductive ratio", fmtRatio(report.unproductive_ratio)],
    ["moves", "Total moves", fmtInt(report.total_moves)],
    ["crane", "Crane travel", fmtMeters(report.crane_travel_m.total)],
    ["dwell", "Mean dwell (departed)", fmtDays(report.mean_dwell_days)],
    ["rehandles", "Rehandles / container", fmtNumber(report.rehandles_per_container.mean)],
  ];
  const cells = tiles
    .map(
      ([key, label, value]) => `<div class="tile" data-kpi="${key}">
        <span class="tile-value">${value}</span>
        <span class="tile-label">${label}</span>
      </div>`,
    )
    .join("");
  const window = `${escapeHtml(report.window.from)} → ${escapeHtml(report.window.to)}`;
  return `<div class="kpi-tiles" data-window="${escapeHtml(report.window.from)}|${escapeHtml(
    report.window.to,
  )}">${cells}<div class="tile window"><span class="tile-value small">${window}</span>
    <span class="tile-label">Window</span></div></div>`;
}

function blockGrid(block: SnapshotBlock, maxTier: number): string {
  const rowCount = block.bays[0]?.rows.length ?? 0;
  let cells = "";
  for (let row = rowCount; row >= 1; row--) {
    for (const bay of block.bays) {
      const stack = bay.rows[row - 1]?.stack ?? [];
      const height = stack.length;
      const top = height > 0 ? stack[height - 1] : undefined;
      cells += `<div class="cell" data-block="${escapeHtml(block.block_id)}" data-bay="${bay.bay}"
        data-row="${row}" data-height="${height}" data-shade="${shadeLevel(height, maxTier)}"
        ${top !== undefined ? `data-top="${escapeHtml(top)}"` : ""}
        style="background:${shadeColor(height, maxTier)}">${height > 0 ? height : ""}</div>`;
    }
    cells += "";
  }
  return `<section class="block" data-block="${escapeHtml(block.block_id)}">
    <h3>Block ${escapeHtml(block.block_id)}</h3>
    <div class="grid" style="grid-template-columns: repeat(${block.bays.length}, 1fr)">${cells}</div>
  </section>`;
}

export function topView(snapshot: Snapshot, layout: Layout): string {
  const tiers = new Map(layout.blocks.map((b) => [b.block_id, b.max_tier]));
  const sections = snapshot.blocks
    .map((block) => blockGrid(block, tiers.get(block.block_id) ?? 1))
    .join("");
  const clock = snapshot.clock ? escapeHtml(snapshot.clock) : "no data";
  return `<div class="top-view" data-clock="${clock}">${sections}</div>`;
}

/** Tooltip for one hovered slot; fed by the bay-detail endpoint. */
export function slotTooltip(top: SlotDetail | null): string {
  if (top === null) {
    return `<div class="tooltip-body empty">empty</div>`;
  }
  const port = top.destination_port ?? top.origin_port ?? "—";
  return `<div class="tooltip-body">
    <strong data-field="container_id">${escapeHtml(top.container_id)}</strong>
    <span data-field="dwell_days">${fmtDays(top.dwell_days)}</span>
    <span data-field="iso_type">${escapeHtml(top.iso_type)}</span>
    <span data-field="port">${escapeHtml(port)}</span>
  </div>`;
}

export function bayDetail(detail: BayDetail, maxTier: number): string {
  const rows = detail.rows;
  let body = "";
  for (let tier = maxTier; tier >= 1; tier--) {
    const cells = rows
      .map((row) => {
        const slot = row.stack[tier - 1];
        if (!slot) return `<td class="empty"></td>`;
        const port = slot.destination_port ?? slot.origin_port ?? "—";
        return `<td class="occupied" data-container="${escapeHtml(slot.container_id)}">
          <span class="cid">${escapeHtml(slot.container_id)}</span>
          <span class="meta">${fmtDays(slot.dwell_days)} · ${escapeHtml(port)} · ${escapeHtml(
            slot.iso_type,
          )}</span>
          <span class="meta">rehandles ${fmtInt(slot.rehandle_count)}${
            slot.departure_booked ? " · booked" : ""
          }</span>
        </td>`;
      })
      .join("");
    body += `<tr><th>T${tier}</th>${cells}</tr>`;
  }
  const header = rows.map((row) => `<th>R${row.row}</th>`).join("");
  const title = detail.block_id !== undefined ? `${detail.block_id} / bay ${detail.bay}` : `bay ${detail.bay}`;
  return `<div class="bay-detail" data-bay="${detail.bay}">
    <h3>${escapeHtml(title)}</h3>
    <table><thead><tr><th></th>${header}</tr></thead><tbody>${body}</tbody></table>
  </div>`;
}

// deltas where a negative value means the strategy did better
const LOWER_IS_BETTER = new Set([
  "unproductive_moves",
  "unproductive_ratio",
  "rehandles_mean",
  "rehandles_max",
  "crane_travel_total_m",
]);

export function deltaClass(metric: string, value: number): string {
  if (value === 0 || !LOWER_IS_BETTER.has(metric)) return "neutral";
  return value < 0 ? "good" : "bad";
}

const METRIC_LABELS: Record<string, string> = {
  total_moves: "Total moves",
  productive_moves: "Productive moves",
  unproductive_moves: "Unproductive moves",
  unproductive_ratio: "Unproductive ratio",
  rehandles_mean: "Mean rehandles / container",
  rehandles_max: "Max rehandles",
  mean_dwell_days: "Mean dwell (days)",
  mean_current_dwell_days: "Mean open dwell (days)",
  crane_travel_total_m: "Crane travel (m)",
};

function metricValue(report: KpiReport, metric: string): number {
  switch (metric) {
    case "total_moves":
      return report.total_moves;
    case "productive_moves":
      return report.productive_moves;
    case "unproductive_moves":
      return report.unproductive_moves;
    case "unproductive_ratio":
      return report.unproductive_ratio;
    case "rehandles_mean":
      return report.rehandles_per_container.mean;
    case "rehandles_max":
      return report.rehandles_per_container.max;
    case "mean_dwell_days":
      return report.mean_dwell_days;
    case "mean_current_dwell_days":
      return report.mean_current_dwell_days;
    case "crane_travel_total_m":
      return report.crane_travel_m.total;
    default:
      return NaN;
  }
}

export function comparisonView(comparison: KpiComparison): string {
  const rows = Object.keys(METRIC_LABELS)
    .filter((metric) => metric in comparison.deltas)
    .map((metric) => {
      const delta = comparison.deltas[metric] ?? 0;
      return `<tr data-metric="${metric}">
        <td>${METRIC_LABELS[metric]}</td>
        <td data-side="real">${fmtNumber(metricValue(comparison.real, metric))}</td>
        <td data-side="simulated">${fmtNumber(metricValue(comparison.simulated, metric))}</td>
        <td class="delta ${deltaClass(metric, delta)}" data-delta="${delta}">${fmtDelta(delta)}</td>
      </tr>`;
    })
    .join("");
  return `<div class="comparison">
    <table>
      <thead><tr><th>Metric</th><th>Real</th><th>Simulated</th><th>Δ (sim − real)</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </div>`;
}

export function jobBanner(status: string, jobId: string): string {
  return `<div class="banner job" data-job="${escapeHtml(jobId)}" data-status="${escapeHtml(status)}">
    Simulation ${escapeHtml(jobId)}: ${escapeHtml(status)}
  </div>`;
}
