// Mount layer: fetch, render, wire. All content comes from the pure view
// functions in views.ts; this file only touches the DOM.

import { ApiError, TwinApi, comparisonOf } from "./api.js";
import { LatestWins, initialViewState, validateDraft, type StrategyDraft } from "./state.js";
import type { BayDetail, Layout, Snapshot } from "./types.js";
import {
  bayDetail,
  comparisonView,
  jobBanner,
  kpiHeader,
  slotTooltip,
  topView,
} from "./views.js";

const api = new TwinApi("");
const latest = new LatestWins();

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function ensureTooltip(): HTMLElement {
  let tip = document.getElementById("tooltip");
  if (!tip) {
    tip = document.createElement("div");
    tip.id = "tooltip";
    tip.style.display = "none";
    document.body.appendChild(tip);
  }
  return tip;
}

async function boot(): Promise<void> {
  const layout = await api.getLayout();
  const snapshot = await api.getSnapshot();
  const horizon = snapshot.clock ?? new Date().toISOString().replace(/\.\d+Z$/, "Z");
  const dayStart = `${horizon.slice(0, 10)}T00:00:00Z`;
  const state = initialViewState(dayStart, horizon);

  (el("from-input") as HTMLInputElement).value = state.from;
  (el("to-input") as HTMLInputElement).value = state.to;
  (el("sim-from") as HTMLInputElement).value = state.from;
  (el("sim-to") as HTMLInputElement).value = state.to;

  el("top-view").innerHTML = topView(snapshot, layout);
  wireHover(layout, () => state.at ?? horizon);
  wireCellClicks(layout);
  await refreshKpis(state.from, state.to);

  el("kpi-refresh").addEventListener("click", () => {
    state.from = (el("from-input") as HTMLInputElement).value;
    state.to = (el("to-input") as HTMLInputElement).value;
    void refreshKpis(state.from, state.to);
  });
  el("kpi-header").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.action === "retry-kpi") void refreshKpis(state.from, state.to);
  });
  el("at-apply").addEventListener("click", () => {
    const raw = (el("at-input") as HTMLInputElement).value;
    state.at = raw || null;
    void refreshTopView(layout, state.at ?? undefined);
  });
  wireStrategyForm(state.pollIntervalMs);
}

async function refreshKpis(from: string, to: string): Promise<void> {
  const header = el("kpi-header");
  try {
    const report = await latest.run("kpi", () => api.getKpi(from, to));
    if (report !== null) header.innerHTML = kpiHeader(report);
  } catch (err) {
    header.innerHTML = kpiHeader(null, err instanceof Error ? err.message : String(err));
  }
}

async function refreshTopView(layout: Layout, at?: string): Promise<void> {
  try {
    const snapshot = await latest.run("snapshot", () => api.getSnapshot(at));
    if (snapshot !== null) {
      el("top-view").innerHTML = topView(snapshot, layout);
    }
  } catch (err) {
    el("top-view").innerHTML = `<div class="banner error">${
      err instanceof Error ? err.message : String(err)
    }</div>`;
  }
}

function wireHover(layout: Layout, atOf: () => string): void {
  const tip = ensureTooltip();
  const bayCache = new Map<string, Promise<BayDetail>>();
  const view = el("top-view");

  view.addEventListener("mousemove", (event) => {
    const cell = (event.target as HTMLElement).closest<HTMLElement>(".cell");
    if (!cell) {
      tip.style.display = "none";
      return;
    }
    tip.style.left = `${event.clientX + 12}px`;
    tip.style.top = `${event.clientY + 12}px`;
  });
  view.addEventListener("mouseover", (event) => {
    const cell = (event.target as HTMLElement).closest<HTMLElement>(".cell");
    if (!cell) return;
    const { block, bay, row } = cell.dataset;
    if (!block || !bay || !row) return;
    const at = atOf();
    const cacheKey = `${block}/${bay}@${at}`;
    if (!bayCache.has(cacheKey)) {
      bayCache.set(cacheKey, api.getBay(block, Number(bay), at));
    }
    void bayCache.get(cacheKey)?.then((detail) => {
      const stack = detail.rows[Number(row) - 1]?.stack ?? [];
      const top = stack.length > 0 ? stack[stack.length - 1] ?? null : null;
      tip.innerHTML = slotTooltip(top);
      tip.style.display = "block";
    });
  });
  view.addEventListener("mouseout", () => {
    tip.style.display = "none";
  });
}

function wireCellClicks(layout: Layout): void {
  el("top-view").addEventListener("click", (event) => {
    const cell = (event.target as HTMLElement).closest<HTMLElement>(".cell");
    if (!cell) return;
    const { block, bay } = cell.dataset;
    if (!block || !bay) return;
    const spec = layout.blocks.find((b) => b.block_id === block);
    void api.getBay(block, Number(bay)).then((detail) => {
      el("bay-detail").innerHTML = bayDetail(detail, spec?.max_tier ?? 4);
    });
  });
}

function draftFromForm(): StrategyDraft {
  return {
    name: (el("strategy-name") as HTMLSelectElement).value,
    key: (el("strategy-key") as HTMLSelectElement).value,
    windowHours: (el("strategy-window") as HTMLInputElement).value,
    interBlockM: (el("strategy-inter") as HTMLInputElement).value,
    seed: (el("sim-seed") as HTMLInputElement).value,
    from: (el("sim-from") as HTMLInputElement).value,
    to: (el("sim-to") as HTMLInputElement).value,
    step: (el("sim-step") as HTMLSelectElement).value,
  };
}

function showFieldErrors(errors: Record<string, string>): void {
  for (const span of document.querySelectorAll<HTMLElement>(".field-error")) {
    const field = span.dataset.for ?? "";
    span.textContent = errors[field] ?? "";
  }
}

function wireStrategyForm(pollIntervalMs: number): void {
  const form = el("strategy-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const verdict = validateDraft(draftFromForm());
    showFieldErrors(verdict.errors);
    if (!verdict.ok || !verdict.request) return;
    const out = el("comparison");
    out.innerHTML = jobBanner("submitting", "…");
    void api
      .submitSimulation(verdict.request)
      .then(async ({ job_id }) => {
        out.innerHTML = jobBanner("running", job_id);
        const status = await api.waitForSimulation(job_id, pollIntervalMs);
        if (status.status === "FAILED") {
          out.innerHTML = jobBanner(`failed: ${status.error ?? "unknown"}`, job_id);
          return;
        }
        out.innerHTML = jobBanner("done", job_id) + comparisonView(comparisonOf(status));
      })
      .catch((err) => {
        if (err instanceof ApiError && err.status === 422) {
          showFieldErrors({ name: err.message });
          out.innerHTML = "";
          return;
        }
        out.innerHTML = jobBanner(
          `error: ${err instanceof Error ? err.message : String(err)}`,
          "—",
        );
      });
  });

  (el("strategy-name") as HTMLSelectElement).addEventListener("change", () => {
    const name = (el("strategy-name") as HTMLSelectElement).value;
    el("segregation-params").style.display = name === "category_segregation" ? "" : "none";
    el("nearest-params").style.display = name === "nearest_slot" ? "" : "none";
  });
}

if (typeof document !== "undefined" && document.getElementById("top-view")) {
  void boot();
}
