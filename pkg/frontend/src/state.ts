// View state, stale-response discipline and client-side form validation
// mirroring the server's strategy rules.

import type { SimulationRequest } from "./types.js";

export interface ViewState {
  at: string | null; // selected instant (null = mirror horizon)
  from: string;
  to: string;
  step: "EVENT" | "HOUR" | "DAY";
  selectedBlock: string | null;
  selectedBay: number | null;
  activeJobId: string | null;
  pollIntervalMs: number;
}

export function initialViewState(from: string, to: string): ViewState {
  return {
    at: null,
    from,
    to,
    step: "EVENT",
    selectedBlock: null,
    selectedBay: null,
    activeJobId: null,
    pollIntervalMs: 2000,
  };
}

/**
 * Serializes concurrent fetches per topic: only the latest request's result
 * is delivered, stale responses resolve to null and are discarded.
 */
export class LatestWins {
  private counters = new Map<string, number>();

  async run<T>(topic: string, work: () => Promise<T>): Promise<T | null> {
    const ticket = (this.counters.get(topic) ?? 0) + 1;
    this.counters.set(topic, ticket);
    const result = await work();
    return this.counters.get(topic) === ticket ? result : null;
  }
}

export const STRATEGY_NAMES = [
  "random_feasible",
  "lowest_tier",
  "category_segregation",
  "nearest_slot",
  "identity",
] as const;

export const SEGREGATION_KEYS = [
  "destination_port",
  "origin_port",
  "iso_type",
  "departure_window_hours",
] as const;

export interface StrategyDraft {
  name: string;
  key?: string;
  windowHours?: string;
  interBlockM?: string;
  seed: string;
  from: string;
  to: string;
  step: string;
}

export interface ValidationResult {
  ok: boolean;
  errors: Record<string, string>;
  request?: SimulationRequest;
}

/** Client-side mirror of the server's 400/422 rules; inline messages per field. */
export function validateDraft(draft: StrategyDraft): ValidationResult {
  const errors: Record<string, string> = {};

  if (!(STRATEGY_NAMES as readonly string[]).includes(draft.name)) {
    errors.name = `unknown strategy '${draft.name}'`;
  }
  const params: Record<string, unknown> = {};
  if (draft.name === "category_segregation") {
    const key = draft.key ?? "destination_port";
    if (!(SEGREGATION_KEYS as readonly string[]).includes(key)) {
      errors.key = `unknown segregation key '${key}'`;
    } else {
      params.key = key;
    }
    if (key === "departure_window_hours") {
      const hours = Number(draft.windowHours ?? "24");
      if (!Number.isFinite(hours) || hours <= 0) {
        errors.windowHours = "window hours must be a positive number";
      } else {
        params.window_hours = hours;
      }
    }
  }
  if (draft.name === "nearest_slot" && draft.interBlockM !== undefined && draft.interBlockM !== "") {
    const inter = Number(draft.interBlockM);
    if (!Number.isFinite(inter) || inter < 0) {
      errors.interBlockM = "inter-block distance must be >= 0";
    } else {
      params.inter_block_m = inter;
    }
  }

  const seed = Number(draft.seed);
  if (!Number.isInteger(seed) || seed < 0 || seed >= 2 ** 64) {
    errors.seed = "seed must be a non-negative 64-bit integer";
  }

  if (!draft.from) errors.from = "start time required";
  if (!draft.to) errors.to = "end time required";
  if (draft.from && draft.to && draft.from > draft.to) {
    errors.to = "'to' must not precede 'from'";
  }
  if (!["EVENT", "HOUR", "DAY"].includes(draft.step)) {
    errors.step = `unknown step '${draft.step}'`;
  }

  if (Object.keys(errors).length > 0) {
    return { ok: false, errors };
  }
  return {
    ok: true,
    errors: {},
    request: {
      from: draft.from,
      to: draft.to,
      step: draft.step as SimulationRequest["step"],
      strategy: { name: draft.name, params },
      seed,
    },
  };
}
