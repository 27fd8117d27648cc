// Wire types mirroring the yardtwin HTTP API payloads.

export interface BlockSpec {
  block_id: string;
  bay_count: number;
  row_count: number;
  max_tier: number;
  bay_pitch_m: number;
  row_pitch_m: number;
}

export interface Layout {
  blocks: BlockSpec[];
}

export interface ContainerRecord {
  container_id: string;
  iso_type: string;
  origin_port: string | null;
  destination_port: string | null;
  arrival_time: string | null;
  departure_booked: boolean;
  rehandle_count: number;
  current_slot: string | null;
  attrs: Record<string, unknown>;
}

export interface SnapshotRow {
  row: number;
  stack: string[]; // container ids, tier 1 upward
}

export interface SnapshotBay {
  bay: number;
  rows: SnapshotRow[];
}

export interface SnapshotBlock {
  block_id: string;
  bays: SnapshotBay[];
}

export interface Snapshot {
  clock: string | null;
  blocks: SnapshotBlock[];
  containers: Record<string, ContainerRecord>;
}

export interface SlotDetail {
  container_id: string;
  tier: number;
  iso_type: string;
  origin_port: string | null;
  destination_port: string | null;
  dwell_days: number;
  departure_booked: boolean;
  rehandle_count: number;
}

export interface BayDetail {
  block_id?: string;
  bay: number;
  at?: string | null;
  max_tier?: number;
  rows: { row: number; stack: SlotDetail[] }[];
}

export interface RehandleSummary {
  mean: number;
  max: number;
  histogram: Record<string, number>;
}

export interface KpiReport {
  window: { from: string; to: string };
  total_moves: number;
  productive_moves: number;
  unproductive_moves: number;
  unproductive_ratio: number;
  rehandles_per_container: RehandleSummary;
  mean_dwell_days: number;
  mean_current_dwell_days: number;
  crane_travel_m: { per_equipment: Record<string, number>; total: number };
  occupancy_peak: Record<string, number>;
}

export interface KpiComparison {
  real: KpiReport;
  simulated: KpiReport;
  deltas: Record<string, number>;
}

export type JobState = "PENDING" | "RUNNING" | "DONE" | "FAILED";

export interface SimulationRequest {
  from: string;
  to: string;
  step: "EVENT" | "HOUR" | "DAY";
  strategy: { name: string; params: Record<string, unknown> };
  seed: number;
}

export interface JobStatusPayload {
  job_id: string;
  status: JobState;
  request: SimulationRequest;
  result?: KpiComparison;
  error?: string;
}

export interface BlockSummary {
  block_id: string;
  bay_count: number;
  row_count: number;
  max_tier: number;
  container_count: number;
}

export interface BlockListing {
  blocks: BlockSummary[];
  total: number;
  offset: number;
  limit: number;
}
