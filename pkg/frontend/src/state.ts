/** Pure view-model helpers: everything shown comes straight from API payloads. */

import type { SessionView, TrajectoryRecord } from "./api.js";

export interface Series {
  quarters: number[];
  demand: number[];
  supply: number[];
  shortage: number[];
  inventory: number[];
}

export interface QuarterDecisions {
  period: number;
  fda: { severity: string; text: string; confidence: string; rationale: string } | null;
  manufacturers: { id: number; investFraction: number; confidence: string; rationale: string }[];
  buyer: { orderQuantity: number; confidence: string; rationale: string } | null;
}

export interface ConsoleSessionView {
  id: string;
  mode: string;
  status: string;
  period: number;
  horizon: number;
  pendingDecision: boolean;
  series: Series;
  decisions: QuarterDecisions[];
}

/** Series are copied from trajectory records verbatim; no market math here. */
export function seriesFromRecords(records: TrajectoryRecord[]): Series {
  return {
    quarters: records.map((r) => r.period),
    demand: records.map((r) => r.total_demand),
    supply: records.map((r) => r.total_supply),
    shortage: records.map((r) => r.shortage),
    inventory: records.map((r) => r.buyer_inventory),
  };
}

export function decisionHistory(records: TrajectoryRecord[]): QuarterDecisions[] {
  return records.map((record) => {
    const fda = record.decisions.fda;
    const buyer = record.decisions.buyer;
    return {
      period: record.period,
      fda: fda
        ? {
            severity: fda.announce ? fda.severity : "none",
            text: fda.text,
            confidence: fda.confidence,
            rationale: fda.rationale,
          }
        : null,
      manufacturers: (record.decisions.manufacturers ?? []).map((m) => ({
        id: m.manufacturer_id,
        investFraction: m.invest_fraction,
        confidence: m.confidence,
        rationale: m.rationale,
      })),
      buyer: buyer
        ? {
            orderQuantity: buyer.order_quantity,
            confidence: buyer.confidence,
            rationale: buyer.rationale,
          }
        : null,
    };
  });
}

export function consoleView(session: SessionView, records: TrajectoryRecord[]): ConsoleSessionView {
  return {
    id: session.id,
    mode: session.mode,
    status: session.status,
    period: session.period,
    horizon: session.horizon,
    pendingDecision: session.pending_decision,
    series: seriesFromRecords(records),
    decisions: decisionHistory(records),
  };
}
