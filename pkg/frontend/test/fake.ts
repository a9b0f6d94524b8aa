// Deterministic fake of the model-family service for controller tests:
// consistent counts, a real frontier shape, and per-route fetch counters.

import type { Counts, Evaluation, Frontier, Metadata } from "../src/api.js";

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const GROUP_SIZE = 1500;

function splitCounts(rand: () => number, positives: number): Counts {
  const negatives = GROUP_SIZE - positives;
  const tp = Math.floor(rand() * (positives + 1));
  const fp = Math.floor(rand() * (negatives + 1));
  return { tp, fp, fn: positives - tp, tn: negatives - fp };
}

export interface FakeService {
  metadata: Metadata;
  fetchFn: (url: string, init?: RequestInit) => Promise<Response>;
  counters: Record<"metadata" | "frontier" | "evaluation" | "selection", number>;
  selectionLog: string[];
  resetCounters: () => void;
  evaluationFor: (model: string, threshold: number, attribute: string | null) => Evaluation;
  /** When set, matching routes reject with a network error once. */
  failNext: { evaluation?: boolean; frontier?: boolean; selection?: boolean };
}

export function makeFakeService(seed = 7): FakeService {
  const thresholds = Array.from({ length: 21 }, (_, i) => i / 20);
  const modelIds = Array.from({ length: 12 }, (_, i) => `m${String(i).padStart(3, "0")}`);
  const unweighted = "m005";

  const metadata: Metadata = {
    schema_version: 1,
    attributes: ["race"],
    thresholds,
    group_labels: { race: ["african_american", "white"] },
    dataset: { size: 2 * GROUP_SIZE },
    eval_scope: "full",
    unweighted_model_id: unweighted,
    test_accuracy: 0.715,
  };

  // Per (model, threshold) group confusion, generated once and held fixed.
  const byGroup = new Map<string, { a0: Counts; a1: Counts }>();
  const rand = mulberry32(seed);
  for (const model of modelIds) {
    for (const t of thresholds) {
      byGroup.set(`${model}@${t}`, {
        a0: splitCounts(rand, 700),
        a1: splitCounts(rand, 830),
      });
    }
  }

  const evaluationFor = (
    model: string,
    threshold: number,
    attribute: string | null,
  ): Evaluation => {
    const groups = byGroup.get(`${model}@${threshold}`);
    if (!groups) throw new Error(`fake has no evaluation for ${model}@${threshold}`);
    const overall: Counts = {
      tp: groups.a0.tp + groups.a1.tp,
      fp: groups.a0.fp + groups.a1.fp,
      fn: groups.a0.fn + groups.a1.fn,
      tn: groups.a0.tn + groups.a1.tn,
    };
    const evaluation: Evaluation = {
      model_id: model,
      threshold,
      overall,
      errors: overall.fp + overall.fn,
    };
    if (attribute) {
      evaluation.attribute = attribute;
      evaluation.by_group = { labels: metadata.group_labels[attribute], ...groups };
      evaluation.disparity = Math.max(
        Math.abs(groups.a1.fp - groups.a0.fp),
        Math.abs(groups.a1.fn - groups.a0.fn),
      );
    }
    return evaluation;
  };

  const frontierFor = (attribute: string, threshold: number): Frontier => {
    // Pareto-filter the fake evaluations so the frontier is internally
    // consistent with what the evaluation route serves.
    const points = modelIds.map((model) => {
      const evaluation = evaluationFor(model, threshold, attribute);
      return {
        model_id: model,
        alpha: 1,
        beta: 1,
        errors: evaluation.errors,
        disparity: evaluation.disparity ?? 0,
      };
    });
    const kept = points
      .filter(
        (p) =>
          !points.some(
            (q) =>
              q !== p &&
              q.errors <= p.errors &&
              q.disparity <= p.disparity &&
              (q.errors < p.errors || q.disparity < p.disparity || q.model_id < p.model_id),
          ),
      )
      .sort((a, b) => a.disparity - b.disparity);
    return { attribute, threshold, points: kept };
  };

  const counters = { metadata: 0, frontier: 0, evaluation: 0, selection: 0 };
  const selectionLog: string[] = [];
  const failNext: FakeService["failNext"] = {};

  const json = (body: unknown, status = 200): Response =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });

  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const parsed = new URL(url, "http://fake");
    if (parsed.pathname === "/api/metadata") {
      counters.metadata += 1;
      return json(metadata);
    }
    if (parsed.pathname === "/api/frontier") {
      counters.frontier += 1;
      if (failNext.frontier) {
        failNext.frontier = false;
        throw new TypeError("network down");
      }
      const attribute = parsed.searchParams.get("attribute")!;
      const threshold = Number(parsed.searchParams.get("threshold"));
      if (!metadata.attributes.includes(attribute)) {
        return json({ error: "unknown_attribute", detail: "no such attribute" }, 404);
      }
      return json(frontierFor(attribute, threshold));
    }
    if (parsed.pathname === "/api/evaluation") {
      counters.evaluation += 1;
      if (failNext.evaluation) {
        failNext.evaluation = false;
        throw new TypeError("network down");
      }
      const model = parsed.searchParams.get("model")!;
      const threshold = Number(parsed.searchParams.get("threshold"));
      const attribute = parsed.searchParams.get("attribute");
      if (!modelIds.includes(model)) {
        return json({ error: "unknown_model", detail: `model ${model} unknown` }, 404);
      }
      return json(evaluationFor(model, threshold, attribute));
    }
    if (parsed.pathname === "/api/selection" && init?.method === "POST") {
      counters.selection += 1;
      if (failNext.selection) {
        failNext.selection = false;
        return json(
          { error: "invalid_selection", detail: [{ field: "model_id", reason: "unknown" }] },
          400,
        );
      }
      selectionLog.push(String(init.body));
      return json({ sequence: selectionLog.length, timestamp: "2024-05-02T10:00:00Z" });
    }
    return json({ error: "not_found", detail: url }, 404);
  };

  return {
    metadata,
    fetchFn,
    counters,
    selectionLog,
    failNext,
    evaluationFor,
    resetCounters: () => {
      counters.metadata = 0;
      counters.frontier = 0;
      counters.evaluation = 0;
      counters.selection = 0;
    },
  };
}
