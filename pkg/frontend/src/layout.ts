// Deterministic dot-grid layout for the confusion matrix view. One dot per
// classified defendant; no randomness, so a given evaluation always renders
// the same picture.

import type { Counts, Evaluation } from "./api.js";

export interface Dot {
  row: number;
  col: number;
  /** 0 or 1 when a protected attribute is active, null otherwise. */
  group: 0 | 1 | null;
}

export interface QuadrantSpec {
  key: keyof Counts;
  title: string;
  correct: boolean;
}

export const QUADRANTS: QuadrantSpec[] = [
  { key: "tp", title: "Predicted to re-offend and did", correct: true },
  { key: "fp", title: "Predicted to re-offend but did not", correct: false },
  { key: "fn", title: "Predicted not to re-offend but did", correct: false },
  { key: "tn", title: "Predicted not to re-offend and did not", correct: true },
];

/**
 * Lay out `count` dots left-to-right, top-to-bottom. When a group split is
 * given, the first `split[0]` dots belong to group a0 and the rest to a1;
 * the two subset sizes always re-sum to `count`.
 */
export function layoutQuadrant(
  count: number,
  columns: number,
  split: [number, number] | null = null,
): Dot[] {
  if (count < 0 || columns < 1) {
    throw new Error(`invalid layout request: count=${count} columns=${columns}`);
  }
  if (split && split[0] + split[1] !== count) {
    throw new Error(`group split ${split} does not sum to ${count}`);
  }
  const dots: Dot[] = [];
  for (let i = 0; i < count; i++) {
    dots.push({
      row: Math.floor(i / columns),
      col: i % columns,
      group: split ? (i < split[0] ? 0 : 1) : null,
    });
  }
  return dots;
}

export interface QuadrantLayout {
  spec: QuadrantSpec;
  count: number;
  dots: Dot[];
}

/** Columns chosen so the widest quadrant stays near a square aspect. */
export function columnsFor(maxCount: number): number {
  return Math.max(10, Math.ceil(Math.sqrt(Math.max(maxCount, 1)) * 1.4));
}

export function layoutEvaluation(evaluation: Evaluation): QuadrantLayout[] {
  const counts = evaluation.overall;
  const columns = columnsFor(Math.max(counts.tp, counts.fp, counts.fn, counts.tn));
  return QUADRANTS.map((spec) => {
    const count = counts[spec.key];
    const split: [number, number] | null = evaluation.by_group
      ? [evaluation.by_group.a0[spec.key], evaluation.by_group.a1[spec.key]]
      : null;
    return { spec, count, dots: layoutQuadrant(count, columns, split) };
  });
}
