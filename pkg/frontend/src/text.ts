// Text view: the same numbers as the dot grid, in prose. Incorrect
// predictions are grouped before correct ones, and every number shown is a
// field of the evaluation response (no client-side arithmetic beyond none).

import type { Counts, Evaluation } from "./api.js";

export interface TextSection {
  heading: string;
  sentences: string[];
}

export interface TextViewModel {
  incorrect: TextSection;
  correct: TextSection;
  summary: string[];
}

export const METRIC_DEFINITIONS: Record<string, string> = {
  errors: "Prediction errors: the number of false positives plus false negatives.",
  disparity:
    "Disparity: the larger of the two between-group differences in " +
    "false-positive counts and false-negative counts.",
  threshold:
    "Threshold: the probability cutoff above which a defendant is predicted to re-offend. " +
    "A score at or above the threshold counts as a re-offend prediction.",
};

export function labelText(value: string): string {
  return value
    .split("_")
    .map((part) => part.charAt(0).toUpperCase() + part.slice(1))
    .join("-");
}

function withGroups(
  count: number,
  evaluation: Evaluation,
  key: keyof Counts,
): string {
  if (!evaluation.by_group) return `${count}`;
  const { labels, a0, a1 } = evaluation.by_group;
  return `${count} (${a0[key]} ${labelText(labels[0])}, ${a1[key]} ${labelText(labels[1])})`;
}

export function buildTextView(evaluation: Evaluation): TextViewModel {
  const c = evaluation.overall;
  const incorrect: TextSection = {
    heading: "Incorrect predictions",
    sentences: [
      `${withGroups(c.fp, evaluation, "fp")} defendants were predicted to re-offend but did not (false positives).`,
      `${withGroups(c.fn, evaluation, "fn")} defendants were predicted not to re-offend but did (false negatives).`,
    ],
  };
  const correct: TextSection = {
    heading: "Correct predictions",
    sentences: [
      `${withGroups(c.tp, evaluation, "tp")} defendants were predicted to re-offend and did (true positives).`,
      `${withGroups(c.tn, evaluation, "tn")} defendants were predicted not to re-offend and did not (true negatives).`,
    ],
  };
  const summary = [
    `The model makes ${evaluation.errors} prediction errors in total.`,
  ];
  if (evaluation.disparity !== undefined && evaluation.by_group) {
    const { labels } = evaluation.by_group;
    summary.push(
      `The disparity between ${labelText(labels[0])} and ${labelText(labels[1])} defendants is ` +
        `${evaluation.disparity}, the larger of the false-positive and false-negative gaps.`,
    );
  }
  return { incorrect, correct, summary };
}

/** Every number surfaced by the text view, for count-fidelity checks. */
export function numbersIn(model: TextViewModel): number[] {
  const out: number[] = [];
  const scan = (text: string) => {
    for (const match of text.matchAll(/\d+/g)) out.push(Number(match[0]));
  };
  model.incorrect.sentences.forEach(scan);
  model.correct.sentences.forEach(scan);
  model.summary.forEach(scan);
  return out;
}
