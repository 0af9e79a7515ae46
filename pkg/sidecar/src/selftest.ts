/**
 * Built-in health check: runs a bundled sentence set through the extractor
 * and verifies every span indexes real text, with at least one extraction
 * on a clinical sentence.
 */

import { extractEntities, type TermModel } from "./extractor.js";

export const BUNDLED_SENTENCES: string[] = [
  "small pleural effusion",
  "No back muscle spasm today.",
  "Mild cardiomegaly with trace pulmonary edema.",
  "Unremarkable study.",
  "Acute fracture of the distal radius with surrounding edema.",
  "The gallbladder contains gallstones without wall thickening.",
  "Scattered white matter lesions consistent with demyelination.",
];

export interface SelfTestReport {
  ok: boolean;
  modelId: string;
  sentences: number;
  entities: number;
  failures: string[];
}

export function selfTest(model: TermModel): SelfTestReport {
  const failures: string[] = [];
  let total = 0;
  for (const sentence of BUNDLED_SENTENCES) {
    const entities = extractEntities(model, sentence);
    total += entities.length;
    for (const entity of entities) {
      if (!(0 <= entity.start && entity.start < entity.end && entity.end <= sentence.length)) {
        failures.push(`span (${entity.start}, ${entity.end}) out of bounds in: ${sentence}`);
      } else if (sentence.slice(entity.start, entity.end) !== entity.text) {
        failures.push(`span text mismatch for '${entity.text}' in: ${sentence}`);
      }
    }
  }
  if (total === 0) {
    failures.push("no entities extracted from any bundled sentence");
  }
  return {
    ok: failures.length === 0,
    modelId: model.modelId,
    sentences: BUNDLED_SENTENCES.length,
    entities: total,
    failures,
  };
}
