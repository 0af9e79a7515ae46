/**
 * Dictionary-backed clinical entity extractor.
 *
 * The "model" is a curated phrase vocabulary; matching is longest-phrase,
 * left to right, non-overlapping, on word boundaries. Offsets always index
 * the original request text.
 */

import { readFileSync } from "node:fs";

export interface EntitySpan {
  text: string;
  start: number;
  end: number;
  label: string | null;
}

export interface TermModel {
  modelId: string;
  phrases: Set<string>;
  maxPhraseTokens: number;
}

const TOKEN_RE = /[\p{L}\p{N}]+/gu;
export const ENTITY_LABEL = "ENTITY";

interface Token {
  lower: string;
  start: number;
  end: number;
}

function tokenizeWithSpans(text: string): Token[] {
  const tokens: Token[] = [];
  for (const match of text.matchAll(TOKEN_RE)) {
    tokens.push({
      lower: match[0].toLowerCase(),
      start: match.index,
      end: match.index + match[0].length,
    });
  }
  return tokens;
}

function normalizePhrase(phrase: string): string {
  return phrase.toLowerCase().split(/\s+/u).filter(Boolean).join(" ");
}

export function loadModel(path: string): TermModel {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (error) {
    throw new Error(`cannot load model '${path}': ${(error as Error).message}`);
  }
  const data = raw as { model_id?: unknown; terms?: unknown };
  if (typeof data.model_id !== "string" || !Array.isArray(data.terms)) {
    throw new Error(`model '${path}' must carry model_id and a terms array`);
  }
  const phrases = new Set<string>();
  let maxPhraseTokens = 1;
  for (const term of data.terms) {
    if (typeof term !== "string" || !term.trim()) {
      throw new Error(`model '${path}' holds an empty or non-string term`);
    }
    const normalized = normalizePhrase(term);
    phrases.add(normalized);
    maxPhraseTokens = Math.max(maxPhraseTokens, normalized.split(" ").length);
  }
  if (phrases.size === 0) {
    throw new Error(`model '${path}' holds no terms`);
  }
  return { modelId: data.model_id, phrases, maxPhraseTokens };
}

function isWhitespaceOnly(text: string, from: number, to: number): boolean {
  return /^\s*$/u.test(text.slice(from, to));
}

/** Longest-match extraction; spans are sorted and never overlap. */
export function extractEntities(model: TermModel, text: string): EntitySpan[] {
  const tokens = tokenizeWithSpans(text);
  const entities: EntitySpan[] = [];
  let i = 0;
  while (i < tokens.length) {
    let consumed = 0;
    const limit = Math.min(model.maxPhraseTokens, tokens.length - i);
    for (let length = limit; length >= 1; length--) {
      const window = tokens.slice(i, i + length);
      const candidate = window.map((t) => t.lower).join(" ");
      if (!model.phrases.has(candidate)) {
        continue;
      }
      let contiguous = true;
      for (let k = 0; k + 1 < window.length; k++) {
        if (!isWhitespaceOnly(text, window[k].end, window[k + 1].start)) {
          contiguous = false;
          break;
        }
      }
      if (!contiguous) {
        continue;
      }
      const start = window[0].start;
      const end = window[window.length - 1].end;
      entities.push({ text: text.slice(start, end), start, end, label: ENTITY_LABEL });
      consumed = length;
      break;
    }
    i += consumed > 0 ? consumed : 1;
  }
  return entities;
}
