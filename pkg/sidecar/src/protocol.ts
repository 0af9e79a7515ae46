/**
 * Newline-delimited JSON wire protocol.
 *
 *   handshake: {"ready": true, "protocol": 1}
 *   request:   {"id": <string>, "text": <string>}
 *   response:  {"id": <string>, "entities": [{text, start, end, label}]}
 *   error:     {"id": <string-or-null>, "error": <message>}
 */

import type { EntitySpan } from "./extractor.js";

export const PROTOCOL_VERSION = 1;

export interface Request {
  id: string;
  text: string;
}

export function handshakeLine(): string {
  return JSON.stringify({ ready: true, protocol: PROTOCOL_VERSION });
}

export function responseLine(id: string, entities: EntitySpan[]): string {
  return JSON.stringify({
    id,
    entities: entities.map(({ text, start, end, label }) => ({
      text,
      start,
      end,
      label,
    })),
  });
}

export function errorLine(id: string | null, message: string): string {
  return JSON.stringify({ id, error: message });
}

/** Parse one request line; throws with a human-readable reason. */
export function parseRequest(line: string): Request {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new Error("request is not valid JSON");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("request must be a JSON object");
  }
  const record = raw as Record<string, unknown>;
  if (typeof record.id !== "string" || record.id.length === 0) {
    throw new Error("request lacks a string id");
  }
  if (typeof record.text !== "string") {
    throw new Error("request lacks a string text field");
  }
  return { id: record.id, text: record.text };
}

/** Best-effort id recovery so error responses can still echo it. */
export function peekId(line: string): string | null {
  try {
    const raw = JSON.parse(line);
    if (raw && typeof raw === "object" && typeof (raw as { id?: unknown }).id === "string") {
      return (raw as { id: string }).id;
    }
  } catch {
    // fall through
  }
  return null;
}
