/**
 * The request-serving loop: one handshake, then one response per line.
 *
 * A malformed line produces an error response and the loop keeps running;
 * the worker only stops when its input closes.
 */

import { createInterface } from "node:readline";
import { createServer, type Server, type Socket } from "node:net";
import type { Readable, Writable } from "node:stream";

import { extractEntities, type TermModel } from "./extractor.js";
import { errorLine, handshakeLine, parseRequest, peekId, responseLine } from "./protocol.js";

export interface WorkerConfig {
  model: TermModel;
  batchSize: number;
}

export function assertConfig(config: WorkerConfig): void {
  if (!Number.isInteger(config.batchSize) || config.batchSize < 1) {
    throw new Error(`batch size must be a positive integer, got ${config.batchSize}`);
  }
}

/** Answer a single request line; never throws. */
export function handleLine(config: WorkerConfig, line: string): string {
  try {
    const request = parseRequest(line);
    const entities = extractEntities(config.model, request.text);
    return responseLine(request.id, entities);
  } catch (error) {
    return errorLine(peekId(line), (error as Error).message);
  }
}

export function serveStreams(
  config: WorkerConfig,
  input: Readable,
  output: Writable,
): Promise<void> {
  assertConfig(config);
  output.write(handshakeLine() + "\n");
  const reader = createInterface({ input, crlfDelay: Infinity });
  return new Promise((resolve) => {
    reader.on("line", (line) => {
      if (line.trim().length === 0) {
        return;
      }
      output.write(handleLine(config, line) + "\n");
    });
    reader.on("close", resolve);
  });
}

export function serveTcp(config: WorkerConfig, port: number): Server {
  assertConfig(config);
  const server = createServer((socket: Socket) => {
    void serveStreams(config, socket, socket).then(() => socket.end());
  });
  server.listen(port);
  return server;
}
