/**
 * Entry point. Serves requests over stdio (default) or a TCP port, or runs
 * the built-in self test.
 *
 *   node dist/main.js --stdio [--model path] [--batch-size n]
 *   node dist/main.js --tcp 9700
 *   node dist/main.js --self-test
 */

import { parseArgs } from "node:util";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { loadModel } from "./extractor.js";
import { selfTest } from "./selftest.js";
import { serveStreams, serveTcp, type WorkerConfig } from "./worker.js";

const DEFAULT_MODEL = join(
  dirname(fileURLToPath(import.meta.url)),
  "..",
  "data",
  "terms.json",
);

function fail(message: string): never {
  process.stderr.write(`error: ${message}\n`);
  process.exit(2);
}

async function main(): Promise<void> {
  const { values } = parseArgs({
    options: {
      stdio: { type: "boolean", default: false },
      tcp: { type: "string" },
      "self-test": { type: "boolean", default: false },
      model: { type: "string", default: DEFAULT_MODEL },
      "batch-size": { type: "string", default: "1" },
    },
  });

  let config: WorkerConfig;
  try {
    config = {
      model: loadModel(values.model as string),
      batchSize: Number(values["batch-size"]),
    };
  } catch (error) {
    fail((error as Error).message);
  }

  if (values["self-test"]) {
    const report = selfTest(config.model);
    process.stdout.write(JSON.stringify(report, null, 2) + "\n");
    process.exit(report.ok ? 0 : 1);
  }

  if (values.tcp !== undefined) {
    const port = Number(values.tcp);
    if (!Number.isInteger(port) || port < 0 || port > 65535) {
      fail(`invalid TCP port '${values.tcp}'`);
    }
    const server = serveTcp(config, port);
    server.on("listening", () => {
      const address = server.address();
      const bound = typeof address === "object" && address ? address.port : port;
      process.stderr.write(`listening on 127.0.0.1:${bound}\n`);
    });
    return;
  }

  await serveStreams(config, process.stdin, process.stdout);
}

main().catch((error) => {
  fail((error as Error).message);
});
