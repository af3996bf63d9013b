import { execFile } from "node:child_process";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Largest engine output we expect to buffer (simulate can emit ~10^5 rows). */
const MAX_BUFFER = 512 * 1024 * 1024;

/**
 * Raised when the engine exits with a nonzero status. `message` is the
 * engine's stderr text verbatim (e.g. `cannot read: ...`,
 * `invalid input: ...`, `invalid config: ...`).
 */
export class EngineError extends Error {
  override readonly name = "EngineError";

  constructor(
    /** The engine's exit status (1 = bad input/config, 2 = usage). */
    readonly exitCode: number,
    /** Raw stderr from the engine process. */
    readonly stderr: string,
    /** The command line that failed, for diagnostics. */
    readonly command: string[],
  ) {
    super(stderr.trim() || `engine exited with status ${exitCode}`);
  }
}

/** Options common to every binding call. */
export interface EngineOptions {
  /** Engine executable; defaults to `$NMSAP_BIN` or `nmsap` on PATH. */
  bin?: string;
}

function resolveBin(options?: EngineOptions): string {
  return options?.bin ?? process.env.NMSAP_BIN ?? "nmsap";
}

interface ExecFileError extends Error {
  code?: number | string;
  stdout?: string;
  stderr?: string;
}

/** Run the engine with `args` and return its stdout. */
export function runEngine(args: string[], options?: EngineOptions): Promise<string> {
  const bin = resolveBin(options);
  return new Promise((resolve, reject) => {
    execFile(bin, args, { maxBuffer: MAX_BUFFER }, (error, stdout, stderr) => {
      if (error === null) {
        resolve(stdout);
        return;
      }
      const err = error as ExecFileError;
      if (typeof err.code === "number") {
        reject(new EngineError(err.code, stderr, [bin, ...args]));
        return;
      }
      if (err.code === "ENOENT") {
        reject(
          new Error(
            `engine executable not found: ${bin} ` +
              "(install the nmsap Python package or set NMSAP_BIN)",
          ),
        );
        return;
      }
      reject(error);
    });
  });
}

/** Run the engine and parse its stdout as JSON. */
export async function runEngineJson<T>(args: string[], options?: EngineOptions): Promise<T> {
  return JSON.parse(await runEngine(args, options)) as T;
}

/**
 * Create a scratch directory for the duration of `fn`, then remove it.
 * In-memory inputs are written here so the engine only ever sees files.
 */
export async function withScratchDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "nmsap-bindings-"));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

/**
 * Turn an input into a path the engine can read: strings pass through as
 * paths, anything else is serialized to JSON inside `dir`.
 */
export async function materialize(
  input: string | object,
  dir: string,
  name: string,
): Promise<string> {
  if (typeof input === "string") {
    return input;
  }
  const path = join(dir, name);
  await writeFile(path, JSON.stringify(input));
  return path;
}
