/**
 * Process bridge to the Python core.
 *
 * A single long-lived interpreter handles line-delimited JSON requests;
 * calls return promises, so nothing here blocks the host event loop and
 * several requests can be in flight at once. Core errors arrive with the
 * originating toolkit error name attached.
 */

import { spawn, ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface, Interface } from "node:readline";
import { fileURLToPath } from "node:url";
import * as path from "node:path";

import { decodeValue, encodeValue, Wire, Decoded } from "./wire.js";

export class CoreError extends Error {
  readonly coreName: string;

  constructor(name: string, message: string) {
    super(`${name}: ${message}`);
    this.name = "CoreError";
    this.coreName = name;
  }
}

export interface SessionOptions {
  /** Interpreter executable; defaults to $GAITNL_PYTHON or "python3". */
  python?: string;
  /** Override the bridge script location (testing hook). */
  serverScript?: string;
}

interface Pending {
  resolve: (value: Decoded) => void;
  reject: (err: Error) => void;
}

function defaultServerScript(): string {
  const here = path.dirname(fileURLToPath(import.meta.url));
  return path.resolve(here, "..", "py", "bind_server.py");
}

export class CoreSession {
  private child: ChildProcessWithoutNullStreams;
  private reader: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;
  private stderrTail = "";

  constructor(options: SessionOptions = {}) {
    const python =
      options.python ?? process.env.GAITNL_PYTHON ?? "python3";
    const script = options.serverScript ?? defaultServerScript();
    this.child = spawn(python, [script], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    this.child.stderr.on("data", (chunk: Buffer) => {
      this.stderrTail = (this.stderrTail + chunk.toString()).slice(-4000);
    });
    this.child.on("exit", () => {
      if (this.closed) return;
      const err = new CoreError(
        "SessionClosed",
        `core process exited unexpectedly; stderr: ${this.stderrTail}`,
      );
      for (const p of this.pending.values()) p.reject(err);
      this.pending.clear();
    });
    this.reader = createInterface({ input: this.child.stdout });
    this.reader.on("line", (line: string) => this.onLine(line));
  }

  private onLine(line: string): void {
    let message: {
      id: number | null;
      ok: boolean;
      value?: Wire;
      error?: { name: string; message: string };
    };
    try {
      message = JSON.parse(line);
    } catch {
      return;
    }
    if (message.id === null || message.id === undefined) return;
    const pending = this.pending.get(message.id);
    if (!pending) return;
    this.pending.delete(message.id);
    if (message.ok) {
      pending.resolve(decodeValue(message.value ?? null));
    } else {
      const err = message.error ?? { name: "Unknown", message: "no detail" };
      pending.reject(new CoreError(err.name, err.message));
    }
  }

  call(op: string, args: Record<string, unknown> = {}): Promise<Decoded> {
    if (this.closed) {
      return Promise.reject(new CoreError("SessionClosed", "session closed"));
    }
    const id = this.nextId;
    this.nextId += 1;
    const request = JSON.stringify({ id, op, args: encodeValue(args) });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.child.stdin.write(request + "\n", (err) => {
        if (err) {
          this.pending.delete(id);
          reject(err);
        }
      });
    });
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.reader.close();
    this.child.stdin.end();
    this.child.kill();
  }
}
