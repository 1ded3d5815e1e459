/**
 * Process plumbing: every binding goes through the chemtext CLI, which is
 * the library's external interface. No chemistry lives on this side.
 */

import { spawnSync } from "node:child_process";

export interface CliResult {
  stdout: string;
  stderr: string;
  code: number;
}

/** Override with e.g. CHEMTEXT_CLI="chemtext" when the entry point is on PATH. */
function cliCommand(): string[] {
  const env = process.env.CHEMTEXT_CLI;
  if (env && env.trim().length > 0) {
    return env.trim().split(/\s+/);
  }
  return ["python3", "-m", "chemtext.cli"];
}

export class ChemtextCliError extends Error {
  constructor(message: string, public readonly result: CliResult) {
    super(message);
    this.name = "ChemtextCliError";
  }
}

export function runCli(args: string[], stdin = ""): CliResult {
  const [cmd, ...prefix] = cliCommand();
  const proc = spawnSync(cmd, [...prefix, ...args], {
    input: stdin,
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) {
    throw new ChemtextCliError(`failed to spawn chemtext CLI: ${proc.error.message}`, {
      stdout: "",
      stderr: String(proc.error),
      code: -1,
    });
  }
  return { stdout: proc.stdout ?? "", stderr: proc.stderr ?? "", code: proc.status ?? -1 };
}

export function runCliChecked(args: string[], stdin = ""): CliResult {
  const result = runCli(args, stdin);
  if (result.code !== 0) {
    throw new ChemtextCliError(
      `chemtext ${args[0]} exited ${result.code}: ${result.stderr.trim()}`,
      result,
    );
  }
  return result;
}
