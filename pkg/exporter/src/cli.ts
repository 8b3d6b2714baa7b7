#!/usr/bin/env node
/**
 * fgse-export export --corpus <path> --mode <original|holders|expressions|full>
 *                    --encoder <name> --out <path>
 *                    [--subtoken-pool first|mean] [--max-len <n>]
 */

import { parseArgs } from "node:util";

import { AUGMENT_MODES, AugmentMode } from "./augment";
import { SubtokenPooling } from "./encoder";
import { runExport } from "./export";

const USAGE =
  "usage: fgse-export export --corpus <path> --mode <" + AUGMENT_MODES.join("|") + ">" +
  " --encoder <name> --out <path> [--subtoken-pool first|mean] [--max-len <n>]";

class UsageError extends Error {}

function run(argv: string[]): void {
  const { values, positionals } = parseArgs({
    args: argv,
    options: {
      corpus: { type: "string" },
      mode: { type: "string" },
      encoder: { type: "string" },
      out: { type: "string" },
      "subtoken-pool": { type: "string", default: "first" },
      "max-len": { type: "string", default: "128" },
      help: { type: "boolean", short: "h", default: false },
    },
    allowPositionals: true,
  });
  if (values.help) {
    console.log(USAGE);
    return;
  }
  const command = positionals[0];
  if (command === undefined) throw new UsageError("missing command");
  if (command !== "export") throw new UsageError(`unknown command '${command}'`);
  if (positionals.length > 1) throw new UsageError(`unexpected argument '${positionals[1]}'`);
  for (const flag of ["corpus", "mode", "encoder", "out"] as const) {
    if (values[flag] === undefined) throw new UsageError(`--${flag} is required`);
  }
  if (!(AUGMENT_MODES as readonly string[]).includes(values.mode!)) {
    throw new UsageError(`--mode must be one of ${AUGMENT_MODES.join(", ")}, got '${values.mode}'`);
  }
  const pooling = values["subtoken-pool"]!;
  if (pooling !== "first" && pooling !== "mean") {
    throw new UsageError(`--subtoken-pool must be first or mean, got '${pooling}'`);
  }
  const maxLen = Number(values["max-len"]);
  if (!Number.isInteger(maxLen) || maxLen < 2) {
    throw new UsageError(`--max-len must be an integer >= 2, got '${values["max-len"]}'`);
  }

  const summary = runExport({
    corpus: values.corpus!,
    mode: values.mode as AugmentMode,
    encoder: values.encoder!,
    out: values.out!,
    maxLen,
    pooling: pooling as SubtokenPooling,
  });
  const note = summary.truncated > 0 ? `, ${summary.truncated} truncated` : "";
  console.log(`wrote ${summary.out}: ${summary.sentences} sentences, d=${summary.dimension}${note}`);
}

function main(): void {
  try {
    run(process.argv.slice(2));
  } catch (e) {
    const code = (e as NodeJS.ErrnoException)?.code;
    if (e instanceof UsageError || (typeof code === "string" && code.startsWith("ERR_PARSE_ARGS"))) {
      console.error(`error: ${(e as Error).message}`);
      console.error(USAGE);
    } else {
      console.error(`error: ${e instanceof Error ? e.message : String(e)}`);
    }
    process.exit(1);
  }
}

main();
