#!/usr/bin/env node
/** CLI entry: `optosim-plots render --spec figure.json` */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { renderToFile } from "./figures.js";
import { loadFigureSpec } from "./spec.js";

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  await yargs(argv)
    .scriptName("optosim-plots")
    .command(
      "render",
      "render one figure from a JSON spec",
      (y) =>
        y.option("spec", {
          type: "string",
          demandOption: true,
          describe: "path to the figure spec JSON",
        }),
      (args) => {
        try {
          const spec = loadFigureSpec(args.spec);
          const out = renderToFile(spec);
          console.log(`wrote ${spec.kind} figure to ${out}`);
        } catch (err) {
          console.error(`error: ${(err as Error).message}`);
          exitCode = 1;
        }
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg) => {
      console.error(`error: ${msg}`);
      exitCode = 2;
    })
    .parseAsync();
  return exitCode;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");

if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
