#!/usr/bin/env node
// Minimal SMT-LIB2 front end for the z3-solver WASM package: reads a
// script from the file given as the last argument (or stdin), evaluates
// it in one shot, and prints the solver's output.
"use strict";

const fs = require("fs");
const path = require("path");
const { execSync } = require("child_process");

function requireZ3() {
  try {
    return require("z3-solver");
  } catch (e) {
    // fall back to the global install when NODE_PATH is not set
    const root = execSync("npm root -g", { encoding: "utf8" }).trim();
    return require(path.join(root, "z3-solver"));
  }
}

async function main() {
  const file = process.argv[2];
  const script =
    file && file !== "-"
      ? fs.readFileSync(file, "utf8")
      : fs.readFileSync(0, "utf8");

  const { init } = requireZ3();
  const { Z3 } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  Z3.del_config(cfg);
  try {
    const out = await Z3.eval_smtlib2_string(ctx, script);
    process.stdout.write(out.endsWith("\n") ? out : out + "\n");
  } finally {
    Z3.del_context(ctx);
  }
  // the WASM runtime keeps worker threads alive; exit explicitly
  process.exit(0);
}

main().catch((e) => {
  process.stderr.write(String(e && e.stack ? e.stack : e) + "\n");
  process.exit(1);
});
