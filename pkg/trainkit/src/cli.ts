/** Minimal command front end: toy training run, NNWF export demo. */

import * as fs from "node:fs";
import * as path from "node:path";

import { DEFAULT_CONFIG, type TrainConfig } from "./config.js";
import { buildResidualArchive, extractToyFeature, synthToyDataset } from "./dataset.js";
import { buildReconstructionNet } from "./model.js";
import { exportNnwf } from "./nnwf.js";
import { fixtureFeatureNetwork } from "./perceptual.js";
import { forwardParity } from "./parity.js";
import { trainReconstructor } from "./train.js";

function flag(name: string, fallback: string): string {
  const idx = process.argv.indexOf(`--${name}`);
  return idx >= 0 && process.argv[idx + 1] ? process.argv[idx + 1] : fallback;
}

const TOY_CONFIG: TrainConfig = {
  ...DEFAULT_CONFIG,
  imageSize: { h: 16, w: 16, c: 3 },
  channels: [16, 8, 3],
  epochs: 5,
};

async function trainToy(): Promise<void> {
  const outDir = flag("out", "toy-run");
  const epochs = parseInt(flag("epochs", String(TOY_CONFIG.epochs)), 10);
  const n = parseInt(flag("n", "200"), 10);
  const config = { ...TOY_CONFIG, epochs };
  const dataset = synthToyDataset(n, config);
  const percept = fixtureFeatureNetwork(config.imageSize);
  const { model, history } = await trainReconstructor(dataset, config, {
    percept,
    checkpointDir: path.join(outDir, "checkpoints"),
    log: (line) => console.log(line),
  });
  fs.mkdirSync(outDir, { recursive: true });
  fs.writeFileSync(path.join(outDir, "model.nnwf"), exportNnwf(model));
  fs.writeFileSync(
    path.join(outDir, "history.json"),
    JSON.stringify(history, null, 2),
  );
  const archive = buildResidualArchive(
    dataset.slice(0, 32),
    (image) => extractToyFeature(image, config.imageSize, config.featDim),
    model,
    config,
    path.join(outDir, "residuals"),
  );
  console.log(
    `wrote ${outDir}/model.nnwf, history.json and ${archive.written} residual planes`,
  );
}

async function exportDemo(): Promise<void> {
  const outPath = flag("out", "demo.nnwf");
  const model = buildReconstructionNet(TOY_CONFIG);
  fs.writeFileSync(outPath, exportNnwf(model));
  const report = forwardParity(model, TOY_CONFIG, 4);
  console.log(
    `exported ${outPath}; engine parity over ${report.features} features: ` +
      `max abs diff ${report.maxAbsDiff.toExponential(3)}`,
  );
}

const command = process.argv[2];
const commands: Record<string, () => Promise<void>> = {
  "train-toy": trainToy,
  "export-demo": exportDemo,
};
if (!command || !(command in commands)) {
  console.error("usage: cli.ts <train-toy|export-demo> [--out DIR] [--epochs N] [--n N]");
  process.exit(2);
}
commands[command]().catch((err) => {
  console.error(err);
  process.exit(1);
});
