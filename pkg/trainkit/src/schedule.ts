/** Exponential learning-rate decay hitting lrStart at epoch 0 and lrEnd at the last epoch. */

export function learningRate(
  epoch: number,
  epochs: number,
  lrStart: number,
  lrEnd: number,
): number {
  if (epochs <= 1) return lrStart;
  const t = epoch / (epochs - 1);
  return lrStart * Math.pow(lrEnd / lrStart, t);
}
