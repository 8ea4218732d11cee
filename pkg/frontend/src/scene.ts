/** Pure scene geometry: a served balance state -> drawable shapes.
 *
 * Only coordinate transforms happen here.  Mass squares have area
 * proportional to the served mass percentage; the drilled hole is a
 * concentric square whose side uses the same sqrt-weight scale as the
 * mass side, so the drawn material matches the drill identity.  Every
 * shape keeps a reference to the untouched wire record.
 */

import type { WireBalance, WireStudyMass } from "./types.js";

export interface SceneMass {
  raw: WireStudyMass;
  cx: number;
  cy: number;
  side: number;
  holeSide: number;
}

export interface SceneStand {
  x0: number;
  x1: number;
  pivotX: number;
  dataLow: number;
  dataHigh: number;
  dataPivot: number;
}

export interface Scene {
  width: number;
  height: number;
  poleY: number;
  groundY: number;
  masses: SceneMass[];
  stand: SceneStand;
  ghostStand: SceneStand | null;
  modelTag: string;
  torqueResidual: number;
}

const PAD_X = 48;
const POLE_Y = 36;
const MAX_SIDE = 44;
const EXCLUDED_SIDE = 14;

function finiteHeights(balance: WireBalance): number[] {
  return balance.studies
    .map((s) => s.height)
    .filter((h): h is number => h !== null && Number.isFinite(h));
}

export function buildScene(
  balance: WireBalance,
  ghost: WireBalance | null,
  width = 820,
  height = 440,
): Scene {
  const xs = balance.studies.map((s) => s.x_position);
  const standPoints = [balance.stand[0], balance.stand[1], balance.pivot];
  const ghostPoints = ghost ? [ghost.stand[0], ghost.stand[1], ghost.pivot] : [];
  const lo = Math.min(...xs, ...standPoints, ...ghostPoints);
  const hi = Math.max(...xs, ...standPoints, ...ghostPoints);
  const span = hi - lo || 1;
  const toX = (v: number) =>
    PAD_X + ((v - lo) / span) * (width - 2 * PAD_X);

  const groundY = height - 40;
  const heights = finiteHeights(balance);
  const maxH = heights.length ? Math.max(...heights) : 1;
  const toY = (h: number | null) => {
    const clamped = h === null ? maxH : Math.min(h, maxH);
    return groundY - 24 - (clamped / maxH) * (groundY - POLE_Y - 60);
  };

  // area proportional to mass share; holes share the sqrt-weight scale
  const included = balance.studies.filter((s) => !s.excluded);
  const maxPct = Math.max(...included.map((s) => s.mass_pct), 1e-9);
  const sideScale = MAX_SIDE / Math.sqrt(maxPct);
  const activeWeights = included
    .filter((s) => s.height !== null)
    .map((s) => (s.height as number) ** 2 - s.hole_len ** 2);
  const totalActive = activeWeights.reduce((a, b) => a + b, 0);
  // mass_pct = 100 * w_active / total, so sqrt-weight unit in pct terms:
  const weightUnit =
    totalActive > 0 ? sideScale * Math.sqrt(100 / totalActive) : 0;

  const masses: SceneMass[] = balance.studies.map((s) => {
    const side = s.excluded
      ? EXCLUDED_SIDE
      : Math.max(sideScale * Math.sqrt(s.mass_pct), 2);
    return {
      raw: s,
      cx: toX(s.x_position),
      cy: toY(s.height),
      side,
      holeSide: Math.min(weightUnit * s.hole_len, side - 1),
    };
  });

  const stand: SceneStand = {
    x0: toX(balance.stand[0]),
    x1: toX(balance.stand[1]),
    pivotX: toX(balance.pivot),
    dataLow: balance.stand[0],
    dataHigh: balance.stand[1],
    dataPivot: balance.pivot,
  };
  const ghostStand: SceneStand | null = ghost
    ? {
        x0: toX(ghost.stand[0]),
        x1: toX(ghost.stand[1]),
        pivotX: toX(ghost.pivot),
        dataLow: ghost.stand[0],
        dataHigh: ghost.stand[1],
        dataPivot: ghost.pivot,
      }
    : null;

  return {
    width,
    height,
    poleY: POLE_Y,
    groundY,
    masses,
    stand,
    ghostStand,
    modelTag: balance.model_tag,
    torqueResidual: balance.torque_residual,
  };
}
