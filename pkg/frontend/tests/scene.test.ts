import { describe, expect, it } from "vitest";

import { buildScene } from "../src/scene.js";
import type { WireBalance } from "../src/types.js";
import { fixture } from "./helpers.js";

function symmetric(): WireBalance {
  return {
    pivot: 0,
    stand: [-0.5, 0.5],
    torque_residual: 0,
    model_tag: "fixed",
    ghost: null,
    studies: [
      { id: "a", x_position: -1, height: 2, mass_pct: 50, hole_len: 0, excluded: false },
      { id: "b", x_position: 1, height: 2, mass_pct: 50, hole_len: 0, excluded: false },
    ],
  };
}

describe("scene geometry", () => {
  it("draws the pivot midway for a symmetric two-study state", () => {
    const scene = buildScene(symmetric(), null, 800, 400);
    expect(scene.stand.pivotX).toBeCloseTo(400, 6);
    const [a, b] = scene.masses;
    expect(a!.side).toBeCloseTo(b!.side, 9);
  });

  it("draws no holes when tau2 is zero", () => {
    const scene = buildScene(fixture("fixed_all").balance, null);
    expect(scene.masses.every((m) => m.holeSide === 0)).toBe(true);
  });

  it("gives masses area proportional to their served percentage", () => {
    const scene = buildScene(fixture("pm_all").balance, null);
    const ratios = scene.masses
      .filter((m) => !m.raw.excluded)
      .map((m) => (m.side * m.side) / m.raw.mass_pct);
    for (const r of ratios) {
      expect(r).toBeCloseTo(ratios[0]!, 9);
    }
  });

  it("draws drilled holes on the same sqrt-weight scale as the sides", () => {
    const env = fixture("pm_all");
    const scene = buildScene(env.balance, null);
    const withHoles = scene.masses.filter((m) => m.raw.hole_len > 0);
    expect(withHoles.length).toBeGreaterThan(0);
    for (const m of withHoles) {
      expect(m.holeSide).toBeGreaterThan(0);
      expect(m.holeSide).toBeLessThan(m.side);
    }
  });

  it("keeps excluded studies in the scene with their raw coordinates", () => {
    const env = fixture("pm_excl");
    const scene = buildScene(env.balance, null);
    const excluded = scene.masses.find((m) => m.raw.excluded);
    expect(excluded).toBeDefined();
    expect(excluded!.raw.id).toBe("trial_3");
    expect(excluded!.raw.mass_pct).toBe(0);
  });

  it("places egger masses at the transformed coordinates from the response", () => {
    const env = fixture("egger_all");
    const est = env.estimates;
    expect(est.type).toBe("egger");
    const scene = buildScene(env.balance, null);
    const transformed = (est as { transformed: [number, number | null][] })
      .transformed;
    scene.masses.forEach((m, i) => {
      expect(m.raw.x_position).toBe(transformed[i]![0]);
    });
  });

  it("carries the ghost stand when a previous state exists", () => {
    const ghost = fixture("fixed_all").balance;
    const scene = buildScene(fixture("pm_all").balance, ghost);
    expect(scene.ghostStand).not.toBeNull();
    expect(scene.ghostStand!.dataPivot).toBe(ghost.pivot);
  });
});
