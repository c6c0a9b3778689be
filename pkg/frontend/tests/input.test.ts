import { describe, expect, it } from "vitest";

import { InputCapture, fitPixelsPerMeter } from "../src/input.js";

const CFG = {
  pixelsPerMeter: 1000,
  originPx: { x: 500, y: 350 },
  hMin: 0.0,
  hMax: 0.10,
  zStep: 0.01,
};

describe("InputCapture", () => {
  it("converts canvas pixels to display meters with y flipped", () => {
    const cap = new InputCapture(CFG);
    const s = cap.pointerMove(600, 250);
    expect(s.x).toBeCloseTo(0.1, 12);
    expect(s.y).toBeCloseTo(0.1, 12);
  });

  it("starts at the surface height", () => {
    expect(new InputCapture(CFG).sample().z).toBe(0.0);
  });

  it("raises and lowers z by wheel notches within the calibrated range", () => {
    const cap = new InputCapture(CFG);
    expect(cap.wheel(3).z).toBeCloseTo(0.03, 12);
    expect(cap.wheel(-1).z).toBeCloseTo(0.02, 12);
    expect(cap.wheel(100).z).toBe(0.10); // clamped to h_max
    expect(cap.wheel(-100).z).toBe(0.0); // clamped to h_min
  });

  it("jumps to a height fraction directly", () => {
    const cap = new InputCapture(CFG);
    expect(cap.setHeightFraction(0.5).z).toBeCloseTo(0.05, 12);
    expect(cap.setHeightFraction(2.0).z).toBe(0.10);
  });

  it("rejects degenerate configs", () => {
    expect(() => new InputCapture({ ...CFG, hMax: 0.0 })).toThrow();
    expect(() => new InputCapture({ ...CFG, zStep: 0 })).toThrow();
  });
});

describe("fitPixelsPerMeter", () => {
  it("fits the display into the viewport with margins", () => {
    // 0.509 m display into 1100 px with 40 px margins
    const ppm = fitPixelsPerMeter(0.509, 1100);
    expect(0.509 * ppm).toBeCloseTo(1100 - 80, 9);
  });
});
