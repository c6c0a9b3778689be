/**
 * Input capture model: converts pointer pixels and wheel notches into
 * finger coordinates for the wire protocol. Pure logic, no DOM types,
 * so it is directly testable; the view layer feeds it raw events.
 */

export interface CaptureConfig {
  /** Pixels per display meter on the canvas. */
  pixelsPerMeter: number;
  /** Canvas pixel position of the display center. */
  originPx: { x: number; y: number };
  /** Height range from the service calibration config, meters. */
  hMin: number;
  hMax: number;
  /** Height change per wheel notch / key press, meters. */
  zStep: number;
}

export interface FingerSample {
  x: number;
  y: number;
  z: number;
}

export class InputCapture {
  private z: number;
  private xy = { x: 0, y: 0 };

  constructor(private cfg: CaptureConfig) {
    if (!(cfg.hMax > cfg.hMin)) {
      throw new Error(`invalid height range [${cfg.hMin}, ${cfg.hMax}]`);
    }
    if (!(cfg.zStep > 0) || !(cfg.pixelsPerMeter > 0)) {
      throw new Error("zStep and pixelsPerMeter must be positive");
    }
    this.z = cfg.hMin;
  }

  /** Canvas y grows downward; display y grows upward. */
  pointerMove(px: number, py: number): FingerSample {
    this.xy = {
      x: (px - this.cfg.originPx.x) / this.cfg.pixelsPerMeter,
      y: (this.cfg.originPx.y - py) / this.cfg.pixelsPerMeter,
    };
    return this.sample();
  }

  /** Positive notches raise the finger; z clamps to the calibrated range. */
  wheel(notches: number): FingerSample {
    this.z = Math.min(
      this.cfg.hMax,
      Math.max(this.cfg.hMin, this.z + notches * this.cfg.zStep),
    );
    return this.sample();
  }

  setHeightFraction(frac: number): FingerSample {
    const clamped = Math.min(1, Math.max(0, frac));
    this.z = this.cfg.hMin + clamped * (this.cfg.hMax - this.cfg.hMin);
    return this.sample();
  }

  sample(): FingerSample {
    return { x: this.xy.x, y: this.xy.y, z: this.z };
  }
}

/** Default canvas scale: fit a display of the given width into the viewport. */
export function fitPixelsPerMeter(displayWidthM: number, viewportPx: number, marginPx = 40): number {
  return (viewportPx - 2 * marginPx) / displayWidthM;
}
