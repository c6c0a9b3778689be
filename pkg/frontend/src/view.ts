/**
 * Canvas renderer for the task view: large display outline, phone
 * cutout, red/green targets, and the service-reported cursor. Pure
 * drawing; all geometry comes from the service config and task state.
 */

import { ViewState } from "./session.js";

export interface TargetShape {
  x: number;
  y: number;
  w: number;
}

export interface SceneConfig {
  displayWidth: number;
  displayHeight: number;
  phone: { cx: number; cy: number; width: number; height: number };
  pixelsPerMeter: number;
  originPx: { x: number; y: number };
}

export function sceneFromServiceConfig(
  config: Record<string, unknown>,
  pixelsPerMeter: number,
  originPx: { x: number; y: number },
): SceneConfig {
  const display = config.display as { width: number; height: number };
  const phone = config.phone_rect as {
    center: [number, number];
    width: number;
    height: number;
  };
  return {
    displayWidth: display.width,
    displayHeight: display.height,
    phone: {
      cx: phone.center[0],
      cy: phone.center[1],
      width: phone.width,
      height: phone.height,
    },
    pixelsPerMeter,
    originPx,
  };
}

export function toPx(scene: SceneConfig, x: number, y: number): { x: number; y: number } {
  return {
    x: scene.originPx.x + x * scene.pixelsPerMeter,
    y: scene.originPx.y - y * scene.pixelsPerMeter,
  };
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  scene: SceneConfig,
  state: ViewState,
  redTarget: TargetShape | null,
  greenTarget: TargetShape | null,
): void {
  const { pixelsPerMeter: ppm } = scene;
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  const tl = toPx(scene, -scene.displayWidth / 2, scene.displayHeight / 2);
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 2;
  ctx.strokeRect(tl.x, tl.y, scene.displayWidth * ppm, scene.displayHeight * ppm);

  const ptl = toPx(
    scene,
    scene.phone.cx - scene.phone.width / 2,
    scene.phone.cy + scene.phone.height / 2,
  );
  ctx.strokeStyle = "#888";
  ctx.setLineDash([6, 4]);
  ctx.strokeRect(ptl.x, ptl.y, scene.phone.width * ppm, scene.phone.height * ppm);
  ctx.setLineDash([]);

  const drawCircle = (t: TargetShape, color: string) => {
    const c = toPx(scene, t.x, t.y);
    ctx.beginPath();
    ctx.arc(c.x, c.y, (t.w / 2) * ppm, 0, 2 * Math.PI);
    ctx.fillStyle = color;
    ctx.fill();
  };
  if (state.phase === "red" && redTarget) drawCircle(redTarget, "#c0392b");
  if (state.phase === "green" && greenTarget) drawCircle(greenTarget, "#27ae60");

  if (state.mapped) {
    const c = toPx(scene, state.mapped.fx, state.mapped.fy);
    ctx.beginPath();
    ctx.arc(c.x, c.y, 5, 0, 2 * Math.PI);
    ctx.strokeStyle = "#2980b9";
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(c.x - 9, c.y);
    ctx.lineTo(c.x + 9, c.y);
    ctx.moveTo(c.x, c.y - 9);
    ctx.lineTo(c.x, c.y + 9);
    ctx.stroke();
  }
}
