// Canvas rendering: top-down primary view (corridor, sky-dot motion grid,
// host and target skydivers, the two forward-model arrows from a shared
// origin) plus a chase-view inset (Desired Posture semi-transparent over the
// executed posture) and the pattern-angle gauges.
//
// Drawing goes through the Canvas2DLike subset so tests can record and
// compare draw operations without a browser.

import { ViewState, bodyYaw, isStale } from "./state.js";
import { computeSkeleton, STICK_CHAINS, Vec3 } from "./skeleton.js";

export interface Canvas2DLike {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  save(): void;
  restore(): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

const COLORS = {
  background: "#0b1020",
  corridor: "#5c6b8a",
  centerline: "#2f3b55",
  dots: "#24304a",
  host: "#e8ecf7",
  target: "#ffb454",
  arrowDesired: "#1f2633",     // dark arrow: the command
  arrowPredicted: "#9fd0ff",   // light arrow: the actual
  postureDesired: "#cfd8ff",   // light posture: the command
  postureActual: "#39415c",    // dark posture: the actual
  gaugeCue: "#cfd8ff",
  gaugeExec: "#7ee08a",
  stall: "#ff5470",
  text: "#aab4cf",
};

const SCALE = 3.2;                 // px per metre, top-down view
const ARROW_LEN_M = 12.0;
const DOT_SPACING_M = 10.0;

interface Camera {
  cx: number;                      // world position at the view center
  cy: number;
  w: number;
  h: number;
}

function toScreen(cam: Camera, x: number, y: number): [number, number] {
  // world x (forward) up the screen, world y (right) to the right
  return [cam.w / 2 + (y - cam.cy) * SCALE, cam.h * 0.62 - (x - cam.cx) * SCALE];
}

function drawArrow(ctx: Canvas2DLike, cam: Camera, x: number, y: number,
                   heading: number, lengthM: number, color: string, width: number) {
  const tipX = x + Math.cos(heading) * lengthM;
  const tipY = y + Math.sin(heading) * lengthM;
  const [sx, sy] = toScreen(cam, x, y);
  const [tx, ty] = toScreen(cam, tipX, tipY);
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(sx, sy);
  ctx.lineTo(tx, ty);
  ctx.stroke();
  const ang = Math.atan2(ty - sy, tx - sx);
  const barb = 9;
  ctx.beginPath();
  ctx.moveTo(tx, ty);
  ctx.lineTo(tx - barb * Math.cos(ang - 0.45), ty - barb * Math.sin(ang - 0.45));
  ctx.moveTo(tx, ty);
  ctx.lineTo(tx - barb * Math.cos(ang + 0.45), ty - barb * Math.sin(ang + 0.45));
  ctx.stroke();
}

function drawTopDown(ctx: Canvas2DLike, view: ViewState, cam: Camera) {
  const rec = view.record;
  const scenario = view.scenario;

  // sky-dot grid fixed in the world: the motion reference
  ctx.fillStyle = COLORS.dots;
  const x0 = cam.cx - cam.h / SCALE, x1 = cam.cx + cam.h / SCALE;
  const y0 = cam.cy - cam.w / SCALE, y1 = cam.cy + cam.w / SCALE;
  for (let gx = Math.floor(x0 / DOT_SPACING_M) * DOT_SPACING_M; gx <= x1; gx += DOT_SPACING_M) {
    for (let gy = Math.floor(y0 / DOT_SPACING_M) * DOT_SPACING_M; gy <= y1; gy += DOT_SPACING_M) {
      const [sx, sy] = toScreen(cam, gx, gy);
      if (sx < -4 || sy < -4 || sx > cam.w + 4 || sy > cam.h + 4) continue;
      ctx.fillRect(sx - 1, sy - 1, 2, 2);
    }
  }

  if (scenario) {
    // corridor: centerline plus the two parallel boundary lines
    const pts = scenario.corridor.length >= 2
      ? scenario.corridor
      : [scenario.start, scenario.target];
    ctx.strokeStyle = COLORS.centerline;
    ctx.lineWidth = 1;
    ctx.setLineDash([6, 6]);
    ctx.beginPath();
    pts.forEach(([x, y], i) => {
      const [sx, sy] = toScreen(cam, x, y);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.strokeStyle = COLORS.corridor;
    ctx.lineWidth = 1.5;
    for (const side of [-1, 1]) {
      ctx.beginPath();
      for (let i = 0; i < pts.length - 1; i++) {
        const [ax, ay] = pts[i];
        const [bx, by] = pts[i + 1];
        const len = Math.hypot(bx - ax, by - ay) || 1;
        const nx = (-(by - ay) / len) * scenario.corridorHalfWidth * side;
        const ny = ((bx - ax) / len) * scenario.corridorHalfWidth * side;
        const [sx, sy] = toScreen(cam, ax + nx, ay + ny);
        const [tx, ty] = toScreen(cam, bx + nx, by + ny);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
        ctx.lineTo(tx, ty);
      }
      ctx.stroke();
    }

    // target skydiver with the capture circle
    const [tx, ty] = toScreen(cam, scenario.target[0], scenario.target[1]);
    ctx.fillStyle = COLORS.target;
    ctx.beginPath();
    ctx.arc(tx, ty, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = COLORS.target;
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.arc(tx, ty, scenario.captureRadius * SCALE, 0, 2 * Math.PI);
    ctx.stroke();
  }

  if (rec) {
    // the forward-model cue: both arrows from the shared predicted origin
    if (view.cues) {
      drawArrow(ctx, cam, view.cues.arrowOrigin[0], view.cues.arrowOrigin[1],
                view.cues.desiredHeading, ARROW_LEN_M, COLORS.arrowDesired, 4);
      drawArrow(ctx, cam, view.cues.arrowOrigin[0], view.cues.arrowOrigin[1],
                view.cues.predictedHeading, ARROW_LEN_M, COLORS.arrowPredicted, 2);
    }
    // host skydiver: triangle aligned with the body yaw
    const yaw = bodyYaw(rec);
    const [hx, hy] = toScreen(cam, rec.px, rec.py);
    const a = yawToScreenAngle(yaw);
    ctx.fillStyle = COLORS.host;
    ctx.beginPath();
    ctx.moveTo(hx + 8 * Math.cos(a), hy + 8 * Math.sin(a));
    ctx.lineTo(hx + 6 * Math.cos(a + 2.5), hy + 6 * Math.sin(a + 2.5));
    ctx.lineTo(hx + 6 * Math.cos(a - 2.5), hy + 6 * Math.sin(a - 2.5));
    ctx.fill();
  }
}

function yawToScreenAngle(yaw: number): number {
  // world +x is up the screen; world +y is right
  return yaw - Math.PI / 2;
}

// chase-view camera: looking forward along body +x, slightly from above
function projectChase(p: Vec3): [number, number] {
  const elev = 0.35;
  const sx = p[1];
  const sy = -(-p[2]) * Math.cos(elev) - p[0] * Math.sin(elev);
  return [sx, sy];
}

function drawPosture(ctx: Canvas2DLike, dof: number[], ox: number, oy: number,
                     scale: number, color: string, alpha: number, width: number) {
  const skel = computeSkeleton(dof);
  ctx.save();
  ctx.globalAlpha = alpha;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  for (const chain of STICK_CHAINS) {
    ctx.beginPath();
    let first = true;
    for (const seg of chain) {
      const [ax, ay] = projectChase(skel.origins[seg]);
      const [bx, by] = projectChase(skel.tips[seg]);
      if (first) {
        ctx.moveTo(ox + ax * scale, oy + ay * scale);
        first = false;
      } else {
        ctx.lineTo(ox + ax * scale, oy + ay * scale);
      }
      ctx.lineTo(ox + bx * scale, oy + by * scale);
    }
    ctx.stroke();
  }
  // head
  const [hx, hy] = projectChase(skel.tips[3]);
  ctx.beginPath();
  ctx.arc(ox + hx * scale, oy + hy * scale, 0.055 * 1.8 * scale, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.restore();
}

function drawChaseInset(ctx: Canvas2DLike, view: ViewState,
                        x: number, y: number, w: number, h: number) {
  ctx.strokeStyle = COLORS.centerline;
  ctx.lineWidth = 1;
  ctx.strokeRect(x, y, w, h);
  ctx.fillStyle = COLORS.text;
  ctx.fillText("chase view", x + 8, y + 14);
  if (!view.cues) return;
  const ox = x + w / 2;
  const oy = y + h / 2;
  const scale = w / 3.2;
  // actual posture dark, Desired Posture light and semi-transparent on top
  drawPosture(ctx, view.cues.executedPosture, ox, oy, scale, COLORS.postureActual, 1.0, 3);
  drawPosture(ctx, view.cues.cuePosture, ox, oy, scale, COLORS.postureDesired, 0.55, 2);
}

function drawGauge(ctx: Canvas2DLike, label: string, cue: number, exec: number,
                   x: number, y: number, w: number) {
  const limit = (30 * Math.PI) / 180;
  const mid = x + w / 2;
  ctx.fillStyle = COLORS.text;
  ctx.fillText(label, x, y - 4);
  ctx.strokeStyle = COLORS.centerline;
  ctx.lineWidth = 1;
  ctx.strokeRect(x, y, w, 10);
  ctx.beginPath();
  ctx.moveTo(mid, y);
  ctx.lineTo(mid, y + 10);
  ctx.stroke();
  // exactly the u values from the latest messages, never extrapolated
  const cueX = mid + (cue / limit) * (w / 2);
  const execX = mid + (exec / limit) * (w / 2);
  ctx.fillStyle = COLORS.gaugeCue;
  ctx.fillRect(Math.min(mid, cueX), y + 1, Math.max(1, Math.abs(cueX - mid)), 4);
  ctx.fillStyle = COLORS.gaugeExec;
  ctx.fillRect(Math.min(mid, execX), y + 5, Math.max(1, Math.abs(execX - mid)), 4);
}

export function renderFrame(ctx: Canvas2DLike, view: ViewState,
                            width: number, height: number, nowMs: number): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  ctx.font = "12px system-ui, sans-serif";

  const rec = view.record;
  const cam: Camera = {
    cx: rec ? rec.px : view.scenario?.start[0] ?? 0,
    cy: rec ? rec.py : view.scenario?.start[1] ?? 0,
    w: width,
    h: height,
  };
  drawTopDown(ctx, view, cam);

  const insetW = Math.min(220, width * 0.3);
  drawChaseInset(ctx, view, width - insetW - 12, 12, insetW, insetW * 0.85);

  if (view.cues) {
    drawGauge(ctx, "turn (arms)", view.cues.uCue[0], view.cues.uExec[0],
              16, height - 58, 180);
    drawGauge(ctx, "fwd/back (legs)", view.cues.uCue[1], view.cues.uExec[1],
              16, height - 26, 180);
  }

  ctx.fillStyle = COLORS.text;
  const status = view.connection + (view.role ? ` (${view.role})` : "");
  ctx.fillText(status, 16, 18);
  if (rec) {
    ctx.fillText(
      `t=${rec.time.toFixed(1)}s  v=${rec.v_meas.toFixed(2)} m/s  ` +
      `yaw rate=${((rec.omega_meas * 180) / Math.PI).toFixed(1)} deg/s  ` +
      `cross-track=${rec.cross_track.toFixed(1)} m`,
      16, 34);
  }
  if (view.outcome) {
    ctx.fillText(`outcome: ${view.outcome}`, 16, 50);
  }
  for (let i = 0; i < view.events.length; i++) {
    ctx.fillText(view.events[i], 16, 66 + 14 * i);
  }

  if (isStale(view, nowMs)) {
    ctx.fillStyle = COLORS.stall;
    ctx.fillRect(0, 0, width, 26);
    ctx.fillStyle = "#ffffff";
    ctx.fillText("STALL: no fresh data for over 1 s", 12, 17);
  }
}
