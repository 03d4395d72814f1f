// Top-down traffic view on a 2D canvas: runways, white pattern reference
// paths, aircraft glyphs with altitude labels, the AI's most likely search
// branch in cyan, and the separation ring around the human aircraft.
// Colors: human magenta, AI lime.

import type { AirfieldMap, Snapshot } from "./protocol.js";

export interface Viewport {
  centerX: number;
  centerY: number;
  metersPerPixel: number;
  width: number;
  height: number;
}

export function worldToScreen(
  vp: Viewport, x: number, y: number,
): [number, number] {
  return [
    vp.width / 2 + (x - vp.centerX) / vp.metersPerPixel,
    vp.height / 2 - (y - vp.centerY) / vp.metersPerPixel,
  ];
}

export function fitViewport(
  map: AirfieldMap, width: number, height: number, marginM = 1500,
): Viewport {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const rwy of map.runways) {
    for (const [x, y] of rwy.pattern) {
      minX = Math.min(minX, x); maxX = Math.max(maxX, x);
      minY = Math.min(minY, y); maxY = Math.max(maxY, y);
    }
  }
  const spanX = maxX - minX + 2 * marginM;
  const spanY = maxY - minY + 2 * marginM;
  return {
    centerX: (minX + maxX) / 2,
    centerY: (minY + maxY) / 2,
    metersPerPixel: Math.max(spanX / width, spanY / height),
    width,
    height,
  };
}

const COLORS = {
  human: "#ff40ff",
  ai: "#7CFC00",
  scripted: "#ffb347",
  branch: "#00e5ff",
  reference: "rgba(255,255,255,0.45)",
  runway: "#9aa0a6",
  ring: "rgba(255,64,255,0.35)",
};

export function agentColor(kind: string): string {
  if (kind === "human") return COLORS.human;
  if (kind === "ai") return COLORS.ai;
  return COLORS.scripted;
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  map: AirfieldMap,
  snapshot: Snapshot | null,
  selectedAgent: string | null,
): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, vp.width, vp.height);

  // pattern reference paths
  ctx.strokeStyle = COLORS.reference;
  ctx.lineWidth = 1;
  ctx.setLineDash([6, 6]);
  for (const rwy of map.runways) {
    ctx.beginPath();
    rwy.pattern.forEach(([x, y], i) => {
      const [sx, sy] = worldToScreen(vp, x, y);
      if (i === 0) ctx.moveTo(sx, sy); else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);

  // runway strips (draw once per reciprocal pair is fine: they overlap)
  ctx.strokeStyle = COLORS.runway;
  ctx.lineWidth = 6;
  for (const rwy of map.runways) {
    const [tx, ty] = rwy.threshold;
    const rad = ((90 - rwy.heading_deg) * Math.PI) / 180;
    const ex = tx + rwy.length_m * Math.cos(rad);
    const ey = ty + rwy.length_m * Math.sin(rad);
    const [sx0, sy0] = worldToScreen(vp, tx, ty);
    const [sx1, sy1] = worldToScreen(vp, ex, ey);
    ctx.beginPath();
    ctx.moveTo(sx0, sy0);
    ctx.lineTo(sx1, sy1);
    ctx.stroke();
    ctx.fillStyle = COLORS.runway;
    ctx.font = "11px monospace";
    ctx.fillText(rwy.designator, sx0 + 6, sy0 - 6);
  }

  if (!snapshot) return;

  // AI most likely branch
  const branch = snapshot.ai_debug.most_likely_branch;
  if (branch.length > 1) {
    ctx.strokeStyle = COLORS.branch;
    ctx.lineWidth = 2;
    ctx.beginPath();
    branch.forEach(([x, y], i) => {
      const [sx, sy] = worldToScreen(vp, x, y);
      if (i === 0) ctx.moveTo(sx, sy); else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
  }

  // separation ring around the flown (human) aircraft
  const own = snapshot.agents.find((a) => a.id === selectedAgent);
  if (own && own.status === "active") {
    const [cx, cy] = worldToScreen(vp, own.x, own.y);
    ctx.strokeStyle = COLORS.ring;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(cx, cy, map.d_safe_m / vp.metersPerPixel, 0, 2 * Math.PI);
    ctx.stroke();
  }

  // aircraft glyphs with heading and altitude labels
  for (const agent of snapshot.agents) {
    const [sx, sy] = worldToScreen(vp, agent.x, agent.y);
    const color = agentColor(agent.kind);
    ctx.save();
    ctx.translate(sx, sy);
    ctx.globalAlpha = agent.status === "finished" ? 0.35 : 1.0;
    ctx.rotate((agent.heading_deg * Math.PI) / 180);
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.moveTo(0, -9);
    ctx.lineTo(6, 8);
    ctx.lineTo(0, 4);
    ctx.lineTo(-6, 8);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
    ctx.globalAlpha = 1.0;
    ctx.fillStyle = color;
    ctx.font = "11px monospace";
    ctx.fillText(
      `${agent.id} ${Math.round(agent.z)}m`,
      sx + 10,
      sy + 4,
    );
  }

  if (snapshot.paused) {
    ctx.fillStyle = "rgba(0,0,0,0.5)";
    ctx.fillRect(0, 0, vp.width, 36);
    ctx.fillStyle = "#ffffff";
    ctx.font = "16px monospace";
    ctx.fillText("PAUSED", 12, 24);
  }
}
