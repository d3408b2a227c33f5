// Entry point: URL parameters pick the server and role
// (?host=127.0.0.1:8700&role=pilot&slew=10&hold=1).

import { InputMap, InputSender } from "./input.js";
import { SessionClient } from "./net.js";
import { renderFrame } from "./render.js";
import { initialView } from "./state.js";

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const host = params.get("host") ?? "127.0.0.1:8700";
  const role = params.get("role") ?? "pilot";
  const slewDeg = parseFloat(params.get("slew") ?? "10");
  const releaseToNeutral = params.get("hold") !== "1";

  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const view = initialView();
  const client = new SessionClient(view, role);
  client.connect(host);

  const input = new InputMap((slewDeg * Math.PI) / 180, releaseToNeutral);
  const sender = new InputSender();

  window.addEventListener("keydown", (e) => {
    input.keyDown(e.code);
    if (["ArrowLeft", "ArrowRight", "ArrowUp", "ArrowDown"].includes(e.code)) {
      e.preventDefault();
    }
  });
  window.addEventListener("keyup", (e) => input.keyUp(e.code));

  let lastInputTick = performance.now();
  setInterval(() => {
    const now = performance.now();
    const dt = Math.min((now - lastInputTick) / 1000, 0.1);
    lastInputTick = now;
    const state = input.tick(dt);
    for (const out of sender.poll(state, client.connected, Date.now())) {
      client.sendInput(out.uArms, out.uLegs, out.tsMs);
    }
  }, 1000 / 60);

  let frames = 0;
  let fpsWindowStart = performance.now();
  let fps = 0;
  const draw = () => {
    const now = performance.now();
    renderFrame(ctx, view, canvas.width, canvas.height, now);
    ctx.fillStyle = "#aab4cf";
    ctx.fillText(`${fps.toFixed(0)} fps`, canvas.width - 64, canvas.height - 12);
    frames += 1;
    if (now - fpsWindowStart > 1000) {
      fps = (frames * 1000) / (now - fpsWindowStart);
      frames = 0;
      fpsWindowStart = now;
    }
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

window.addEventListener("load", main);
