// Keyboard -> pattern-angle input with slew limiting.
//
// The human controls exactly the two pattern angles: arms (turn) with
// ArrowLeft/ArrowRight or A/D, legs (forward/backward) with ArrowUp/ArrowDown
// or W/S. Holding a key slews the angle at a configurable rate; with
// release-to-neutral enabled the angles decay back to zero at the same rate.

export interface PatternInput {
  uArms: number;
  uLegs: number;
}

export const INPUT_LIMIT = (30 * Math.PI) / 180;

const ARM_PLUS = new Set(["ArrowRight", "KeyD"]);
const ARM_MINUS = new Set(["ArrowLeft", "KeyA"]);
const LEG_PLUS = new Set(["ArrowUp", "KeyW"]);
const LEG_MINUS = new Set(["ArrowDown", "KeyS"]);

export class InputMap {
  readonly slewRate: number;
  releaseToNeutral: boolean;
  private held = new Set<string>();
  private state: PatternInput = { uArms: 0, uLegs: 0 };

  constructor(slewRate: number = (10 * Math.PI) / 180, releaseToNeutral = true) {
    this.slewRate = slewRate;
    this.releaseToNeutral = releaseToNeutral;
  }

  keyDown(code: string): void {
    this.held.add(code);
  }

  keyUp(code: string): void {
    this.held.delete(code);
  }

  private axis(plus: Set<string>, minus: Set<string>): number {
    let dir = 0;
    for (const code of this.held) {
      if (plus.has(code)) dir += 1;
      if (minus.has(code)) dir -= 1;
    }
    return Math.sign(dir);
  }

  private slew(value: number, dir: number, dt: number): number {
    const step = this.slewRate * dt;
    if (dir !== 0) {
      value += dir * step;
    } else if (this.releaseToNeutral) {
      if (Math.abs(value) <= step) value = 0;
      else value -= Math.sign(value) * step;
    }
    return Math.min(Math.max(value, -INPUT_LIMIT), INPUT_LIMIT);
  }

  tick(dt: number): PatternInput {
    this.state = {
      uArms: this.slew(this.state.uArms, this.axis(ARM_PLUS, ARM_MINUS), dt),
      uLegs: this.slew(this.state.uLegs, this.axis(LEG_PLUS, LEG_MINUS), dt),
    };
    return { ...this.state };
  }

  current(): PatternInput {
    return { ...this.state };
  }
}

export interface OutboundInput {
  uArms: number;
  uLegs: number;
  tsMs: number;
}

// Emits input messages at a fixed cadence with strictly monotone client
// timestamps; while disconnected, messages buffer for at most bufferMs and
// older ones are dropped.
export class InputSender {
  readonly intervalMs: number;
  readonly bufferMs: number;
  private lastSentWall = -Infinity;
  private lastTs = 0;
  private buffer: OutboundInput[] = [];

  constructor(intervalMs = 1000 / 30, bufferMs = 500) {
    this.intervalMs = intervalMs;
    this.bufferMs = bufferMs;
  }

  private stamp(nowMs: number): number {
    const ts = Math.max(Math.round(nowMs), this.lastTs + 1);
    this.lastTs = ts;
    return ts;
  }

  poll(input: PatternInput, connected: boolean, nowMs: number): OutboundInput[] {
    if (nowMs - this.lastSentWall < this.intervalMs) return [];
    this.lastSentWall = nowMs;
    const msg: OutboundInput = {
      uArms: input.uArms,
      uLegs: input.uLegs,
      tsMs: this.stamp(nowMs),
    };
    if (!connected) {
      this.buffer.push(msg);
      this.buffer = this.buffer.filter((m) => nowMs - m.tsMs <= this.bufferMs);
      return [];
    }
    const out = [...this.buffer, msg];
    this.buffer = [];
    return out;
  }
}
