// Minimal display-side forward kinematics for the posture cues.
//
// Mirrors the simulator's segment tree (body frame: x cranial, y right,
// z ventral; intrinsic Ry(flexion) Rx(abduction) Rz(rotation) per joint;
// left arm-chain joints mirror all three axes, left leg joints mirror
// abduction/rotation). Only used for drawing the stick figure.

export type Vec3 = [number, number, number];
type Mat3 = number[]; // row-major 9

const H = 1.8; // display stature; shapes only, metres

// joint j connects PARENT[j] -> segment j+1
const PARENT = [0, 1, 2, 2, 4, 5, 2, 7, 8, 0, 10, 11, 0, 13, 14];

const JPOS: Vec3[] = [
  [0.0475, 0, 0],          // spine_lower   (pelvis)
  [0.12, 0, 0],            // spine_upper   (abdomen)
  [0.17, 0, 0],            // neck          (thorax)
  [0.14, -0.129, 0],       // l_shoulder    (thorax)
  [0, -0.186, 0],          // l_elbow
  [0, -0.146, 0],          // l_wrist
  [0.14, 0.129, 0],        // r_shoulder
  [0, 0.186, 0],           // r_elbow
  [0, 0.146, 0],           // r_wrist
  [-0.0475, -0.052, 0],    // l_hip         (pelvis)
  [-0.245, 0, 0],          // l_knee
  [-0.246, 0, 0],          // l_ankle
  [-0.0475, 0.052, 0],     // r_hip
  [-0.245, 0, 0],          // r_knee
  [-0.246, 0, 0],          // r_ankle
];

const JSIGN: Vec3[] = [
  [1, 1, 1], [1, 1, 1], [1, 1, 1],
  [-1, -1, -1], [-1, -1, -1], [-1, -1, -1],   // left arm chain
  [1, 1, 1], [1, 1, 1], [1, 1, 1],
  [1, -1, -1], [1, -1, -1], [1, -1, -1],      // left leg chain
  [1, 1, 1], [1, 1, 1], [1, 1, 1],
];

// per-segment tip offset in the segment frame (stick endpoints)
const TIP: Vec3[] = [
  [0.0475, 0, 0],          // pelvis (drawn from -x end separately)
  [0.12, 0, 0],            // abdomen
  [0.17, 0, 0],            // thorax
  [0.13, 0, 0],            // head
  [0, -0.186, 0],          // l_upper_arm
  [0, -0.146, 0],          // l_forearm
  [0, -0.108, 0],          // l_hand
  [0, 0.186, 0],           // r_upper_arm
  [0, 0.146, 0],           // r_forearm
  [0, 0.108, 0],           // r_hand
  [-0.245, 0, 0],          // l_thigh
  [-0.246, 0, 0],          // l_shank
  [-0.14, 0, 0],           // l_foot
  [-0.245, 0, 0],          // r_thigh
  [-0.246, 0, 0],          // r_shank
  [-0.14, 0, 0],           // r_foot
];

function mat3(): Mat3 {
  return [1, 0, 0, 0, 1, 0, 0, 0, 1];
}

function mul(a: Mat3, b: Mat3): Mat3 {
  const out = new Array(9).fill(0);
  for (let i = 0; i < 3; i++)
    for (let j = 0; j < 3; j++)
      out[3 * i + j] =
        a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
  return out;
}

function apply(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

function jointMatrix(f: number, a: number, r: number): Mat3 {
  const cf = Math.cos(f), sf = Math.sin(f);
  const ca = Math.cos(a), sa = Math.sin(a);
  const cr = Math.cos(r), sr = Math.sin(r);
  return [
    cf * cr + sf * sa * sr, -cf * sr + sf * sa * cr, sf * ca,
    ca * sr, ca * cr, -sa,
    -sf * cr + cf * sa * sr, sf * sr + cf * sa * cr, cf * ca,
  ];
}

export interface Skeleton {
  origins: Vec3[]; // 16 segment origins, body frame (metres)
  tips: Vec3[];    // 16 segment end points
}

export function computeSkeleton(dof: number[]): Skeleton {
  const R: Mat3[] = [mat3()];
  const p: Vec3[] = [[0, 0, 0]];
  for (let j = 0; j < 15; j++) {
    const par = PARENT[j];
    const f = JSIGN[j][0] * dof[3 * j];
    const a = JSIGN[j][1] * dof[3 * j + 1];
    const r = JSIGN[j][2] * dof[3 * j + 2];
    const arm = apply(R[par], [JPOS[j][0] * H, JPOS[j][1] * H, JPOS[j][2] * H]);
    p.push([p[par][0] + arm[0], p[par][1] + arm[1], p[par][2] + arm[2]]);
    R.push(mul(R[par], jointMatrix(f, a, r)));
  }
  const tips: Vec3[] = [];
  for (let i = 0; i < 16; i++) {
    const t = apply(R[i], [TIP[i][0] * H, TIP[i][1] * H, TIP[i][2] * H]);
    tips.push([p[i][0] + t[0], p[i][1] + t[1], p[i][2] + t[2]]);
  }
  return { origins: p, tips };
}

// stick-figure polylines as segment indices (origin -> tip chains)
export const STICK_CHAINS: number[][] = [
  [0, 1, 2, 3],       // pelvis -> abdomen -> thorax -> head
  [4, 5, 6],          // left arm
  [7, 8, 9],          // right arm
  [10, 11, 12],       // left leg
  [13, 14, 15],       // right leg
];
