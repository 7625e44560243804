// Client-side forward kinematics mirroring the robot description, so the arm
// animates without a server round trip per frame. The ik-check endpoint stays
// authoritative for reachability/collision verdicts.

import type { JointJson, PoseJson, RobotJson } from "./api";

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export interface Frame {
  q: Quat;
  t: Vec3;
}

export function quatMultiply(a: Quat, b: Quat): Quat {
  const [w1, x1, y1, z1] = a;
  const [w2, x2, y2, z2] = b;
  return [
    w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
    w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
    w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
    w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
  ];
}

export function quatRotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  const tx = 2 * (y * v[2] - z * v[1]);
  const ty = 2 * (z * v[0] - x * v[2]);
  const tz = 2 * (x * v[1] - y * v[0]);
  return [
    v[0] + w * tx + (y * tz - z * ty),
    v[1] + w * ty + (z * tx - x * tz),
    v[2] + w * tz + (x * ty - y * tx),
  ];
}

export function quatFromAxisAngle(axis: Vec3, angle: number): Quat {
  const half = angle / 2;
  const s = Math.sin(half);
  return [Math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s];
}

export function composeFrames(a: Frame, b: Frame): Frame {
  const rotated = quatRotate(a.q, b.t);
  return {
    q: quatMultiply(a.q, b.q),
    t: [a.t[0] + rotated[0], a.t[1] + rotated[1], a.t[2] + rotated[2]],
  };
}

export function frameOf(pose: PoseJson): Frame {
  return { q: [...pose.q] as Quat, t: [...pose.t] as Vec3 };
}

function jointFrame(joint: JointJson, angle: number): Frame {
  return composeFrames(frameOf(joint.parentTransform), {
    q: quatFromAxisAngle(joint.axis, angle),
    t: [0, 0, 0],
  });
}

export interface FkResult {
  links: Frame[];
  tooltip: Vec3;
}

/** World frame of every link plus the tooltip position. */
export function forwardKinematics(robot: RobotJson, joints: number[]): FkResult {
  if (joints.length !== robot.joints.length) {
    throw new Error(`expected ${robot.joints.length} joint angles, got ${joints.length}`);
  }
  let frame = frameOf(robot.basePose);
  const links: Frame[] = [];
  robot.joints.forEach((spec, index) => {
    frame = composeFrames(frame, jointFrame(spec, joints[index]));
    links.push(frame);
  });
  const tip = composeFrames(frame, frameOf(robot.toolOffset));
  return { links, tooltip: tip.t };
}
