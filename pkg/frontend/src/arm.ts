// Robot arm rendering: one capsule mesh per description capsule, posed from
// client-side FK. A collision verdict tints the whole arm red; an IK failure
// leaves the last valid pose with a warning tint.

import * as THREE from "three";
import type { RobotJson } from "./api";
import { forwardKinematics, quatRotate, type Vec3 } from "./fk";

const BODY = new THREE.Color(0x7c8794);
const COLLIDING = new THREE.Color(0xd04040);
const WARNING = new THREE.Color(0xd0a040);

interface CapsulePiece {
  link: number;
  local_a: Vec3;
  local_b: Vec3;
  mesh: THREE.Mesh;
}

export class ArmView {
  readonly group = new THREE.Group();
  private pieces: CapsulePiece[] = [];
  private material = new THREE.MeshLambertMaterial({ color: BODY.clone() });
  private tipMarker: THREE.Mesh;

  constructor(private robot: RobotJson) {
    const addPiece = (link: number, a: Vec3, b: Vec3, radius: number) => {
      const length = new THREE.Vector3(...a).distanceTo(new THREE.Vector3(...b));
      const geometry = new THREE.CapsuleGeometry(radius, Math.max(length, 1e-6), 4, 12);
      const mesh = new THREE.Mesh(geometry, this.material);
      this.group.add(mesh);
      this.pieces.push({ link, local_a: a, local_b: b, mesh });
    };
    robot.linkCapsules.forEach((capsules, link) => {
      for (const capsule of capsules) addPiece(link, capsule.a, capsule.b, capsule.radius);
    });
    if (this.pieces.length === 0) {
      // description carries no collision capsules; draw thin display-only rods
      // from each joint origin to the next offset so the arm is still visible
      robot.joints.forEach((_spec, link) => {
        const next = link + 1 < robot.joints.length
          ? robot.joints[link + 1].parentTransform.t
          : robot.toolOffset.t;
        addPiece(link, [0, 0, 0], next as Vec3, 0.015);
      });
    }
    this.tipMarker = new THREE.Mesh(
      new THREE.SphereGeometry(0.02, 12, 10),
      new THREE.MeshLambertMaterial({ color: 0x3377dd }),
    );
    this.group.add(this.tipMarker);
  }

  get capsuleCount(): number {
    return this.pieces.length;
  }

  /** Pose every capsule from the joint angles; returns the tooltip position. */
  pose(joints: number[]): Vec3 {
    const fk = forwardKinematics(this.robot, joints);
    for (const piece of this.pieces) {
      const frame = fk.links[piece.link];
      const a = quatRotate(frame.q, piece.local_a).map((v, i) => v + frame.t[i]) as Vec3;
      const b = quatRotate(frame.q, piece.local_b).map((v, i) => v + frame.t[i]) as Vec3;
      const va = new THREE.Vector3(...a);
      const vb = new THREE.Vector3(...b);
      // CapsuleGeometry is built along +Y; align it with the segment
      piece.mesh.position.copy(va).add(vb).multiplyScalar(0.5);
      const direction = vb.clone().sub(va);
      if (direction.lengthSq() > 1e-12) {
        piece.mesh.quaternion.setFromUnitVectors(new THREE.Vector3(0, 1, 0), direction.normalize());
      }
    }
    this.tipMarker.position.set(...fk.tooltip);
    return fk.tooltip;
  }

  setTint(tint: "normal" | "colliding" | "warning"): void {
    const color = tint === "colliding" ? COLLIDING : tint === "warning" ? WARNING : BODY;
    this.material.color.copy(color);
  }
}

export class TaskPointMarkers {
  readonly group = new THREE.Group();
  private geometry = new THREE.SphereGeometry(0.02, 12, 10);
  private material = new THREE.MeshLambertMaterial({ color: 0xffffff });

  /** White spheres at the task points, posed with the workpiece. */
  render(points: Vec3[]): void {
    this.group.clear();
    for (const p of points) {
      const mesh = new THREE.Mesh(this.geometry, this.material);
      mesh.position.set(...p);
      this.group.add(mesh);
    }
  }
}

/** Pose a workpiece-local point for a crane config (rotate about vertical, lift). */
export function poseTaskPoint(
  local: Vec3,
  craneBase: { q: [number, number, number, number]; t: Vec3 },
  rotationStepDeg: number,
  rot: number,
  heightStep: number,
  height: number,
): Vec3 {
  const angle = (rot * rotationStepDeg * Math.PI) / 180;
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  const spun: Vec3 = [c * local[0] - s * local[1], s * local[0] + c * local[1], local[2] + height * heightStep];
  const rotated = quatRotate(craneBase.q, spun);
  return [rotated[0] + craneBase.t[0], rotated[1] + craneBase.t[1], rotated[2] + craneBase.t[2]];
}
