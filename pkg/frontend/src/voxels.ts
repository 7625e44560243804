// Voxel spheres: one semitransparent sphere per active voxel, green for
// Reachable, red for Blocked. Individual meshes (shared geometry) so the
// renderer's back-to-front transparent sorting applies per sphere.

import * as THREE from "three";
import type { MapJson } from "./api";

const GREEN = new THREE.Color(0x27b24a);
const RED = new THREE.Color(0xd33332);

export class VoxelCloud {
  readonly group = new THREE.Group();
  private geometry = new THREE.SphereGeometry(1, 12, 10);
  private greenMaterial: THREE.MeshLambertMaterial;
  private redMaterial: THREE.MeshLambertMaterial;

  constructor(opacity = 0.4) {
    this.greenMaterial = new THREE.MeshLambertMaterial({
      color: GREEN,
      transparent: true,
      opacity,
      depthWrite: false,
    });
    this.redMaterial = new THREE.MeshLambertMaterial({
      color: RED,
      transparent: true,
      opacity,
      depthWrite: false,
    });
  }

  get sphereCount(): number {
    return this.group.children.length;
  }

  /** Rebuild the cloud from a map response; count equals the record count. */
  render(map: MapJson): void {
    this.group.clear();
    const radius = 0.6 * map.cellSize;
    for (const [i, j, k, status] of map.voxels) {
      const mesh = new THREE.Mesh(this.geometry, status === 1 ? this.greenMaterial : this.redMaterial);
      mesh.scale.setScalar(radius);
      mesh.position.set(
        map.origin[0] + (i + 0.5) * map.cellSize,
        map.origin[1] + (j + 0.5) * map.cellSize,
        map.origin[2] + (k + 0.5) * map.cellSize,
      );
      this.group.add(mesh);
    }
  }

  clear(): void {
    this.group.clear();
  }
}
