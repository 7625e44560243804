// Browser entry point: scene, camera, panel, and the drag loop.

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import { Client } from "./api";
import { ArmView, TaskPointMarkers, poseTaskPoint } from "./arm";
import { DragController } from "./drag";
import type { Vec3 } from "./fk";
import { Panel } from "./panel";
import { ViewState } from "./state";
import { VoxelCloud } from "./voxels";

async function boot(): Promise<void> {
  const client = new Client("");
  const state = new ViewState(client);

  const app = document.getElementById("app")!;
  const panel = new Panel(state);
  const canvasWrap = document.createElement("div");
  canvasWrap.className = "canvas-wrap";
  app.append(canvasWrap, panel.root);

  const renderer = new THREE.WebGLRenderer({ antialias: true });
  renderer.setPixelRatio(window.devicePixelRatio);
  canvasWrap.appendChild(renderer.domElement);

  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x1c2026);
  scene.add(new THREE.AmbientLight(0xffffff, 0.65));
  const sun = new THREE.DirectionalLight(0xffffff, 1.2);
  sun.position.set(2, 3, 4);
  scene.add(sun);
  scene.add(new THREE.GridHelper(4, 40, 0x39404b, 0x2a2f37).rotateX(Math.PI / 2));

  const camera = new THREE.PerspectiveCamera(55, 1, 0.01, 100);
  camera.up.set(0, 0, 1); // robot frames are z-up
  camera.position.set(2.2, -2.2, 1.6);
  const controls = new OrbitControls(camera, renderer.domElement);
  controls.target.set(0.5, 0, 0.2);

  const voxels = new VoxelCloud();
  scene.add(voxels.group);
  const markers = new TaskPointMarkers();
  scene.add(markers.group);

  await state.load();
  const scenario = state.scenario!;

  const arm = new ArmView(scenario.robot);
  scene.add(arm.group);
  let home = scenario.robot.joints.map(() => 0);
  let dragTarget: Vec3 = [...arm.pose(home)] as Vec3;

  const handle = new THREE.Mesh(
    new THREE.SphereGeometry(0.035, 16, 12),
    new THREE.MeshLambertMaterial({ color: 0x46a0ff, transparent: true, opacity: 0.85 }),
  );
  handle.position.set(...dragTarget);
  scene.add(handle);

  const drag = new DragController(state, (verdict, target) => {
    if (!verdict) {
      arm.setTint("warning");
      panel.pinVerdict("ik-check failed; showing last valid pose");
      return;
    }
    arm.pose(verdict.joints);
    arm.setTint(verdict.collides ? "colliding" : "normal");
    const reach = verdict.reachable ? "reachable" : "unreachable";
    const hit = verdict.collides ? ", collides" : ", collision-free";
    panel.pinVerdict(
      `target (${target.map((v) => v.toFixed(2)).join(", ")}): ${reach}${hit} ` +
        `(residual ${(verdict.residual * 1000).toFixed(1)} mm, ${verdict.iterations} iterations)`,
    );
  });

  function refreshSceneFromState(): void {
    if (state.map) voxels.render(state.map);
    const trial = state.activeTrial;
    if (trial) {
      markers.render(
        trial.taskPoints.map((tp) =>
          poseTaskPoint(
            tp.position as Vec3,
            { q: scenario.crane.basePose.q, t: scenario.crane.basePose.t as Vec3 },
            scenario.crane.rotationStepDeg,
            state.config.rot,
            scenario.crane.heightStep,
            state.config.height,
          ),
        ),
      );
    }
  }
  state.subscribe(refreshSceneFromState);
  refreshSceneFromState();

  // drag on a camera-facing plane through the current handle position
  const raycaster = new THREE.Raycaster();
  const pointer = new THREE.Vector2();
  const plane = new THREE.Plane();
  let dragging = false;

  function pointerRay(event: PointerEvent): THREE.Raycaster {
    const rect = renderer.domElement.getBoundingClientRect();
    pointer.x = ((event.clientX - rect.left) / rect.width) * 2 - 1;
    pointer.y = -((event.clientY - rect.top) / rect.height) * 2 + 1;
    raycaster.setFromCamera(pointer, camera);
    return raycaster;
  }

  renderer.domElement.addEventListener("pointerdown", (event) => {
    const ray = pointerRay(event);
    if (ray.intersectObject(handle).length > 0) {
      dragging = true;
      controls.enabled = false;
      plane.setFromNormalAndCoplanarPoint(camera.getWorldDirection(new THREE.Vector3()), handle.position);
      drag.start();
    }
  });
  renderer.domElement.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    const hit = new THREE.Vector3();
    if (pointerRay(event).ray.intersectPlane(plane, hit)) {
      dragTarget = [hit.x, hit.y, hit.z];
      handle.position.copy(hit);
      drag.move(dragTarget);
    }
  });
  window.addEventListener("pointerup", () => {
    if (!dragging) return;
    dragging = false;
    controls.enabled = true;
    void drag.release();
  });

  function resize(): void {
    const w = canvasWrap.clientWidth;
    const h = canvasWrap.clientHeight;
    renderer.setSize(w, h, false);
    camera.aspect = w / h;
    camera.updateProjectionMatrix();
  }
  window.addEventListener("resize", resize);
  resize();

  renderer.setAnimationLoop(() => {
    controls.update();
    renderer.render(scene, camera);
  });
}

boot().catch((err) => {
  const banner = document.createElement("div");
  banner.className = "banner fatal";
  banner.textContent = `failed to start viewer: ${err instanceof Error ? err.message : err}`;
  document.body.prepend(banner);
});
