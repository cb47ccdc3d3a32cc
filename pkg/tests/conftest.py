import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from voxkv.config import (build_camera, build_scene, build_store,
                          build_trajectory, build_world, resolve_config)
from voxkv.mapper import orbit_trajectory, run_mapping
from voxkv.scene import Plane, SceneSpec
from voxkv.grid import WorldConfig
from voxkv.stores import HashStore, OctreeStore

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def default_cfg():
    return resolve_config()


@pytest.fixture(scope="session")
def default_run(default_cfg):
    """Store, trace and update stats for the default configuration."""
    cfg = default_cfg
    world = build_world(cfg)
    scene = build_scene(cfg)
    intr, max_range = build_camera(cfg)
    poses = build_trajectory(cfg)
    store = build_store(cfg, world.block_side)
    trace, ustats = run_mapping(scene, poses, intr, store, world,
                                mode=cfg["integrator"]["mode"], max_range=max_range,
                                weight_max=cfg["integrator"]["weight_max"])
    return store, trace, ustats


@pytest.fixture(scope="session")
def plane_run16(default_cfg):
    """Plane-only scene integrated over a 16-frame orbit at 0.05 m."""
    world = WorldConfig(voxel_size=0.05, truncation_dist=0.15)
    scene = SceneSpec((Plane([0.0, 0.0, 1.0], 0.013),),
                      domain_min=[-4, -4, -1], domain_max=[4, 4, 4])
    intr, max_range = build_camera(default_cfg)
    poses = orbit_trajectory([0.0, 0.0, 0.0], radius=0.4, height=3.0, frames=16)
    store = HashStore(world.block_side)
    trace, ustats = run_mapping(scene, poses, intr, store, world, max_range=max_range)
    return world, scene, store, trace, ustats


@pytest.fixture(scope="session")
def octree_run(default_cfg):
    """Default scene over an octree store, two frames."""
    cfg = default_cfg
    world = build_world(cfg)
    scene = build_scene(cfg)
    intr, max_range = build_camera(cfg)
    poses = build_trajectory(cfg)[:2]
    store = OctreeStore(world.block_side, root_extent_blocks=256)
    trace, ustats = run_mapping(scene, poses, intr, store, world, max_range=max_range)
    return store, trace, ustats


@pytest.fixture(scope="session")
def esdf_run(default_cfg):
    """Default scene under the ESDF integrator at a coarser grid, two frames."""
    cfg = default_cfg
    world = WorldConfig(voxel_size=0.10, truncation_dist=0.15, clear_radius=0.20)
    scene = build_scene(cfg)
    intr, max_range = build_camera(cfg)
    poses = build_trajectory(cfg)[:2]
    store = HashStore(world.block_side)
    trace, ustats = run_mapping(scene, poses, intr, store, world,
                                mode="esdf", max_range=max_range)
    return store, trace, ustats
