import math
import random

import numpy as np
import pytest

from voxkv.errors import ConfigError, TraceFormatError
from voxkv.grid import BlockKey, WorldConfig
from voxkv.mapper import (CameraIntrinsics, DepthFrame, Pose, Trace,
                          integrate_esdf, integrate_tsdf, line_trajectory,
                          make_trajectory, orbit_trajectory, read_depth_frame,
                          read_trace, render_depth, run_mapping,
                          write_depth_frame)
from voxkv.scene import Box, Plane, SceneSpec, Sphere, scene_sdf
from voxkv.stores import HashStore

IDENTITY = Pose(np.eye(3), np.zeros(3))


def single_pixel_intr():
    return CameraIntrinsics(fx=100.0, fy=100.0, cx=0.0, cy=0.0, width=1, height=1)


class TestValidation:
    def test_intrinsics(self):
        with pytest.raises(ConfigError):
            CameraIntrinsics(fx=0, fy=1, cx=0, cy=0, width=4, height=4)
        with pytest.raises(ConfigError):
            CameraIntrinsics(fx=1, fy=1, cx=4, cy=0, width=4, height=4)

    def test_pose_orthonormality(self):
        bad = np.eye(3)
        bad[0, 1] = 1e-6
        with pytest.raises(ConfigError):
            Pose(bad, np.zeros(3))
        reflection = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ConfigError):
            Pose(reflection, np.zeros(3))

    def test_depth_frame(self):
        with pytest.raises(ConfigError):
            DepthFrame(2, 2, np.array([1.0, 2.0, 3.0]))
        with pytest.raises(ConfigError):
            DepthFrame(2, 1, np.array([1.0, -0.5]))
        with pytest.raises(ConfigError):
            DepthFrame(1, 1, np.array([float("nan")]))

    def test_frame_must_match_intrinsics(self):
        frame = DepthFrame(2, 2, np.ones(4))
        store = HashStore(8)
        world = WorldConfig(voxel_size=0.05)
        with pytest.raises(ConfigError):
            integrate_tsdf(frame, IDENTITY, single_pixel_intr(), store, world, Trace())


class TestRenderDepth:
    def test_plane_head_on(self):
        scene = SceneSpec((Plane([0, 0, -1], -1.0),))
        intr = CameraIntrinsics(fx=50, fy=50, cx=2, cy=2, width=5, height=5)
        frame = render_depth(scene, IDENTITY, intr)
        assert frame.depths[2 * 5 + 2] == pytest.approx(1.0, abs=1e-4)
        # every pixel of a fronto-parallel plane reads the same axis depth
        assert np.allclose(frame.depths, 1.0, atol=1e-3)

    def test_beyond_max_range(self):
        scene = SceneSpec((Sphere([0, 0, 50.0], 1.0),))
        intr = CameraIntrinsics(fx=50, fy=50, cx=2, cy=2, width=5, height=5)
        frame = render_depth(scene, IDENTITY, intr, max_range=10.0)
        assert not frame.depths.any()

    def test_sphere_center_depth(self):
        scene = SceneSpec((Sphere([0, 0, 2.0], 0.5),))
        frame = render_depth(scene, IDENTITY, single_pixel_intr())
        assert frame.depths[0] == pytest.approx(1.5, abs=1e-3)

    def test_box_sdf_zero_on_face(self):
        box = Box([-1, -1, -1], [1, 1, 1])
        assert box.sdf(np.array([1.0, 0.0, 0.0])) == pytest.approx(0.0)
        assert box.sdf(np.array([2.0, 0.0, 0.0])) == pytest.approx(1.0)
        assert box.sdf(np.array([0.0, 0.0, 0.0])) == pytest.approx(-1.0)

    def test_scene_is_min_of_primitives(self):
        scene = SceneSpec((Sphere([0, 0, 2.0], 0.5), Plane([0, 0, -1], -3.0)))
        pts = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 2.9]])
        d = scene_sdf(scene, pts)
        assert d[0] == pytest.approx(1.5)
        assert d[1] == pytest.approx(0.1, abs=1e-12)


class TestIntegrateTsdf:
    def test_single_ray_band(self):
        """Hand-traced oracle: one axis-aligned ray, depth 1.0, band 0.15."""
        world = WorldConfig(voxel_size=0.05, truncation_dist=0.15)
        frame = DepthFrame(1, 1, np.array([1.0]))
        store = HashStore(8)
        trace = Trace()
        fs = integrate_tsdf(frame, IDENTITY, single_pixel_intr(), store, world, trace)
        # centers (0.025, 0.025, (vz+0.5)*0.05) project within [0.85, 1.15]
        expected_vz = [17, 18, 19, 20, 21, 22]
        assert fs.updates == len(expected_vz)
        assert fs.distinct_voxels == len(expected_vz)
        key = BlockKey(0, 0, 2)
        assert [e[1] for e in trace.events] == ["I"] + ["L"] * 5
        assert all(e[3] == key for e in trace.events)
        blk = store.block(store.get_block(key))
        for vz in expected_vz:
            local = ((vz - 16) * 8 + 0) * 8 + 0
            stored = float(blk.values[local])
            assert stored == pytest.approx(1.0 - (vz + 0.5) * 0.05, abs=1e-12)
        # the voxel containing the hit is within half a voxel diagonal
        hit_local = ((20 - 16) * 8) * 8
        assert abs(float(blk.values[hit_local])) <= 0.5 * 0.05 * math.sqrt(3)

    def test_invalid_frame_is_noop(self):
        world = WorldConfig(voxel_size=0.05)
        frame = DepthFrame(1, 1, np.array([0.0]))
        trace = Trace()
        fs = integrate_tsdf(frame, IDENTITY, single_pixel_intr(), HashStore(8),
                            world, trace)
        assert fs.updates == 0 and len(trace.events) == 0

    def test_double_integration_fixed_point(self):
        world = WorldConfig(voxel_size=0.05, truncation_dist=0.15)
        scene = SceneSpec((Plane([0, 0, -1], -1.2),))
        intr = CameraIntrinsics(fx=40, fy=40, cx=4, cy=3, width=8, height=6)
        frame = render_depth(scene, IDENTITY, intr)
        store = HashStore(8)
        trace = Trace()
        integrate_tsdf(frame, IDENTITY, intr, store, world, trace, frame_id=0)
        first = [(e[1], e[3]) for e in trace.events]
        values = {k: store.block(h).values.copy()
                  for k, h in [(key, store.get_block(key))
                               for key in {e[3] for e in trace.events}]}
        weights = {k: store.block(store.get_block(k)).weights.copy() for k in values}
        integrate_tsdf(frame, IDENTITY, intr, store, world, trace, frame_id=1)
        second = [(e[1], e[3]) for e in trace.events[len(first):]]
        assert [k for _, k in first] == [k for _, k in second]
        assert all(op == "L" for op, _ in second)  # nothing newly allocated
        for k, vals in values.items():
            blk = store.block(store.get_block(k))
            mask = weights[k] > 0
            assert np.allclose(blk.values[mask], vals[mask], atol=1e-6)
            assert np.array_equal(blk.weights[mask], 2 * weights[k][mask])

    def test_allocations_equal_distinct_keys(self):
        world = WorldConfig(voxel_size=0.05, truncation_dist=0.15)
        scene = SceneSpec((Plane([0, 0, -1], -1.2),))
        intr = CameraIntrinsics(fx=40, fy=40, cx=8, cy=6, width=16, height=12)
        frame = render_depth(scene, IDENTITY, intr)
        store = HashStore(8)
        trace = Trace()
        integrate_tsdf(frame, IDENTITY, intr, store, world, trace)
        allocated_keys = {e[3] for e in trace.events if e[1] == "I"}
        distinct_keys = {e[3] for e in trace.events}
        assert store.stats.allocations == len(allocated_keys) == len(distinct_keys)

    def test_weight_clamp(self):
        world = WorldConfig(voxel_size=0.05, truncation_dist=0.15)
        frame = DepthFrame(1, 1, np.array([1.0]))
        store = HashStore(8)
        for i in range(7):
            integrate_tsdf(frame, IDENTITY, single_pixel_intr(), store, world,
                           Trace(), weight_max=5.0)
        blk = store.block(store.get_block(BlockKey(0, 0, 2)))
        assert blk.weights.max() == 5.0


class TestIntegrateEsdf:
    def test_single_occupied_sphere_count(self):
        h = 0.05
        world = WorldConfig(voxel_size=h, truncation_dist=0.15, clear_radius=2 * h)
        frame = DepthFrame(1, 1, np.array([1.0]))
        store = HashStore(8)
        trace = Trace()
        fs = integrate_esdf(frame, IDENTITY, single_pixel_intr(), store, world, trace)
        # integer offsets with dx^2+dy^2+dz^2 <= 4: 1+6+12+8+6 = 33
        assert fs.updates == 33
        assert fs.rays == 1

    def test_zero_radius_writes_only_occupied(self):
        world = WorldConfig(voxel_size=0.05, truncation_dist=0.15, clear_radius=0.0)
        frame = DepthFrame(1, 1, np.array([1.0]))
        store = HashStore(8)
        fs = integrate_esdf(frame, IDENTITY, single_pixel_intr(), store, world, Trace())
        assert fs.updates == 1 and fs.distinct_voxels == 1
        blk = store.block(store.get_block(BlockKey(0, 0, 2)))
        assert float(blk.values[blk.weights > 0][0]) == 0.0

    def test_two_sources_take_min(self):
        h = 0.05
        world = WorldConfig(voxel_size=h, truncation_dist=0.15, clear_radius=3 * h)
        # two pixels back-project one voxel apart along x
        intr = CameraIntrinsics(fx=100, fy=100, cx=1.0, cy=0.0, width=2, height=1)
        depths = np.array([1.0, 1.0])  # x offsets -0.01 and 0.0 -> voxels -1 and 0
        frame = DepthFrame(2, 1, depths)
        store = HashStore(8)
        fs = integrate_esdf(frame, IDENTITY, intr, store, world, Trace())
        occupied = [np.array([(-1 + 0.5) * h, (0 + 0.5) * h, (20 + 0.5) * h]),
                    np.array([(0 + 0.5) * h, (0 + 0.5) * h, (20 + 0.5) * h])]
        checked = 0
        for chain in store._buckets:
            for key, handle in chain:
                blk = store.block(handle)
                for li in np.flatnonzero(blk.weights > 0).tolist():
                    lz, r = divmod(li, 64)
                    ly, lx = divmod(r, 8)
                    center = np.array([(key.kx * 8 + lx + 0.5) * h,
                                       (key.ky * 8 + ly + 0.5) * h,
                                       (key.kz * 8 + lz + 0.5) * h])
                    expected = min(np.linalg.norm(center - o) for o in occupied)
                    assert abs(float(blk.values[li]) - expected) <= 1e-9
                    checked += 1
        assert checked == fs.distinct_voxels > 33


class TestTrajectories:
    def test_orbit_symmetry(self):
        poses = orbit_trajectory([0, 0, 0], radius=2.0, height=0.0, frames=4)
        assert len(poses) == 4
        positions = np.array([p.translation for p in poses])
        assert np.allclose(positions[0], [2, 0, 0], atol=1e-12)
        assert np.allclose(positions[1], [0, 2, 0], atol=1e-12)

    def test_orbit_faces_center(self):
        center = np.array([0.3, -0.2, 0.1])
        for pose in orbit_trajectory(center, radius=1.5, height=2.0, frames=7):
            want = center - pose.translation
            want = want / np.linalg.norm(want)
            assert np.max(np.abs(pose.optical_axis - want)) < 1e-9

    def test_line(self):
        poses = line_trajectory([0, 0, 0], [0.5, 0, 0], frames=3)
        assert np.allclose(poses[2].translation, [1.0, 0, 0])
        assert np.allclose(poses[0].optical_axis, [1, 0, 0], atol=1e-12)

    def test_degenerate_inputs(self):
        with pytest.raises(ConfigError):
            line_trajectory([0, 0, 0], [0, 0, 0], frames=3)
        with pytest.raises(ConfigError):
            orbit_trajectory([0, 0, 0], radius=1.0, height=0.0, frames=0)
        with pytest.raises(ConfigError):
            make_trajectory("spiral", {})

    def test_vertical_line_has_valid_pose(self):
        poses = line_trajectory([0, 0, 0], [0, 0, -0.5], frames=2)
        assert np.allclose(poses[0].optical_axis, [0, 0, -1], atol=1e-12)


class TestTraceIO:
    def test_round_trip(self, tmp_path):
        trace = Trace()
        trace.append("I", BlockKey(1, -2, 3), 0)
        trace.append("L", BlockKey(1, -2, 3), 0)
        trace.append("R", BlockKey(1, -2, 3), 1)
        path = tmp_path / "t.csv"
        trace.write_csv(path)
        text = path.read_text()
        assert text.splitlines()[0] == "seq,op,frame,kx,ky,kz"
        assert "\r" not in text
        back = read_trace(path)
        assert back.events == trace.events

    @pytest.mark.parametrize("body,line_no", [
        ("0,L,0,1,2\n", 2),            # five fields
        ("0,X,0,1,2,3\n", 2),          # bad op
        ("0,L,0,1,2,a\n", 2),          # non-integer
        ("1,L,0,1,2,3\n", 2),          # seq must start at 0
        ("0,L,0,1,2,3\n0,L,0,1,2,3\n", 3),   # non-increasing seq
        ("0,L,1,1,2,3\n1,L,0,1,2,3\n", 3),   # decreasing frame
    ])
    def test_malformed_rows(self, tmp_path, body, line_no):
        path = tmp_path / "bad.csv"
        path.write_text("seq,op,frame,kx,ky,kz\n" + body)
        with pytest.raises(TraceFormatError) as err:
            read_trace(path)
        assert err.value.line_no == line_no

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sequence,op\n")
        with pytest.raises(TraceFormatError) as err:
            read_trace(path)
        assert err.value.line_no == 1

    def test_empty_trace_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("seq,op,frame,kx,ky,kz\n")
        assert read_trace(path).events == []


class TestDepthFrameIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        frame = DepthFrame(6, 4, rng.random(24, dtype=np.float32) * 3)
        path = tmp_path / "f.dpf"
        write_depth_frame(path, frame)
        raw = path.read_bytes()
        assert raw[:4] == b"DPF1"
        assert len(raw) == 12 + 24 * 4
        back = read_depth_frame(path)
        assert back.width == 6 and back.height == 4
        assert np.array_equal(back.depths, frame.depths)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "f.dpf"
        path.write_bytes(b"XXXX" + b"\x00" * 8)
        with pytest.raises(ConfigError):
            read_depth_frame(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "f.dpf"
        frame = DepthFrame(2, 2, np.ones(4, dtype=np.float32))
        write_depth_frame(path, frame)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(ConfigError):
            read_depth_frame(path)


class TestRunMapping:
    def test_deterministic_trace_bytes(self, tmp_path):
        scene = SceneSpec((Plane([0, 0, 1], 0.013), Sphere([0, 0, 0.35], 0.25)))
        intr = CameraIntrinsics(fx=30, fy=30, cx=8, cy=6, width=16, height=12)
        world = WorldConfig(voxel_size=0.1, truncation_dist=0.2)
        poses = orbit_trajectory([0, 0, 0], radius=0.4, height=2.0, frames=2)
        outputs = []
        for name in ("a.csv", "b.csv"):
            store = HashStore(8)
            trace, _ = run_mapping(scene, poses, intr, store, world)
            trace.write_csv(tmp_path / name)
            outputs.append((tmp_path / name).read_bytes())
        assert outputs[0] == outputs[1]

    def test_empty_trajectory_rejected(self):
        scene = SceneSpec((Plane([0, 0, 1], 0.0),))
        with pytest.raises(ConfigError):
            run_mapping(scene, [], single_pixel_intr(), HashStore(8),
                        WorldConfig(voxel_size=0.05))

    def test_both_mode(self):
        scene = SceneSpec((Plane([0, 0, -1], -1.2),))
        intr = CameraIntrinsics(fx=20, fy=20, cx=4, cy=3, width=8, height=6)
        world = WorldConfig(voxel_size=0.1, truncation_dist=0.2, clear_radius=0.1)
        poses = [IDENTITY]
        trace, stats = run_mapping(scene, poses, intr, HashStore(8), world, mode="both")
        assert stats.frames == 1
        assert len(stats.per_frame_accesses) == 2
        assert len(trace.events) == stats.block_accesses
