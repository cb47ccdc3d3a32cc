"""Desk-scale workbench for voxel-block mapping and reserved-way key/value
cache simulation.

Two halves, joined by a block-access trace: volumetric TSDF/ESDF mapping
over pluggable block stores (every block fetch is recorded), and a
deterministic model of key/handle pairs cached in reserved ways of a
set-associative hierarchy, replayed over those traces with hit-rate, cost
and energy reporting.
"""

from .analysis import (distinct_blocks, footprint_report, hit_rate_curve,
                       reuse_gap_histogram, resolution_sweep)
from .cachesim import (PROFILES, CostModelConfig, FullyAssociativeBuffer,
                       KvCacheHierarchy, LevelConfig, build_hierarchy,
                       pseudoaddress, run_trace)
from .errors import CapacityError, ConfigError, TraceFormatError
from .grid import (BlockKey, VoxelCoord, WorldConfig, pack_key, spatial_hash,
                   unpack_key, voxel_center, voxel_to_block, world_to_voxel)
from .mapper import (CameraIntrinsics, DepthFrame, Pose, Trace, integrate_esdf,
                     integrate_tsdf, make_trajectory, read_depth_frame,
                     read_trace, render_depth, run_mapping, write_depth_frame)
from .scene import Box, Plane, SceneSpec, Sphere, scene_sdf
from .stores import (INVALID_HANDLE, FlatHtaStore, HashStore, OctreeStore,
                     StoreStats, VoxelBlock, make_store)

__version__ = "0.1.0"
