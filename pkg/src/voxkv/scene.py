"""Analytic scenes: exact signed distance functions for planes, spheres and
axis-aligned boxes, combined by min."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def _vec3(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (3,):
        raise ConfigError(f"{name} must be a 3-vector")
    return v


@dataclass(frozen=True)
class Plane:
    """Half-space boundary: sdf(p) = dot(unit normal, p) - offset."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = _vec3(self.normal, "plane normal")
        norm = float(np.linalg.norm(n))
        if norm < 1e-12:
            raise ConfigError("plane normal must be non-zero")
        object.__setattr__(self, "normal", n / norm)

    def sdf(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.normal - self.offset


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "sphere center"))
        if self.radius <= 0:
            raise ConfigError("sphere radius must be positive")

    def sdf(self, pts: np.ndarray) -> np.ndarray:
        return np.linalg.norm(pts - self.center, axis=-1) - self.radius


@dataclass(frozen=True)
class Box:
    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        lo = _vec3(self.min_corner, "box min_corner")
        hi = _vec3(self.max_corner, "box max_corner")
        if not np.all(lo < hi):
            raise ConfigError("box min_corner must be strictly below max_corner")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    def sdf(self, pts: np.ndarray) -> np.ndarray:
        center = 0.5 * (self.min_corner + self.max_corner)
        half = 0.5 * (self.max_corner - self.min_corner)
        q = np.abs(pts - center) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside


@dataclass(frozen=True)
class SceneSpec:
    """One or more primitives plus the bounded domain queries may assume."""

    primitives: tuple
    domain_min: np.ndarray = field(default_factory=lambda: np.array([-5.0, -5.0, -5.0]))
    domain_max: np.ndarray = field(default_factory=lambda: np.array([5.0, 5.0, 5.0]))

    def __post_init__(self):
        if not self.primitives:
            raise ConfigError("scene needs at least one primitive")
        object.__setattr__(self, "primitives", tuple(self.primitives))
        lo = _vec3(self.domain_min, "domain_min")
        hi = _vec3(self.domain_max, "domain_max")
        if not np.all(lo < hi):
            raise ConfigError("domain_min must be strictly below domain_max")
        object.__setattr__(self, "domain_min", lo)
        object.__setattr__(self, "domain_max", hi)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.domain_min + self.domain_max)


def scene_sdf(scene: SceneSpec, pts: np.ndarray) -> np.ndarray:
    """Scene distance = min over primitive distances; broadcasts over (..., 3)."""
    d = scene.primitives[0].sdf(pts)
    for prim in scene.primitives[1:]:
        d = np.minimum(d, prim.sdf(pts))
    return d
