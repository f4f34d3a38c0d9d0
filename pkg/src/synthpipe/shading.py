"""Materials, lights, and the Lambert + Blinn shading model.

One vectorized implementation (`lighting`) backs both the public
single-point `shade` and the renderer's deferred shading pass, so image
pixels and unit-level shading values can never drift apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import _readonly

# Metals keep a quarter of the diffuse term and tint the specular lobe with
# their own color; dielectrics get a white lobe.
METALLIC_DIFFUSE = 0.25
SHININESS = 16.0
SHININESS_METALLIC = 64.0
CHECKER_DARK = 0.55


@dataclass(frozen=True)
class WaveTexture:
    """Sinusoidal stripes along an object-local axis (layer-line look)."""

    axis: np.ndarray
    period: float
    contrast: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=np.float64)
        n = np.linalg.norm(axis)
        if n == 0:
            raise ValueError("wave axis must be non-zero")
        object.__setattr__(self, "axis", _readonly(axis / n))
        if not self.period > 0:
            raise ValueError("wave period must be positive")
        if not 0.0 <= self.contrast <= 1.0:
            raise ValueError("wave contrast must be in [0, 1]")


@dataclass(frozen=True)
class CheckerTexture:
    """Object-local 3D checkerboard with the given cell size."""

    cell: float

    def __post_init__(self):
        if not self.cell > 0:
            raise ValueError("checker cell must be positive")


@dataclass(frozen=True)
class Material:
    base_color: np.ndarray
    texture: WaveTexture | CheckerTexture | None = None
    specular_strength: float = 0.0
    metallic: bool = False

    def __post_init__(self):
        color = np.asarray(self.base_color, dtype=np.float64)
        if color.shape != (3,) or np.any(color < 0) or np.any(color > 1):
            raise ValueError("base_color must be RGB in [0, 1]")
        object.__setattr__(self, "base_color", _readonly(color))
        if not 0.0 <= self.specular_strength <= 1.0:
            raise ValueError("specular_strength must be in [0, 1]")


@dataclass(frozen=True)
class Light:
    """Directional light (vector = travel direction) or point light (vector = position).

    Point lights contribute by incident direction only; there is no distance
    falloff, matching the Lambert term used throughout.
    """

    kind: str
    vector: np.ndarray
    intensity: float = 1.0
    color: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        if self.kind not in ("directional", "point"):
            raise ValueError(f"unknown light kind {self.kind!r}")
        vec = np.asarray(self.vector, dtype=np.float64)
        if self.kind == "directional" and np.linalg.norm(vec) == 0:
            raise ValueError("directional light needs a non-zero direction")
        if self.intensity < 0:
            raise ValueError("light intensity must be >= 0")
        object.__setattr__(self, "vector", _readonly(vec))
        object.__setattr__(self, "color", _readonly(np.asarray(self.color, dtype=np.float64)))


def texture_factor(texture, local_pos: np.ndarray) -> np.ndarray:
    """Scalar modulation of the base color at object-local positions (N,3)."""
    local_pos = np.asarray(local_pos, dtype=np.float64)
    if texture is None:
        return np.ones(len(local_pos))
    if isinstance(texture, WaveTexture):
        phase = (local_pos @ texture.axis) / texture.period
        return 1.0 - texture.contrast * (0.5 + 0.5 * np.sin(2.0 * math.pi * phase))
    if isinstance(texture, CheckerTexture):
        parity = np.floor(local_pos / texture.cell).sum(axis=1).astype(np.int64) & 1
        return np.where(parity == 0, 1.0, CHECKER_DARK)
    raise TypeError(f"unsupported texture {texture!r}")


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n > 0, n, 1.0)


def lighting(
    albedo: np.ndarray,
    normal: np.ndarray,
    view: np.ndarray,
    specular_strength: np.ndarray,
    metallic: np.ndarray,
    lights,
    ambient: float,
    position: np.ndarray | None = None,
) -> np.ndarray:
    """Shade N surface points at once; all per-point args are (N,...) arrays.

    `position` (world space) is only needed when point lights are present.
    Returns linear RGB clamped to [0, 1].
    """
    albedo = np.atleast_2d(np.asarray(albedo, dtype=np.float64))
    normal = np.atleast_2d(np.asarray(normal, dtype=np.float64))
    view = np.atleast_2d(np.asarray(view, dtype=np.float64))
    strength = np.atleast_1d(np.asarray(specular_strength, dtype=np.float64))
    metal = np.atleast_1d(np.asarray(metallic, dtype=bool))

    diffuse_albedo = np.where(metal[:, None], albedo * METALLIC_DIFFUSE, albedo)
    spec_color = np.where(metal[:, None], albedo, 1.0)
    shininess = np.where(metal, SHININESS_METALLIC, SHININESS)

    out = ambient * albedo
    for light in lights:
        if light.kind == "directional":
            l_dir = _normalize_rows(-light.vector)[None, :] * np.ones_like(normal)
        else:
            if position is None:
                raise ValueError("point lights need surface positions")
            l_dir = _normalize_rows(light.vector - np.atleast_2d(position))
        lam = np.maximum(0.0, np.sum(normal * l_dir, axis=1))
        out = out + (light.intensity * lam)[:, None] * light.color * diffuse_albedo
        half = _normalize_rows(l_dir + view)
        spec = np.maximum(0.0, np.sum(normal * half, axis=1)) ** shininess
        out = out + (light.intensity * strength * spec)[:, None] * light.color * spec_color
    return np.clip(out, 0.0, 1.0)


def shade(material: Material, normal, view_dir, lights, ambient: float,
          position=None) -> np.ndarray:
    """RGB of one surface point with unit `normal` and unit `view_dir` (to camera)."""
    pos = None if position is None else np.asarray(position, dtype=np.float64)[None, :]
    return lighting(
        material.base_color[None, :],
        np.asarray(normal, dtype=np.float64)[None, :],
        np.asarray(view_dir, dtype=np.float64)[None, :],
        np.array([material.specular_strength]),
        np.array([material.metallic]),
        lights,
        ambient,
        position=pos,
    )[0]
