"""Pinhole camera model.

Camera space is x right, y down, z forward; at identity rotation those
coincide with the world axes. Pixel (0, 0) is the top-left corner, the
optical axis hits the image center, and depth is measured along the
camera's forward axis (not the euclidean ray length).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import _readonly, euler_to_matrix


@dataclass(frozen=True)
class Camera:
    position: np.ndarray
    rotation: np.ndarray
    fov: float = math.pi / 3
    resolution: tuple[int, int] = (640, 640)

    def __post_init__(self):
        object.__setattr__(self, "position", _readonly(np.asarray(self.position, dtype=np.float64)))
        object.__setattr__(self, "rotation", _readonly(np.asarray(self.rotation, dtype=np.float64)))
        if not 0.0 < self.fov < math.pi:
            raise ValueError("vertical fov must be in (0, pi)")
        w, h = self.resolution
        if int(w) < 1 or int(h) < 1:
            raise ValueError("resolution must be at least 1x1")
        object.__setattr__(self, "resolution", (int(w), int(h)))

    @property
    def width(self) -> int:
        return self.resolution[0]

    @property
    def height(self) -> int:
        return self.resolution[1]

    def matrix(self) -> np.ndarray:
        """World-from-camera rotation (columns are the camera axes in world space)."""
        return euler_to_matrix(self.rotation)

    @property
    def focal_px(self) -> float:
        """Focal length in pixels from the vertical field of view."""
        return (self.height / 2.0) / math.tan(self.fov / 2.0)


def world_to_camera(camera: Camera, points: np.ndarray) -> np.ndarray:
    """Transform world points (N,3) into camera space."""
    return (np.asarray(points, dtype=np.float64) - camera.position) @ camera.matrix()


def project_points(camera: Camera, points: np.ndarray):
    """Project world points (N,3); returns pixel xy (N,2) and forward depth (N,).

    Entries with depth <= 0 are behind the camera and their xy is undefined.
    """
    cam = world_to_camera(camera, points)
    z = cam[:, 2]
    f = camera.focal_px
    with np.errstate(divide="ignore", invalid="ignore"):
        x = camera.width / 2.0 + f * cam[:, 0] / z
        y = camera.height / 2.0 + f * cam[:, 1] / z
    return np.stack([x, y], axis=1), z


def project(camera: Camera, point) -> tuple[float, float, float] | None:
    """Project one world point to (pixel x, pixel y, depth); None if behind the camera."""
    xy, z = project_points(camera, np.asarray(point, dtype=np.float64)[None, :])
    if z[0] <= 0:
        return None
    return float(xy[0, 0]), float(xy[0, 1]), float(z[0])
