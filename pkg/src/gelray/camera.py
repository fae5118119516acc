"""Calibrated pinhole camera.

Camera-local axes follow the computer-vision convention: x right, y down
(increasing image row), z forward along the optical axis. Intrinsics
(fx, fy, cx, cy) are in pixels and come from calibration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import normalize


@dataclass
class PerspectiveCamera:
    position: tuple
    look_at: tuple
    up: tuple
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("film size must be positive")

    def frame(self) -> np.ndarray:
        """World-from-camera rotation, columns = (right, down, forward)."""
        fwd = normalize(np.subtract(self.look_at, self.position))
        upv = np.asarray(self.up, dtype=np.float64)
        right = np.cross(upv, fwd)
        if np.linalg.norm(right) < 1e-9:
            raise ValueError("up vector is parallel to the view direction")
        right = normalize(right)
        down = np.cross(fwd, right)
        return np.stack([right, down, fwd], axis=1)

    def generate_ray(self, px: float, py: float):
        """Pinhole ray through sub-pixel raster position (px, py).

        Returns (origin, unit direction) in world coordinates.
        """
        rot = self.frame()
        d_cam = np.array([(px - self.cx) / self.fx, (py - self.cy) / self.fy, 1.0])
        d = rot @ d_cam
        return np.asarray(self.position, dtype=np.float64), d / np.linalg.norm(d)

    def project(self, direction) -> tuple:
        """Raster position whose pinhole ray has the given world direction."""
        rot = self.frame()
        d_cam = rot.T @ np.asarray(direction, dtype=np.float64)
        if d_cam[2] <= 0:
            raise ValueError("direction points behind the camera")
        return (self.cx + self.fx * d_cam[0] / d_cam[2],
                self.cy + self.fy * d_cam[1] / d_cam[2])

    def scaled(self, width: int, height: int) -> "PerspectiveCamera":
        """Same field of view on a different film size."""
        sx = width / self.width
        sy = height / self.height
        return PerspectiveCamera(self.position, self.look_at, self.up,
                                 self.fx * sx, self.fy * sy,
                                 self.cx * sx, self.cy * sy, width, height)

    def pack(self):
        """(rotation, position, intrinsics) arrays for the render kernels."""
        rot = np.ascontiguousarray(self.frame())
        pos = np.asarray(self.position, dtype=np.float64)
        intr = np.array([self.fx, self.fy, self.cx, self.cy,
                         float(self.width), float(self.height)])
        return rot, pos, intr
