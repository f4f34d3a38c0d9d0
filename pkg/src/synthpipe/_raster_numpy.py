"""Pure-numpy visibility kernel: per-triangle vectorized z-buffer updates.

Fallback path for environments without numba (or when forced via
SYNTHPIPE_RASTER=numpy). Expression structure deliberately mirrors
_raster_numba so both kernels produce bit-identical buffers.
"""

from __future__ import annotations

import math

import numpy as np


def visibility_kernel(xs, ys, invz, depth, tri):
    """Rasterize screen-space triangles into depth (f8) and tri-index (i4) buffers.

    xs, ys: (T,3) pixel coordinates; invz: (T,3) reciprocal forward depth.
    Pixels sample at their centers; the strictly nearest triangle wins, ties
    keep the earliest triangle.
    """
    height, width = depth.shape
    for t in range(xs.shape[0]):
        x0, x1, x2 = xs[t, 0], xs[t, 1], xs[t, 2]
        y0, y1, y2 = ys[t, 0], ys[t, 1], ys[t, 2]
        area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if abs(area) < 1e-12:
            continue
        inv_area = 1.0 / area
        xlo = max(0, int(math.ceil(min(x0, x1, x2) - 0.5)))
        xhi = min(width - 1, int(math.floor(max(x0, x1, x2) - 0.5)))
        ylo = max(0, int(math.ceil(min(y0, y1, y2) - 0.5)))
        yhi = min(height - 1, int(math.floor(max(y0, y1, y2) - 0.5)))
        if xhi < xlo or yhi < ylo:
            continue
        px = np.arange(xlo, xhi + 1, dtype=np.float64) + 0.5
        py = (np.arange(ylo, yhi + 1, dtype=np.float64) + 0.5)[:, None]
        w0 = ((x1 - px) * (y2 - py) - (y1 - py) * (x2 - px)) * inv_area
        w1 = ((x2 - px) * (y0 - py) - (y2 - py) * (x0 - px)) * inv_area
        w2 = 1.0 - w0 - w1
        iz = w0 * invz[t, 0] + w1 * invz[t, 1] + w2 * invz[t, 2]
        inside = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0) & (iz > 0.0)
        if not inside.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            z = 1.0 / iz
        sub_depth = depth[ylo : yhi + 1, xlo : xhi + 1]
        sub_tri = tri[ylo : yhi + 1, xlo : xhi + 1]
        update = inside & (z < sub_depth)
        sub_depth[update] = z[update]
        sub_tri[update] = t
