"""Numba visibility kernel: the hot per-pixel z-buffer loop, JIT compiled.

Must stay arithmetically identical to _raster_numpy (same expressions, same
operation order) so the two backends produce bit-identical buffers.
"""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def visibility_kernel(xs, ys, invz, depth, tri):
    height, width = depth.shape
    for t in range(xs.shape[0]):
        x0, x1, x2 = xs[t, 0], xs[t, 1], xs[t, 2]
        y0, y1, y2 = ys[t, 0], ys[t, 1], ys[t, 2]
        area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if abs(area) < 1e-12:
            continue
        inv_area = 1.0 / area
        xlo = max(0, int(math.ceil(min(x0, min(x1, x2)) - 0.5)))
        xhi = min(width - 1, int(math.floor(max(x0, max(x1, x2)) - 0.5)))
        ylo = max(0, int(math.ceil(min(y0, min(y1, y2)) - 0.5)))
        yhi = min(height - 1, int(math.floor(max(y0, max(y1, y2)) - 0.5)))
        if xhi < xlo or yhi < ylo:
            continue
        iz0, iz1, iz2 = invz[t, 0], invz[t, 1], invz[t, 2]
        for row in range(ylo, yhi + 1):
            py = row + 0.5
            for col in range(xlo, xhi + 1):
                px = col + 0.5
                w0 = ((x1 - px) * (y2 - py) - (y1 - py) * (x2 - px)) * inv_area
                if w0 < 0.0:
                    continue
                w1 = ((x2 - px) * (y0 - py) - (y2 - py) * (x0 - px)) * inv_area
                if w1 < 0.0:
                    continue
                w2 = 1.0 - w0 - w1
                if w2 < 0.0:
                    continue
                iz = w0 * iz0 + w1 * iz1 + w2 * iz2
                if iz <= 0.0:
                    continue
                z = 1.0 / iz
                if z < depth[row, col]:
                    depth[row, col] = z
                    tri[row, col] = t
