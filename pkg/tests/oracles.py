"""Reference implementations used only by the tests.

They deliberately avoid the package internals: coverage is measured by brute
force supersampling, interpolation by ray casting, compositing by the
back-to-front over operator.
"""
import numpy as np


def supersample(inside, width, height, n=16):
    """Box-filtered coverage of a point predicate with ``n x n`` samples per pixel.

    ``inside(x, y)`` takes arrays of pixel-space sample positions.
    """
    offs = (np.arange(n) + 0.5) / n
    sx, sy = np.meshgrid(offs, offs)
    px, py = np.meshgrid(np.arange(width), np.arange(height))
    x = px[..., None, None] + sx
    y = py[..., None, None] + sy
    return inside(x, y).mean(axis=(-1, -2))


def half_plane(point, normal):
    """Predicate for ``(p - point) . normal >= 0``."""
    def inside(x, y):
        return (x - point[0]) * normal[0] + (y - point[1]) * normal[1] >= 0
    return inside


def disc(center, radius):
    def inside(x, y):
        return (x - center[0]) ** 2 + (y - center[1]) ** 2 <= radius**2
    return inside


def triangle_predicate(a, b, c):
    """Point-in-triangle by same-sign cross products (either winding)."""
    def inside(x, y):
        def side(p, q):
            return (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0])
        s1, s2, s3 = side(a, b), side(b, c), side(c, a)
        return ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))
    return inside


def ray_triangle_weights(origin, direction, a, b, c):
    """Solve ``origin + t d = alpha a + beta b + gamma c`` with ``alpha+beta+gamma = 1``.

    Returns ``(t, (alpha, beta, gamma))`` by a direct 4x4 linear solve.
    """
    m = np.zeros((4, 4))
    m[:3, 0] = a
    m[:3, 1] = b
    m[:3, 2] = c
    m[:3, 3] = -np.asarray(direction, dtype=float)
    m[3, :3] = 1.0
    rhs = np.concatenate([np.asarray(origin, dtype=float), [1.0]])
    sol = np.linalg.solve(m, rhs)
    return sol[3], sol[:3]


def in_spherical_triangle(g, a, b, c):
    """Whether direction ``g`` passes through triangle ``abc`` (any winding).

    Solves ``g = alpha a + beta b + gamma c``; inside when all weights are
    non-negative.
    """
    w = np.linalg.solve(np.column_stack([a, b, c]), g)
    return bool(np.all(w >= 0))


def over_back_to_front(layers, background):
    """Over-composite ``[(color, alpha_mask), ...]`` listed front first."""
    out = np.broadcast_to(np.asarray(background, dtype=float), layers[0][0].shape).copy()
    for color, alpha in reversed(layers):
        out = color * alpha[..., None] + out * (1.0 - alpha[..., None])
    return out
