"""Quadrature rules on triangles in barycentric form.

Weights sum to one; multiply by the triangle area.
"""

import numpy as np

# edge midpoints, exact for degree 2
MIDEDGE_POINTS = np.array([[0.5, 0.5, 0.0],
                           [0.0, 0.5, 0.5],
                           [0.5, 0.0, 0.5]])
MIDEDGE_WEIGHTS = np.full(3, 1.0 / 3.0)


def _degree5():
    s = np.sqrt(15.0)
    a1 = (6.0 - s) / 21.0
    a2 = (6.0 + s) / 21.0
    w1 = (155.0 - s) / 1200.0
    w2 = (155.0 + s) / 1200.0
    pts = [[1 / 3, 1 / 3, 1 / 3]]
    wts = [9.0 / 40.0]
    for a, w in ((a1, w1), (a2, w2)):
        b = 1.0 - 2.0 * a
        pts += [[b, a, a], [a, b, a], [a, a, b]]
        wts += [w, w, w]
    return np.array(pts), np.array(wts)


DEG5_POINTS, DEG5_WEIGHTS = _degree5()

RULES = {
    "midedge": (MIDEDGE_POINTS, MIDEDGE_WEIGHTS),
    "deg5": (DEG5_POINTS, DEG5_WEIGHTS),
}


def physical_points(vertices, bary):
    """Map barycentric points onto triangles.

    ``vertices`` is (l, 3, 2) and ``bary`` (q, 3); returns (l, q, 2).
    """
    return np.einsum("qk,lkd->lqd", bary, vertices)
