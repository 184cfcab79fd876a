"""Polyline skeletons for the 26 uppercase letters.

Each template is a list of strokes in writing order; each stroke is a list of
(x, y) points with y pointing up, roughly inside the unit box. The synthetic
dataset generator jitters these and runs them through the normal pipeline.
"""

import math


def _arc(cx, cy, r, deg0, deg1, n=12):
    """Polyline along a circular arc from deg0 to deg1 (counterclockwise if deg1 > deg0)."""
    pts = []
    for i in range(n + 1):
        a = math.radians(deg0 + (deg1 - deg0) * i / n)
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    return pts


LETTER_TEMPLATES = {
    "A": [[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)], [(0.2, 0.4), (0.8, 0.4)]],
    "B": [
        [(0.1, 0.0), (0.1, 1.0)],
        [(0.1, 1.0), (0.6, 1.0), (0.75, 0.87), (0.75, 0.63), (0.6, 0.5), (0.1, 0.5)],
        [(0.1, 0.5), (0.65, 0.5), (0.82, 0.37), (0.82, 0.13), (0.65, 0.0), (0.1, 0.0)],
    ],
    "C": [_arc(0.55, 0.5, 0.45, 60, 300)],
    "D": [
        [(0.1, 0.0), (0.1, 1.0)],
        [(0.1, 1.0), (0.5, 1.0), (0.8, 0.8), (0.9, 0.5), (0.8, 0.2), (0.5, 0.0), (0.1, 0.0)],
    ],
    "E": [[(0.9, 1.0), (0.1, 1.0), (0.1, 0.0), (0.9, 0.0)], [(0.1, 0.5), (0.7, 0.5)]],
    "F": [[(0.9, 1.0), (0.1, 1.0), (0.1, 0.0)], [(0.1, 0.5), (0.7, 0.5)]],
    "G": [_arc(0.5, 0.5, 0.45, 60, 330) + [(0.89, 0.42), (0.58, 0.42)]],
    "H": [[(0.1, 1.0), (0.1, 0.0)], [(0.9, 1.0), (0.9, 0.0)], [(0.1, 0.5), (0.9, 0.5)]],
    "I": [[(0.5, 1.0), (0.5, 0.0)]],
    "J": [[(0.6, 1.0), (0.6, 0.25), (0.5, 0.06), (0.35, 0.0), (0.22, 0.08), (0.16, 0.25)]],
    "K": [[(0.1, 1.0), (0.1, 0.0)], [(0.8, 1.0), (0.1, 0.45)], [(0.35, 0.62), (0.85, 0.0)]],
    "L": [[(0.15, 1.0), (0.15, 0.0), (0.85, 0.0)]],
    "M": [[(0.05, 0.0), (0.05, 1.0), (0.5, 0.35), (0.95, 1.0), (0.95, 0.0)]],
    "N": [[(0.1, 0.0), (0.1, 1.0), (0.9, 0.0), (0.9, 1.0)]],
    "O": [_arc(0.5, 0.5, 0.45, 90, 450)],
    "P": [[(0.1, 0.0), (0.1, 1.0), (0.6, 1.0), (0.8, 0.85), (0.8, 0.65), (0.6, 0.5), (0.1, 0.5)]],
    "Q": [_arc(0.5, 0.55, 0.42, 90, 450), [(0.6, 0.3), (0.95, -0.05)]],
    "R": [
        [(0.1, 0.0), (0.1, 1.0), (0.6, 1.0), (0.8, 0.85), (0.8, 0.65), (0.6, 0.5), (0.1, 0.5)],
        [(0.35, 0.5), (0.85, 0.0)],
    ],
    "S": [
        [
            (0.8, 0.88), (0.62, 1.0), (0.35, 1.0), (0.18, 0.85), (0.2, 0.65),
            (0.42, 0.54), (0.62, 0.46), (0.8, 0.34), (0.8, 0.15), (0.62, 0.0),
            (0.35, 0.0), (0.18, 0.1),
        ]
    ],
    "T": [[(0.1, 1.0), (0.9, 1.0)], [(0.5, 1.0), (0.5, 0.0)]],
    "U": [
        [
            (0.1, 1.0), (0.1, 0.3), (0.2, 0.08), (0.4, 0.0), (0.6, 0.0),
            (0.8, 0.08), (0.9, 0.3), (0.9, 1.0),
        ]
    ],
    "V": [[(0.05, 1.0), (0.5, 0.0), (0.95, 1.0)]],
    "W": [[(0.02, 1.0), (0.28, 0.0), (0.5, 0.6), (0.72, 0.0), (0.98, 1.0)]],
    "X": [[(0.1, 1.0), (0.9, 0.0)], [(0.9, 1.0), (0.1, 0.0)]],
    "Y": [[(0.1, 1.0), (0.5, 0.5), (0.5, 0.0)], [(0.9, 1.0), (0.5, 0.5)]],
    "Z": [[(0.1, 1.0), (0.9, 1.0), (0.1, 0.0), (0.9, 0.0)]],
}
