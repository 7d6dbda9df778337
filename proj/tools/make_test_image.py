#!/usr/bin/env python3
"""Writes data/test_image.pgm, the synthetic grayscale test picture.

A bird-like silhouette on a shaded background: soft-edged ellipses, a beak,
an eye and a textured ground band. Gray levels stay in [20, 235] so every
pixel carries positive mass under either polarity.
"""
import math
import sys

W, H = 256, 192


def smooth(edge, width):
    # 0 outside, 1 inside, linear ramp of the given width across the edge
    return min(1.0, max(0.0, 0.5 - edge / width))


def ellipse(x, y, cx, cy, rx, ry, angle=0.0):
    c, s = math.cos(angle), math.sin(angle)
    u = ((x - cx) * c + (y - cy) * s) / rx
    v = (-(x - cx) * s + (y - cy) * c) / ry
    return (math.hypot(u, v) - 1.0) * min(rx, ry)


def gray(col, row):
    x, y = col + 0.5, row + 0.5
    g = 215.0 + 15.0 * (row / H) - 10.0 * math.cos(2.0 * math.pi * col / W)
    body = smooth(ellipse(x, y, 120, 100, 62, 44, -0.25), 2.0)
    head = smooth(ellipse(x, y, 178, 62, 28, 26), 2.0)
    belly = smooth(ellipse(x, y, 128, 116, 40, 22, -0.2), 3.0)
    wing = smooth(ellipse(x, y, 100, 92, 42, 18, -0.5), 2.0)
    eye = smooth(ellipse(x, y, 186, 56, 5, 5), 1.5)
    # beak: triangle to the right of the head
    bx = (x - 200.0) / 34.0
    beak = 1.0 if 0.0 <= bx <= 1.0 and abs(y - 66.0) <= 9.0 * (1.0 - bx) else 0.0
    ground = smooth(150.0 - y, 3.0)
    stripes = 0.5 + 0.5 * math.sin(0.35 * x + 0.12 * y)
    g = g * (1 - ground) + (120.0 + 40.0 * stripes) * ground
    g = g * (1 - body) + 60.0 * body
    g = g * (1 - head) + 45.0 * head
    g = g * (1 - belly) + 185.0 * belly
    g = g * (1 - wing) + 30.0 * wing
    g = g * (1 - beak) + 140.0 * beak
    g = g * (1 - eye) + 225.0 * eye
    return int(round(min(235.0, max(20.0, g))))


def main(path):
    data = bytes(gray(c, r) for r in range(H) for c in range(W))
    with open(path, "wb") as f:
        f.write(b"P5\n# synthetic test image\n%d %d\n255\n" % (W, H))
        f.write(data)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/test_image.pgm")
