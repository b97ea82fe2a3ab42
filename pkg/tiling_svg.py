"""
tiling_svg.py

SVG drawing of the tiles gamma . Omega for a word ball, built with ElementTree.
The viewport is a rectangle of the upper half-plane, [-2, 2] x (0, 3] unless
given; tiles whose outline misses it are skipped.
"""

import logging
import xml.etree.ElementTree as ET

import numpy as np

from fuchsian import tile_images

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
SVG_NS         = "http://www.w3.org/2000/svg"
VIEWPORT       = (-2.0, 2.0, 0.0, 3.0)     # x_min, x_max, y_min, y_max
PIXELS_PER_UNIT = 200
BASE_STROKE    = "#1f3b5c"
DOMAIN_FILL    = "#f2c14e"


def _to_pixels(z, viewport, scale):
    x0, _, _, y1 = viewport
    return (z.real - x0) * scale, (y1 - z.imag) * scale


def _visible(points, viewport):
    x0, x1, y0, y1 = viewport
    return bool(np.any((points.real >= x0) & (points.real <= x1)
                       & (points.imag > y0) & (points.imag <= y1)))


def render_tiling(ball, domain, viewport=VIEWPORT, samples=64, scale=PIXELS_PER_UNIT):
    """SVG document (str) with one polyline per visible tile; the identity tile is filled."""
    x0, x1, y0, y1 = viewport
    width, height = (x1 - x0) * scale, (y1 - y0) * scale
    ET.register_namespace("", SVG_NS)
    root = ET.Element(f"{{{SVG_NS}}}svg", {
        "width": f"{width:.0f}", "height": f"{height:.0f}",
        "viewBox": f"0 0 {width:.0f} {height:.0f}",
    })
    ET.SubElement(root, f"{{{SVG_NS}}}title").text = f"word ball of radius {ball.radius}"
    axis_y = (y1 - 0.0) * scale
    ET.SubElement(root, f"{{{SVG_NS}}}line", {
        "x1": "0", "y1": f"{axis_y:.2f}", "x2": f"{width:.0f}", "y2": f"{axis_y:.2f}",
        "stroke": "black", "stroke-width": "1",
    })
    drawn = 0
    for word, outline in tile_images(ball, domain, samples):
        if not _visible(outline, viewport):
            continue
        coords = " ".join("%.2f,%.2f" % _to_pixels(z, viewport, scale) for z in outline)
        attrs = {"points": coords, "stroke": BASE_STROKE, "stroke-width": "1",
                 "fill": DOMAIN_FILL if word == "I" else "none"}
        node = ET.SubElement(root, f"{{{SVG_NS}}}polyline", attrs)
        ET.SubElement(node, f"{{{SVG_NS}}}title").text = word
        drawn += 1
    logger.info("Rendered %d of %d tiles", drawn, len(ball))
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def write_tiling(path, ball, domain, viewport=VIEWPORT):
    text = render_tiling(ball, domain, viewport)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path
