#!/usr/bin/env python3
"""Regenerate corpus/ from the sample images bundled with scikit-image.

Each entry is converted to 8-bit grayscale and reduced to 256x256 either by
2x2 averaging (512x512 sources) or by cropping at the given offset.
"""
import pathlib
import sys

import numpy as np
import skimage.data as data
from skimage.color import rgb2gray

# (name, source, mode, row, col)
ENTRIES = [
    ("astronaut", "astronaut", "half", 0, 0),
    ("astronaut_face", "astronaut", "crop", 20, 130),
    ("brick", "brick", "half", 0, 0),
    ("camera", "camera", "half", 0, 0),
    ("camera_detail", "camera", "crop", 60, 180),
    ("cat", "cat", "crop", 20, 100),
    ("chelsea", "chelsea", "crop", 30, 150),
    ("coffee", "coffee", "crop", 80, 180),
    ("coins", "coins", "crop", 20, 60),
    ("grass", "grass", "half", 0, 0),
    ("gravel", "gravel", "half", 0, 0),
    ("hubble", "hubble_deep_field", "crop", 300, 400),
    ("hubble_edge", "hubble_deep_field", "crop", 600, 700),
    ("ihc", "immunohistochemistry", "half", 0, 0),
    ("moon", "moon", "half", 0, 0),
    ("rocket", "rocket", "crop", 80, 200),
    ("rocket_sky", "rocket", "crop", 0, 380),
    ("retina", "retina", "crop", 560, 560),
    ("retina_rim", "retina", "crop", 300, 900),
    ("cell", "cell", "crop", 200, 150),
    ("clock", "clock", "crop", 20, 70),
    ("page", "page", "crop", -1, 60),
    ("moon_crop", "moon", "crop", 128, 128),
    ("brick_crop", "brick", "crop", 200, 100),
]


def gray8(img):
    img = np.asarray(img)
    if img.ndim == 3:
        img = rgb2gray(img[..., :3]) * 255.0
    return np.clip(np.rint(img.astype(np.float64)), 0, 255).astype(np.uint8)


def reduce(img, mode, row, col):
    if mode == "half":
        h, w = img.shape
        f = img[: h // 2 * 2, : w // 2 * 2].astype(np.float64)
        f = (f[0::2, 0::2] + f[1::2, 0::2] + f[0::2, 1::2] + f[1::2, 1::2]) / 4.0
        return np.clip(np.rint(f), 0, 255).astype(np.uint8)[:256, :256]
    if row < 0:  # short source: edge-pad vertically
        img = np.pad(img, ((0, max(0, 256 - img.shape[0])), (0, 0)), mode="edge")
        row = 0
    return img[row : row + 256, col : col + 256]


def main(out_dir):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, source, mode, row, col in ENTRIES:
        img = reduce(gray8(getattr(data, source)()), mode, row, col)
        assert img.shape == (256, 256), (name, img.shape)
        with open(out / f"{name}.pgm", "wb") as fh:
            fh.write(b"P5\n256 256\n255\n")
            fh.write(img.tobytes())


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "corpus")
