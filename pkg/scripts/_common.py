"""Shared helpers for the experiment scripts."""

import os
from pathlib import Path

import numpy as np

from dequip.core import load_pgm

DATA_DIR = Path(os.environ.get("DEQUIP_DATA", Path(__file__).resolve().parents[1] / "data"))


def load_image(name: str) -> np.ndarray:
    """Load ``<DATA_DIR>/<name>.pgm``, or a scikit-image sample if ``name`` is one of its gray images."""
    path = DATA_DIR / f"{name}.pgm"
    if path.is_file():
        return load_pgm(path)
    from skimage import color, data

    if not hasattr(data, name):
        raise SystemExit(f"{path} not found and no scikit-image sample named {name!r}")
    img = getattr(data, name)()
    if img.ndim == 3:
        img = np.round(color.rgb2gray(img) * 255.0)
    return img.astype(np.float64)
