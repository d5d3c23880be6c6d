"""Seeded noise synthesis at a target SNR and image quality metrics.

SNR convention: ``10 log10(sum(x**2) / sum((y - x)**2))`` (second moments).
All generators draw from ``numpy.random.default_rng(seed)`` (PCG64).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import as_image
from .errors import ValidationError


def _pair(reference, test) -> tuple[np.ndarray, np.ndarray]:
    a = as_image(reference, "reference")
    b = as_image(test, "test")
    if a.shape != b.shape:
        raise ValidationError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def measure_snr(clean, noisy) -> float:
    """SNR of ``noisy`` against ``clean`` in dB; ``inf`` when they are equal."""
    x, y = _pair(clean, noisy)
    noise = float(np.sum((y - x) ** 2))
    if noise == 0:
        return math.inf
    signal = float(np.sum(x ** 2))
    if signal == 0:
        return -math.inf
    return 10.0 * math.log10(signal / noise)


def _nonzero(x: np.ndarray) -> None:
    if not np.any(x):
        raise ValidationError("cannot calibrate noise on an all-zero image")


def _nonnegative(x: np.ndarray) -> None:
    if np.any(x < 0):
        raise ValidationError("image has negative pixels")


def awgn_sigma(image, target_snr_db: float) -> float:
    x = as_image(image)
    return math.sqrt(float(np.mean(x ** 2)) / 10.0 ** (target_snr_db / 10.0))


def add_awgn(image, target_snr_db: float, seed: int | None = None) -> np.ndarray:
    """Additive white Gaussian noise scaled to hit ``target_snr_db`` in expectation."""
    x = as_image(image)
    _nonzero(x)
    if math.isinf(target_snr_db) and target_snr_db > 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    return x + awgn_sigma(x, target_snr_db) * rng.standard_normal(x.shape)


def poisson_scale(image, target_snr_db: float) -> float:
    """Photon scale ``eta`` such that ``Poisson(eta*x)/eta`` has the target SNR."""
    x = as_image(image)
    return 10.0 ** (target_snr_db / 10.0) * float(np.sum(x)) / float(np.sum(x ** 2))


def add_poisson(image, target_snr_db: float, seed: int | None = None) -> np.ndarray:
    """Poisson counts of the rescaled image, mapped back to the input scale."""
    x = as_image(image)
    _nonnegative(x)
    _nonzero(x)
    if math.isinf(target_snr_db) and target_snr_db > 0:
        return x.copy()
    eta = poisson_scale(x, target_snr_db)
    rng = np.random.default_rng(seed)
    return rng.poisson(eta * x).astype(np.float64) / eta


def speckle_sigma(target_snr_db: float) -> float:
    return 10.0 ** (-target_snr_db / 20.0)


def add_speckle(image, target_snr_db: float, seed: int | None = None) -> np.ndarray:
    """Multiplicative speckle ``x * (1 + n)`` with Gaussian ``n``."""
    x = as_image(image)
    _nonnegative(x)
    _nonzero(x)
    if math.isinf(target_snr_db) and target_snr_db > 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    return x * (1.0 + speckle_sigma(target_snr_db) * rng.standard_normal(x.shape))


NOISE_GENERATORS = {
    "gaussian": add_awgn,
    "poisson": add_poisson,
    "speckle": add_speckle,
}


def add_noise(image, model: str, target_snr_db: float, seed: int | None = None) -> np.ndarray:
    try:
        gen = NOISE_GENERATORS[model.lower()]
    except KeyError:
        raise ValidationError(f"unknown noise model {model!r}") from None
    return gen(image, target_snr_db, seed)


def psnr(reference, test, peak: float = 255.0) -> float:
    """Peak SNR in dB; ``inf`` for identical images."""
    a, b = _pair(reference, test)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def ssim(reference, test, data_range: float = 255.0) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03.

    Local statistics use population (biased) moments; the mean is taken over
    window positions that fit entirely inside the image.
    """
    a, b = _pair(reference, test)
    if min(a.shape) < 11:
        raise ValidationError(f"SSIM needs both sides >= 11, got {a.shape}")
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2

    def blur(z):
        # truncate so the kernel radius is exactly 5
        return ndimage.gaussian_filter(z, sigma=1.5, truncate=5 / 1.5, mode="reflect")

    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a ** 2
    var_b = blur(b * b) - mu_b ** 2
    cov = blur(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    smap = num / den
    return float(smap[5:-5, 5:-5].mean())


@dataclass(frozen=True)
class Roi:
    top: int
    left: int
    height: int
    width: int

    @classmethod
    def parse(cls, text: str) -> "Roi":
        """Parse ``"top,left,height,width"``."""
        try:
            top, left, height, width = (int(t) for t in text.split(","))
        except ValueError:
            raise ValidationError(f"ROI must be 'top,left,height,width', got {text!r}") from None
        return cls(top, left, height, width)

    def cut(self, image: np.ndarray) -> np.ndarray:
        h, w = image.shape
        if (self.height < 1 or self.width < 1 or self.top < 0 or self.left < 0
                or self.top + self.height > h or self.left + self.width > w):
            raise ValidationError(f"{self} is not inside a {h}x{w} image")
        return image[self.top:self.top + self.height, self.left:self.left + self.width]

    def overlaps(self, other: "Roi") -> bool:
        return not (self.top + self.height <= other.top or other.top + other.height <= self.top
                    or self.left + self.width <= other.left or other.left + other.width <= self.left)


def cnr(image, roi_a: Roi, roi_b: Roi) -> float:
    """Contrast-to-noise ratio ``|mu_a - mu_b| / sqrt(var_a + var_b)``."""
    img = as_image(image)
    if roi_a.overlaps(roi_b):
        raise ValidationError("CNR regions must be disjoint")
    a, b = roi_a.cut(img), roi_b.cut(img)
    den = math.sqrt(float(a.var()) + float(b.var()))
    if den == 0:
        raise ValidationError("CNR undefined: both regions have zero variance")
    return abs(float(a.mean()) - float(b.mean())) / den
