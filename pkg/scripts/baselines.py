"""Reference points for one image: De-QuIP next to Gaussian blur and non-local means."""

import argparse

import numpy as np

from _common import load_image
from dequip import add_awgn, denoise_image, gaussian_smooth, psnr
from dequip.hyper import auto_params
from dequip.noisemetrics import awgn_sigma


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("image", nargs="?", default="camera")
    ap.add_argument("--snr", type=float, default=16.0)
    ap.add_argument("--patch", type=int, default=7)
    args = ap.parse_args()
    from skimage.restoration import denoise_nl_means

    clean = load_image(args.image)
    noisy = add_awgn(clean, args.snr, 0)
    print(f"noisy          {psnr(clean, noisy):6.2f} dB")
    print(f"dequip P{args.patch:<3d}    {psnr(clean, denoise_image(noisy, auto_params(args.snr, args.patch))):6.2f} dB")
    best = max((psnr(clean, gaussian_smooth(noisy, s)), s) for s in np.arange(0.5, 3.01, 0.25))
    print(f"gaussian s={best[1]:.2f} {best[0]:6.2f} dB")
    sigma = awgn_sigma(clean, args.snr)
    nlm = denoise_nl_means(noisy, patch_size=7, patch_distance=11, h=0.8 * sigma, sigma=sigma)
    print(f"nl-means       {psnr(clean, nlm):6.2f} dB")


if __name__ == "__main__":
    main()
