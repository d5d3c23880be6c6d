"""De-QuIP against the non-interacting tiled baseline at matched basis size and Planck factor."""

import argparse

from _common import load_image
from dequip import QabParams, add_awgn, denoise_image, psnr, qab_denoise, ssim
from dequip.hyper import auto_params


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("image", nargs="?", default="camera")
    ap.add_argument("--snr", type=float, default=16.0)
    ap.add_argument("--patch", type=int, default=7)
    ap.add_argument("--sigma", type=float, default=1.0, help="pre-smoothing for the baseline potential")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    clean = load_image(args.image)
    noisy = add_awgn(clean, args.snr, args.seed)
    prm = auto_params(args.snr, args.patch)
    dq = denoise_image(noisy, prm)
    qb = qab_denoise(noisy, QabParams(beta=prm.f_factor * 255.0, smooth_sigma=args.sigma, keep=prm.d,
                                      tile_side=args.patch))
    print(f"noisy   {psnr(clean, noisy):6.2f} dB  {ssim(clean, noisy):.3f}")
    print(f"dequip  {psnr(clean, dq):6.2f} dB  {ssim(clean, dq):.3f}")
    print(f"qab     {psnr(clean, qb):6.2f} dB  {ssim(clean, qb):.3f}")


if __name__ == "__main__":
    main()
