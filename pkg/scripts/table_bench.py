"""PSNR/SSIM grid over SNR levels, patch sides and noise models for one or more images."""

import argparse
import csv
import sys

from _common import load_image
from dequip.cli import bench_cell


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("images", nargs="+", help="names in $DEQUIP_DATA or scikit-image samples")
    ap.add_argument("--snrs", default="2,16,22")
    ap.add_argument("--patches", default="5,7,11")
    ap.add_argument("--models", default="gaussian,poisson")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()
    out = csv.writer(sys.stdout)
    out.writerow(["image", "model", "snr", "patch", "psnr", "ssim", "wall_ms"])
    for name in args.images:
        clean = load_image(name)
        for model in args.models.split(","):
            for snr in map(float, args.snrs.split(",")):
                for side in map(int, args.patches.split(",")):
                    r = bench_cell(clean, model, snr, side, args.seeds, threads=args.threads or None)
                    out.writerow([name, model, snr, side, f"{r['psnr']:.3f}", f"{r['ssim']:.4f}",
                                  f"{r['wall_ms']:.0f}"])
                    sys.stdout.flush()


if __name__ == "__main__":
    main()
