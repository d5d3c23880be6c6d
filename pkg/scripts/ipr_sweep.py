"""Mean eigenvector IPR against SNR for several patch sides."""

import argparse
import csv
import sys

from _common import load_image
from dequip.cli import ipr_rows
from dequip.hyper import auto_params


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("image", nargs="?", default="camera")
    ap.add_argument("--sides", default="7,20,40")
    ap.add_argument("--snrs", default="4,8,12,16,20")
    ap.add_argument("--beta", type=float, default=None, help="default: Planck factor at 16 dB, P=7, times 255")
    ap.add_argument("--max-patches", type=int, default=16)
    ap.add_argument("--seeds", type=int, default=1)
    args = ap.parse_args()
    beta = args.beta if args.beta is not None else auto_params(16, 7).f_factor * 255.0
    rows = ipr_rows(load_image(args.image), [int(s) for s in args.sides.split(",")], beta,
                    [float(s) for s in args.snrs.split(",")], args.seeds, args.max_patches)
    out = csv.DictWriter(sys.stdout, ["snr", "patch_side", "mean_ipr"])
    out.writeheader()
    out.writerows(rows)


if __name__ == "__main__":
    main()
