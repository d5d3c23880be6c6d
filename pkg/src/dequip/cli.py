"""Command line interface: ``dequip <command> [options]``.

Commands: denoise, qab, noise, metrics, ipr, hyper, bench.

Every command accepts ``--config FILE.json``; keys are the long option names
(dashes or underscores) and explicit flags win over file values.

Exit codes: 0 success, 2 usage/validation, 3 I/O or file format,
4 numerical failure, 5 capacity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import hyper
from .core import load_pgm, save_pgm
from .denoise import DenoiseParams, default_threads, denoise_image
from .errors import CapacityError, DequipError, FormatError, NumericalError
from .noisemetrics import Roi, add_awgn, add_noise, cnr, measure_snr, psnr, ssim
from .qab import QabParams, qab_denoise
from .spectral import average_ipr

CSV_HEADER = ["image", "method", "noise_model", "target_snr", "seed",
              "psnr", "ssim", "cnr", "wall_ms", "measured_snr"]

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL, EXIT_CAPACITY = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.6f}"
    return str(x)


def csv_text(rows: Sequence[dict], header: Sequence[str] = CSV_HEADER) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in header])
    return buf.getvalue()


def _floats(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in str(text).split(",") if t.strip()]


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dequip", description="Quantum interactive patch denoising.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=None)
        p.add_argument("--config", help="JSON file with option values")
        return p

    p = add("denoise", "denoise a PGM image")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--patch", type=int, help="patch side (5, 7, 11 have fitted rules)")
    p.add_argument("--snr", type=float, help="input SNR in dB, drives the automatic rules")
    p.add_argument("--model", choices=hyper.NOISE_MODELS)
    p.add_argument("--p", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--ffactor", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--stride", type=int, help="target patch stride (default patch//2)")
    p.add_argument("--neighbor-stride", type=int)
    p.add_argument("--constants", help="JSON fit-constant table overriding the built-ins")
    p.add_argument("--ref", help="clean reference PGM for PSNR/SSIM in the report")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int, help="echoed in the report only")

    p = add("qab", "single-particle QAB baseline")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--keep", type=int)
    p.add_argument("--tile", type=int)
    p.add_argument("--ref")

    p = add("noise", "add synthetic noise at a target SNR")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--model", choices=("gaussian", "poisson", "speckle"))
    p.add_argument("--snr", type=float)
    p.add_argument("--seed", type=int)

    p = add("metrics", "compare a test image to a reference")
    p.add_argument("--ref")
    p.add_argument("--test")
    p.add_argument("--roi-a", help="top,left,height,width")
    p.add_argument("--roi-b", help="top,left,height,width")

    p = add("ipr", "average IPR of patch bases versus SNR")
    p.add_argument("--in", dest="input")
    p.add_argument("--patch", help="comma separated patch sides")
    p.add_argument("--beta", type=float)
    p.add_argument("--snr-list", help="comma separated SNRs in dB; 'inf' for the clean image")
    p.add_argument("--seeds", type=int, help="number of noise realisations per SNR")
    p.add_argument("--max-patches", type=int, help="evenly spaced tile subset per image")
    p.add_argument("--out")

    p = add("hyper", "print automatic hyperparameters as JSON")
    p.add_argument("--snr", type=float)
    p.add_argument("--patch", type=int)
    p.add_argument("--model", choices=hyper.NOISE_MODELS)
    p.add_argument("--constants")

    p = add("bench", "factorial benchmark over images, noise models, SNRs and patch sizes")
    p.add_argument("--images", help="directory of clean PGM images")
    p.add_argument("--models", help="comma separated, e.g. gaussian,poisson")
    p.add_argument("--snrs", help="comma separated SNRs in dB")
    p.add_argument("--patches", help="comma separated patch sides")
    p.add_argument("--seeds", type=int, help="noise realisations per cell")
    p.add_argument("--stride", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    return parser


DEFAULTS = {
    "denoise": {"model": "gaussian", "neighbor_stride": 1, "seed": 0},
    "qab": {"sigma": 0.0},
    "noise": {"model": "gaussian", "seed": 0},
    "metrics": {},
    "ipr": {"beta": 1.0, "snr_list": "inf", "seeds": 1},
    "hyper": {"model": "gaussian"},
    "bench": {"models": "gaussian", "snrs": "16", "patches": "7", "seeds": 1},
}


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults < JSON config file < explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad JSON config {args.config}: {exc}") from exc
        for key, value in raw.items():
            key = key.replace("-", "_")
            if key == "in":
                key = "input"
            cfg[key] = value
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    return cfg


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _emit(rows, out=None):
    text = csv_text(rows)
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def denoise_params(cfg: dict) -> DenoiseParams:
    """Build :class:`DenoiseParams` from explicit values, filling gaps from the rules."""
    _need(cfg, "patch")
    side = int(cfg["patch"])
    p, d, f = cfg.get("p"), cfg.get("d"), cfg.get("ffactor")
    if p is None or d is None or f is None:
        if cfg.get("snr") is None:
            raise UsageError("--snr is required unless --p, --d and --ffactor are all given")
        table = hyper.load_constants(cfg["constants"]) if cfg.get("constants") else None
        consts = hyper.lookup(cfg["model"], side, table)
        snr = float(cfg["snr"])
        p = hyper.estimate_p(snr, consts) if p is None else p
        d = hyper.estimate_d(snr, consts, side * side) if d is None else d
        f = hyper.estimate_f_factor(int(d), consts) if f is None else f
    window = cfg.get("window") or hyper.default_window(side)
    return DenoiseParams(side, int(window), float(p), int(d), float(f),
                         target_stride=cfg.get("stride"), neighbor_stride=int(cfg.get("neighbor_stride", 1)))


def cmd_denoise(cfg: dict) -> int:
    _need(cfg, "input", "out")
    params = denoise_params(cfg)
    img = load_pgm(cfg["input"])
    threads = cfg.get("threads") or default_threads()
    t0 = time.perf_counter()
    out = denoise_image(img, params, threads=threads)
    wall = (time.perf_counter() - t0) * 1e3
    save_pgm(out, cfg["out"])
    row = {"image": Path(cfg["input"]).name, "method": f"dequip-P{params.patch_side}",
           "noise_model": cfg.get("model"), "target_snr": cfg.get("snr"), "seed": cfg.get("seed"),
           "wall_ms": wall}
    if cfg.get("ref"):
        ref = load_pgm(cfg["ref"])
        row.update(psnr=psnr(ref, out), ssim=ssim(ref, out))
    sys.stderr.write(json.dumps({"p": params.p, "d": params.d, "f_factor": params.f_factor,
                                 "window": params.window_side, "stride": params.target_stride}) + "\n")
    _emit([row])
    return EXIT_OK


def cmd_qab(cfg: dict) -> int:
    _need(cfg, "input", "out", "beta", "keep")
    img = load_pgm(cfg["input"])
    params = QabParams(beta=float(cfg["beta"]), smooth_sigma=float(cfg["sigma"]),
                       keep=int(cfg["keep"]), tile_side=cfg.get("tile"))
    t0 = time.perf_counter()
    out = qab_denoise(img, params)
    wall = (time.perf_counter() - t0) * 1e3
    save_pgm(out, cfg["out"])
    row = {"image": Path(cfg["input"]).name, "method": f"qab-T{params.tile_side or img.shape[0]}",
           "wall_ms": wall}
    if cfg.get("ref"):
        ref = load_pgm(cfg["ref"])
        row.update(psnr=psnr(ref, out), ssim=ssim(ref, out))
    _emit([row])
    return EXIT_OK


def cmd_noise(cfg: dict) -> int:
    _need(cfg, "input", "out", "snr")
    img = load_pgm(cfg["input"])
    noisy = add_noise(img, cfg["model"], float(cfg["snr"]), int(cfg["seed"]))
    save_pgm(noisy, cfg["out"])
    _emit([{"image": Path(cfg["input"]).name, "method": "noise", "noise_model": cfg["model"],
            "target_snr": float(cfg["snr"]), "seed": cfg["seed"], "psnr": psnr(img, noisy),
            "measured_snr": measure_snr(img, noisy)}])
    return EXIT_OK


def cmd_metrics(cfg: dict) -> int:
    _need(cfg, "ref", "test")
    ref, test = load_pgm(cfg["ref"]), load_pgm(cfg["test"])
    row = {"image": Path(cfg["test"]).name, "method": "metrics",
           "psnr": psnr(ref, test), "ssim": ssim(ref, test), "measured_snr": measure_snr(ref, test)}
    if cfg.get("roi_a") or cfg.get("roi_b"):
        _need(cfg, "roi_a", "roi_b")
        row["cnr"] = cnr(test, Roi.parse(cfg["roi_a"]), Roi.parse(cfg["roi_b"]))
    _emit([row])
    return EXIT_OK


def ipr_rows(img: np.ndarray, sides: Sequence[int], beta: float, snrs: Sequence[float],
             seeds: int, max_patches: int | None = None) -> list[dict]:
    rows = []
    for snr in snrs:
        for side in sides:
            if math.isinf(snr):
                vals = [average_ipr(img, side, beta, max_patches)]
            else:
                vals = [average_ipr(add_awgn(img, snr, s), side, beta, max_patches) for s in range(seeds)]
            rows.append({"snr": snr, "patch_side": side, "mean_ipr": float(np.mean(vals))})
    return rows


def cmd_ipr(cfg: dict) -> int:
    _need(cfg, "input", "patch")
    img = load_pgm(cfg["input"])
    rows = ipr_rows(img, _ints(cfg["patch"]), float(cfg["beta"]), _floats(cfg["snr_list"]),
                    int(cfg["seeds"]), cfg.get("max_patches"))
    text = csv_text(rows, ["snr", "patch_side", "mean_ipr"])
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_hyper(cfg: dict) -> int:
    _need(cfg, "snr", "patch")
    table = hyper.load_constants(cfg["constants"]) if cfg.get("constants") else None
    params = hyper.auto_params(float(cfg["snr"]), int(cfg["patch"]), cfg["model"], table)
    print(json.dumps({"p": params.p, "d": params.d, "f_factor": params.f_factor,
                      "W_h": params.window_side}))
    return EXIT_OK


def bench_cell(clean: np.ndarray, model: str, snr: float, side: int, seeds: int,
               stride: int | None = None, threads: int = 1) -> dict:
    """Mean PSNR/SSIM/wall time of automatic-parameter denoising over ``seeds`` realisations."""
    params = hyper.auto_params(snr, side, model)
    if stride is not None:
        params = params.with_(target_stride=stride)
    ps, ss, ws = [], [], []
    for seed in range(seeds):
        noisy = add_noise(clean, model, snr, seed)
        t0 = time.perf_counter()
        den = denoise_image(noisy, params, threads=threads)
        ws.append((time.perf_counter() - t0) * 1e3)
        ps.append(psnr(clean, den))
        ss.append(ssim(clean, den))
    return {"method": f"dequip-P{side}", "noise_model": model, "target_snr": snr,
            "seed": f"0..{seeds - 1}", "psnr": float(np.mean(ps)), "ssim": float(np.mean(ss)),
            "wall_ms": float(np.mean(ws))}


def cmd_bench(cfg: dict) -> int:
    _need(cfg, "images")
    folder = Path(cfg["images"])
    files = sorted(folder.glob("*.pgm")) if folder.is_dir() else []
    if not files:
        raise UsageError(f"no .pgm images found in {folder}")
    rows = []
    threads = cfg.get("threads") or default_threads()
    for path in files:
        clean = load_pgm(path)
        for model in str(cfg["models"]).split(","):
            for snr in _floats(cfg["snrs"]):
                for side in _ints(cfg["patches"]):
                    row = bench_cell(clean, model.strip(), snr, side, int(cfg["seeds"]),
                                     cfg.get("stride"), threads)
                    row["image"] = path.stem
                    rows.append(row)
                    sys.stderr.write(f"{path.stem} {model} {snr:g}dB P{side}: "
                                     f"{row['psnr']:.2f} dB / {row['ssim']:.3f}\n")
    _emit(rows, cfg.get("out"))
    return EXIT_OK


COMMANDS = {
    "denoise": cmd_denoise, "qab": cmd_qab, "noise": cmd_noise, "metrics": cmd_metrics,
    "ipr": cmd_ipr, "hyper": cmd_hyper, "bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"dequip {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"dequip: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalError as exc:
        print(f"dequip: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FormatError, OSError) as exc:
        print(f"dequip: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DequipError as exc:
        print(f"dequip: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
