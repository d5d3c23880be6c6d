"""Automatic hyperparameter rules.

Given the input SNR (dB), patch side and noise model:

    p        = m1 * snr + c1                (clamped at 0)
    d        = m2 * snr + c2                (rounded half-up, clamped to [1, side**2])
    f_factor = l1 + l3 / (d - l2)

The constants were fitted on 8-bit test images at patch sides 5, 7 and 11.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, fields
from typing import Mapping

from .denoise import DenoiseParams
from .errors import ConstantsLookupError, SingularityError, ValidationError

NOISE_MODELS = ("gaussian", "poisson")
POLE_GUARD = 0.5


@dataclass(frozen=True)
class FitConstants:
    noise_model: str
    patch_side: int
    m1: float
    c1: float
    m2: float
    c2: float
    l1: float
    l2: float
    l3: float


_BUILTIN = [
    # model, side, m1, c1, m2, c2, l1, l2, l3
    ("gaussian", 5, 12.84e-4, -35.96e-4, 0.7783, 0.7315, 0.5287, -4.4551, 20.6204),
    ("gaussian", 7, 30.96e-4, 13.56e-3, 1.7000, 0.5345, 1.2630, -4.1915, 13.9698),
    ("gaussian", 11, 16.46e-4, 50.40e-3, 4.2500, 4.8210, 1.9161, 6.8223, 9.7995),
    ("poisson", 5, 60.33e-5, -21.85e-4, 0.8202, 0.8621, 0.8083, -3.8975, 16.8476),
    ("poisson", 7, 21.00e-4, 36.31e-4, 1.6030, 0.5800, 1.5391, -4.4288, 10.1560),
    ("poisson", 11, 16.64e-4, 44.23e-3, 4.3990, 2.8900, 1.8587, 11.6517, 3.9798),
]

BUILTIN_CONSTANTS: dict[tuple[str, int], FitConstants] = {
    (row[0], row[1]): FitConstants(*row) for row in _BUILTIN
}

DEFAULT_WINDOWS = {5: 15, 7: 21, 11: 33}


def load_constants(path: str | os.PathLike) -> dict[tuple[str, int], FitConstants]:
    """Read fit constants from JSON.

    The file holds a list of objects (or ``{"rows": [...]}``) with keys
    ``model, side, m1, c1, m2, c2, l1, l2, l3``. Rows override the built-ins.
    """
    with open(path) as fh:
        raw = json.load(fh)
    rows = raw["rows"] if isinstance(raw, Mapping) else raw
    table = dict(BUILTIN_CONSTANTS)
    names = [f.name for f in fields(FitConstants)][2:]
    for row in rows:
        try:
            model = str(row["model"]).lower()
            side = int(row["side"])
            values = [float(row[k]) for k in names]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad constants row {row!r}: {exc}") from exc
        table[(model, side)] = FitConstants(model, side, *values)
    return table


def lookup(noise_model: str, patch_side: int,
           table: Mapping[tuple[str, int], FitConstants] | None = None) -> FitConstants:
    table = BUILTIN_CONSTANTS if table is None else table
    key = (noise_model.lower(), int(patch_side))
    try:
        return table[key]
    except KeyError:
        known = ", ".join(f"{m}/{s}" for m, s in sorted(table))
        raise ConstantsLookupError(
            f"no fit constants for {key[0]} noise at patch side {key[1]} (known: {known})") from None


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def estimate_p(snr_db: float, constants: FitConstants) -> float:
    return max(0.0, constants.m1 * snr_db + constants.c1)


def estimate_d(snr_db: float, constants: FitConstants, p_dim: int | None = None) -> int:
    p_dim = constants.patch_side ** 2 if p_dim is None else int(p_dim)
    d = round_half_up(constants.m2 * snr_db + constants.c2)
    return min(max(d, 1), p_dim)


def estimate_f_factor(d: int, constants: FitConstants) -> float:
    """Kinetic factor from the fitted hyperbola; refuses to evaluate near its pole."""
    gap = d - constants.l2
    if abs(gap) < POLE_GUARD:
        raise SingularityError(
            f"d={d} is within {POLE_GUARD} of the pole l2={constants.l2} "
            f"({constants.noise_model}/{constants.patch_side})")
    f = constants.l1 + constants.l3 / gap
    if not f > 0:
        raise ValidationError(
            f"fitted f_factor {f:.4g} is not positive for d={d} "
            f"({constants.noise_model}/{constants.patch_side})")
    return f


def default_window(patch_side: int) -> int:
    """Search window side: 15/21/33 for sides 5/7/11, else 3*side made odd."""
    if patch_side in DEFAULT_WINDOWS:
        return DEFAULT_WINDOWS[patch_side]
    w = 3 * patch_side
    return w if w % 2 else w + 1


def auto_params(snr_db: float, patch_side: int, noise_model: str = "gaussian",
                table: Mapping[tuple[str, int], FitConstants] | None = None) -> DenoiseParams:
    consts = lookup(noise_model, patch_side, table)
    d = estimate_d(snr_db, consts, patch_side ** 2)
    return DenoiseParams(
        patch_side=patch_side,
        window_side=default_window(patch_side),
        p=estimate_p(snr_db, consts),
        d=d,
        f_factor=estimate_f_factor(d, consts),
    )
