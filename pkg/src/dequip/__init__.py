"""Patch denoising with Schrodinger-operator bases and inter-patch interactions."""

from .core import Patch, PatchGrid, aggregate_patches, extract_patch, load_pgm, patch_grid, save_pgm
from .denoise import DenoiseParams, denoise_image, denoise_patch, project, reconstruct
from .hyper import auto_params
from .interaction import collect_neighbors, effective_potential, pair_interaction, patch_distance, total_interaction
from .noisemetrics import add_awgn, add_poisson, add_speckle, cnr, measure_snr, psnr, ssim
from .qab import QabParams, gaussian_smooth, qab_denoise
from .spectral import EigenBasis, average_ipr, build_hamiltonian, eigendecompose, ipr

__version__ = "0.1.0"
