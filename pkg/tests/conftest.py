import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = Path(os.environ.get("DEQUIP_DATA", ROOT / "data"))

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def natural_images() -> dict[str, np.ndarray]:
    """Grayscale sample photographs on the [0, 255] scale."""
    from skimage import color, data

    return {
        "camera": data.camera().astype(np.float64),
        "moon": data.moon().astype(np.float64),
        "astronaut": np.round(color.rgb2gray(data.astronaut()) * 255.0),
    }


@pytest.fixture(scope="session")
def naturals():
    return natural_images()


@pytest.fixture(scope="session")
def camera256(naturals):
    from skimage.transform import resize

    return np.round(resize(naturals["camera"], (256, 256), anti_aliasing=True, preserve_range=True))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
