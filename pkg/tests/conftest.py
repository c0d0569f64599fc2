from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    suppress_health_check=(HealthCheck.too_slow,),
    deadline=None,
)
settings.load_profile("default")

ASSETS = Path(__file__).parent / "assets"


@pytest.fixture(scope="session")
def assets_dir() -> Path:
    return ASSETS


@pytest.fixture(scope="session")
def fixture_model():
    from sftc.nnwf import load_model_file

    return load_model_file(ASSETS / "fixture_recon.nnwf")


@pytest.fixture(scope="session")
def fixture_images():
    from sftc.image import load_image

    return [load_image(ASSETS / f"img_{i:03d}.png") for i in range(10)]


@pytest.fixture(scope="session")
def fixture_features():
    from sftc.fvec import load_fvec

    return [load_fvec(ASSETS / f"feat_{i:03d}.fvec") for i in range(10)]


def random_texture(rng: np.random.Generator, h: int, w: int, c: int = 1):
    """Smooth-ish random normalized texture used across coder tests."""
    from sftc.residual import NormalizedTexture

    yy, xx = np.mgrid[0:h, 0:w]
    base = 0.5 + 0.3 * np.sin(yy * rng.uniform(0.1, 0.8)) * np.cos(
        xx * rng.uniform(0.1, 0.8)
    )
    noise = rng.normal(0, 0.08, size=(h, w, c))
    values = np.clip(base[:, :, None] + noise, 0.0, 1.0).astype(np.float32)
    return NormalizedTexture(values=values, degenerate=False)
