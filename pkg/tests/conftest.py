import os
from pathlib import Path

import numpy as np
import pytest

from oscnet.cifar import RECORD_BYTES


def build_synthetic_archive(root: Path, per_train: int = 200, test_n: int = 100) -> Path:
    """Write a miniature archive in the standard binary layout.

    Labels cycle 0..9 so every class is populated; pixel bytes are seeded
    noise.  Record counts are intentionally small: these files exercise the
    codec and pipeline, not the accuracy criteria.
    """
    root.mkdir(parents=True, exist_ok=True)

    def make(n: int, seed: int) -> bytes:
        rng = np.random.default_rng(seed)
        out = bytearray()
        for i in range(n):
            out.append(i % 10)
            out.extend(rng.integers(0, 256, RECORD_BYTES - 1, dtype=np.uint8).tobytes())
        return bytes(out)

    for i in range(1, 6):
        (root / f"data_batch_{i}.bin").write_bytes(make(per_train, i))
    (root / "test_batch.bin").write_bytes(make(test_n, 99))
    return root


@pytest.fixture
def synthetic_archive(tmp_path):
    return build_synthetic_archive(tmp_path / "data")


def find_real_cifar10():
    """Directory of the real binary archive, or None when not available."""
    candidates = []
    env = os.environ.get("OSC_DATA_DIR")
    if env:
        candidates.append(Path(env))
    here = Path(__file__).resolve().parent
    candidates += [here / "data", here.parent / "data"]
    for base in candidates:
        for d in (base, base / "cifar-10-batches-bin"):
            if (d / "data_batch_1.bin").is_file() and (d / "test_batch.bin").is_file():
                return d
    return None
