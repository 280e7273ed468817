#!/usr/bin/env python3
"""Export the scikit-learn handwritten-digits corpus as IDX files.

Produces two variants under the given output directory, each with a
deterministic 80/20 train/test split:
  digits8-*   the native 8x8 images (64 features)
  digits28-*  the same images bilinearly upscaled to 28x28 (784 features)
"""
import struct
import sys
from pathlib import Path

import numpy as np
from scipy.ndimage import zoom
from sklearn.datasets import load_digits


def write_idx_images(path: Path, images: np.ndarray) -> None:
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    out_dir.mkdir(parents=True, exist_ok=True)

    digits = load_digits()
    images = digits.images  # (1797, 8, 8), values 0..16
    labels = digits.target.astype(np.uint8)

    rng = np.random.default_rng(20240229)
    order = rng.permutation(len(labels))
    images, labels = images[order], labels[order]
    n_train = int(round(0.8 * len(labels)))

    small = np.clip(np.rint(images / 16.0 * 255.0), 0, 255).astype(np.uint8)
    big = np.stack([zoom(img, 28 / 8, order=1) for img in images / 16.0])
    big = np.clip(np.rint(big * 255.0), 0, 255).astype(np.uint8)

    for name, data in (("digits8", small), ("digits28", big)):
        write_idx_images(out_dir / f"{name}-train-images-idx3-ubyte", data[:n_train])
        write_idx_labels(out_dir / f"{name}-train-labels-idx1-ubyte", labels[:n_train])
        write_idx_images(out_dir / f"{name}-test-images-idx3-ubyte", data[n_train:])
        write_idx_labels(out_dir / f"{name}-test-labels-idx1-ubyte", labels[n_train:])
    print(f"wrote {len(labels)} examples ({n_train} train) to {out_dir}")


if __name__ == "__main__":
    main()
