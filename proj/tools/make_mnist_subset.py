#!/usr/bin/env python3
"""Build the IDX-format MNIST subset under data/mnist-subset/.

Source: the 5,000-sample MNIST extract bundled with the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 500 images per class, sorted by label).
The first 200 images of each class form the training split and the next
100 form the test split; both splits are interleaved with a fixed seed.

    pip download --no-deps mlxtend
    python3 tools/make_mnist_subset.py mlxtend-*.whl data/mnist-subset
"""
import gzip
import io
import struct
import sys
import zipfile
from pathlib import Path

import numpy as np

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    wheel, out = Path(sys.argv[1]), Path(sys.argv[2])
    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read(MEMBER))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",")
    pixels, labels = table[:, :-1], table[:, -1].astype(int)

    rng = np.random.default_rng(20220101)
    train_idx, test_idx = [], []
    for c in range(10):
        rows = np.flatnonzero(labels == c)
        train_idx.extend(rows[:200])
        test_idx.extend(rows[200:300])
    train_idx = rng.permutation(train_idx)
    test_idx = rng.permutation(test_idx)

    out.mkdir(parents=True, exist_ok=True)
    write_idx_images(out / "train-images-idx3-ubyte", pixels[train_idx])
    write_idx_labels(out / "train-labels-idx1-ubyte", labels[train_idx])
    write_idx_images(out / "t10k-images-idx3-ubyte", pixels[test_idx])
    write_idx_labels(out / "t10k-labels-idx1-ubyte", labels[test_idx])


if __name__ == "__main__":
    main()
