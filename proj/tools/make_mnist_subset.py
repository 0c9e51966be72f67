#!/usr/bin/env python3
"""Build the desk-scale MNIST subset shipped in data/mnist-subset.

Source: the 5000-image MNIST sample bundled with mlxtend (BSD-3), 500 images
per digit, stored as CSV rows of 784 pixels followed by the label. The first
400 images of every digit become the training split, the other 100 the test
split. Output files are gzipped IDX in the standard MNIST layout.

    pip download mlxtend==0.24.0 --no-deps -d /tmp/mx
    python3 tools/make_mnist_subset.py /tmp/mx/mlxtend-0.24.0-py3-none-any.whl data/mnist-subset
"""
import argparse
import gzip
import io
import pathlib
import struct
import zipfile

import numpy as np

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
TRAIN_PER_CLASS = 400


def write_idx(path, array, magic):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">I", magic))
        for dim in array.shape:
            f.write(struct.pack(">I", dim))
        f.write(array.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("out_dir")
    args = ap.parse_args()

    with zipfile.ZipFile(args.wheel) as z:
        raw = gzip.decompress(z.read(MEMBER))
    rows = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
    images = rows[:, :784].reshape(-1, 28, 28)
    labels = rows[:, 784]

    train, test = [], []
    for digit in range(10):
        idx = np.flatnonzero(labels == digit)
        train.extend(idx[:TRAIN_PER_CLASS])
        test.extend(idx[TRAIN_PER_CLASS:])
    # Interleave classes so the files are not label-sorted.
    rng = np.random.default_rng(0)
    train = rng.permutation(train)
    test = rng.permutation(test)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(out / "train-images-idx3-ubyte.gz", images[train], 0x803)
    write_idx(out / "train-labels-idx1-ubyte.gz", labels[train], 0x801)
    write_idx(out / "t10k-images-idx3-ubyte.gz", images[test], 0x803)
    write_idx(out / "t10k-labels-idx1-ubyte.gz", labels[test], 0x801)
    print(f"train {len(train)} test {len(test)} -> {out}")


if __name__ == "__main__":
    main()
