#!/usr/bin/env python3
"""Build the desk-scale MNIST fixture under data/mnist.

The source is the 5,000-image MNIST sample shipped inside the mlxtend wheel
(BSD-3-Clause). The sample is sorted by digit with 500 images per class, so
the split is stratified: per class the first 400 go to train-images-idx3-ubyte.gz
and the last 100 to t10k-images-idx3-ubyte.gz. Both files interleave the
classes round-robin so any prefix is balanced. Labels are written alongside.

    python3 tools/make_mnist_subset.py [--wheel mlxtend-*.whl] [--out data/mnist]

Without --wheel the wheel is fetched with `pip download mlxtend==0.24.0`.
"""

import argparse
import csv
import gzip
import io
import struct
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
N_TRAIN_PER_CLASS = 400


def fetch_wheel(dest: Path) -> Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary=:all:",
         "mlxtend==0.24.0", "-d", str(dest)],
        check=True,
    )
    return next(dest.glob("mlxtend-*.whl"))


def read_rows(wheel: Path):
    with zipfile.ZipFile(wheel) as z:
        text = gzip.decompress(z.read(MEMBER)).decode()
    images, labels = [], []
    for row in csv.reader(io.StringIO(text)):
        values = [int(float(v)) for v in row]
        images.append(bytes(values[:784]))
        labels.append(values[784])
    return images, labels


def split(images, labels):
    by_class = {}
    for img, lab in zip(images, labels):
        by_class.setdefault(lab, []).append(img)
    classes = sorted(by_class)

    def interleave(lo, hi):
        out_i, out_l = [], []
        for k in range(lo, hi):
            for c in classes:
                if k < len(by_class[c]):
                    out_i.append(by_class[c][k])
                    out_l.append(c)
        return out_i, out_l

    longest = max(len(v) for v in by_class.values())
    return interleave(0, N_TRAIN_PER_CLASS), interleave(N_TRAIN_PER_CLASS, longest)


def write_gz(path: Path, payload: bytes) -> None:
    # mtime=0 keeps the archive byte-identical across rebuilds.
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as gz:
        gz.write(payload)


def idx3(images) -> bytes:
    return struct.pack(">IIII", 0x00000803, len(images), 28, 28) + b"".join(images)


def idx1(labels) -> bytes:
    return struct.pack(">II", 0x00000801, len(labels)) + bytes(labels)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wheel", type=Path)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "mnist")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(Path(tmp))
        images, labels = read_rows(wheel)
    if len(images) != 5000:
        sys.exit(f"expected 5000 rows, found {len(images)}")

    (train_x, train_y), (test_x, test_y) = split(images, labels)
    args.out.mkdir(parents=True, exist_ok=True)
    write_gz(args.out / "train-images-idx3-ubyte.gz", idx3(train_x))
    write_gz(args.out / "train-labels-idx1-ubyte.gz", idx1(train_y))
    write_gz(args.out / "t10k-images-idx3-ubyte.gz", idx3(test_x))
    write_gz(args.out / "t10k-labels-idx1-ubyte.gz", idx1(test_y))
    print(f"wrote {len(train_x)} train and {len(test_x)} test images to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
