"""Regenerate the small datasets shipped in src/linopt/data."""

import os

import numpy as np

from linopt.dataio import Dataset, format_example, write_libsvm
from linopt.linalg import SparseExample
from linopt.synthetic import make_classification, make_multiclass

OUT = os.path.join(os.path.dirname(__file__), os.pardir, "src", "linopt", "data")


def main():
    pts = [([1.0, 1.0], 1), ([2.0, 0.5], 1), ([-1.0, -1.0], -1), ([-0.5, -2.0], -1)]
    sep = Dataset([SparseExample([0, 1], x) for x, _ in pts],
                  [float(y) for _, y in pts], 2)
    write_libsvm(sep, os.path.join(OUT, "separable4.libsvm"))

    write_libsvm(make_classification(200, 10, seed=7),
                 os.path.join(OUT, "binary200.libsvm"))

    d = make_multiclass(n=400, m=30, n_classes=20, spread=3.0, seed=3)
    with open(os.path.join(OUT, "multiclass20.feat"), "w", newline="\n") as fh:
        fh.writelines(format_example(ex) + "\n" for ex in d.examples)
    with open(os.path.join(OUT, "multiclass20.label"), "w", newline="\n") as fh:
        fh.writelines(f"{int(y) + 1}\n" for y in d.labels)


if __name__ == "__main__":
    main()
