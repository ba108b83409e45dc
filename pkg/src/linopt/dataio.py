"""LIBSVM text format and the separate feature-file / label-file convention.

Feature ids are 0-based in memory. ``index_base=1`` (the LIBSVM default)
shifts ids by one at the file boundary.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import IO, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .linalg import SparseExample

Source = Union[str, "os.PathLike[str]", IO]


class ParseError(ValueError):
    """Malformed input; carries the 1-based line number when known."""

    def __init__(self, message, lineno=None, filename=None):
        self.lineno = lineno
        self.filename = filename
        where = ""
        if filename is not None:
            where += f"{filename}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


@dataclass(eq=False)
class Dataset:
    examples: List[SparseExample]
    labels: np.ndarray
    num_features: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        if self.labels.shape[0] != len(self.examples):
            raise ValueError(
                f"{len(self.examples)} examples but {self.labels.shape[0]} labels")
        top = max((ex.max_index() for ex in self.examples), default=-1)
        if top >= self.num_features:
            raise ValueError(
                f"feature index {top} out of range for {self.num_features} features")
        self._csr = None

    @property
    def num_examples(self) -> int:
        return len(self.examples)

    def __len__(self):
        return len(self.examples)

    def to_csr(self) -> sp.csr_matrix:
        """The examples stacked as an (n, m) CSR matrix (cached)."""
        if self._csr is None:
            indptr = np.zeros(len(self.examples) + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([ex.nnz for ex in self.examples])
            if self.examples:
                indices = np.concatenate([ex.indices for ex in self.examples])
                data = np.concatenate([ex.values for ex in self.examples])
            else:
                indices = np.empty(0, np.int64)
                data = np.empty(0)
            self._csr = sp.csr_matrix(
                (data, indices, indptr), shape=(len(self.examples), self.num_features))
        return self._csr

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset([self.examples[i] for i in rows], self.labels[rows],
                       self.num_features)

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.examples, labels, self.num_features)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.num_features == other.num_features
                and np.array_equal(self.labels, other.labels)
                and len(self.examples) == len(other.examples)
                and all(np.array_equal(a.indices, b.indices)
                        and np.array_equal(a.values, b.values)
                        for a, b in zip(self.examples, other.examples)))

    @classmethod
    def from_dense(cls, X, y, num_features=None) -> "Dataset":
        X = np.asarray(X, dtype=np.float64)
        examples = []
        for row in X:
            (idx,) = np.nonzero(row)
            examples.append(SparseExample(idx, row[idx]))
        m = X.shape[1] if num_features is None else num_features
        return cls(examples, y, m)


def _read_text(source: Source) -> Tuple[str, Optional[str]]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8"), os.fspath(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, getattr(source, "name", None)


def _parse_float(token, what, lineno, filename):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"non-numeric {what} {token!r}", lineno, filename) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite {what} {token!r}", lineno, filename)
    return value


def _parse_features(tokens, index_base, lineno, filename) -> SparseExample:
    idx = np.empty(len(tokens), dtype=np.int64)
    val = np.empty(len(tokens), dtype=np.float64)
    last = -1
    for k, tok in enumerate(tokens):
        head, sep, tail = tok.partition(":")
        if not sep:
            raise ParseError(f"expected index:value, got {tok!r}", lineno, filename)
        try:
            raw = int(head)
        except ValueError:
            raise ParseError(f"non-numeric index {head!r}", lineno, filename) from None
        if raw < index_base:
            raise ParseError(f"index {raw} below base {index_base}", lineno, filename)
        j = raw - index_base
        if j <= last:
            raise ParseError(f"indices not strictly increasing at {raw}", lineno, filename)
        last = j
        idx[k] = j
        val[k] = _parse_float(tail, "value", lineno, filename)
    return SparseExample(idx, val)


def _check_base(index_base):
    if index_base not in (0, 1):
        raise ValueError("index_base must be 0 or 1")


def _infer_m(examples, num_features):
    m = 1 + max((ex.max_index() for ex in examples), default=-1)
    if num_features is None:
        return m
    if num_features < m:
        raise ValueError(f"num_features={num_features} but data uses {m} features")
    return num_features


def read_libsvm(source: Source, index_base: int = 1,
                num_features: Optional[int] = None) -> Dataset:
    """Parse ``label (index:value)*`` lines into a :class:`Dataset`.

    Blank lines are skipped. ``num_features`` forces the feature count
    (must be at least ``1 + max index``).
    """
    _check_base(index_base)
    text, filename = _read_text(source)
    examples, labels = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        label = _parse_float(tokens[0], "label", lineno, filename)
        ex = _parse_features(tokens[1:], index_base, lineno, filename)
        examples.append(SparseExample(ex.indices, ex.values, label))
        labels.append(label)
    return Dataset(examples, np.array(labels, dtype=np.float64),
                   _infer_m(examples, num_features))


def read_feature_file(source: Source, index_base: int = 1,
                      num_features: Optional[int] = None):
    """Parse a label-free feature file; returns ``(examples, n, m)``.

    Every line is one example, so an empty line is an example with no
    features.
    """
    _check_base(index_base)
    text, filename = _read_text(source)
    examples = [
        _parse_features(line.split(), index_base, lineno, filename)
        for lineno, line in enumerate(text.splitlines(), start=1)
    ]
    return examples, len(examples), _infer_m(examples, num_features)


def read_label_file(source: Source, n: int) -> np.ndarray:
    text, filename = _read_text(source)
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) != n:
        raise ParseError(f"expected {n} labels, found {len(lines)}", filename=filename)
    return np.array([_parse_float(line.strip(), "label", k, filename)
                     for k, line in enumerate(lines, start=1)], dtype=np.float64)


def read_feature_label_files(feature_source: Source, label_source: Source,
                             index_base: int = 1,
                             num_features: Optional[int] = None) -> Dataset:
    examples, n, m = read_feature_file(feature_source, index_base, num_features)
    y = read_label_file(label_source, n)
    return Dataset(examples, y, m)


def format_number(value: float) -> str:
    """Shortest round-trip text for a float; integral values drop ``.0``."""
    s = repr(float(value))
    return s[:-2] if s.endswith(".0") else s


def format_example(ex: SparseExample, index_base: int = 1) -> str:
    return " ".join(f"{j + index_base}:{format_number(v)}"
                    for j, v in zip(ex.indices.tolist(), ex.values.tolist()))


def write_libsvm(d: Dataset, sink: Union[str, "os.PathLike[str]", IO],
                 index_base: int = 1) -> None:
    _check_base(index_base)
    lines = []
    for ex, y in zip(d.examples, d.labels.tolist()):
        feats = format_example(ex, index_base)
        lines.append(format_number(y) + (" " + feats if feats else "") + "\n")
    out = "".join(lines)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    elif isinstance(sink, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(sink, "mode", ""):
        sink.write(out.encode("utf-8"))
    else:
        sink.write(out)


def binarize_labels(y) -> Tuple[np.ndarray, np.ndarray]:
    """Map two distinct raw labels to -1/+1 (ascending order).

    Returns the +-1 vector and the sorted raw classes.
    """
    y = np.asarray(y, dtype=np.float64)
    classes = np.unique(y)
    if classes.size != 2:
        raise ValueError(f"expected 2 distinct labels, found {classes.size}")
    return np.where(y == classes[1], 1.0, -1.0), classes
