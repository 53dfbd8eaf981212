"""Dataset ingestion (LIBSVM text format) and a synthetic classification generator."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..problem import Dataset

__all__ = ["LibsvmFormatError", "load_libsvm", "synth_classification", "write_libsvm"]


class LibsvmFormatError(ValueError):
    pass


def _parse_label(tok, lineno):
    try:
        v = float(tok)
    except ValueError:
        raise LibsvmFormatError(f"line {lineno}: bad label {tok!r}") from None
    if v == 0.0 or v == -1.0:
        return -1.0
    if v == 1.0:
        return 1.0
    raise LibsvmFormatError(f"line {lineno}: label {tok!r} is not one of -1, 0, +1")


def load_libsvm(path, n_features=None) -> Dataset:
    """Read ``label idx:val ...`` lines with 1-based indices.

    Labels 0 and -1 map to -1. Blank lines and ``#`` comments are skipped.
    The dimension is the largest index seen unless ``n_features`` is given.
    """
    labels, rows, cols, vals = [], [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            labels.append(_parse_label(toks[0], lineno))
            r = len(labels) - 1
            prev = 0
            for tok in toks[1:]:
                idx, sep, val = tok.partition(":")
                if not sep:
                    raise LibsvmFormatError(f"line {lineno}: expected idx:val, got {tok!r}")
                try:
                    j = int(idx)
                    x = float(val)
                except ValueError:
                    raise LibsvmFormatError(f"line {lineno}: bad feature {tok!r}") from None
                if j < 1:
                    raise LibsvmFormatError(f"line {lineno}: indices are 1-based, got {j}")
                if j <= prev:
                    raise LibsvmFormatError(f"line {lineno}: indices must be increasing")
                if not np.isfinite(x):
                    raise LibsvmFormatError(f"line {lineno}: non-finite value {tok!r}")
                prev = j
                rows.append(r)
                cols.append(j - 1)
                vals.append(x)
    if not labels:
        raise LibsvmFormatError(f"{path}: no data")
    n = max(cols) + 1 if cols else 0
    if n_features is not None:
        if n_features < n:
            raise LibsvmFormatError(f"{path}: feature index {n} exceeds n_features={n_features}")
        n = n_features
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(labels), n))
    return Dataset(A, np.array(labels))


def write_libsvm(dataset: Dataset, path):
    """Write with shortest round-trip float formatting; zeros are omitted."""
    A = sp.csr_matrix(dataset.features)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(A.shape[0]):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            order = np.argsort(A.indices[lo:hi])
            parts = ["+1" if dataset.labels[i] > 0 else "-1"]
            for j, v in zip(A.indices[lo:hi][order], A.data[lo:hi][order]):
                if v != 0.0:
                    parts.append(f"{j + 1}:{float(v)!r}")
            fh.write(" ".join(parts) + "\n")


def synth_classification(N, n, separability=1.0, seed=0, test_size=None, cluster_shift=1.0,
                         feature_scale=None, anisotropy=1.0):
    """Gaussian clusters labelled by a planted hyperplane.

    Features are ``(z + b * cluster_shift * w) * feature_scale`` with
    ``z ~ N(0, I)`` and ``w`` the planted unit normal; the clean label ``b`` is
    a fair coin. A fraction ``(1 - separability) / 2`` of labels is flipped, so
    ``separability = 1`` is noiseless and 0 is pure noise. ``feature_scale``
    defaults to ``1/sqrt(n)`` (unit-norm rows on average). With
    ``anisotropy > 1`` the noise in coordinate j (in a random rotated basis)
    is scaled geometrically from 1 down to ``1/anisotropy``, which makes the
    Hessian ill-conditioned. The held-out set has ``test_size`` rows, by
    default ``round(0.6248 * N)``.

    Returns
    -------
    (train, test) : tuple of Dataset
    """
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    if not 0.0 <= separability <= 1.0:
        raise ValueError("separability must lie in [0, 1]")
    if test_size is None:
        test_size = max(1, round(0.6248 * N))
    if feature_scale is None:
        feature_scale = 1.0 / np.sqrt(n)
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n)
    w /= np.linalg.norm(w)
    total = N + test_size
    clean = np.where(rng.uniform(size=total) < 0.5, -1.0, 1.0)
    Z = rng.standard_normal((total, n))
    if anisotropy != 1.0:
        scales = np.geomspace(1.0, 1.0 / anisotropy, n)
        R, _ = np.linalg.qr(rng.standard_normal((n, n)))
        Z = (Z * scales) @ R.T
    # push each point to its side of the hyperplane: project out the w
    # component and replace it with a signed, shifted magnitude
    proj = Z @ w
    Z += np.outer(clean * (np.abs(proj) + cluster_shift) - proj, w)
    A = Z * feature_scale
    flip = rng.uniform(size=total) < (1.0 - separability) / 2.0
    b = np.where(flip, -clean, clean)
    return Dataset(A[:N], b[:N]), Dataset(A[N:], b[N:])
