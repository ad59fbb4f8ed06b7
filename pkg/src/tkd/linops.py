"""Dense complex matrix kernel: tensor products, partial traces, spectral splits.

Everything downstream (channels, measurements, distributions, temporal states)
is built on the handful of primitives here. All matrices are plain numpy
arrays of complex128 in row-major order; tensor factorizations are tracked
separately as dimension tuples. Every comparison takes an explicit tolerance,
there is no hidden global epsilon.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


class ValidationError(ValueError):
    """A numerical invariant failed (non-Hermitian input, broken CPTP sum, ...)."""


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a matrix, got ndim={m.ndim}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a.T)


def max_abs(a: np.ndarray) -> float:
    """Entrywise max-norm; the metric behind every tolerance in this package."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float) -> bool:
    return a.shape[0] == a.shape[1] and max_abs(a - dagger(a)) <= tol


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_chain(factors: Sequence[np.ndarray]) -> np.ndarray:
    """⊗ of factors left to right; the single-factor chain is a copy."""
    if not len(factors):
        raise ValidationError("empty kron chain")
    out = as_matrix(factors[0]).copy()
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def check_profile(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValidationError(f"non-positive factor dimension in {dims}")
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"matrix is {m.shape}, not square")
    if int(np.prod(dims)) != m.shape[0]:
        raise ValidationError(f"profile {dims} does not factor side length {m.shape[0]}")
    return dims


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    ``dims`` gives the per-factor dimensions of the square matrix ``m`` and
    ``keep`` the factor indices to retain, in their original relative order.
    """
    m = as_matrix(m)
    dims = check_profile(m, dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = m.reshape(dims + dims)
    # contract row/col legs of each dropped factor, from the highest axis down
    # so earlier axis numbers stay valid
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + (t.ndim // 2))
    side = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(side, side)


def hermitian_eig(h: np.ndarray, tol: float = 1e-8) -> list[tuple[float, np.ndarray]]:
    """Clustered spectral decomposition of a Hermitian matrix.

    Returns ``[(eigenvalue, vectors), ...]`` in ascending eigenvalue order,
    where ``vectors`` is a (dim, multiplicity) orthonormal block. Eigenvalues
    whose consecutive gaps are below ``tol`` are merged into one group (so a
    numerically split degeneracy comes back as a single eigenspace) and the
    group is reported at the mean of its members.
    """
    h = as_matrix(h)
    if not is_hermitian(h, tol):
        raise ValidationError("hermitian_eig: input is not Hermitian within tol")
    vals, vecs = np.linalg.eigh(h)
    groups: list[tuple[float, np.ndarray]] = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > tol:
            groups.append((float(np.mean(vals[start:i])), vecs[:, start:i]))
            start = i
    return groups


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(as_matrix(a), ord=2))


def embed_operator(op: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Pad ``op`` with identities so it acts on the factors listed in ``sites``.

    ``op`` must be factored as ⊗_{s in sites} H_s in the given site order;
    the sites need not be adjacent. Realized as op ⊗ I followed by a
    tensor-leg permutation back to the natural factor order.
    """
    op = as_matrix(op)
    dims = tuple(int(d) for d in dims)
    sites = [int(s) for s in sites]
    if len(set(sites)) != len(sites):
        raise ValidationError(f"repeated site in {sites}")
    if any(s < 0 or s >= len(dims) for s in sites):
        raise ValidationError(f"site out of range in {sites}")
    site_dims = [dims[s] for s in sites]
    if op.shape != (int(np.prod(site_dims)),) * 2:
        raise ValidationError(
            f"operator shape {op.shape} does not match site dims {site_dims}")
    rest = [i for i in range(len(dims)) if i not in sites]
    order = sites + rest  # factor order of op ⊗ I_rest
    full = np.kron(op, np.eye(int(np.prod([dims[i] for i in rest])) if rest else 1))
    t = full.reshape([dims[i] for i in order] * 2)
    perm = [order.index(i) for i in range(len(dims))]
    t = t.transpose(perm + [p + len(dims) for p in perm])
    side = int(np.prod(dims))
    return t.reshape(side, side)


def basis_state(d: int, j: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[j] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return np.outer(v, np.conj(v))
