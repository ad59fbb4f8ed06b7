"""Projective measurements, observable spectra, and Hilbert-Schmidt bases.

An observable A = Σ_a a·Π_a becomes a `ProjectiveMeasurement` through its
clustered spectral decomposition, so degenerate observables yield fewer
outcomes than the dimension. Outcomes are identified by a hashable `label`
(the eigenvalue for spectral measurements, a per-site tuple for product
measurements); labels are what downstream distribution axes index by.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .linops import (
    ValidationError,
    as_matrix,
    dagger,
    hermitian_eig,
    kron_chain,
    max_abs,
)


@dataclass(frozen=True)
class Outcome:
    """One measurement branch: a real value, its projector, and a label.

    `projector` is None for synthetic outcomes (coarse-grained cells) that
    only exist inside distribution axes.
    """

    value: float
    projector: np.ndarray | None
    label: Hashable

    def __repr__(self):  # keep array noise out of test failure output
        return f"Outcome(value={self.value!r}, label={self.label!r})"


@dataclass(frozen=True)
class ProjectiveMeasurement:
    dim: int
    outcomes: tuple[Outcome, ...]

    def __init__(self, dim: int, outcomes: Sequence[Outcome], tol: float = 1e-9):
        outcomes = tuple(outcomes)
        if not outcomes:
            raise ValidationError("measurement needs at least one outcome")
        labels = [o.label for o in outcomes]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"outcome labels are not distinct: {labels}")
        total = np.zeros((dim, dim), dtype=np.complex128)
        for o in outcomes:
            p = as_matrix(o.projector)
            if p.shape != (dim, dim):
                raise ValidationError("projector shape does not match measurement dim")
            if max_abs(p - dagger(p)) > tol or max_abs(p @ p - p) > tol:
                raise ValidationError(f"outcome {o.label!r}: not a Hermitian projector")
            total += p
        if max_abs(total - np.eye(dim)) > tol:
            raise ValidationError("projectors do not sum to the identity")
        for a, b in itertools.combinations(outcomes, 2):
            if max_abs(a.projector @ b.projector) > tol:
                raise ValidationError(f"projectors {a.label!r} and {b.label!r} overlap")
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "outcomes", outcomes)

    def observable(self) -> np.ndarray:
        """Σ value·projector."""
        return sum(o.value * o.projector for o in self.outcomes)


def spectral_measurement(observable: np.ndarray, tol: float = 1e-8) -> ProjectiveMeasurement:
    """Measurement of a Hermitian observable; eigenvalues within tol merge."""
    observable = as_matrix(observable)
    groups = hermitian_eig(observable, tol)
    outcomes = []
    for val, vecs in groups:
        p = vecs @ dagger(vecs)
        outcomes.append(Outcome(value=val, projector=(p + dagger(p)) / 2, label=val))
    return ProjectiveMeasurement(observable.shape[0], outcomes)


def trivial_measurement(d: int) -> ProjectiveMeasurement:
    """The single-outcome measurement of the identity (value 1)."""
    return ProjectiveMeasurement(d, [Outcome(1.0, np.eye(d, dtype=np.complex128), 1.0)])


def product_measurement(locals_: Sequence[ProjectiveMeasurement]) -> ProjectiveMeasurement:
    """Joint local measurement on ⊗ sites.

    Outcome values multiply across sites (so they may collide, e.g. Z⊗Z);
    labels are the per-site label tuples, which stay distinct.
    """
    if not locals_:
        raise ValidationError("product of zero measurements")
    dim = int(np.prod([m.dim for m in locals_]))
    outcomes = []
    for combo in itertools.product(*[m.outcomes for m in locals_]):
        value = float(np.prod([o.value for o in combo]))
        proj = kron_chain([o.projector for o in combo])
        outcomes.append(Outcome(value=value, projector=proj, label=tuple(o.label for o in combo)))
    return ProjectiveMeasurement(dim, outcomes)


@dataclass(frozen=True)
class HSBasis:
    """Hermitian operator basis: ops[0] = I, the rest traceless, Tr(σμσν) = d·δμν."""

    dim: int
    ops: tuple[np.ndarray, ...]

    def __init__(self, dim: int, ops: Sequence[np.ndarray], tol: float = 1e-9):
        ops = tuple(as_matrix(o) for o in ops)
        d = int(dim)
        if len(ops) != d * d:
            raise ValidationError(f"need {d * d} basis operators, got {len(ops)}")
        if max_abs(ops[0] - np.eye(d)) > tol:
            raise ValidationError("ops[0] must be the identity")
        for i, o in enumerate(ops):
            if max_abs(o - dagger(o)) > tol:
                raise ValidationError(f"basis op {i} is not Hermitian")
            if i and abs(np.trace(o)) > 1e-10:
                raise ValidationError(f"basis op {i} is not traceless")
        gram = np.array([[np.trace(a @ b) for b in ops] for a in ops])
        if max_abs(gram - d * np.eye(d * d)) > tol:
            raise ValidationError("basis is not orthogonal with Tr(σμσν) = d δμν")
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "ops", ops)


def hs_basis(d: int) -> HSBasis:
    """Generalized Pauli basis: identity, then the Gell-Mann family scaled to
    Tr(σμσν) = d·δμν.

    Canonical order: I; symmetric pairs (j,k), j<k lexicographic; antisymmetric
    pairs in the same order; diagonal ladder l = 1..d−1. For d = 2 this is
    exactly {I, X, Y, Z}.
    """
    if d < 2:
        raise ValidationError("hs_basis needs d >= 2")
    s = np.sqrt(d / 2.0)  # rescales Tr(λ²) = 2 to = d
    ops: list[np.ndarray] = [np.eye(d, dtype=np.complex128)]
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = m[k, j] = 1.0
            ops.append(s * m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = -1.0j
            m[k, j] = 1.0j
            ops.append(s * m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=np.complex128)
        m[:l, :l] = np.eye(l)
        m[l, l] = -l
        ops.append(s * np.sqrt(2.0 / (l * (l + 1))) * m)
    return HSBasis(d, ops)


def rotate_basis(basis: HSBasis, u: np.ndarray) -> HSBasis:
    """Conjugate every basis element by a unitary; orthogonality is preserved."""
    u = as_matrix(u)
    if max_abs(dagger(u) @ u - np.eye(basis.dim)) > 1e-9:
        raise ValidationError("rotate_basis needs a unitary")
    return HSBasis(basis.dim, [u @ o @ dagger(u) for o in basis.ops])
