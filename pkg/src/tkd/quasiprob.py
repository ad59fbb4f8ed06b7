"""Temporal quasiprobability distributions over multi-time processes.

A process is an initial state plus an ordered chain of CPTP steps. Measuring
a schedule of projective observables against it yields, depending on which
side of the state the projectors are inserted, the right/left/doubled
Kirkwood-Dirac distributions, their real (Margenau-Hill) parts, or the
ordinary sequential-collapse (Lueders-von Neumann) probabilities. The
nonclassicality of a distribution is the excess of Σ|Q| over 1.

Axis convention: distribution axis i belongs to time t_i (ascending order);
doubled kinds carry the full ket block first, then the bra block. Printed,
paper-style tables reverse to latest-time-first; that happens only at the
presentation layer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .channels import (
    Instrument,
    QuantumChannel,
    adjoint_apply,
    apply_channel,
    check_density,
    compose,
    tensor_channels,
    validate_cptp,
)
from .linops import ValidationError, as_matrix, dagger, max_abs, spectral_norm
from .measurements import (
    Outcome,
    ProjectiveMeasurement,
    product_measurement,
    spectral_measurement,
)

KINDS = ("kd_right", "kd_left", "kd_doubled", "mh", "mh_doubled", "lvn")
DOUBLED_KINDS = ("kd_doubled", "mh_doubled")


@dataclass(frozen=True)
class MultiTimeProcess:
    """ρ at t_0 plus the CPTP steps E_{t_1←t_0}, ..., E_{t_n←t_{n-1}}."""

    rho0: np.ndarray
    channels: tuple[QuantumChannel, ...]
    tol: float = field(default=1e-9, compare=False)

    def __init__(self, rho0, channels: Sequence[QuantumChannel] = (), tol: float = 1e-9):
        rho0 = check_density(rho0, tol)
        channels = tuple(channels)
        d = rho0.shape[0]
        for i, c in enumerate(channels):
            if c.d_in != d:
                raise ValidationError(f"channel {i} expects dim {c.d_in}, chain carries {d}")
            rep = validate_cptp(c, tol)
            if not rep.trace_preserving:
                raise ValidationError(f"channel {i} is not trace preserving, defect {rep.defect:.3e}")
            d = c.d_out
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "tol", tol)

    @property
    def n_steps(self) -> int:
        return len(self.channels)

    @property
    def n_times(self) -> int:
        return len(self.channels) + 1

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.rho0.shape[0],) + tuple(c.d_out for c in self.channels)

    def state_at(self, k: int) -> np.ndarray:
        """The physical state ρ_{t_k} obtained by running the chain forward."""
        if not 0 <= k < self.n_times:
            raise ValidationError(f"time index {k} out of range")
        rho = self.rho0
        for c in self.channels[:k]:
            rho = apply_channel(c, rho)
        return rho


def sub_process(p: MultiTimeProcess, times: Sequence[int]) -> MultiTimeProcess:
    """Restriction of the process to a subset of its times.

    The first kept time contributes the forward-evolved state there; channels
    between consecutive kept times are composed.
    """
    times = sorted(set(int(t) for t in times))
    if not times:
        raise ValidationError("sub_process needs at least one time")
    if times[0] < 0 or times[-1] >= p.n_times:
        raise ValidationError(f"times {times} out of range")
    rho = p.state_at(times[0])
    chain = []
    for a, b in zip(times, times[1:]):
        c = p.channels[a]
        for k in range(a + 1, b):
            c = compose(p.channels[k], c)
        chain.append(c)
    return MultiTimeProcess(rho, chain, tol=p.tol)


def tensor_process(p: MultiTimeProcess, q: MultiTimeProcess) -> MultiTimeProcess:
    """Two processes run in parallel on a tensor-product system."""
    if p.n_steps != q.n_steps:
        raise ValidationError("tensor_process needs equal step counts")
    return MultiTimeProcess(
        np.kron(p.rho0, q.rho0),
        [tensor_channels(a, b) for a, b in zip(p.channels, q.channels)],
        tol=max(p.tol, q.tol),
    )


def tensor_schedule(s1: Sequence[ProjectiveMeasurement],
                    s2: Sequence[ProjectiveMeasurement]) -> list[ProjectiveMeasurement]:
    if len(s1) != len(s2):
        raise ValidationError("schedules differ in length")
    return [product_measurement([a, b]) for a, b in zip(s1, s2)]


@dataclass(frozen=True)
class QuasiDistribution:
    """Complex tensor over outcome tuples, normalized to total 1.

    ``axes[i]`` lists the outcomes along axis i; ``ket_axes`` counts the
    leading axes that form the ket block of a doubled kind (0 otherwise, and
    possibly 0 for a doubled kind whose block structure was reduced away).
    """

    kind: str
    axes: tuple[tuple[Outcome, ...], ...]
    values: np.ndarray
    ket_axes: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "axes", tuple(tuple(ax) for ax in self.axes))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))
        if self.values.shape != tuple(len(ax) for ax in self.axes):
            raise ValidationError("values shape does not match axes")
        if not 0 <= self.ket_axes <= len(self.axes):
            raise ValidationError("ket_axes out of range")
        if self.kind not in DOUBLED_KINDS and self.ket_axes:
            raise ValidationError(f"{self.kind} carries no ket block")
        total = complex(self.values.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(f"distribution sums to {total}, not 1")
        if self.kind in ("mh", "mh_doubled", "lvn"):
            if float(np.max(np.abs(self.values.imag))) > 1e-12:
                raise ValidationError(f"{self.kind} entries must be real")
        if self.kind == "lvn":
            re = self.values.real
            if re.min() < -1e-10 or re.max() > 1.0 + 1e-10:
                raise ValidationError("lvn entries must lie in [0, 1]")

    def axis_labels(self, i: int) -> tuple[Hashable, ...]:
        return tuple(o.label for o in self.axes[i])

    def axis_values(self, i: int) -> np.ndarray:
        return np.array([o.value for o in self.axes[i]], dtype=float)

    def total(self) -> complex:
        return complex(self.values.sum())


def _check_schedule(p: MultiTimeProcess, s: Sequence[ProjectiveMeasurement], name: str = "schedule"):
    if len(s) != p.n_times:
        raise ValidationError(f"{name} has {len(s)} entries for {p.n_times} times")
    for k, (m, d) in enumerate(zip(s, p.dims)):
        if m.dim != d:
            raise ValidationError(f"{name}[{k}] acts on dim {m.dim}, process carries {d}")


def kd_right(p: MultiTimeProcess, s: Sequence[ProjectiveMeasurement]) -> QuasiDistribution:
    """Projectors inserted on the bra side: Tr[E_n(...E_1(ρΠ_{b0})Π_{b1}...)Π_{bn}]."""
    _check_schedule(p, s)
    n = p.n_steps
    values = np.zeros(tuple(len(m.outcomes) for m in s), dtype=np.complex128)

    def rec(k: int, idx: tuple, state: np.ndarray):
        for i, o in enumerate(s[k].outcomes):
            y = state @ o.projector
            if k == n:
                values[idx + (i,)] = np.trace(y)
            else:
                rec(k + 1, idx + (i,), apply_channel(p.channels[k], y))

    rec(0, (), p.rho0)
    return QuasiDistribution("kd_right", tuple(tuple(m.outcomes) for m in s), values)


def kd_left(p: MultiTimeProcess, s: Sequence[ProjectiveMeasurement]) -> QuasiDistribution:
    """Projectors inserted on the ket side; the complex conjugate of kd_right."""
    _check_schedule(p, s)
    n = p.n_steps
    values = np.zeros(tuple(len(m.outcomes) for m in s), dtype=np.complex128)

    def rec(k: int, idx: tuple, state: np.ndarray):
        for i, o in enumerate(s[k].outcomes):
            y = o.projector @ state
            if k == n:
                values[idx + (i,)] = np.trace(y)
            else:
                rec(k + 1, idx + (i,), apply_channel(p.channels[k], y))

    rec(0, (), p.rho0)
    return QuasiDistribution("kd_left", tuple(tuple(m.outcomes) for m in s), values)


def kd_doubled(p: MultiTimeProcess, ket: Sequence[ProjectiveMeasurement],
               bra: Sequence[ProjectiveMeasurement]) -> QuasiDistribution:
    """Independent ket- and bra-side insertions at every time.

    Summing the ket block recovers kd_right of the bra schedule; summing the
    bra block recovers kd_left of the ket schedule; the diagonal (equal
    schedules and outcomes) is the sequential-collapse distribution.
    """
    _check_schedule(p, ket, "ket schedule")
    _check_schedule(p, bra, "bra schedule")
    n = p.n_steps
    kshape = tuple(len(m.outcomes) for m in ket)
    bshape = tuple(len(m.outcomes) for m in bra)
    values = np.zeros(kshape + bshape, dtype=np.complex128)

    def rec(k: int, kidx: tuple, bidx: tuple, state: np.ndarray):
        for i, oa in enumerate(ket[k].outcomes):
            for j, ob in enumerate(bra[k].outcomes):
                y = oa.projector @ state @ ob.projector
                if k == n:
                    values[kidx + (i,) + bidx + (j,)] = np.trace(y)
                else:
                    rec(k + 1, kidx + (i,), bidx + (j,), apply_channel(p.channels[k], y))

    rec(0, (), (), p.rho0)
    axes = tuple(tuple(m.outcomes) for m in ket) + tuple(tuple(m.outcomes) for m in bra)
    return QuasiDistribution("kd_doubled", axes, values, ket_axes=p.n_times)


def lvn(p: MultiTimeProcess, s: Sequence[ProjectiveMeasurement]) -> QuasiDistribution:
    """Sequential collapse probabilities Tr[Π_{bn}E_n(...Π_{b0}ρΠ_{b0}...)Π_{bn}]."""
    _check_schedule(p, s)
    n = p.n_steps
    values = np.zeros(tuple(len(m.outcomes) for m in s), dtype=np.complex128)

    def rec(k: int, idx: tuple, state: np.ndarray):
        for i, o in enumerate(s[k].outcomes):
            y = o.projector @ state @ o.projector
            if k == n:
                values[idx + (i,)] = np.trace(y)
            else:
                rec(k + 1, idx + (i,), apply_channel(p.channels[k], y))

    rec(0, (), p.rho0)
    return QuasiDistribution("lvn", tuple(tuple(m.outcomes) for m in s), values)


def mh_from_kd(q: QuasiDistribution) -> QuasiDistribution:
    """Entrywise real part; the symmetrized (Margenau-Hill) distribution."""
    if q.kind not in ("kd_right", "kd_left", "kd_doubled"):
        raise ValidationError(f"mh_from_kd expects a kd kind, got {q.kind!r}")
    kind = "mh_doubled" if q.kind == "kd_doubled" else "mh"
    return QuasiDistribution(kind, q.axes, q.values.real.astype(np.complex128), ket_axes=q.ket_axes)


def marginalize(q: QuasiDistribution, keep: Sequence[int]) -> QuasiDistribution:
    """Sum out every axis not in ``keep``; kind is preserved."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValidationError("marginalize needs a nonempty keep set")
    if keep[0] < 0 or keep[-1] >= len(q.axes):
        raise ValidationError(f"keep axes {keep} out of range")
    drop = tuple(i for i in range(len(q.axes)) if i not in keep)
    values = q.values.sum(axis=drop) if drop else q.values.copy()
    axes = tuple(q.axes[i] for i in keep)
    ket_axes = sum(1 for i in keep if i < q.ket_axes)
    return QuasiDistribution(q.kind, axes, values, ket_axes=ket_axes)


def coarse_grain(q: QuasiDistribution, partition: Sequence[Sequence[tuple]]) -> QuasiDistribution:
    """Merge full outcome-index tuples into the cells of a partition.

    ``partition`` lists cells of index tuples (one index per axis); the cells
    must be disjoint and cover the whole outcome grid. The result is a
    single-axis distribution whose outcomes are the cell positions.
    """
    cells = [set(map(tuple, cell)) for cell in partition]
    seen: set = set()
    for cell in cells:
        if cell & seen:
            raise ValidationError("partition cells overlap")
        seen |= cell
    every = set(np.ndindex(q.values.shape))
    if seen != every:
        raise ValidationError("partition does not cover the outcome grid")
    values = np.array([sum(q.values[t] for t in sorted(cell)) for cell in cells],
                      dtype=np.complex128)
    axis = tuple(Outcome(value=float(i), projector=None, label=i) for i in range(len(cells)))
    return QuasiDistribution(q.kind, (axis,), values, ket_axes=0)


def nonclassicality(q: QuasiDistribution, variant: str = "linear") -> float:
    """Σ|Q| − 1 ("linear") or log Σ|Q| ("log"); zero iff Q is a probability table."""
    s = float(np.sum(np.abs(q.values)))
    if variant == "linear":
        return s - 1.0
    if variant == "log":
        return float(np.log(s))
    raise ValidationError(f"unknown nonclassicality variant {variant!r}")


@dataclass(frozen=True)
class JointMeasurementOperators:
    """Heisenberg-picture operators on H_{t0} whose traces against ρ give Q."""

    kind: str
    axes: tuple[tuple[Outcome, ...], ...]
    ops: dict[tuple, np.ndarray]
    ket_axes: int = 0

    def matrix(self, idx: Sequence[int]) -> np.ndarray:
        return self.ops[tuple(idx)]


def joint_ops(p: MultiTimeProcess, s: Sequence[ProjectiveMeasurement], kind: str = "kd_right",
              bra: Sequence[ProjectiveMeasurement] | None = None) -> JointMeasurementOperators:
    """Back-evolve the schedule into joint operators at t_0.

    right: M = Π_{b0}·E_1†(Π_{b1}·E_2†(...E_n†(Π_{bn})));
    left:  the daggered products (ket-side insertions);
    doubled: two-sided, Π_{bk}·(...)·Π_{ak} at every step (pass ``bra``).
    Requires a square chain so all operators live on one space.
    """
    if any(c.d_in != c.d_out for c in p.channels):
        raise ValidationError("joint_ops needs square channels")
    if kind == "kd_doubled":
        ket = s
        if bra is None:
            raise ValidationError("doubled joint_ops needs a bra schedule")
        _check_schedule(p, ket, "ket schedule")
        _check_schedule(p, bra, "bra schedule")
    else:
        if kind not in ("kd_right", "kd_left"):
            raise ValidationError(f"joint_ops kind must be kd_right/kd_left/kd_doubled, got {kind!r}")
        _check_schedule(p, s)
    n = p.n_steps
    ops: dict[tuple, np.ndarray] = {}

    if kind == "kd_doubled":
        def rec(k: int, kidx: tuple, bidx: tuple, a: np.ndarray):
            if k == 0:
                ops[tuple(reversed(kidx)) + tuple(reversed(bidx))] = a
                return
            back = adjoint_apply(p.channels[k - 1], a)
            for i, oa in enumerate(ket[k - 1].outcomes):
                for j, ob in enumerate(bra[k - 1].outcomes):
                    rec(k - 1, kidx + (i,), bidx + (j,), ob.projector @ back @ oa.projector)

        for i, oa in enumerate(ket[n].outcomes):
            for j, ob in enumerate(bra[n].outcomes):
                rec(n, (i,), (j,), ob.projector @ oa.projector)
        axes = tuple(tuple(m.outcomes) for m in ket) + tuple(tuple(m.outcomes) for m in bra)
        out = JointMeasurementOperators("kd_doubled", axes, ops, ket_axes=p.n_times)
    else:
        right = kind == "kd_right"

        def rec(k: int, idx: tuple, a: np.ndarray):
            if k == 0:
                ops[tuple(reversed(idx))] = a
                return
            back = adjoint_apply(p.channels[k - 1], a)
            for i, o in enumerate(s[k - 1].outcomes):
                rec(k - 1, idx + (i,), o.projector @ back if right else back @ o.projector)

        for i, o in enumerate(s[n].outcomes):
            rec(n, (i,), o.projector)
        out = JointMeasurementOperators(kind, tuple(tuple(m.outcomes) for m in s), ops)

    d0 = p.dims[0]
    total = sum(ops.values())
    if max_abs(total - np.eye(d0)) > 1e-10:
        raise ValidationError("joint operators do not sum to the identity")
    return out


@dataclass(frozen=True)
class WitnessReport:
    """Nonclassicality next to the commutator structure that licenses it."""

    nonclassicality: float
    max_commutator_norm: float
    worst_pair: tuple | None


def classicality_witness(p: MultiTimeProcess, s: Sequence[ProjectiveMeasurement]) -> WitnessReport:
    """Evaluate Σ|Q|−1 of kd_right and the largest commutator among the
    back-evolved measurement operators.

    Checks [M_{b_n..b_1}, Π_{b0}] over all outcome tuples; when every step is
    unitary, also all pairs of single-time back-evolved projectors. A strictly
    positive nonclassicality implies some pair fails to commute; the converse
    does not hold for a fixed initial state.
    """
    if any(c.d_in != c.d_out for c in p.channels):
        raise ValidationError("classicality_witness needs square channels")
    _check_schedule(p, s)
    n = p.n_steps
    value = nonclassicality(kd_right(p, s))

    best = 0.0
    pair: tuple | None = None

    def consider(norm: float, a_desc, b_desc):
        nonlocal best, pair
        if norm > best or pair is None:
            best = norm
            pair = (a_desc, b_desc)

    if n >= 1:
        later: dict[tuple, np.ndarray] = {}

        def rec(k: int, idx: tuple, a: np.ndarray):
            if k == 1:
                later[tuple(reversed(idx))] = adjoint_apply(p.channels[0], a)
                return
            back = adjoint_apply(p.channels[k - 1], a)
            for i, o in enumerate(s[k - 1].outcomes):
                rec(k - 1, idx + (i,), o.projector @ back)

        for i, o in enumerate(s[n].outcomes):
            rec(n, (i,), o.projector)

        times_later = tuple(range(1, n + 1))
        for idx, m_later in later.items():
            labels_later = tuple(s[k].outcomes[i].label for k, i in zip(times_later, idx))
            for o in s[0].outcomes:
                norm = spectral_norm(m_later @ o.projector - o.projector @ m_later)
                consider(norm, (times_later, labels_later), ((0,), (o.label,)))

    unitary_steps = all(
        len(c.kraus) == 1 and max_abs(dagger(c.kraus[0]) @ c.kraus[0] - np.eye(c.d_in)) <= 1e-9
        for c in p.channels)
    if unitary_steps and n >= 1:
        single: list[list[tuple[object, np.ndarray]]] = []
        for k in range(n + 1):
            row = []
            for o in s[k].outcomes:
                m = o.projector
                for c in reversed(p.channels[:k]):
                    m = adjoint_apply(c, m)
                row.append((o.label, m))
            single.append(row)
        for k, l in itertools.combinations(range(n + 1), 2):
            for la, ma in single[k]:
                for lb, mb in single[l]:
                    norm = spectral_norm(ma @ mb - mb @ ma)
                    consider(norm, ((k,), (la,)), ((l,), (lb,)))

    return WitnessReport(nonclassicality=value, max_commutator_norm=best, worst_pair=pair)


def weak_value(a: np.ndarray, pre_state: np.ndarray, post_state: np.ndarray) -> complex:
    """⟨post|A|pre⟩ / ⟨post|pre⟩; undefined for orthogonal pre/post selections."""
    a = as_matrix(a)
    pre = np.asarray(pre_state, dtype=np.complex128).reshape(-1)
    post = np.asarray(post_state, dtype=np.complex128).reshape(-1)
    overlap = complex(np.vdot(post, pre))
    if abs(overlap) <= 1e-12:
        raise ValidationError("weak value undefined: pre and post selections are orthogonal")
    return complex(np.vdot(post, a @ pre)) / overlap


def extended_kd(rho: np.ndarray, m: ProjectiveMeasurement, instrument: Instrument) -> QuasiDistribution:
    """Joint quasiprobability of a projective outcome and an instrument branch:
    Q(b, k) = Tr[M_k(ρ Π_b)], the bra-side insertion at a single time."""
    rho = check_density(rho)
    if m.dim != rho.shape[0]:
        raise ValidationError("measurement dim does not match the state")
    values = np.zeros((len(m.outcomes), len(instrument.branches)), dtype=np.complex128)
    for i, o in enumerate(m.outcomes):
        x = rho @ o.projector
        for k, (_, ops) in enumerate(instrument.branches):
            values[i, k] = np.trace(sum(e @ x @ dagger(e) for e in ops))
    branch_axis = tuple(
        Outcome(value=float(k), projector=None, label=label)
        for k, (label, _) in enumerate(instrument.branches))
    return QuasiDistribution("kd_right", (tuple(m.outcomes), branch_axis), values)


# ---------------------------------------------------------------------------
# seeded generators for test corpora


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian with phase fixing."""
    rng = _rng(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph


def random_density(d: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ dagger(g)
    return rho / np.trace(rho)


def random_pure_state(d: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_hermitian(d: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + dagger(g)) / 2


def random_channel(d: int, seed=None, env_dim: int = 2) -> QuantumChannel:
    """Random CPTP step from a Haar isometry into system ⊗ environment."""
    rng = _rng(seed)
    g = rng.normal(size=(d * env_dim, d)) + 1j * rng.normal(size=(d * env_dim, d))
    v, _ = np.linalg.qr(g)  # (d·env, d) isometry
    kraus = [v[x::env_dim, :] for x in range(env_dim)]
    return QuantumChannel(kraus)


def random_process(d: int, n_steps: int, seed=None, channel_kind: str = "unitary") -> MultiTimeProcess:
    """Seeded process: Haar-unitary steps, random-Kraus steps, or alternating."""
    rng = _rng(seed)
    rho = random_density(d, rng)
    chain = []
    for k in range(n_steps):
        if channel_kind == "unitary" or (channel_kind == "mixed" and k % 2 == 0):
            chain.append(QuantumChannel([haar_unitary(d, rng)]))
        elif channel_kind in ("cptp", "mixed"):
            chain.append(random_channel(d, rng))
        else:
            raise ValidationError(f"unknown channel_kind {channel_kind!r}")
    return MultiTimeProcess(rho, chain)


def random_schedule(dims: Sequence[int], seed=None) -> list[ProjectiveMeasurement]:
    """One random nondegenerate observable measurement per time step."""
    rng = _rng(seed)
    return [spectral_measurement(random_hermitian(d, rng)) for d in dims]
