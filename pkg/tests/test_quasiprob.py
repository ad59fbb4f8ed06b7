from __future__ import annotations

import numpy as np
import pytest  # type: ignore

import tkd
from tkd import ValidationError
from tkd.linops import max_abs
from conftest import corpus

SQRT2 = np.sqrt(2.0)


def test_process_validation():
    with pytest.raises(ValidationError):
        tkd.MultiTimeProcess(np.eye(2))  # trace 2
    rho = np.eye(2) / 2
    with pytest.raises(ValidationError):  # non-TP step
        tkd.MultiTimeProcess(rho, [tkd.QuantumChannel([np.eye(2) / 2])])
    with pytest.raises(ValidationError):  # dim mismatch along the chain
        tkd.MultiTimeProcess(rho, [tkd.identity_channel(3)])
    p = tkd.MultiTimeProcess(rho, [tkd.identity_channel(2)])
    assert p.n_steps == 1 and p.n_times == 2 and p.dims == (2, 2)


def test_state_at(pauli):
    rho = tkd.projector(tkd.basis_state(2, 0))
    p = tkd.MultiTimeProcess(rho, [tkd.build_channel("unitary", u=pauli["X"])])
    assert max_abs(p.state_at(0) - rho) == 0.0
    assert max_abs(p.state_at(1) - tkd.projector(tkd.basis_state(2, 1))) < 1e-14
    with pytest.raises(ValidationError):
        p.state_at(2)


def test_sub_process_composes_channels():
    p = tkd.random_process(2, 3, seed=3, channel_kind="mixed")
    sub = tkd.sub_process(p, [1, 3])
    assert sub.n_times == 2
    assert max_abs(sub.rho0 - p.state_at(1)) < 1e-12
    rho3 = tkd.apply_channel(sub.channels[0], sub.rho0)
    assert max_abs(rho3 - p.state_at(3)) < 1e-12
    with pytest.raises(ValidationError):
        tkd.sub_process(p, [])
    with pytest.raises(ValidationError):
        tkd.sub_process(p, [0, 5])


def test_xy_qubit_closed_form(xy_process):
    p, s = xy_process
    q = tkd.kd_right(p, s)
    # axes ascending in time, outcomes ascending in eigenvalue (-1 first)
    want = np.array([[(1 + 1j), (1 - 1j)], [(1 - 1j), (1 + 1j)]]) / 4
    assert max_abs(q.values - want) < 1e-12
    assert abs(tkd.nonclassicality(q) - (SQRT2 - 1)) < 1e-12
    assert abs(tkd.nonclassicality(q, variant="log") - np.log(SQRT2)) < 1e-12


def test_hadamard_zz_is_classical(pauli):
    h = np.array([[1, 1], [1, -1]]) / SQRT2
    p = tkd.MultiTimeProcess(tkd.projector(tkd.basis_state(2, 0)),
                             [tkd.build_channel("unitary", u=h)])
    s = [tkd.spectral_measurement(pauli["Z"])] * 2
    q = tkd.kd_right(p, s)
    want = np.array([[0.0, 0.0], [0.5, 0.5]])  # z0=+1 row splits evenly
    assert max_abs(q.values - want) < 1e-12
    assert tkd.nonclassicality(q) < 1e-12


@pytest.mark.parametrize("case", range(10))
def test_left_is_conjugate_of_right(case):
    p, s = corpus(10)[case]
    ql = tkd.kd_left(p, s)
    qr = tkd.kd_right(p, s)
    assert max_abs(ql.values - np.conj(qr.values)) < 1e-12


@pytest.mark.parametrize("case", range(6))
def test_doubled_block_sums_and_diagonal(case):
    p, ket = corpus(6)[case]
    bra = tkd.random_schedule(p.dims, seed=900 + case)
    qd = tkd.kd_doubled(p, ket, bra)
    nt = p.n_times
    assert qd.ket_axes == nt

    ket_sum = qd.values.sum(axis=tuple(range(nt)))
    assert max_abs(ket_sum - tkd.kd_right(p, bra).values) < 1e-12
    bra_sum = qd.values.sum(axis=tuple(range(nt, 2 * nt)))
    assert max_abs(bra_sum - tkd.kd_left(p, ket).values) < 1e-12

    # equal schedules on both sides: the diagonal is the collapse distribution
    qd2 = tkd.kd_doubled(p, ket, ket)
    diag = np.array([qd2.values[idx + idx] for idx in np.ndindex(tkd.kd_right(p, ket).values.shape)])
    assert max_abs(diag - tkd.lvn(p, ket).values.reshape(-1)) < 1e-12


def test_lvn_is_a_probability_distribution():
    p, s = corpus(1, start=3)[0]
    q = tkd.lvn(p, s)
    assert q.kind == "lvn"
    assert max_abs(q.values.imag) < 1e-14
    assert q.values.real.min() > -1e-14
    assert abs(q.total() - 1.0) < 1e-12


def test_mh_from_kd():
    p, s = corpus(1, start=1)[0]
    q = tkd.kd_right(p, s)
    m = tkd.mh_from_kd(q)
    assert m.kind == "mh"
    assert max_abs(m.values - q.values.real) < 1e-15
    with pytest.raises(ValidationError):
        tkd.mh_from_kd(m)


def test_distribution_validation():
    ax = (tkd.Outcome(1.0, None, "a"), tkd.Outcome(-1.0, None, "b"))
    with pytest.raises(ValidationError):  # does not sum to 1
        tkd.QuasiDistribution("kd_right", (ax,), np.array([0.5, 0.4]))
    with pytest.raises(ValidationError):  # unknown kind
        tkd.QuasiDistribution("weird", (ax,), np.array([0.5, 0.5]))
    with pytest.raises(ValidationError):  # ket block on a single-sided kind
        tkd.QuasiDistribution("kd_right", (ax,), np.array([0.5, 0.5]), ket_axes=1)
    with pytest.raises(ValidationError):  # lvn must be real
        tkd.QuasiDistribution("lvn", (ax,), np.array([0.5 + 0.1j, 0.5 - 0.1j]))
    with pytest.raises(ValidationError):  # lvn must be nonnegative
        tkd.QuasiDistribution("lvn", (ax,), np.array([1.5, -0.5]))
    q = tkd.QuasiDistribution("kd_right", (ax,), np.array([0.75, 0.25]))
    assert q.axis_labels(0) == ("a", "b")
    assert np.allclose(q.axis_values(0), [1.0, -1.0])


@pytest.mark.parametrize("case", range(5))
def test_marginal_matches_sub_process(case):
    # restriction consistency: summing axes out equals evaluating the shorter chain
    p = tkd.random_process(2, 3, seed=700 + case, channel_kind="mixed")
    s = tkd.random_schedule(p.dims, seed=800 + case)
    q = tkd.kd_right(p, s)
    for keep in ([0, 1], [0, 3], [1, 2], [2, 3], [0, 2], [1, 3]):
        got = tkd.marginalize(q, keep)
        assert got.kind == "kd_right"
        sub = tkd.kd_right(tkd.sub_process(p, keep), [s[k] for k in keep])
        assert max_abs(got.values - sub.values) < 1e-12


def test_marginalize_doubled_ket_axes():
    p, ket = corpus(1)[0]
    bra = tkd.random_schedule(p.dims, seed=44)
    qd = tkd.kd_doubled(p, ket, bra)
    nt = p.n_times
    bra_only = tkd.marginalize(qd, keep=list(range(nt, 2 * nt)))
    assert bra_only.kind == "kd_doubled" and bra_only.ket_axes == 0
    assert max_abs(bra_only.values - tkd.kd_right(p, bra).values) < 1e-12
    first_pair = tkd.marginalize(qd, keep=[0, nt])
    assert first_pair.ket_axes == 1
    with pytest.raises(ValidationError):
        tkd.marginalize(qd, keep=[])


def test_coarse_grain():
    p, s = corpus(1, start=2)[0]
    q = tkd.kd_right(p, s)
    idx = list(np.ndindex(q.values.shape))
    cells = [idx[:3], idx[3:]]
    g = tkd.coarse_grain(q, cells)
    assert g.values.shape == (2,)
    assert abs(g.values[0] - sum(q.values[t] for t in idx[:3])) < 1e-14
    assert tkd.nonclassicality(g) <= tkd.nonclassicality(q) + 1e-12
    with pytest.raises(ValidationError):  # overlap
        tkd.coarse_grain(q, [idx, idx[:1]])
    with pytest.raises(ValidationError):  # not a cover
        tkd.coarse_grain(q, [idx[:3]])


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_nonclassicality_convex_in_state(lam):
    chain = [tkd.QuantumChannel([tkd.haar_unitary(2, seed=5)])]
    s = tkd.random_schedule((2, 2), seed=6)
    r1 = tkd.random_density(2, seed=7)
    r2 = tkd.random_density(2, seed=8)
    n1 = tkd.nonclassicality(tkd.kd_right(tkd.MultiTimeProcess(r1, chain), s))
    n2 = tkd.nonclassicality(tkd.kd_right(tkd.MultiTimeProcess(r2, chain), s))
    mix = tkd.MultiTimeProcess(lam * r1 + (1 - lam) * r2, chain)
    nm = tkd.nonclassicality(tkd.kd_right(mix, s))
    assert nm <= lam * n1 + (1 - lam) * n2 + 1e-10


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_nonclassicality_convex_in_channel(lam):
    rho = tkd.random_density(2, seed=9)
    s = tkd.random_schedule((2, 2), seed=10)
    c1 = tkd.QuantumChannel([tkd.haar_unitary(2, seed=11)])
    c2 = tkd.random_channel(2, seed=12)
    n1 = tkd.nonclassicality(tkd.kd_right(tkd.MultiTimeProcess(rho, [c1]), s))
    n2 = tkd.nonclassicality(tkd.kd_right(tkd.MultiTimeProcess(rho, [c2]), s))
    mixed = tkd.MultiTimeProcess(rho, [tkd.mix_channels(c1, c2, lam)])
    nm = tkd.nonclassicality(tkd.kd_right(mixed, s))
    assert nm <= lam * n1 + (1 - lam) * n2 + 1e-10


@pytest.mark.parametrize("case", range(5))
def test_nonclassicality_monotone_under_marginalization(case):
    p, s = corpus(5)[case]
    q = tkd.kd_right(p, s)
    full = tkd.nonclassicality(q)
    assert full >= -1e-12
    for k in range(p.n_times):
        assert tkd.nonclassicality(tkd.marginalize(q, [k])) <= full + 1e-10


def test_nonclassicality_faithful():
    for p, s in corpus(8):
        q = tkd.kd_right(p, s)
        if tkd.nonclassicality(q) <= 1e-12:
            assert q.values.real.min() > -1e-6
            assert max_abs(q.values.imag) < 1e-6


@pytest.mark.parametrize("case", range(3))
def test_nonclassicality_product_rule(case):
    p1 = tkd.random_process(2, 1 + case % 2, seed=100 + case, channel_kind="mixed")
    p2 = tkd.random_process(2, 1 + case % 2, seed=200 + case, channel_kind="unitary")
    s1 = tkd.random_schedule(p1.dims, seed=300 + case)
    s2 = tkd.random_schedule(p2.dims, seed=400 + case)
    n1 = tkd.nonclassicality(tkd.kd_right(p1, s1))
    n2 = tkd.nonclassicality(tkd.kd_right(p2, s2))
    q12 = tkd.kd_right(tkd.tensor_process(p1, p2), tkd.tensor_schedule(s1, s2))
    n12 = tkd.nonclassicality(q12)
    assert abs(n12 - (n1 * n2 + n1 + n2)) < 1e-10
    lg = tkd.nonclassicality(q12, variant="log")
    lg1 = tkd.nonclassicality(tkd.kd_right(p1, s1), variant="log")
    lg2 = tkd.nonclassicality(tkd.kd_right(p2, s2), variant="log")
    assert abs(lg - lg1 - lg2) < 1e-10


def test_nonclassicality_variant_validation(xy_process):
    p, s = xy_process
    with pytest.raises(ValidationError):
        tkd.nonclassicality(tkd.kd_right(p, s), variant="cubic")


@pytest.mark.parametrize("case", range(6))
def test_joint_ops_reproduce_distributions(case):
    p, s = corpus(6, start=4)[case]
    qr = tkd.kd_right(p, s)
    ops = tkd.joint_ops(p, s, kind="kd_right")
    for idx in np.ndindex(qr.values.shape):
        got = np.trace(ops.matrix(idx) @ p.rho0)
        assert abs(got - qr.values[idx]) < 1e-12
    ql = tkd.kd_left(p, s)
    opsl = tkd.joint_ops(p, s, kind="kd_left")
    for idx in np.ndindex(ql.values.shape):
        assert abs(np.trace(opsl.matrix(idx) @ p.rho0) - ql.values[idx]) < 1e-12


def test_joint_ops_doubled():
    p, ket = corpus(1, start=1)[0]
    bra = tkd.random_schedule(p.dims, seed=55)
    qd = tkd.kd_doubled(p, ket, bra)
    ops = tkd.joint_ops(p, ket, kind="kd_doubled", bra=bra)
    assert ops.ket_axes == p.n_times
    for idx in np.ndindex(qd.values.shape):
        assert abs(np.trace(ops.matrix(idx) @ p.rho0) - qd.values[idx]) < 1e-12
    with pytest.raises(ValidationError):
        tkd.joint_ops(p, ket, kind="kd_doubled")
    with pytest.raises(ValidationError):
        tkd.joint_ops(p, ket, kind="lvn")


def test_witness_xy_instance(xy_process):
    p, s = xy_process
    rep = tkd.classicality_witness(p, s)
    assert abs(rep.nonclassicality - (SQRT2 - 1)) < 1e-12
    # back-evolved Y projectors against X projectors: norm 1/2 for every pair
    assert abs(rep.max_commutator_norm - 0.5) < 1e-12
    assert rep.worst_pair is not None
    (ta, la), (tb, lb) = rep.worst_pair
    assert set(ta) | set(tb) <= {0, 1}


@pytest.mark.parametrize("case", range(8))
def test_witness_implication(case):
    p, s = corpus(8, start=2)[case]
    rep = tkd.classicality_witness(p, s)
    assert rep.nonclassicality >= -1e-12
    if rep.nonclassicality > 1e-8:
        assert rep.max_commutator_norm > 1e-8


def test_witness_commuting_instance():
    # diagonal state, diagonal unitaries, basis measurements: fully classical
    rng = np.random.default_rng(17)
    probs = rng.random(3)
    rho = np.diag(probs / probs.sum()).astype(np.complex128)
    phases = [np.diag(np.exp(1j * rng.random(3))) for _ in range(2)]
    p = tkd.MultiTimeProcess(rho, [tkd.QuantumChannel([u]) for u in phases])
    s = [tkd.spectral_measurement(np.diag(rng.permutation([1.0, 2.0, 3.0]))) for _ in range(3)]
    rep = tkd.classicality_witness(p, s)
    assert abs(rep.nonclassicality) < 1e-12
    assert rep.max_commutator_norm < 1e-12


def test_weak_value_instance(pauli):
    pre = tkd.basis_state(2, 0)
    post = np.array([1.0, 1.0j]) / SQRT2
    assert abs(tkd.weak_value(pauli["X"], pre, post) - (-1j)) < 1e-12
    with pytest.raises(ValidationError):
        tkd.weak_value(pauli["X"], pre, tkd.basis_state(2, 1))


@pytest.mark.parametrize("seed", range(4))
def test_conditional_kd_mean_is_weak_value(seed):
    # unitary two-time process, pure initial state
    phi = tkd.random_pure_state(2, seed=seed)
    u = tkd.haar_unitary(2, seed=seed + 30)
    p = tkd.MultiTimeProcess(tkd.projector(phi), [tkd.QuantumChannel([u])])
    a = tkd.quasiprob.random_hermitian(2, seed=seed + 60)
    b = tkd.quasiprob.random_hermitian(2, seed=seed + 90)
    s = [tkd.spectral_measurement(a), tkd.spectral_measurement(b)]
    ql = tkd.kd_left(p, s)
    qr = tkd.kd_right(p, s)
    vals0 = ql.axis_values(0)
    for j, out in enumerate(s[1].outcomes):
        prob = ql.values[:, j].sum()
        if abs(prob) < 1e-6:
            continue
        # back-evolve the postselection vector to t0
        w = np.conj(u.T) @ out.projector
        vec = w[:, int(np.argmax(np.linalg.norm(w, axis=0)))]
        vec = vec / np.linalg.norm(vec)
        want = tkd.weak_value(a, phi, vec)
        left_mean = (vals0 * ql.values[:, j]).sum() / prob
        right_mean = (vals0 * qr.values[:, j]).sum() / qr.values[:, j].sum()
        assert abs(left_mean - want) < 1e-10
        assert abs(right_mean - np.conj(want)) < 1e-10


def test_extended_kd_closed_form(pauli):
    rho = np.array([[0.5, -0.5j], [0.5j, 0.5]])
    zero = tkd.projector(tkd.basis_state(2, 0))
    one = tkd.projector(tkd.basis_state(2, 1))
    inst = tkd.Instrument([("0", [zero]), ("1", [one])])
    q = tkd.extended_kd(rho, tkd.spectral_measurement(pauli["X"]), inst)
    want = np.array([[(1 + 1j), (1 - 1j)], [(1 - 1j), (1 + 1j)]]) / 4
    assert max_abs(q.values - want) < 1e-12
    assert abs(tkd.nonclassicality(q) - (SQRT2 - 1)) < 1e-12


def test_extended_kd_marginals(pauli):
    rho = tkd.random_density(2, seed=70)
    k0 = tkd.quasiprob.random_channel(2, seed=71)
    inst = tkd.Instrument([("a", k0.kraus[:1]), ("b", k0.kraus[1:])])
    m = tkd.spectral_measurement(pauli["Z"])
    q = tkd.extended_kd(rho, m, inst)
    # branch marginal: outcome probabilities of the instrument
    for k in range(2):
        want = np.trace(sum(e @ rho @ np.conj(e.T) for e in inst.branches[k][1]))
        assert abs(q.values[:, k].sum() - want) < 1e-12
    # measurement marginal: Born probabilities at the first time
    for i, o in enumerate(m.outcomes):
        assert abs(q.values[i, :].sum() - np.trace(rho @ o.projector)) < 1e-12
