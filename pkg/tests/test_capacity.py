import math

import numpy as np
import pytest

from qpurity import capacity as K
from qpurity import channels as C
from qpurity import linalg
from qpurity.linalg import ValidationError
from qpurity.optimize import OptimizerConfig

H_075 = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
FAST = OptimizerConfig(restarts=3, seed=5)


def test_holevo_examples():
    e0 = np.array([1, 0])
    e1 = np.array([0, 1])
    single = K.EnsembleState([1.0], [e0])
    assert K.holevo_quantity(C.depolarizing(2, 0.3), single) == pytest.approx(0, abs=1e-12)
    pair = K.EnsembleState([0.5, 0.5], [e0, e1])
    assert K.holevo_quantity(C.identity(2), pair) == pytest.approx(1.0)
    # outputs diag(.75,.25) and diag(.25,.75) average to I/2
    assert K.holevo_quantity(C.depolarizing(2, 0.5), pair) == pytest.approx(1 - H_075, abs=1e-12)
    assert 1 - H_075 == pytest.approx(0.188722, abs=1e-6)


def test_holevo_dimension_mismatch():
    with pytest.raises(ValidationError):
        K.holevo_quantity(C.identity(3), K.EnsembleState([1.0], [np.array([1, 0])]))


def test_ensemble_validation():
    with pytest.raises(ValidationError):
        K.EnsembleState([0.5, 0.6], [[1, 0], [0, 1]])
    with pytest.raises(ValidationError):
        K.EnsembleState([0.5, 0.5], [[1, 1], [0, 1]])
    with pytest.raises(ValidationError):
        K.EnsembleState([1.0], [[1, 0], [0, 1]])


def test_holevo_permutation_and_pruning(rng):
    phi = C.random_channel(2, rng, rank=3)
    states = np.stack([linalg.random_pure(2, rng) for _ in range(4)])
    p = rng.dirichlet(np.ones(4))
    base = K.holevo_quantity(phi, K.EnsembleState(p, states))
    perm = rng.permutation(4)
    assert abs(K.holevo_quantity(phi, K.EnsembleState(p[perm], states[perm])) - base) < 1e-12
    padded = K.EnsembleState(np.append(p, 0.0), np.vstack([states, linalg.random_pure(2, rng)]))
    assert abs(K.holevo_quantity(phi, padded) - base) < 1e-12
    assert padded.pruned().size == 4


def test_capacity_examples():
    ident = K.capacity(C.identity(2), FAST)
    assert ident.value == pytest.approx(1.0, abs=1e-6)
    # two orthogonal states carry all the weight
    s = ident.ensemble
    gram = np.abs(s.states.conj() @ s.states.T) ** 2
    assert ident.ensemble.size >= 2
    assert ident.method == "ensemble-opt"
    dep = K.capacity(C.depolarizing(2, 0.5), FAST)
    assert dep.value == pytest.approx(1 - H_075, abs=1e-4)
    assert K.capacity(C.depolarizing(2, 1.0), FAST).value == pytest.approx(0, abs=1e-9)
    assert np.all(gram <= 1 + 1e-9)


def test_identity_capacity_ensemble_is_orthogonal_pair():
    r = K.capacity(C.identity(2), FAST)
    # chi = 1 forces the average output I/2 and pure members; check the average
    avg = sum(p * linalg.projector(v) for p, v in zip(r.ensemble.probabilities, r.ensemble.states))
    assert np.allclose(avg, np.eye(2) / 2, atol=1e-4)


def test_upper_bound_examples():
    assert K.capacity_upper_bound(C.identity(2), 0.0) == 1.0
    assert K.capacity_upper_bound(C.depolarizing(2, 0.5), H_075) == pytest.approx(0.188722, abs=1e-6)
    from qpurity.purity import nu_entropy
    phi = C.depolarizing(3, 0.4)
    nh = nu_entropy(phi, FAST).value
    assert K.capacity_upper_bound(phi, nh) == pytest.approx(math.log2(3) - nh)


def test_binary_bistochastic_examples():
    r = K.capacity_binary_bistochastic(C.depolarizing(2, 0.5), FAST)
    assert r.value == pytest.approx(0.188722, abs=1e-6)
    a, b = r.ensemble.states
    assert abs(np.vdot(a, b)) < 1e-12
    assert K.holevo_quantity(C.depolarizing(2, 0.5), r.ensemble) == pytest.approx(r.value, abs=1e-9)
    assert K.capacity_binary_bistochastic(C.identity(2), FAST).value == pytest.approx(1.0)
    assert K.capacity_binary_bistochastic(C.depolarizing(2, 0.0), FAST).value == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        K.capacity_binary_bistochastic(C.amplitude_damping(0.3), FAST)
    with pytest.raises(ValidationError):
        K.capacity_binary_bistochastic(C.depolarizing(3, 0.3), FAST)


def test_capacity_below_upper_bound(rng):
    for phi in (C.random_channel(2, rng, rank=2), C.random_channel(2, rng, rank=3), C.amplitude_damping(0.4)):
        r = K.capacity(phi, FAST)
        assert 0 <= r.value <= r.upper_bound + 1e-6
        assert r.upper_bound <= math.log2(phi.dim_out) + 1e-9


def test_general_optimizer_recovers_binary_formula():
    for p in (0.2, 0.7):
        phi = C.depolarizing(2, p)
        assert abs(K.capacity(phi, FAST).value - K.capacity_binary_bistochastic(phi, FAST).value) <= 1e-4


def test_amplitude_damping_reference_value():
    # brute-force chi over real two-state ensembles
    phi = C.amplitude_damping(0.5)
    t = np.linspace(-np.pi, np.pi, 121)
    psis = np.stack([np.cos(t / 2), np.sin(t / 2)], axis=1)
    outs = np.stack([phi(linalg.projector(v)) for v in psis])
    ent = np.array([linalg.entropy(o) for o in outs])
    best = 0.0
    for q in np.linspace(0.05, 0.95, 37):
        avg = q * outs[:, None] + (1 - q) * outs[None, :]
        w = np.clip(np.linalg.eigvalsh(avg), 1e-300, 1)
        h_avg = -np.sum(w * np.log2(w), axis=-1)
        chi = h_avg - q * ent[:, None] - (1 - q) * ent[None, :]
        best = max(best, float(chi.max()))
    r = K.capacity(phi, FAST)
    assert r.value >= best - 1e-9
    assert r.value - best < 5e-3


def test_super_additivity_seeded(rng):
    phi1, phi2 = C.depolarizing(2, 0.4), C.random_channel(2, rng, rank=2)
    c1, c2 = K.capacity(phi1, FAST).value, K.capacity(phi2, FAST).value
    joint = K.capacity(C.tensor_channel(phi1, phi2), OptimizerConfig(restarts=1, seed=5, max_iters=50),
                       with_bound=False)
    assert joint.value >= c1 + c2 - 1e-4


def test_monotone_in_depolarizing_noise():
    vals = [K.capacity(C.depolarizing(2, p), FAST).value for p in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


def test_product_ensemble():
    e = K.EnsembleState([0.5, 0.5], [[1, 0], [0, 1]])
    f = K.EnsembleState([1.0], [[0, 1, 0]])
    pe = K.product_ensemble(e, f)
    assert pe.size == 2 and pe.states.shape == (2, 6)
    assert np.allclose(pe.states[1], np.kron([0, 1], [0, 1, 0]))
