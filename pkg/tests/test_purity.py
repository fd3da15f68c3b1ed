import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpurity import channels as C
from qpurity import purity as P
from qpurity.linalg import ValidationError
from qpurity.optimize import OptimizerConfig

H_075 = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))


def test_parse_measure():
    assert P.parse_measure("p=inf") == P.Measure("pnorm", math.inf)
    assert P.parse_measure("P=2.5").p == 2.5
    assert str(P.parse_measure("entropy")) == "entropy"
    for bad in ("p=1", "p=0.5", "p=x", "renyi"):
        with pytest.raises(ValidationError):
            P.parse_measure(bad)


@pytest.mark.parametrize("measure,expected", [("p=2", 1.0), ("p=inf", 1.0), ("p=4.5", 1.0),
                                              ("entropy", 0.0), ("mininv", 0.0), ("flat", 1.0)])
def test_identity_channel(measure, expected, cfg):
    assert P.purity(C.identity(3), measure, cfg).value == pytest.approx(expected, abs=1e-9)


def test_depolarizing_examples(cfg):
    phi = C.depolarizing(2, 0.5)
    assert P.nu_p(phi, 2, cfg).value == pytest.approx(math.sqrt(0.5 * 0.25 + 0.5), abs=1e-9)
    assert P.nu_p(C.depolarizing(3, 0.4), math.inf, cfg).value == pytest.approx(1 - 0.4 * 2 / 3, abs=1e-9)
    assert P.nu_entropy(phi, cfg).value == pytest.approx(H_075, abs=1e-9)
    assert P.nu_entropy(C.depolarizing(2, 1), cfg).value == pytest.approx(1.0, abs=1e-9)
    assert P.nu_minus_inf(phi, cfg).value == pytest.approx(0.25, abs=1e-9)
    assert P.nu_minus_inf(C.depolarizing(3, 0.9), cfg).value == pytest.approx(0.3, abs=1e-9)
    assert P.nu_flat(phi, cfg).value == pytest.approx(0.75, abs=1e-9)
    assert P.nu_flat(C.depolarizing(2, 1), cfg).value == pytest.approx(0.5, abs=1e-9)
    assert P.nu_inf_kraus(phi, cfg).value == pytest.approx(0.75, abs=1e-9)
    assert P.nu_inf_kraus(C.identity(2), cfg).value == pytest.approx(1.0, abs=1e-12)


def test_argument_checks(rng, cfg):
    with pytest.raises(ValidationError):
        P.nu_p(C.identity(2), 1.0, cfg)
    with pytest.raises(ValidationError):
        P.nu_flat(C.random_channel(2, rng, rank=2, d_out=3), cfg)
    with pytest.raises(ValidationError):
        P.grid_oracle(C.identity(3), "p=2")


def test_grid_oracle_examples():
    assert P.grid_oracle(C.depolarizing(2, 0.5), "p=2", 200) == pytest.approx(0.790569, abs=1e-3)
    assert P.grid_oracle(C.identity(2), "entropy", 50) == pytest.approx(0.0, abs=1e-6)
    assert P.grid_oracle(C.depolarizing(2, 0.3), "flat", 200) == pytest.approx(0.85, abs=1e-3)


@pytest.mark.parametrize("measure", ["p=2", "p=inf", "p=1.5", "entropy", "mininv", "flat"])
def test_optimizer_beats_grid_on_random_qubit_channels(measure, rng, cfg):
    for rank in (2, 3):
        phi = C.random_channel(2, rng, rank=rank)
        opt = P.purity(phi, measure, cfg).value
        grid = P.grid_oracle(phi, measure, 150)
        sign = 1 if P.parse_measure(measure).maximize else -1
        # the optimizer is at least as good as the grid and the grid is close behind
        assert sign * (opt - grid) >= -1e-9
        assert abs(opt - grid) < 2e-3


@pytest.mark.parametrize("measure", ["p=2", "p=inf", "entropy", "mininv", "flat"])
def test_value_is_achieved_at_argmax(measure, rng, cfg):
    phi = C.random_channel(2, rng, rank=3)
    r = P.purity(phi, measure, cfg)
    assert np.linalg.norm(r.argmax_state) == pytest.approx(1.0)
    assert abs(P.state_value(phi, measure, r.argmax_state) - r.value) < 1e-10
    assert 1 <= r.converged_restarts <= r.restarts


def test_kraus_result_reproduces(rng, cfg):
    phi = C.random_channel(2, rng, rank=3)
    r = P.nu_inf_kraus(phi, cfg)
    assert abs(P.kraus_objective(phi)(r.coefficients)[0] - r.value) < 1e-10
    assert abs(P.state_value(phi, "p=inf", r.argmax_state) - r.value) < 1e-6


def test_value_ranges(rng, cfg):
    phi = C.random_channel(3, rng, rank=4)
    assert 0 < P.nu_p(phi, 2, cfg).value <= 1
    assert 0 <= P.nu_entropy(phi, cfg).value <= math.log2(3)
    assert 0 <= P.nu_minus_inf(phi, cfg).value <= 1 / 3


def test_nu_p_monotone_in_p(rng, cfg):
    phi = C.random_channel(2, rng, rank=3)
    vals = [P.nu_p(phi, p, cfg).value for p in (1.1, 1.5, 2, 3, 6, math.inf)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_kraus_characterization_agrees(seed, rank):
    phi = C.random_channel(2, np.random.default_rng(seed), rank=rank)
    cfg = OptimizerConfig(restarts=8, seed=1)
    assert abs(P.nu_inf_kraus(phi, cfg).value - P.nu_p(phi, math.inf, cfg).value) < 1e-6


@pytest.mark.parametrize("measure", ["p=2", "p=inf", "entropy", "flat"])
def test_identity_tensor_lemma_rank3(measure, rng, cfg):
    for _ in range(2):
        phi = C.random_channel(2, rng, rank=3)
        a = P.purity(phi, measure, cfg).value
        b = P.purity(C.tensor_channel(phi, C.identity(2)), measure, cfg).value
        assert abs(a - b) < 1e-5


def test_identity_tensor_mininv_is_multiplicative(rng, cfg):
    # pure outputs of the identity factor force lambda_min = 0 on the product
    phi = C.random_channel(2, rng, rank=3)
    single = P.nu_minus_inf(phi, cfg).value
    joint = P.nu_minus_inf(C.tensor_channel(phi, C.identity(2)), cfg).value
    assert single > 1e-3
    assert joint == pytest.approx(single * P.nu_minus_inf(C.identity(2), cfg).value, abs=1e-9)


@pytest.mark.parametrize("measure", ["p=2", "p=inf", "entropy", "mininv", "flat"])
def test_product_bounds(measure, rng, cfg):
    phi1, phi2 = C.random_channel(2, rng, rank=3), C.random_channel(2, rng, rank=2)
    m = P.parse_measure(measure)
    v1, v2 = P.purity(phi1, m, cfg).value, P.purity(phi2, m, cfg).value
    joint = P.purity(C.tensor_channel(phi1, phi2), m, cfg).value
    if m.kind == "entropy":
        assert joint <= v1 + v2 + 1e-6
    elif m.kind == "mininv":
        assert joint <= v1 * v2 + 1e-6
    else:
        assert joint >= v1 * v2 - 1e-6


def test_deterministic(rng):
    phi = C.random_channel(2, rng, rank=3)
    cfg = OptimizerConfig(restarts=6, seed=99)
    a, b = P.nu_entropy(phi, cfg), P.nu_entropy(phi, cfg)
    assert a.value == b.value and np.array_equal(a.argmax_state, b.argmax_state)
