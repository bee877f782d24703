import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from twinparity import InvalidParameter, PdcSource, ZeroHeraldProbability
from twinparity.channels import CLICK, DetectorModel
from twinparity.fock import JointDistribution, pdc_joint, pdc_weights
from twinparity.herald import HeraldSpec, herald_probability, herald_source, heralded_state, preparation_probability
from twinparity.moments import factorial_moment, parity

PNR = "pnr"


def _spec(kind, eta, condition=1, arm="idler"):
    return HeraldSpec(DetectorModel(kind, eta), condition, arm)


def test_ideal_sm_herald_gives_single_photon():
    state = heralded_state(pdc_joint(PdcSource("sm", 0.5)), _spec(PNR, 1.0))
    assert state.probs[1] == 1.0
    assert state.probs.sum() - state.probs[1] == 0.0


def test_low_efficiency_mm_g2():
    mu, eta = 0.086, 0.02
    n_max = 30
    w = oracles.poisson(mu, n_max)
    p = oracles.normalize([w[N] * N * eta * (1 - eta) ** (N - 1) if N else 0.0 for N in range(n_max + 1)])
    expected = oracles.g_m(p, 2)
    state = heralded_state(pdc_joint(PdcSource("mm", mu)), _spec(PNR, eta))
    assert factorial_moment(state, 2) == pytest.approx(expected, abs=1e-12)
    # the eta -> 0 limit (2 mu + mu^2) / (1 + mu)^2 = 0.1521 is approached from below
    assert (2 * mu + mu**2) / (1 + mu) ** 2 == pytest.approx(0.152, abs=5e-4)
    assert expected == pytest.approx(0.152, abs=3e-3)


def test_bucket_ideal_click_removes_vacuum():
    src = PdcSource("sm", 1.0)
    state = heralded_state(pdc_joint(src), _spec("bucket", 1.0, CLICK))
    w = pdc_weights(src).probs
    expected = np.r_[0.0, w[1:]] / w[1:].sum()
    assert state.probs[0] == 0.0
    np.testing.assert_allclose(state.probs, expected, atol=1e-15)


def test_herald_probability_examples():
    assert herald_probability(pdc_joint(PdcSource("sm", 1.0)), _spec(PNR, 1.0)) == pytest.approx(0.25, abs=1e-12)
    assert herald_probability(pdc_joint(PdcSource("mm", 0.7)), _spec("bucket", 0.0, CLICK)) == 0.0
    expected = sum(math.exp(-1) / math.factorial(N) * N * 0.5 * 0.5 ** (N - 1) for N in range(1, 60))
    assert herald_probability(pdc_joint(PdcSource("mm", 1.0)), _spec(PNR, 0.5)) == pytest.approx(expected, abs=1e-12)


def test_preparation_probability_examples():
    assert preparation_probability(PdcSource("mm", 1.0), 1.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert preparation_probability(PdcSource("sm", 2.0), 0.0) == 0.0
    assert preparation_probability(PdcSource("sm", 1.0), 0.5) == pytest.approx(0.125, abs=1e-15)


def test_zero_herald_probability_raises():
    with pytest.raises(ZeroHeraldProbability):
        heralded_state(pdc_joint(PdcSource("mm", 0.5)), _spec(PNR, 0.0))


def test_herald_spec_validation():
    with pytest.raises(InvalidParameter):
        _spec("bucket", 0.5, 1)
    with pytest.raises(InvalidParameter):
        _spec(PNR, 0.5, CLICK)
    with pytest.raises(InvalidParameter):
        _spec(PNR, 0.5, 1, "both")


def test_herald_arms_are_mirrored():
    rng = np.random.default_rng(3)
    P = JointDistribution.from_weights(rng.random((5, 7)))
    Pt = JointDistribution(P.probs.T.copy())
    a = heralded_state(P, _spec(PNR, 0.6, 1, "idler"))
    b = heralded_state(Pt, _spec(PNR, 0.6, 1, "signal"))
    np.testing.assert_allclose(a.probs, b.probs, atol=1e-15)


def test_herald_condition_beyond_cutoff_has_zero_probability():
    joint = pdc_joint(PdcSource("mm", 0.01), n_max=3)
    assert herald_probability(joint, _spec(PNR, 1.0, 5)) == 0.0


def test_herald_probability_equals_preparation_at_unit_efficiency():
    for regime in ("sm", "mm"):
        src = PdcSource(regime, 0.8)
        assert herald_probability(pdc_joint(src), _spec(PNR, 1.0)) == pytest.approx(preparation_probability(src, 1.0), abs=1e-12)


def test_herald_probability_exceeds_preparation_below_unit_efficiency():
    src = PdcSource("mm", 0.8)
    assert herald_probability(pdc_joint(src), _spec(PNR, 0.4)) > preparation_probability(src, 0.4)


@pytest.mark.parametrize("mu", [0.2, 0.5, 1.0])
def test_pnr_beats_bucket_at_high_efficiency(mu):
    joint = pdc_joint(PdcSource("mm", mu))
    for eta in (0.7, 0.85, 1.0):
        g_pnr = factorial_moment(heralded_state(joint, _spec(PNR, eta)), 2)
        g_bucket = factorial_moment(heralded_state(joint, _spec("bucket", eta, CLICK)), 2)
        assert g_pnr <= g_bucket


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["sm", "mm"]), st.floats(0.01, 3.0))
def test_ideal_herald_parity_minus_one(regime, mu):
    state = herald_source(PdcSource(regime, mu), DetectorModel(PNR, 1.0))
    assert factorial_moment(state, 2) == 0.0
    assert parity(state) == -1.0


@pytest.mark.parametrize("kind,cond", [(PNR, 1), ("bucket", CLICK)])
@pytest.mark.parametrize("eta", [0.05, 0.5, 1.0])
def test_low_power_limit(kind, cond, eta):
    values = [factorial_moment(herald_source(PdcSource("mm", mu), DetectorModel(kind, eta), cond), 2) for mu in (1e-2, 1e-3, 1e-4)]
    assert values[0] >= values[1] >= values[2]
    assert values[2] < 1e-3
