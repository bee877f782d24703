import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from twinparity import InvalidParameter, PdcSource, PhotonDistribution
from twinparity.channels import (
    CLICK,
    NO_CLICK,
    DetectorModel,
    apply_loss,
    apply_loss_joint,
    bucket_povm,
    loss_matrix,
    pnr_povm,
)
from twinparity.fock import mean_photon, pdc_joint, pdc_weights
from twinparity.moments import car, factorial_moment

etas = st.floats(0.0, 1.0)


def test_ideal_pnr_is_projector():
    np.testing.assert_array_equal(pnr_povm(1.0, 1, 5).diag, [0, 1, 0, 0, 0, 0])


def test_pnr_binomial_entry():
    assert pnr_povm(0.5, 1, 4).diag[2] == pytest.approx(0.5, abs=1e-15)


def test_pnr_matches_binomial_oracle():
    d = pnr_povm(0.37, 2, 12).diag
    expected = [oracles.binomial_pmf(2, N, 0.37) for N in range(13)]
    np.testing.assert_allclose(d, expected, rtol=1e-12, atol=1e-300)


def test_pnr_completeness_at_0p6():
    total = sum(pnr_povm(0.6, n, 30).diag for n in range(31))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


def test_bucket_vacuum_never_clicks():
    for eta in (0.0, 0.3, 1.0):
        assert bucket_povm(eta, NO_CLICK, 3).diag[0] == 1.0


def test_bucket_ideal_always_clicks():
    np.testing.assert_array_equal(bucket_povm(1.0, CLICK, 4).diag[1:], 1.0)


def test_bucket_click_enumerated():
    expected = oracles.click_prob_enumerated(0.5, 2)
    assert expected == pytest.approx(0.75)
    assert bucket_povm(0.5, CLICK, 4).diag[2] == pytest.approx(expected, abs=1e-15)
    for N in range(7):
        assert bucket_povm(0.23, CLICK, 6).diag[N] == pytest.approx(oracles.click_prob_enumerated(0.23, N), abs=1e-14)


@pytest.mark.parametrize("eta", [-0.1, 1.5, float("nan")])
def test_efficiency_range_checked(eta):
    with pytest.raises(InvalidParameter):
        pnr_povm(eta, 1, 3)
    with pytest.raises(InvalidParameter):
        bucket_povm(eta, CLICK, 3)
    with pytest.raises(InvalidParameter):
        apply_loss(PhotonDistribution.fock(1), eta)


def test_invalid_outcomes():
    with pytest.raises(InvalidParameter):
        pnr_povm(0.5, 4, 3)
    with pytest.raises(InvalidParameter):
        bucket_povm(0.5, "maybe", 3)
    with pytest.raises(InvalidParameter):
        DetectorModel("spad", 0.5)


def test_zero_efficiency_pnr_element_is_zero():
    assert np.all(pnr_povm(0.0, 1, 10).diag == 0.0)


def test_single_photon_thinning():
    out = apply_loss(PhotonDistribution.fock(1), 0.7)
    np.testing.assert_allclose(out.probs, [0.3, 0.7], atol=1e-15)


def test_unit_efficiency_is_identity():
    d = pdc_weights(PdcSource("sm", 0.9))
    np.testing.assert_allclose(apply_loss(d, 1.0).probs, d.probs, atol=1e-15)


def test_thermal_closed_under_loss():
    d = pdc_weights(PdcSource("sm", 1.0), n_max=80)
    out = apply_loss(d, 0.5)
    expected = oracles.thin(d.probs.tolist(), 0.5)
    np.testing.assert_allclose(out.probs, expected, atol=1e-14)
    # thermal with mean 0.5, up to the cutoff's tail
    np.testing.assert_allclose(out.probs[:20], oracles.thermal(0.5, 19), atol=1e-12)


def test_joint_loss_identity():
    j = pdc_joint(PdcSource("mm", 0.6))
    np.testing.assert_allclose(apply_loss_joint(j, 1.0, 1.0).probs, j.probs, atol=1e-15)


def test_joint_loss_idler_blocked():
    j = apply_loss_joint(pdc_joint(PdcSource("mm", 1.0)), 0.5, 0.0)
    idler = j.idler().probs
    assert idler[0] == pytest.approx(1.0, abs=1e-15)


def test_joint_loss_matches_oracle_and_keeps_car():
    j = pdc_joint(PdcSource("mm", 0.5), n_max=12)
    out = apply_loss_joint(j, 0.3, 0.2)
    np.testing.assert_allclose(out.probs, oracles.thin_joint(j.probs.tolist(), 0.3, 0.2), atol=1e-15)
    assert oracles.joint_g(out.probs.tolist(), 1, 1) == pytest.approx(oracles.joint_g(j.probs.tolist(), 1, 1), abs=1e-10)
    assert car(pdc_joint(PdcSource("mm", 0.5))) == pytest.approx(3.0, abs=1e-10)
    assert car(apply_loss_joint(pdc_joint(PdcSource("mm", 0.5)), 0.3, 0.2)) == pytest.approx(3.0, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(etas, st.integers(0, 60))
def test_povm_completeness(eta, n_max):
    pnr = sum(pnr_povm(eta, n, n_max).diag for n in range(n_max + 1))
    np.testing.assert_allclose(pnr, 1.0, atol=1e-12)
    bucket = bucket_povm(eta, CLICK, n_max).diag + bucket_povm(eta, NO_CLICK, n_max).diag
    np.testing.assert_allclose(bucket, 1.0, atol=1e-12)
    np.testing.assert_allclose(loss_matrix(eta, n_max).sum(axis=0), 1.0, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["sm", "mm"]), st.floats(0.05, 2.0), etas, etas)
def test_loss_composes(regime, mu, e1, e2):
    d = pdc_weights(PdcSource(regime, mu))
    twice = apply_loss(apply_loss(d, e1), e2)
    once = apply_loss(d, e1 * e2)
    np.testing.assert_allclose(twice.probs, once.probs, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["sm", "mm"]), st.floats(0.05, 2.0), etas)
def test_mean_scales_with_efficiency(regime, mu, eta):
    d = pdc_weights(PdcSource(regime, mu))
    assert mean_photon(apply_loss(d, eta)) == pytest.approx(eta * mean_photon(d), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["sm", "mm"]), st.floats(0.05, 2.0), st.floats(0.01, 1.0))
def test_normalized_moments_loss_invariant(regime, mu, eta):
    d = pdc_weights(PdcSource(regime, mu))
    lossy = apply_loss(d, eta)
    for m in range(1, 6):
        assert factorial_moment(lossy, m) == pytest.approx(factorial_moment(d, m), abs=1e-10)


@pytest.mark.parametrize("eta", [2.2250738585072014e-308, 5e-324, 1e-300])
def test_tiny_efficiency_is_stable(eta):
    total = sum(pnr_povm(eta, n, 6).diag for n in range(7))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)
    np.testing.assert_allclose(loss_matrix(eta, 6)[0], 1.0, atol=1e-12)
