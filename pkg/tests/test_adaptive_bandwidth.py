#!/usr/bin/env python3
"""
测试自适应带宽编码调制：参考轨迹、逐比特相关接收机与错误概率
"""
import logging
import math
import os
import sys

import numpy as np
import pytest
from scipy.special import erfc

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from chaoscomm.analysis import beta_bw_bsm, beta_bw_tent
from chaoscomm.chaotic_maps import MapKind, MapModel
from chaoscomm.codec.adaptive_bandwidth import (BwDecoderState, BwEncoderState, dE2, error_prob_bound,
                                                error_prob_exact, estimate_at_delay, gen_initial_conditions,
                                                max_run_length, reliability_prune)
from chaoscomm.common.constants import DEFAULT_MAX_RUN
from chaoscomm.common.exceptions import InvalidParameterError, TrajectoryExhaustedException

logging.basicConfig(level=logging.DEBUG, format='%(asctime)s [%(levelname)s] %(name)s: %(message)s')

BSM = MapModel(MapKind.BSM)
TENT = MapModel(MapKind.TENT)
LOGISTIC = MapModel(MapKind.LOGISTIC)
W = BSM.eval_width


def _ref(map_model, seed=0, **kwargs):
    return gen_initial_conditions(map_model, rng=np.random.default_rng(seed), **kwargs)


def test_reference_pair_structure():
    ref = _ref(LOGISTIC, n=300)
    np.testing.assert_array_equal(ref.u1, 1 - ref.u0)
    assert len(ref.traj0) == len(ref.traj1) == 300 - W + 1
    assert ref.max_age == 300 - W
    np.testing.assert_allclose(ref.sig0, 2.0 * ref.traj0 - 1.0)
    with pytest.raises(ValueError):
        ref.sig0[0] = 0.0


def test_bsm_run_constraint():
    ref = _ref(BSM, m_r=1)
    np.testing.assert_array_equal(ref.u0[1:], 1 - ref.u0[:-1])
    assert np.all((np.abs(ref.traj0 - 1.0 / 3.0) <= 2.0 ** -W) | (np.abs(ref.traj0 - 2.0 / 3.0) <= 2.0 ** -W))
    for m_r in (2, 5):
        ref = _ref(BSM, seed=m_r, m_r=m_r)
        assert max_run_length(ref.u0) <= m_r
        assert ref.m_r == m_r
    # tent and logistic itineraries are left unconstrained
    assert _ref(TENT).m_r is None


def test_gen_initial_conditions_errors():
    with pytest.raises(InvalidParameterError):
        gen_initial_conditions(BSM, n=W)
    with pytest.raises(InvalidParameterError):
        gen_initial_conditions(BSM, m_r=0)


def test_tent_complementary_gap():
    ref = _ref(TENT, normalized=False)
    assert np.all(np.abs(ref.traj1 - ref.traj0) >= 1.0 / 3.0 - 2.0 ** (1 - W))
    for d in (1, 10, 100, ref.max_age):
        assert dE2(ref, d) >= d * (1.0 / 3.0 - 2.0 ** (1 - W)) ** 2


def test_de2():
    raw = _ref(LOGISTIC, seed=4, normalized=False)
    scaled = _ref(LOGISTIC, seed=4, normalized=True)
    assert dE2(raw, 0) == 0.0
    for d in (1, 7, 200):
        assert dE2(scaled, d) == pytest.approx(4.0 * dE2(raw, d), rel=1e-12)
    with pytest.raises(InvalidParameterError):
        dE2(raw, raw.max_age + 1)


def test_error_probability():
    assert error_prob_exact(0.0, 0.5) == 0.5
    assert error_prob_exact(8 * 0.3, 0.3) == pytest.approx(0.5 * erfc(1.0), abs=1e-15)
    assert error_prob_exact(8 * 0.3, 0.3) == pytest.approx(0.078650, abs=1e-6)
    assert error_prob_exact(math.inf, 0.5) == 0.0
    for value in (0.1, 1.0, 10.0, 100.0):
        assert error_prob_exact(value, 0.5) <= error_prob_bound(value, 0.5)
    with pytest.raises(InvalidParameterError):
        error_prob_exact(-1.0, 0.5)


def test_encoder_vector_layout():
    ref = _ref(BSM)
    enc = BwEncoderState(ref)
    s = enc.encode_step(1)
    np.testing.assert_array_equal(s, [ref.sig1[1]])
    enc.encode_step(0)
    s = enc.encode_step(1)
    assert s.shape == (3,)
    # newest bit first: ages 1, 2, 3
    np.testing.assert_array_equal(s, [ref.sig1[1], ref.sig0[2], ref.sig1[3]])
    enc.discard(2)
    np.testing.assert_array_equal(enc.encode_step(None), [ref.sig1[2]])
    assert enc.epsilon == 3


def test_decoder_noiseless_accumulation():
    ref = _ref(LOGISTIC)
    sigma2 = 0.5
    enc = BwEncoderState(ref)
    dec = BwDecoderState(ref, sigma2)
    dec.update(enc.encode_step(0))
    for _ in range(6):
        dec.update(enc.encode_step(None), extend=False)
    assert dec.llr[0] == pytest.approx(-dE2(ref, 7) / (2.0 * sigma2), rel=1e-12)
    assert estimate_at_delay(dec, 1) == 0


def test_decoder_equidistant_and_hand_computed():
    ref = _ref(TENT)
    dec = BwDecoderState(ref, 0.25)
    mid = 0.5 * (ref.sig0[1] + ref.sig1[1])
    assert dec.update([mid])[0] == pytest.approx(0.0, abs=1e-12)

    dec = BwDecoderState(ref, 0.25)
    r = [0.3]
    d0 = (0.3 - ref.sig0[1]) ** 2
    d1 = (0.3 - ref.sig1[1]) ** 2
    assert dec.update(r)[0] == pytest.approx((d0 - d1) / 0.5)
    r2 = [-0.2, 0.7]
    llr = dec.update(r2)
    # the second component belongs to the older bit, now at age 2
    assert llr[0] == pytest.approx((d0 + (0.7 - ref.sig0[2]) ** 2 - d1 - (0.7 - ref.sig1[2]) ** 2) / 0.5)
    assert llr[1] == pytest.approx(((-0.2 - ref.sig0[1]) ** 2 - (-0.2 - ref.sig1[1]) ** 2) / 0.5)


def test_decoder_rejects_wrong_length():
    dec = BwDecoderState(_ref(BSM), 0.5)
    with pytest.raises(InvalidParameterError):
        dec.update([0.1, 0.2])
    with pytest.raises(InvalidParameterError):
        dec.update([], extend=False)


def test_trajectory_exhaustion():
    ref = _ref(TENT, n=W + 3)
    assert ref.max_age == 3
    enc = BwEncoderState(ref)
    enc.encode_step(1)
    enc.encode_step(None)
    enc.encode_step(None)
    with pytest.raises(TrajectoryExhaustedException):
        enc.encode_step(None)


def test_prune_releases_reliable_prefix():
    ref = _ref(BSM)
    enc = BwEncoderState(ref)
    dec = BwDecoderState(ref, 1e-6, pe_res=1e-5)
    dec.update(enc.encode_step(1))
    released, epsilon = reliability_prune(dec, enc)
    assert released == (1,)
    assert epsilon == 2 == enc.epsilon
    assert dec.q == 0 and enc.q == 0
    assert dec.decided[1] == (1, 1)


def test_separation_with_noise():
    """Released decisions stay correct when the per-bit distance grows fast enough."""
    rng = np.random.default_rng(31)
    ref = _ref(LOGISTIC, seed=8)
    sigma2 = 0.5
    enc = BwEncoderState(ref)
    dec = BwDecoderState(ref, sigma2)
    bits = rng.integers(0, 2, size=100)
    for bit in bits:
        s = enc.encode_step(int(bit))
        dec.update(s + rng.normal(0.0, math.sqrt(sigma2), size=s.shape))
        reliability_prune(dec, enc)
    decided = np.array([dec.decided[k][0] for k in range(1, dec.epsilon)])
    assert len(decided) > 50
    assert np.mean(decided != bits[:len(decided)]) < 0.05


def test_single_bit_error_matches_exact_probability():
    rng = np.random.default_rng(41)
    ref = _ref(LOGISTIC, seed=2)
    d = 3
    sigma2 = dE2(ref, d) / 8.0
    expected = error_prob_exact(dE2(ref, d), sigma2)
    trials, errors = 4000, 0
    for _ in range(trials):
        enc = BwEncoderState(ref)
        dec = BwDecoderState(ref, sigma2)
        for step in range(d):
            s = enc.encode_step(0 if step == 0 else None)
            dec.update(s + rng.normal(0.0, math.sqrt(sigma2), size=s.shape), extend=step == 0)
        errors += int(dec.llr[0] > 0)
    stderr = math.sqrt(expected * (1 - expected) / trials)
    assert abs(errors / trials - expected) <= 4 * stderr


@pytest.mark.parametrize("map_model,m_r", [(TENT, None), (LOGISTIC, None)] + [(BSM, m_r) for m_r in range(1, 7)])
def test_distance_grows_at_least_linearly(map_model, m_r):
    """d_E²(d) >= 4β·d for the ±1-normalized pair, whatever the drawn itinerary."""
    beta = beta_bw_bsm(m_r) if m_r is not None else beta_bw_tent(map_model)
    d = np.arange(1, 501)
    for seed in range(100):
        ref = _ref(map_model, seed=seed, m_r=m_r or DEFAULT_MAX_RUN)
        assert np.all(ref.de2_curve[d] >= 4.0 * beta * d)
