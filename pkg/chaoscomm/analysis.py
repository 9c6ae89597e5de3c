# -*- coding: utf-8 -*-
"""
Analytic side of the toolkit: decoding-sphere radii and the tangential-sphere
bound of the adaptive-size scheme, the separation constants β of both schemes,
the resulting anytime exponents, and the efficiency, bandwidth and energy
bounds that follow from an exponential error profile.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaincc

from chaoscomm.chaotic_maps import MapKind, MapModel, cdf_inv_derivative, cdf_inv_difference, cell_index
from chaoscomm.codec.adaptive_bandwidth import error_prob_bound
from chaoscomm.common.constants import (DEFAULT_D0, DEFAULT_D_MAX, DEFAULT_GAMMA0, DEFAULT_K, DEFAULT_MAX_RUN,
                                        SIGMA2_SUP_BRACKET, SIGMA2_SUP_XTOL, TAIL_GRID_POINTS,
                                        TENT_INTERVAL_EPS, TSB_EXACT_MAX_DEPTH, TSB_SAMPLES)
from chaoscomm.common.exceptions import InvalidParameterError
from chaoscomm.common.util import check_positive

logger = logging.getLogger('chaoscomm')

# beyond this depth cell indices no longer fit in int64
_MAX_INDEX_DEPTH = 62


def _rho_bar_sq(x, n, d, map_model, gamma0):
    """ρ̄² at boundary positions x = ι/2ⁿ (array), depths j = n..n+d−1."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    j = np.arange(n, n + d)
    diff = np.asarray(cdf_inv_difference(map_model, x[:, None], np.ldexp(1.0, -j - 1)[None, :]))
    # Γ_j·(F⁻¹(x+h) − F⁻¹(x−h)) with Γ_j = Γ₀·2^j, scaled without forming 2^j
    scaled = gamma0 * np.ldexp(np.broadcast_to(diff, (x.size, d)), j[None, :])
    return 0.25 * np.sum(scaled ** 2, axis=1)


def rho_bar(n, d, index, map_model: MapModel, gamma0=DEFAULT_GAMMA0):
    """
    Radius of the decoding-safe sphere at the boundary between cells ι and ι+1.
    :param n: depth of the bit
    :param d: decoding delay
    :param index: boundary index ι in 1..2ⁿ−1
    :param map_model:
    :param gamma0: Γ₀ of Γ_j = Γ₀·2^j
    :return:
    """
    if n < 1 or d < 1:
        raise InvalidParameterError('rho_bar needs n >= 1 and d >= 1, got n={}, d={}'.format(n, d))
    if not (1 <= index <= (1 << n) - 1):
        raise InvalidParameterError('Boundary index {} out of range 1..{}'.format(index, (1 << n) - 1))
    check_positive(gamma0, 'gamma0')
    return float(math.sqrt(_rho_bar_sq(math.ldexp(index, -n), n, d, map_model, gamma0)[0]))


def _rho_min_from_cells(indices, n, d, map_model, gamma0):
    """ρ for cells ι (array): min of the two neighbouring boundaries, one-sided at the ends."""
    indices = np.asarray(indices, dtype=np.int64)
    top = 1 << n
    hi = np.where(indices < top, indices, indices - 1)
    lo = np.where(indices > 1, indices - 1, indices)
    rho_hi = _rho_bar_sq(np.ldexp(hi.astype(float), -n), n, d, map_model, gamma0)
    rho_lo = _rho_bar_sq(np.ldexp(lo.astype(float), -n), n, d, map_model, gamma0)
    return np.sqrt(np.minimum(rho_hi, rho_lo))


def rho_min(n, d, bits, map_model: MapModel, gamma0=DEFAULT_GAMMA0):
    """
    Radius ρ(n, d, b_1..b_n) for the prefix `bits`.
    """
    if len(bits) != n:
        raise InvalidParameterError('Prefix length {} differs from n={}'.format(len(bits), n))
    if n > _MAX_INDEX_DEPTH:
        raise InvalidParameterError('rho_min supports n <= {}'.format(_MAX_INDEX_DEPTH))
    index = cell_index(map_model, bits)
    return float(_rho_min_from_cells([index], n, d, map_model, gamma0)[0])


@dataclass(frozen=True)
class TsbEstimate:
    value: float
    stderr: float
    exact: bool
    samples: int


def tsb_estimate(n, d, sigma2, map_model: MapModel, gamma0=DEFAULT_GAMMA0, samples=TSB_SAMPLES, seed=0,
                 exact_max_depth=TSB_EXACT_MAX_DEPTH) -> TsbEstimate:
    """
    Tangential-sphere bound on the error probability of bit n at delay d,
    averaged over all prefixes b_1..b_n: exact enumeration up to
    exact_max_depth, uniform sampling of prefixes above.
    """
    if n < 1 or d < 1:
        raise InvalidParameterError('tsb needs n >= 1 and d >= 1, got n={}, d={}'.format(n, d))
    check_positive(sigma2, 'sigma2', allow_inf=True)
    if math.isinf(sigma2):
        return TsbEstimate(1.0, 0.0, True, 0)
    if n <= exact_max_depth:
        indices = np.arange(1, (1 << n) + 1)
        rho = _rho_min_from_cells(indices, n, d, map_model, gamma0)
        tail = gammaincc(0.5 * d, rho ** 2 / (2.0 * sigma2))
        return TsbEstimate(float(np.clip(tail.mean(), 0.0, 1.0)), 0.0, True, int(indices.size))
    rng = np.random.default_rng(seed)
    if n <= _MAX_INDEX_DEPTH:
        indices = rng.integers(1, 1 << n, size=samples, endpoint=True)
        rho = _rho_min_from_cells(indices, n, d, map_model, gamma0)
    else:
        # neighbouring boundaries coincide to double precision at this depth
        rho = np.sqrt(_rho_bar_sq(rng.random(samples), n, d, map_model, gamma0))
    tail = gammaincc(0.5 * d, rho ** 2 / (2.0 * sigma2))
    stderr = float(tail.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float('nan')
    logger.debug('TSB n={} d={} sampled over {} prefixes, stderr={}'.format(n, d, samples, stderr))
    return TsbEstimate(float(np.clip(tail.mean(), 0.0, 1.0)), stderr, False, int(samples))


def tsb(n, d, sigma2, map_model: MapModel, gamma0=DEFAULT_GAMMA0, samples=TSB_SAMPLES, seed=0):
    return tsb_estimate(n, d, sigma2, map_model, gamma0, samples=samples, seed=seed).value


def beta_size(map_model: MapModel, lam=DEFAULT_GAMMA0, search_depths=12) -> Optional[float]:
    """
    Separation constant β of the adaptive-size scheme with Γ_n ≥ λ·2ⁿ.
    :return: β, or None when inf dF⁻¹/dx = 0 and the anytime condition cannot hold
    """
    check_positive(lam, 'lam')
    grid = np.linspace(0.0, 1.0, 10001)
    if np.min(cdf_inv_derivative(map_model, grid)) <= 0.0:
        logger.debug('beta_size: dF^-1/dx vanishes for map {}'.format(map_model.kind.value))
        return None
    best = math.inf
    for n in range(1, search_depths + 1):
        x = np.ldexp(np.arange(1, 1 << n, dtype=float), -n)
        j = np.arange(n, search_depths + 1)
        diff = np.asarray(cdf_inv_difference(map_model, x[:, None], np.ldexp(1.0, -j - 1)[None, :]))
        quotient = np.ldexp(np.broadcast_to(diff, (x.size, j.size)), j[None, :]) ** 2
        best = min(best, float(quotient.min()))
    return lam * lam / 4.0 * best


def gamma_bar_size(beta, sigma2, d0=DEFAULT_D0):
    """
    Lower bound γ̄ on the anytime exponent of the adaptive-size scheme.
    """
    if d0 <= 2:
        raise InvalidParameterError('d0 must be > 2, got {}'.format(d0))
    check_positive(beta, 'beta')
    check_positive(sigma2, 'sigma2')
    return 0.5 * (beta / sigma2 - math.log(2.0 * beta * d0 * math.e / ((d0 - 2) * sigma2)))


def sigma2_sup(beta, d0=DEFAULT_D0):
    """
    Largest noise variance for which γ̄ > 0: σ² = β/x with x > 1 the root of
    x − ln x = ln(2·d0·e/(d0 − 2)).
    """
    if d0 <= 2:
        raise InvalidParameterError('d0 must be > 2, got {}'.format(d0))
    check_positive(beta, 'beta')
    rhs = math.log(2.0 * d0 * math.e / (d0 - 2))

    def f(x):
        return x - math.log(x) - rhs

    lo, hi = SIGMA2_SUP_BRACKET
    xs = np.geomspace(lo, hi, 200)
    signs = np.sign(xs - np.log(xs) - rhs)
    changes = int(np.count_nonzero(np.diff(signs)))
    if changes != 1:
        logger.warning('sigma2_sup: {} sign changes on [{}, {}]'.format(changes, lo, hi))
    x = brentq(f, lo, hi, xtol=SIGMA2_SUP_XTOL)
    return beta / x


def size_error_bound(beta, sigma2, d, d0=DEFAULT_D0, loose=True):
    """
    Closed-form bound on P_n^d(e) for the adaptive-size scheme.
    loose=True gives ((d0−2)σ²/(β·d0·e))·e^(−γ̄d); loose=False keeps d in place of d0
    (valid for d > 2).
    """
    check_positive(beta, 'beta')
    check_positive(sigma2, 'sigma2')
    if loose:
        if d < d0:
            raise InvalidParameterError('d must be >= d0')
        return (d0 - 2) * sigma2 / (beta * d0 * math.e) * math.exp(-gamma_bar_size(beta, sigma2, d0) * d)
    if d <= 2:
        raise InvalidParameterError('d must be > 2, got {}'.format(d))
    log_value = (math.log(2.0) + (0.5 * d - 1.0) * math.log(2.0 * beta * d * math.e / ((d - 2) * sigma2))
                 - beta * d / (2.0 * sigma2))
    return math.exp(log_value)


def beta_bw_bsm(m_r=DEFAULT_MAX_RUN, map_model: MapModel = MapModel(MapKind.BSM)):
    """
    Separation constant of the adaptive-bandwidth scheme for the BSM and its
    logistic conjugate, with runs limited to m_r:
    (g(1/2 − 2^−(m_r+2)) − g(1/2 + 2^−(m_r+2)))².
    """
    if m_r < 0:
        raise InvalidParameterError('m_r must be >= 0, got {}'.format(m_r))
    if map_model.kind is MapKind.TENT:
        raise InvalidParameterError('beta_bw_bsm applies to the BSM and the logistic map; use beta_bw_tent')
    return float(cdf_inv_difference(map_model, 0.5, math.ldexp(1.0, -(int(m_r) + 2)))) ** 2


def beta_bw_tent(map_model: MapModel, grid_points=TAIL_GRID_POINTS):
    """
    inf over x in [1/6, 1/2) of (g(x) − g(x + 1/3))² for the tent map and its logistic conjugate.
    """
    if map_model.kind is MapKind.BSM:
        raise InvalidParameterError('beta_bw_tent applies to the tent and the logistic map; use beta_bw_bsm')

    def objective(x):
        # g(x + 1/3) − g(x) is the symmetric difference around x + 1/6
        return float(cdf_inv_difference(map_model, x + 1.0 / 6.0, 1.0 / 6.0)) ** 2

    lo, hi = 1.0 / 6.0, 0.5 - TENT_INTERVAL_EPS
    xs = np.linspace(lo, hi, int(grid_points))
    values = np.asarray(cdf_inv_difference(map_model, xs + 1.0 / 6.0, 1.0 / 6.0)) ** 2
    i = int(np.argmin(values))
    best = float(values[i])
    left, right = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    if right > left:
        res = minimize_scalar(objective, bounds=(left, right), method='bounded', options={'xatol': 1e-14})
        if res.success:
            best = min(best, float(res.fun))
    return best


def gamma_bar_bw(beta, sigma2):
    """Exponent bound β/(8σ²) of the adaptive-bandwidth scheme."""
    check_positive(sigma2, 'sigma2', allow_inf=True)
    if beta < 0:
        raise InvalidParameterError('beta must be >= 0, got {}'.format(beta))
    if math.isinf(sigma2):
        return 0.0
    return beta / (8.0 * sigma2)


def _tail_factor(gamma):
    return 1.0 + math.exp(-2.0 * gamma) / (1.0 - math.exp(-gamma))


def efficiency_tail(K, gamma, d):
    """
    Bound on P{q = d} for d ≥ d0 when P_n^d(e) = K·e^(−γd).
    """
    if not gamma > 0:
        raise InvalidParameterError('gamma must be > 0, got {}'.format(gamma))
    if math.isinf(gamma):
        return 0.0
    return K * _tail_factor(gamma) * math.exp(-gamma * d)


def energy_bound_size(K, gamma, gamma0, d0, e0=0.0, moment=1):
    """
    Bound on the m-th moment of the symbol energy of the adaptive-size scheme.
    :return: the bound, or math.inf when γ ≤ m·ln 4 and the series diverges
    """
    if not gamma > 0:
        raise InvalidParameterError('gamma must be > 0, got {}'.format(gamma))
    ratio = 4.0 ** moment * math.exp(-gamma)
    if ratio >= 1.0:
        return math.inf
    return e0 + K * gamma0 ** (2 * moment) * _tail_factor(gamma) * ratio ** d0 / (1.0 - ratio)


def _mean_dimension_factor(gamma, d0):
    """Σ_{d≥d0} d·e^(−γd)."""
    r = math.exp(-gamma)
    return math.exp(-gamma * d0) * (d0 - (d0 - 1) * r) / (1.0 - r) ** 2


def bandwidth_bound_bw(K, gamma, delta_f, d0, b0=0.0):
    """Bound on the average bandwidth d·Δf of the adaptive-bandwidth scheme."""
    if not gamma > 0:
        raise InvalidParameterError('gamma must be > 0, got {}'.format(gamma))
    if math.isinf(gamma):
        return b0
    return b0 + delta_f * K * _tail_factor(gamma) * _mean_dimension_factor(gamma, d0)


def energy_bound_bw(K, gamma, d0, e0=0.0):
    """Bound on the average energy of the adaptive-bandwidth scheme (‖s‖² ≤ q)."""
    return bandwidth_bound_bw(K, gamma, 1.0, d0, e0)


def required_exponent(matrix):
    """
    Anytime exponent needed to stabilize x_{t+1} = A·x_t + ...: 2·ln ρ(|A|).
    """
    a = np.abs(np.asarray(matrix, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.size == 0:
        raise InvalidParameterError('required_exponent needs a non-empty square matrix, got shape {}'.format(a.shape))
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError('Matrix entries must be finite')
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    if radius == 0.0:
        return -math.inf
    return 2.0 * math.log(radius)


@dataclass
class BoundsReport:
    scheme: str
    map: str
    beta: Optional[float]
    gamma_bar: Optional[float]
    sigma2_sup: Optional[float]
    d0: int
    K: float
    sigma2: float
    beta_scaled: Optional[float] = None
    energy_bound: Optional[float] = None
    bandwidth_bound: Optional[float] = None
    curves: Dict[str, List[Tuple[float, float]]] = field(default_factory=dict)

    @property
    def satisfied(self):
        return self.beta is not None and self.beta > 0

    def to_dict(self):
        data = asdict(self)
        data['curves'] = {name: [[x, y] for x, y in points] for name, points in self.curves.items()}
        for key in ('energy_bound', 'bandwidth_bound'):
            if data[key] is not None and math.isinf(data[key]):
                data[key] = 'inf'
        return data

    def scalar_rows(self):
        return [
            ('scheme', self.scheme), ('map', self.map), ('beta', self.beta), ('beta_scaled', self.beta_scaled),
            ('gamma_bar', self.gamma_bar), ('sigma2_sup', self.sigma2_sup), ('d0', self.d0), ('K', self.K),
            ('sigma2', self.sigma2), ('energy_bound', self.energy_bound),
            ('bandwidth_bound', self.bandwidth_bound),
        ]


def compute_bounds(scheme, map_model: MapModel, sigma2, gamma0=DEFAULT_GAMMA0, d0=DEFAULT_D0, m_r=DEFAULT_MAX_RUN,
                   K=DEFAULT_K, d_max=DEFAULT_D_MAX, tsb_n=1, normalized=True) -> BoundsReport:
    """
    Collect β, γ̄, σ²_sup and the bound curves for one configuration.
    :param scheme: 'size' or 'bw'
    :param normalized: adaptive-bandwidth samples sent as 2z − 1, which scales distances by 4
    """
    check_positive(sigma2, 'sigma2')
    if scheme == 'size':
        beta = beta_size(map_model, lam=gamma0)
        report = BoundsReport('size', map_model.kind.value, beta, None, None, d0, K, sigma2, beta_scaled=beta)
        report.curves['tsb'] = [(d, tsb(tsb_n, d, sigma2, map_model, gamma0)) for d in range(1, d_max + 1)]
        if beta is not None:
            report.sigma2_sup = sigma2_sup(beta, d0)
            report.gamma_bar = gamma_bar_size(beta, sigma2, d0)
            report.curves['size_error_bound'] = [(d, size_error_bound(beta, sigma2, d, d0))
                                                 for d in range(d0, d_max + 1)]
            if report.gamma_bar > 0:
                report.energy_bound = energy_bound_size(K, report.gamma_bar, gamma0, d0)
    elif scheme == 'bw':
        if map_model.kind is MapKind.BSM:
            beta = beta_bw_bsm(m_r, map_model)
        else:
            beta = beta_bw_tent(map_model)
        scaled = 4.0 * beta if normalized else beta
        gamma = gamma_bar_bw(scaled, sigma2)
        report = BoundsReport('bw', map_model.kind.value, beta, gamma, None, d0, K, sigma2, beta_scaled=scaled)
        report.curves['error_prob_bound'] = [(d, error_prob_bound(scaled * d, sigma2)) for d in range(1, d_max + 1)]
        if gamma > 0:
            report.bandwidth_bound = bandwidth_bound_bw(K, gamma, 1.0, d0)
            report.energy_bound = energy_bound_bw(K, gamma, d0)
    else:
        raise InvalidParameterError('Unsupported scheme: {}'.format(scheme))
    if report.gamma_bar is not None and report.gamma_bar > 0:
        report.curves['efficiency_tail'] = [(d, efficiency_tail(K, report.gamma_bar, d))
                                            for d in range(d0, d_max + 1)]
    logger.debug('Bounds for {}/{}: beta={}, gamma_bar={}, sigma2_sup={}'.format(
        scheme, map_model.kind.value, report.beta, report.gamma_bar, report.sigma2_sup))
    return report
