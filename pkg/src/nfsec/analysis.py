"""Closed-form performance stack built on the slot-averaged precoder.

Everything here reduces a field point r to two quantities through the
precoder state: u = P_null F^H h(r), the coupling of the AN into that
point, and v_p = h(r)^H F W_static e_p, the static per-stream gains.  The
slot average of the precoder outer product then gives average SINR, rates
and secrecy capacity; the distribution of the instantaneous eavesdropper
SINR (a scaled doubly noncentral F) gives secrecy outage and secrecy maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConditionViolated, DegenerateNullSpace, DomainError, Infeasible,
                     SeriesNotConverged)
from .geometry import Scenario, los_channel_stack
from .numerics import DncfSeries, SeriesControl, integrate_semi_infinite, sample_dncf
from .precoding import PrecoderState

# fixed seed for the deterministic sampling fallback used on map cells whose
# noncentralities exceed the series cap
_MAP_MC_SEED = 0x5EC2EC
_MAP_MC_SAMPLES = 200_000


@dataclass(frozen=True)
class EveSinrParams:
    """Parameters of the eavesdropper instantaneous-SINR distribution for
    one stream: AN coupling u, static gains v, and the two noncentralities
    of the scaled doubly noncentral F law."""

    u: np.ndarray
    v: np.ndarray
    lam_nc1: float
    lam_nc2: float
    stream: int

    @property
    def n_users(self) -> int:
        return self.v.shape[0]


@dataclass
class SinrReport:
    """Per-position, per-stream averages: linear SINR, rate upper bound,
    and secrecy capacity against the stream's own user."""

    positions: np.ndarray
    sinr: np.ndarray
    rate: np.ndarray
    secrecy_capacity: np.ndarray


@dataclass
class SecrecyMapResult:
    """Per-cell secrecy outage over a grid of hypothetical eavesdropper
    positions, plus the zone mask outage <= epsilon.  method records how
    each cell was evaluated: "series", "mc" (series cap exceeded), or
    "degenerate" (point inside the users' span, outage pinned to 1)."""

    points: np.ndarray
    outage: np.ndarray
    mask: np.ndarray
    method: list
    r_s: float
    epsilon: float


def link_coefficients(h_r: np.ndarray, state: PrecoderState):
    """(u, v) for a field point: u = P_null F^H h, v_p = h^H F W_static e_p."""
    e = state.f.conj().T @ h_r
    u = state.p_null @ e
    v = e.conj() @ state.w_static
    return u, v


def avg_outer_product(state: PrecoderState, m: int) -> np.ndarray:
    """Slot average of W(k) e_m e_m^H W(k)^H: xi^2 P_null plus the static
    rank-one part."""
    w_m = state.w_static[:, m]
    return state.xi ** 2 * state.p_null + np.outer(w_m, w_m.conj())


def _sinr_from_uv(an_gain, v, m: int, xi: float, noise_power: float):
    """Average-SINR ratio given the AN quadratic form and static gains."""
    m_users = v.shape[-1]
    sig = np.abs(v[..., m]) ** 2
    others = np.sum(np.abs(v) ** 2, axis=-1) - sig
    num = xi ** 2 * an_gain + sig
    den = (m_users - 1) * xi ** 2 * an_gain + others + noise_power
    return num / den


def avg_sinr_los(h_r: np.ndarray, state: PrecoderState, m: int, noise_power: float) -> float:
    """Slot-averaged SINR at a deterministic (LoS) field point for stream m,
    as the ratio of expected signal power to expected interference-plus-
    noise power."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    u, v = link_coefficients(h_r, state)
    an_gain = max(float(np.real(np.vdot(u, u))), 0.0)  # e^H P e, clipped at 0
    return float(_sinr_from_uv(an_gain, v, m, state.xi, noise_power))


def avg_sinr_los_stack(h_stack: np.ndarray, state: PrecoderState, m: int,
                       noise_power: float) -> np.ndarray:
    """Vectorized avg_sinr_los over a stack of channel vectors (n, N)."""
    e_h = h_stack.conj() @ state.f            # rows are e^H
    an_gain = np.maximum(
        np.einsum("na,ab,nb->n", e_h, state.p_null, e_h.conj()).real, 0.0)
    v = e_h @ state.w_static                  # rows are v
    return _sinr_from_uv(an_gain, v, m, state.xi, noise_power)


def avg_sinr_multipath(r_cov: np.ndarray, h_bar: np.ndarray, state: PrecoderState,
                       m: int, noise_power: float) -> float:
    """Slot-averaged SINR when the field point's channel is random with
    mean h_bar and covariance r_cov (trace form; reduces to the LoS
    expression for r_cov = 0)."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    f = state.f
    corr = r_cov + np.outer(h_bar, h_bar.conj())
    g = f.conj().T @ corr @ f                 # (n_rf, n_rf)
    an_gain = max(float(np.trace(g @ state.p_null).real), 0.0)
    w = state.w_static
    stream_power = np.einsum("am,ab,bm->m", w.conj(), g, w).real
    m_users = w.shape[1]
    num = state.xi ** 2 * an_gain + stream_power[m]
    den = ((m_users - 1) * state.xi ** 2 * an_gain
           + float(np.sum(stream_power) - stream_power[m]) + noise_power)
    return float(num / den)


def rate_upper(sinr: float) -> float:
    """Jensen upper bound on the average achievable rate, log2(1 + SINR)."""
    if sinr < 0:
        raise ValueError("SINR must be nonnegative")
    return float(np.log2(1.0 + sinr))


def secrecy_capacity_approx(user_sinr: float, eve_sinr: float) -> float:
    """Rate-difference approximation of secrecy capacity, clamped at 0."""
    return max(rate_upper(user_sinr) - rate_upper(eve_sinr), 0.0)


def xi_for_target_secrecy(delta: float, h_eve: np.ndarray, state: PrecoderState,
                          m: int, noise_power: float) -> float:
    """Minimal AN level achieving secrecy capacity >= delta against a known
    eavesdropper channel, under the LoS average-SINR approximation.

    Valid when the AN-monotonicity condition holds ((M-1)|v_m|^2 exceeds
    the other streams' leakage plus noise); raises Infeasible when the
    target lies below the AN-limited SINR floor 1/(M-1).  Returns 0 when
    the target is already met without AN.
    """
    if delta < 0:
        raise ValueError("target secrecy capacity must be nonnegative")
    u, v = link_coefficients(h_eve, state)
    an_gain = float(np.real(np.vdot(u, u)))
    m_users = v.shape[0]
    sig = float(np.abs(v[m]) ** 2)
    others = float(np.sum(np.abs(v) ** 2) - sig)
    if (m_users - 1) * sig <= others + noise_power:
        raise ConditionViolated(
            "secrecy capacity is not monotonically increasing in the AN level here")
    beta_m = state.gains[m]
    target = 2.0 ** (-delta) * (1.0 + beta_m ** 2 / noise_power) - 1.0
    num = sig - target * (others + noise_power)
    if num <= 0.0:
        return 0.0  # already met at xi = 0
    den = (m_users - 1) * target - 1.0
    if den <= 0.0 or an_gain <= 0.0:
        raise Infeasible("target secrecy capacity exceeds what AN can enforce")
    return float(np.sqrt(num / (an_gain * den)))


def eve_sinr_params(h_eve: np.ndarray, state: PrecoderState, m: int) -> EveSinrParams:
    """Distribution parameters of the eavesdropper instantaneous SINR.

    The Gaussian limit behind them needs a nonvanishing AN coupling;
    points whose channel lies numerically in the users' span raise
    DegenerateNullSpace instead of returning garbage.
    """
    if state.xi <= 0:
        raise ValueError("AN level must be positive to parameterize the SINR law")
    u, v = link_coefficients(h_eve, state)
    u_norm = float(np.linalg.norm(u))
    if u_norm <= 1e-12 * np.linalg.norm(h_eve) * np.linalg.norm(state.f):
        raise DegenerateNullSpace("eavesdropper channel lies in the users' span")
    scale = state.xi ** 2 * u_norm ** 2
    sig = float(np.abs(v[m]) ** 2)
    others = float(np.sum(np.abs(v) ** 2) - sig)
    return EveSinrParams(u=u, v=v, lam_nc1=2.0 * sig / scale,
                         lam_nc2=2.0 * others / scale, stream=m)


def user_sinr_pdf(y, gain: float, noise_power: float):
    """PDF of the user's instantaneous SINR beta^2 / |n|^2 with complex
    Gaussian noise of the given power."""
    if gain <= 0 or noise_power <= 0:
        raise DomainError("gain and noise power must be positive")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("SINR support is y > 0")
    snr = gain ** 2 / noise_power
    return (snr / y ** 2) * np.exp(-snr / y)


def _outage_weight(s, r_s: float, snr: float, m_users: int):
    """Probability the user's instantaneous capacity is outaged given the
    scaled eavesdropper SINR s."""
    t = 2.0 ** r_s * (s / (m_users - 1) + 1.0) - 1.0
    return np.where(t <= 0.0, 0.0, np.exp(-snr / np.maximum(t, 1e-300)))


def secrecy_outage(r_s: float, gain: float, noise_power: float, params: EveSinrParams,
                   ctrl: SeriesControl | None = None, quad_tol: float = 1e-6) -> float:
    """Secrecy outage probability: the user-fading outage weight integrated
    against the scaled eavesdropper-SINR density over [0, inf)."""
    if r_s < 0:
        raise ValueError("target secrecy rate must be nonnegative")
    m_users = params.n_users
    snr = gain ** 2 / noise_power
    series = DncfSeries(params.lam_nc1, params.lam_nc2, m_users, ctrl)

    def integrand(s):
        if s <= 0.0:
            return 0.0
        return float(_outage_weight(s, r_s, snr, m_users)) * series.pdf(s)

    val = integrate_semi_infinite(integrand, tol=quad_tol)
    return float(min(max(val, 0.0), 1.0))


def secrecy_outage_sampled(r_s: float, gain: float, noise_power: float,
                           params: EveSinrParams, rng,
                           n_samples: int = _MAP_MC_SAMPLES) -> float:
    """Sampling evaluation of the same integral: average the outage weight
    over chi-square-ratio draws.  Works for any noncentralities; standard
    error ~ 0.5/sqrt(n_samples)."""
    m_users = params.n_users
    s = sample_dncf(params.lam_nc1, params.lam_nc2, m_users, rng, size=n_samples)
    w = _outage_weight(s, r_s, gain ** 2 / noise_power, m_users)
    return float(min(max(np.mean(w), 0.0), 1.0))


def secrecy_map(scenario: Scenario, state: PrecoderState, m: int, grid_points,
                r_s: float, epsilon: float, ctrl: SeriesControl | None = None,
                quad_tol: float = 1e-6) -> SecrecyMapResult:
    """Secrecy outage for a hypothetical eavesdropper at every grid point.

    Degenerate points (inside the users' span, where AN offers no
    protection) are pinned to outage 1.  Points whose noncentralities
    overflow the series cap fall back to a deterministic fixed-seed
    sampling estimate and are tagged "mc".
    """
    pts = np.atleast_2d(np.asarray(grid_points, dtype=float))
    h_stack = los_channel_stack(scenario.geometry, pts)
    gain = float(scenario.symbol_gains[m])
    outage = np.empty(pts.shape[0])
    method = []
    for i in range(pts.shape[0]):
        try:
            params = eve_sinr_params(h_stack[i], state, m)
        except DegenerateNullSpace:
            outage[i] = 1.0
            method.append("degenerate")
            continue
        try:
            outage[i] = secrecy_outage(r_s, gain, scenario.noise_power, params,
                                       ctrl, quad_tol)
            method.append("series")
        except SeriesNotConverged:
            rng = np.random.default_rng(_MAP_MC_SEED)
            outage[i] = secrecy_outage_sampled(r_s, gain, scenario.noise_power,
                                               params, rng)
            method.append("mc")
    mask = outage <= epsilon
    return SecrecyMapResult(points=pts, outage=outage, mask=mask, method=method,
                            r_s=r_s, epsilon=epsilon)
