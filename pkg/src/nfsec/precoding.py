"""Dynamic AN-aided hybrid precoder design.

Pipeline: an SVD-based unit-modulus analog stage, a zero-forcing static
baseband stage that pins the per-user symbol gains, and per-slot artificial
noise injected through the effective channel's null-space projector.  Two
rules set the AN level xi: a closed-form per-slot maximizer (quadratic in
xi) and a slot-independent conservative bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, Infeasible, RankDeficient
from .geometry import Scenario, channel_matrix

_log = logging.getLogger(__name__)

# refuse ZF inversion beyond this condition number of the effective Gram
COND_LIMIT = 1e12
# relative singular-value gap below which the analog-stage basis choice is
# numerically arbitrary
_SVD_GAP_WARN = 1e-10


def unit_phasors(rng, shape) -> np.ndarray:
    """i.i.d. unit-modulus complex entries with uniform phase.

    cos/sin into a preallocated buffer; measurably faster than exp(1j*x)
    for the Monte-Carlo block sizes used here.
    """
    phases = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    out = np.empty(np.shape(phases), dtype=np.complex128)
    out.real = np.cos(phases)
    out.imag = np.sin(phases)
    return out


@dataclass(frozen=True)
class AnalogPrecoder:
    """Unit-modulus analog precoding matrix, (N, n_rf)."""

    f: np.ndarray

    def __post_init__(self):
        dev = np.max(np.abs(np.abs(self.f) - 1.0))
        if dev > 1e-12:
            raise ValueError(f"analog precoder entries deviate from unit modulus by {dev:g}")


@dataclass(frozen=True)
class SlotPrecoder:
    """Digital precoder for one symbol slot, (n_rf, M)."""

    w: np.ndarray
    slot: int


@dataclass(frozen=True)
class PrecoderState:
    """Immutable per-scenario design: analog matrix, effective channel,
    static ZF part, null-space projector, AN level and symbol gains.

    `f` is the identity for the fully-digital variant (no analog stage, so
    the unit-modulus constraint does not apply there).
    """

    f: np.ndarray
    h_eff: np.ndarray
    w_static: np.ndarray
    p_null: np.ndarray
    xi: float
    gains: np.ndarray

    @property
    def n_rf(self) -> int:
        return self.f.shape[1]

    @property
    def n_users(self) -> int:
        return self.h_eff.shape[1]


def design_analog(h_u: np.ndarray, n_rf: int) -> AnalogPrecoder:
    """Analog precoder from the ordered SVD of the users' channel matrix.

    Takes the phases of the first n_rf right singular vectors of the
    conjugate-transposed channel matrix.  Beyond the channel rank those
    vectors span the null space; the basis is whatever the SVD routine
    returns, tie-broken by column index.
    """
    h_u = np.asarray(h_u)
    n, m = h_u.shape
    if n_rf > n:
        raise ValueError(f"n_rf={n_rf} exceeds element count {n}")
    if np.any(np.linalg.norm(h_u, axis=0) == 0.0):
        raise RankDeficient("channel matrix has a zero column")
    _, s, vh = np.linalg.svd(h_u.conj().T, full_matrices=(n_rf > m))
    top = min(n_rf, len(s))
    if top > 1 and s[0] > 0:
        gaps = np.diff(s[:top]) / -s[0]
        if np.any(gaps < _SVD_GAP_WARN):
            _log.warning("near-degenerate singular values in analog design (min gap %.3e)",
                         float(np.min(gaps)))
    d_rf = vh.conj().T[:, :n_rf]
    return AnalogPrecoder(np.exp(1j * np.angle(d_rf)))


def effective_channel(f: np.ndarray, h_u: np.ndarray) -> np.ndarray:
    """Baseband-equivalent channel F^H H_U, (n_rf, M)."""
    f = f.f if isinstance(f, AnalogPrecoder) else f
    return f.conj().T @ h_u


def pseudo_inverse(h_eff: np.ndarray) -> np.ndarray:
    """Left Moore-Penrose inverse (H^H H)^-1 H^H of a full-column-rank
    effective channel."""
    gram = h_eff.conj().T @ h_eff
    if np.linalg.cond(gram) > COND_LIMIT:
        raise IllConditioned("effective channel Gram matrix exceeds the condition limit")
    return np.linalg.solve(gram, h_eff.conj().T)


def null_projector(h_eff: np.ndarray) -> np.ndarray:
    """Projector onto the orthogonal complement of the effective channel's
    column space: I - H H^dagger.  Hermitized to kill roundoff asymmetry."""
    n_rf = h_eff.shape[0]
    p = np.eye(n_rf, dtype=np.complex128) - h_eff @ pseudo_inverse(h_eff)
    return 0.5 * (p + p.conj().T)


def static_zf(h_eff: np.ndarray, gains) -> np.ndarray:
    """Minimum-norm ZF solution (H^dagger)^H diag(gains), (n_rf, M)."""
    gains = np.asarray(gains, dtype=float)
    return pseudo_inverse(h_eff).conj().T * gains[None, :]


def draw_an(n_rf: int, m: int, rng) -> np.ndarray:
    """One AN draw: (n_rf, m) independent unit-modulus entries."""
    return unit_phasors(rng, (n_rf, m))


def _gram(f: np.ndarray) -> np.ndarray:
    return f.conj().T @ f


def _quad_norm_sq(x: np.ndarray, gram: np.ndarray) -> float:
    """||F X||_F^2 evaluated as tr(X^H (F^H F) X)."""
    return float(np.einsum("am,ab,bm->", x.conj(), gram, x).real)


def slot_power(f: np.ndarray, w: np.ndarray, gram: np.ndarray | None = None) -> float:
    """Transmitted power ||F W||_F^2 of one slot precoder."""
    gram = _gram(f) if gram is None else gram
    return _quad_norm_sq(w, gram)


def xi_exact(f, h_eff, gains, w_an, p_t, *, w_static=None, p_null=None, gram=None) -> float:
    """Largest xi meeting the power budget for this specific AN draw.

    Positive root of the quadratic A xi^2 + B xi + C = 0 obtained from
    ||F (W_static + xi P W_AN)||_F^2 = P_t.  Requires slack in the budget
    (C < 0); the resulting slot power equals P_t.
    """
    gram = _gram(f) if gram is None else gram
    w_static = static_zf(h_eff, gains) if w_static is None else w_static
    p_null = null_projector(h_eff) if p_null is None else p_null
    t = p_null @ w_an
    a = _quad_norm_sq(t, gram)
    b = 2.0 * float(np.einsum("am,ab,bm->", w_static.conj(), gram, t).real)
    c = _quad_norm_sq(w_static, gram) - p_t
    if c >= 0.0:
        raise Infeasible("transmit power does not exceed the static precoder power")
    if a <= 0.0:
        raise Infeasible("no null space left for AN (n_rf == n_users)")
    return float((-b + np.sqrt(b * b - 4.0 * a * c)) / (2.0 * a))


def xi_bound(f, h_eff, gains, p_t, *, w_static=None, gram=None) -> float:
    """Slot-independent AN level from the triangle-inequality power bound.

    Guarantees ||F W(k)||_F^2 <= P_t for every AN draw, at the price of a
    conservative margin.
    """
    gram = _gram(f) if gram is None else gram
    w_static = static_zf(h_eff, gains) if w_static is None else w_static
    n, n_rf = f.shape
    m = h_eff.shape[1]
    margin = np.sqrt(p_t) - np.sqrt(_quad_norm_sq(w_static, gram))
    if margin <= 0.0:
        raise Infeasible("sqrt power budget does not exceed the static precoder norm")
    return float(margin / ((1.0 + np.sqrt(m)) * n_rf * np.sqrt(m * n)))


def slot_precoder(state: PrecoderState, w_an: np.ndarray, slot: int = 0) -> SlotPrecoder:
    """Slot precoder W_static + xi * P_null W_AN; ZF gains are untouched
    because the AN lives in the projector's range."""
    return SlotPrecoder(state.w_static + state.xi * (state.p_null @ w_an), slot)


def gains_for_target_sinr(sinr_db: float, noise_power: float, n_users: int = 1) -> np.ndarray:
    """Equal symbol gains beta = sigma * sqrt(SINR) hitting a target user
    SINR in dB."""
    return np.full(n_users, np.sqrt(noise_power * 10.0 ** (sinr_db / 10.0)))


def gains_for_static_power(f, h_eff, p_static: float, n_users: int) -> np.ndarray:
    """Equal symbol gains making the static part radiate exactly p_static."""
    unit = static_zf(h_eff, np.ones(n_users))
    base = slot_power(f, unit)
    return np.full(n_users, np.sqrt(p_static / base))


def design_state(scenario: Scenario, h_u: np.ndarray | None = None, *,
                 fully_digital: bool = False, xi_override: float | None = None) -> PrecoderState:
    """Build the immutable precoder state for a scenario.

    h_u defaults to the LoS channel matrix of the scenario's users; pass a
    sampled matrix for multi-path runs.  xi defaults to the slot-independent
    bound; xi_override installs a caller-chosen level instead (no budget
    check, used by experiments that fix xi explicitly).
    """
    if h_u is None:
        h_u = channel_matrix(scenario.geometry, scenario.users)
    if fully_digital:
        f = np.eye(scenario.geometry.n_elements, dtype=np.complex128)
    else:
        f = design_analog(h_u, scenario.n_rf).f
    h_eff = effective_channel(f, h_u)
    w_static = static_zf(h_eff, scenario.symbol_gains)
    p_null = null_projector(h_eff)
    if xi_override is not None:
        xi = float(xi_override)
    else:
        xi = xi_bound(f, h_eff, scenario.symbol_gains, scenario.transmit_power,
                      w_static=w_static)
    return PrecoderState(f=f, h_eff=h_eff, w_static=w_static, p_null=p_null,
                         xi=xi, gains=np.asarray(scenario.symbol_gains, dtype=float))


def run_algorithm1(scenario: Scenario, k_slots: int, rng, *,
                   xi_rule: str = "bound", h_u: np.ndarray | None = None) -> list[SlotPrecoder]:
    """Generate the K-slot precoder sequence.

    Analog design and the bound-rule xi are computed once (the bound is
    slot-independent, so hoisting it out of the loop changes nothing); with
    xi_rule="exact" the budget-exact xi is recomputed for each AN draw.
    Per-slot AN streams are spawned from the root generator, so the
    sequence depends only on the root seed, not on evaluation order.
    """
    if xi_rule not in ("bound", "exact"):
        raise ValueError(f"unknown xi rule {xi_rule!r}")
    state = design_state(scenario, h_u)
    if k_slots == 0:
        return []
    gram = _gram(state.f) if xi_rule == "exact" else None
    slots = []
    for k, child in enumerate(rng.spawn(k_slots)):
        w_an = draw_an(state.n_rf, state.n_users, child)
        if xi_rule == "exact":
            xi = xi_exact(state.f, state.h_eff, state.gains, w_an,
                          scenario.transmit_power, w_static=state.w_static,
                          p_null=state.p_null, gram=gram)
            w = state.w_static + xi * (state.p_null @ w_an)
            slots.append(SlotPrecoder(w, k))
        else:
            slots.append(slot_precoder(state, w_an, k))
    return slots
