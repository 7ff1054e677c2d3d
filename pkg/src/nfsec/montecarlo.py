"""Link-level Monte-Carlo simulation.

A field point interacts with the dynamic precoder only through its AN
coupling u and static gains v (see analysis.link_coefficients), so the
hot kernels draw unit-modulus AN blocks and synthesize received samples
as y(k) = sum_p (v_p + xi u^H a_p(k)) x_p(k) + n(k), in chunks.

The eavesdropper demodulation convention is strongest-adversary: the
eavesdropper knows the modulation, the user index it targets, and its own
exact complex static gain, which it uses as the demodulation reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .analysis import link_coefficients
from .geometry import Scenario, as_position, as_positions, element_positions, los_channel
from .precoding import PrecoderState, design_state, unit_phasors

_CHUNK_SLOTS = 16384


def _as_rng(rng):
    """Accept either a Generator or a seed; return (generator, seed-or-None)."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), int(rng)


@lru_cache(maxsize=None)
def _constellation(kind: str, order: int) -> np.ndarray:
    """Unit-average-energy constellation indexed by the Gray bit word."""
    pts = np.empty(order, dtype=np.complex128)
    if kind == "psk":
        idx = np.arange(order)
        gray = idx ^ (idx >> 1)
        # half-step offset puts QPSK at (+-1 +- 1j)/sqrt(2)
        pts[gray] = np.exp(1j * np.pi * (2 * idx + 1) / order)
    else:  # square QAM
        side = int(round(np.sqrt(order)))
        if side * side != order:
            raise ValueError(f"QAM order {order} is not a perfect square")
        bits_axis = side.bit_length() - 1
        levels = 2.0 * np.arange(side) - (side - 1)
        for ai in range(side):
            for aq in range(side):
                word = ((ai ^ (ai >> 1)) << bits_axis) | (aq ^ (aq >> 1))
                pts[word] = levels[ai] + 1j * levels[aq]
        pts /= np.sqrt(np.mean(np.abs(pts) ** 2))
    return pts


@dataclass(frozen=True)
class ModulationScheme:
    """PSK or square-QAM constellation, Gray-labeled, E[|x|^2] = 1."""

    kind: str
    order: int

    def __post_init__(self):
        if self.kind not in ("psk", "qam"):
            raise ValueError(f"unknown modulation kind {self.kind!r}")
        if self.order < 2 or self.order & (self.order - 1):
            raise ValueError("modulation order must be a power of two >= 2")
        _constellation(self.kind, self.order)  # validates qam squareness

    @classmethod
    def parse(cls, text: str) -> "ModulationScheme":
        """Parse strings like "PSK-8" or "QAM-16"."""
        try:
            kind, order = text.strip().lower().split("-")
            return cls(kind, int(order))
        except (ValueError, AttributeError) as exc:
            raise ValueError(f"cannot parse modulation {text!r}") from exc

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    @property
    def points(self) -> np.ndarray:
        return _constellation(self.kind, self.order)

    def modulate(self, words) -> np.ndarray:
        return self.points[np.asarray(words)]

    def detect(self, y, gain) -> np.ndarray:
        """Nearest-point decision on y/gain; returns Gray bit words."""
        z = np.asarray(y) / gain
        return np.argmin(np.abs(z[..., None] - self.points), axis=-1)

    def words_to_bits(self, words) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((words[..., None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def scenario_modulations(scenario: Scenario) -> list[ModulationScheme]:
    """Per-user schemes from the scenario record; QPSK when unspecified."""
    if scenario.modulations:
        return [ModulationScheme.parse(t) for t in scenario.modulations]
    return [ModulationScheme("psk", 4)] * scenario.n_users


def gen_symbols(mod: ModulationScheme, count: int, rng) -> np.ndarray:
    """i.i.d. uniform constellation points."""
    rng, _ = _as_rng(rng)
    return mod.modulate(rng.integers(mod.order, size=count))


def demodulate(y, mod: ModulationScheme, gain) -> np.ndarray:
    """Minimum-distance detection of y against gain * constellation;
    returns the unpacked bit sequence."""
    if np.abs(gain) <= 0:
        raise ValueError("gain reference must be nonzero")
    return mod.words_to_bits(mod.detect(y, gain))


@dataclass
class LinkResult:
    """Per-(position, stream) Monte-Carlo link metrics."""

    positions: np.ndarray
    streams: np.ndarray
    ber: np.ndarray
    ber_half_width: np.ndarray
    error_counts: np.ndarray
    bit_counts: np.ndarray
    empirical_sinr: np.ndarray
    low_confidence: np.ndarray
    slots: int
    trials: int
    seed: int | None = None


def received_signal(h_r, state: PrecoderState, symbols, slot_precoders,
                    noise_power: float, rng) -> np.ndarray:
    """Received samples y(k) = h^H F W(k) x(k) + n(k) at one field point.

    symbols is (K, M); slot_precoders a SlotPrecoder list or (K, n_rf, M)
    stack; noise_power 0 gives the noiseless (worst-case eavesdropper)
    output.
    """
    rng, _ = _as_rng(rng)
    x = np.atleast_2d(np.asarray(symbols))
    if hasattr(slot_precoders, "shape"):
        w_stack = np.asarray(slot_precoders)
    else:
        w_stack = np.stack([sp.w for sp in slot_precoders])
    if w_stack.shape[0] != x.shape[0]:
        raise ValueError("need one precoder per symbol slot")
    e_h = (state.f.conj().T @ np.asarray(h_r)).conj()
    gains = np.einsum("a,kam->km", e_h, w_stack)
    y = np.sum(gains * x, axis=1)
    if noise_power > 0:
        scale = np.sqrt(noise_power / 2.0)
        y = y + scale * (rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y)))
    return y


def _an_mix(u, xi: float, a_block: np.ndarray) -> np.ndarray:
    """(chunk, M) per-slot AN contributions xi * u^H a_p."""
    return xi * np.einsum("a,kam->km", np.conj(u), a_block)


def estimate_ber(scenario: Scenario, positions, streams, k_slots: int, trials: int,
                 rng, *, state: PrecoderState | None = None,
                 eve_noise_power: float | None = None, channels=None) -> LinkResult:
    """Monte-Carlo BER of decoding the given streams at the given positions.

    All positions observe the same slot-precoder sequence within a trial;
    noise is drawn independently per position.  Every position uses the
    same noise power as the users unless eve_noise_power overrides it for
    non-user positions.  channels, when given, is an (n_pos, N) stack used
    instead of the LoS channels (the far-field comparison path).
    """
    rng, seed = _as_rng(rng)
    state = design_state(scenario) if state is None else state
    pts = as_positions(positions)
    streams = np.atleast_1d(np.asarray(streams, dtype=int))
    mods = scenario_modulations(scenario)
    if channels is None:
        uv = [link_coefficients(los_channel(scenario.geometry, p), state) for p in pts]
    else:
        uv = [link_coefficients(np.asarray(h), state) for h in channels]
    refs = np.array([[uv[i][1][m] for m in streams] for i in range(len(pts))])

    user_pos = {tuple(np.round(u, 12)) for u in scenario.users}
    noise_at = np.array([
        scenario.noise_power if (eve_noise_power is None
                                 or tuple(np.round(p, 12)) in user_pos)
        else eve_noise_power for p in pts])

    n_pos, n_str = len(pts), len(streams)
    errors = np.zeros((n_pos, n_str), dtype=np.int64)
    bits = np.zeros((n_pos, n_str), dtype=np.int64)
    resid = np.zeros((n_pos, n_str))
    m_users = scenario.n_users
    xi = state.xi
    for _ in range(trials):
        words = np.column_stack([rng.integers(mods[p].order, size=k_slots)
                                 for p in range(m_users)])
        x = np.column_stack([mods[p].modulate(words[:, p]) for p in range(m_users)])
        for k0 in range(0, k_slots, _CHUNK_SLOTS):
            k1 = min(k0 + _CHUNK_SLOTS, k_slots)
            a_block = unit_phasors(rng, (k1 - k0, state.n_rf, m_users))
            for i in range(n_pos):
                u, v = uv[i]
                mix = _an_mix(u, xi, a_block) + v[None, :]
                y0 = np.sum(mix * x[k0:k1], axis=1)
                if noise_at[i] > 0:
                    sc = np.sqrt(noise_at[i] / 2.0)
                    y0 = y0 + sc * (rng.standard_normal(k1 - k0)
                                    + 1j * rng.standard_normal(k1 - k0))
                for j, m in enumerate(streams):
                    mod = mods[m]
                    det = mod.detect(y0, refs[i, j])
                    tx, rx = words[k0:k1, m], det
                    errors[i, j] += int(np.bitwise_count(
                        np.bitwise_xor(tx, rx).astype(np.uint64)).sum())
                    bits[i, j] += (k1 - k0) * mod.bits_per_symbol
                    resid[i, j] += float(np.sum(np.abs(y0 - refs[i, j] * x[k0:k1, m]) ** 2))
    ber = errors / bits
    half = 1.96 * np.sqrt(np.maximum(ber * (1 - ber), 1e-300) / bits)
    sig = np.abs(refs) ** 2
    emp_sinr = sig / (resid / (k_slots * trials))
    return LinkResult(positions=pts, streams=streams, ber=ber, ber_half_width=half,
                      error_counts=errors, bit_counts=bits, empirical_sinr=emp_sinr,
                      low_confidence=errors < 100, slots=k_slots, trials=trials,
                      seed=seed)


def _slot_sinrs(u, v, xi: float, m: int, k_slots: int, rng,
                eve_noise_power: float = 0.0) -> np.ndarray:
    """Instantaneous eavesdropper SINR for stream m over k_slots slots."""
    m_users = v.shape[0]
    out = np.empty(k_slots)
    for k0 in range(0, k_slots, _CHUNK_SLOTS):
        k1 = min(k0 + _CHUNK_SLOTS, k_slots)
        a_block = unit_phasors(rng, (k1 - k0, u.shape[0], m_users))
        mix = _an_mix(u, xi, a_block) + v[None, :]
        p = np.abs(mix) ** 2
        sig = p[:, m]
        interf = np.sum(p, axis=1) - sig
        if eve_noise_power > 0:
            interf = interf + rng.exponential(eve_noise_power, size=k1 - k0)
        out[k0:k1] = sig / interf
    return out


def empirical_secrecy_rate(scenario: Scenario, state: PrecoderState, m: int,
                           eve_position, k_slots: int, rng, *,
                           eve_noise_power: float | None = None) -> float:
    """Slot average of the instantaneous log-rate difference between user m
    and an eavesdropper at eve_position, clamped at 0 after averaging.

    The eavesdropper sees the same noise power as the users unless
    overridden (pass 0 for the worst case).
    """
    rng, _ = _as_rng(rng)
    sigma2 = scenario.noise_power
    eve_n = sigma2 if eve_noise_power is None else eve_noise_power
    u, v = link_coefficients(los_channel(scenario.geometry, as_position(eve_position)), state)
    sinr_e = _slot_sinrs(u, v, state.xi, m, k_slots, rng, eve_n)
    beta = scenario.symbol_gains[m]
    sinr_u = beta ** 2 / rng.exponential(sigma2, size=k_slots)
    rate = float(np.mean(np.log2((1.0 + sinr_u) / (1.0 + sinr_e))))
    return max(rate, 0.0)


def empirical_outage(scenario: Scenario, state: PrecoderState, m: int,
                     eve_position, r_s: float, k_slots: int, rng) -> float:
    """Fraction of slots whose instantaneous secrecy capacity falls below
    r_s, against a worst-case noiseless eavesdropper."""
    rng, _ = _as_rng(rng)
    u, v = link_coefficients(los_channel(scenario.geometry, as_position(eve_position)), state)
    sinr_e = _slot_sinrs(u, v, state.xi, m, k_slots, rng, 0.0)
    beta = scenario.symbol_gains[m]
    sinr_u = beta ** 2 / rng.exponential(scenario.noise_power, size=k_slots)
    outaged = np.log2((1.0 + sinr_u) / (1.0 + sinr_e)) < r_s
    return float(np.mean(outaged))


def perturb_positions(users, delta: float, rng) -> np.ndarray:
    """Displace each position by an independent uniform draw from the
    closed ball of radius delta."""
    if delta < 0:
        raise ValueError("perturbation radius must be nonnegative")
    rng, _ = _as_rng(rng)
    pts = as_positions(users)
    if delta == 0.0:
        return pts.copy()
    direction = rng.standard_normal(pts.shape)
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = delta * rng.uniform(0.0, 1.0, size=(pts.shape[0], 1)) ** (1.0 / 3.0)
    return pts + radius * direction


def far_field_channel_variant(geom, r) -> np.ndarray:
    """Plane-wave comparison channel: direction-only phases with one common
    path-loss amplitude taken at the array center.  Same storage convention
    as the near-field model."""
    p = as_position(r)
    dist = float(np.linalg.norm(p))
    if dist <= 0:
        raise ValueError("field point must not sit at the array center")
    khat = p / dist
    elems = element_positions(geom)
    phase = geom.wavenumber * (dist - elems @ khat)
    amp = geom.wavelength / (4.0 * np.pi * dist)
    return amp * (np.cos(phase) + 1j * np.sin(phase))
