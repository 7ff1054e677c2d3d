"""Experiment orchestration and CSV artifact emission.

Every experiment is a pure function of (config, seed): artifacts are built
fully in memory and only then written, floats are serialized with 17
significant digits, and metadata sidecars carry the config hash and seed —
re-running the same config byte-identically reproduces every file.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import analysis as an
from . import montecarlo as mc
from . import numerics as nm
from . import precoding as pc
from .config import ExperimentConfig, GridSpec
from .errors import Infeasible, ValidationError
from .geometry import (Scenario, channel_matrix, fraunhofer_distance, los_channel,
                       los_channel_stack, multipath_covariance, scatterer_link_gain)
from .precoding import PrecoderState

ARTIFACT_VERSION = 1


@dataclass
class CsvArtifact:
    """One named CSV table plus its metadata sidecar content."""

    name: str
    header: tuple
    rows: list
    meta: dict


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(artifact: CsvArtifact, out_dir) -> Path:
    """Serialize one artifact (and its .meta.json sidecar) into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{artifact.name}.csv"
    lines = [",".join(artifact.header)]
    lines += [",".join(_fmt(v) for v in row) for row in artifact.rows]
    path.write_text("\n".join(lines) + "\n")
    side = out / f"{artifact.name}.meta.json"
    side.write_text(json.dumps(artifact.meta, sort_keys=True, indent=1) + "\n")
    return path


def _meta(config: ExperimentConfig, **extra) -> dict:
    meta = {"artifact_version": ARTIFACT_VERSION, "config_hash": config.config_hash,
            "seed": config.seed, "experiment": config.kind}
    meta.update(extra)
    return meta


def _xi_value(rule: dict, scenario: Scenario, f, h_eff, w_static,
              p_t: float | None = None) -> float:
    p_t = scenario.transmit_power if p_t is None else p_t
    kind = rule.get("rule", "bound")
    if kind == "fixed":
        return float(rule["value"])
    if kind == "fraction":
        n, n_rf = f.shape
        m = h_eff.shape[1]
        return (float(rule.get("value", 0.9)) * np.sqrt(p_t)
                / ((1.0 + np.sqrt(m)) * n_rf * np.sqrt(m * n)))
    return pc.xi_bound(f, h_eff, scenario.symbol_gains, p_t, w_static=w_static)


def build_state(scenario: Scenario, xi_rule: dict, *, fully_digital: bool = False,
                h_u=None, p_t: float | None = None) -> PrecoderState:
    """Precoder state with the config-selected AN-level rule."""
    if h_u is None:
        h_u = channel_matrix(scenario.geometry, scenario.users)
    f = (np.eye(scenario.geometry.n_elements, dtype=np.complex128) if fully_digital
         else pc.design_analog(h_u, scenario.n_rf).f)
    h_eff = pc.effective_channel(f, h_u)
    w_static = pc.static_zf(h_eff, scenario.symbol_gains)
    p_null = pc.null_projector(h_eff)
    xi = _xi_value(xi_rule, scenario, f, h_eff, w_static, p_t)
    return PrecoderState(f=f, h_eff=h_eff, w_static=w_static, p_null=p_null,
                         xi=xi, gains=np.asarray(scenario.symbol_gains, float))


def _labels(scenario: Scenario):
    labels = [f"U{i + 1}" for i in range(scenario.n_users)]
    labels += [f"E{i + 1}" for i in range(scenario.n_eves)]
    pts = np.vstack([scenario.users, scenario.eavesdroppers]) if scenario.n_eves \
        else scenario.users.copy()
    return labels, pts


def _target_stream(i: int, scenario: Scenario) -> int:
    """Node i of (users..., eves...) decodes this stream; eve q targets
    user q (wrapping if there are more eves than users)."""
    m = scenario.n_users
    return i if i < m else (i - m) % m


def _rebuild_gains(config: ExperimentConfig, sinr_db: float):
    """Scenario with gains re-pinned to a target user SINR; transmit power
    re-resolved when the config ties it to the static precoder power."""
    sc = config.scenario
    gains = pc.gains_for_target_sinr(sinr_db, sc.noise_power, sc.n_users)
    sc = replace(sc, symbol_gains=gains)
    transmit = dict(config.power_spec.get("transmit", {}))
    if "static_multiple" in transmit:
        h_u = channel_matrix(sc.geometry, sc.users)
        f = (np.eye(sc.geometry.n_elements, dtype=np.complex128) if config.fully_digital
             else pc.design_analog(h_u, sc.n_rf).f)
        h_eff = pc.effective_channel(f, h_u)
        p_static = pc.slot_power(f, pc.static_zf(h_eff, gains))
        sc = replace(sc, transmit_power=float(transmit["static_multiple"]) * p_static)
    return sc


def _grid(config: ExperimentConfig) -> GridSpec:
    return config.grid or GridSpec(nx=41, ny=41, extent=0.8, z=0.55)


# ---------------------------------------------------------------- experiments

def _exp_beampattern(config: ExperimentConfig):
    sc = config.scenario
    state = build_state(sc, config.xi_rule, fully_digital=config.fully_digital)
    composite = state.f @ state.w_static
    grid = _grid(config)
    pts_m = grid.points(config.position_unit)
    v = los_channel_stack(sc.geometry, pts_m).conj() @ composite
    gain_db = 10.0 * np.log10(np.abs(v) ** 2 / sc.symbol_gains[None, :] ** 2 + 1e-300)
    unit = config.position_unit
    rows = []
    for m in range(sc.n_users):
        for i in range(pts_m.shape[0]):
            rows.append((pts_m[i, 0] / unit, pts_m[i, 1] / unit, pts_m[i, 2] / unit,
                         m + 1, gain_db[i, m]))
    grid_art = CsvArtifact("beampattern", ("x_dF", "y_dF", "z_dF", "stream", "gain_db"),
                           rows, _meta(config))

    labels, nodes = _labels(sc)
    vp = los_channel_stack(sc.geometry, nodes).conj() @ composite
    gp = 10.0 * np.log10(np.abs(vp) ** 2 / sc.symbol_gains[None, :] ** 2 + 1e-300)
    prows = [(lab, m + 1, gp[i, m]) for i, lab in enumerate(labels)
             for m in range(sc.n_users)]
    pts_art = CsvArtifact("beampattern_points", ("label", "stream", "gain_db"),
                          prows, _meta(config))
    return [grid_art, pts_art]


def _exp_constellation(config: ExperimentConfig):
    sc = config.scenario
    state = build_state(sc, config.xi_rule, fully_digital=config.fully_digital)
    rng = np.random.default_rng(config.seed)
    k = config.slots
    mods = mc.scenario_modulations(sc)
    x = np.column_stack([mc.gen_symbols(mods[p], k, rng) for p in range(sc.n_users)])
    w_stack = np.stack([state.w_static + state.xi * (state.p_null @ pc.draw_an(
        state.n_rf, sc.n_users, child)) for child in rng.spawn(k)])
    labels, nodes = _labels(sc)
    rows = []
    for i, lab in enumerate(labels):
        h = los_channel(sc.geometry, nodes[i])
        y = mc.received_signal(h, state, x, w_stack, sc.noise_power, rng)
        m = _target_stream(i, sc)
        _, v = an.link_coefficients(h, state)
        ref = v[m]
        for kk in range(k):
            rows.append((lab, m + 1, kk, y[kk].real, y[kk].imag, ref.real, ref.imag))
    return [CsvArtifact("constellation",
                        ("label", "stream", "slot", "y_re", "y_im", "ref_re", "ref_im"),
                        rows, _meta(config))]


def _exp_ber_grid(config: ExperimentConfig):
    sc = config.scenario
    state = build_state(sc, config.xi_rule, fully_digital=config.fully_digital)
    grid = _grid(config)
    pts_m = grid.points(config.position_unit)
    streams = list(range(sc.n_users))
    res = mc.estimate_ber(sc, pts_m, streams, config.slots, config.trials,
                          np.random.default_rng(config.seed), state=state)
    h_stack = los_channel_stack(sc.geometry, pts_m)
    unit = config.position_unit
    rows = []
    for m in streams:
        sinr = an.avg_sinr_los_stack(h_stack, state, m, sc.noise_power)
        theory = nm.q_function(np.sqrt(sinr))
        for i in range(pts_m.shape[0]):
            rows.append((pts_m[i, 0] / unit, pts_m[i, 1] / unit, pts_m[i, 2] / unit,
                         m + 1, res.ber[i, m], res.ber_half_width[i, m], theory[i]))
    return [CsvArtifact("ber_grid",
                        ("x_dF", "y_dF", "z_dF", "stream", "ber", "half_width",
                         "theory_ber"), rows, _meta(config))]


def _exp_ber_sweep(config: ExperimentConfig):
    sc0 = config.scenario
    sinr_list = config.options.get("sinr_db_list", [0, 5, 10, 15, 20])
    labels, nodes = _labels(sc0)
    streams = list(range(sc0.n_users))
    rng = np.random.default_rng(config.seed)
    rows = []
    for sinr_db in sinr_list:
        sc = _rebuild_gains(config, float(sinr_db))
        state = build_state(sc, config.xi_rule, fully_digital=config.fully_digital)
        res = mc.estimate_ber(sc, nodes, streams, config.slots, config.trials, rng,
                              state=state)
        h_stack = los_channel_stack(sc.geometry, nodes)
        for m in streams:
            sinr = an.avg_sinr_los_stack(h_stack, state, m, sc.noise_power)
            theory = nm.q_function(np.sqrt(sinr))
            for i, lab in enumerate(labels):
                rows.append((float(sinr_db), lab, m + 1, res.ber[i, m],
                             res.ber_half_width[i, m], theory[i]))
    return [CsvArtifact("ber_sweep",
                        ("sinr_db", "label", "stream", "ber", "half_width", "theory_ber"),
                        rows, _meta(config))]


def _exp_same_direction(config: ExperimentConfig):
    """Near- vs far-field channel model with the eavesdropper moved along
    the second user's ray; BER of decoding that user's stream."""
    sc0 = config.scenario
    fractions = config.options.get("fractions",
                                   [0.35, 0.5, 0.65, 0.8, 1.2, 1.35, 1.5])
    stream = int(config.options.get("stream", sc0.n_users - 1))
    user = sc0.users[stream]
    rng = np.random.default_rng(config.seed)
    geom = sc0.geometry
    h_u_near = channel_matrix(geom, sc0.users)
    h_u_far = np.stack([mc.far_field_channel_variant(geom, u) for u in sc0.users], axis=1)
    rows = []
    for frac in fractions:
        eve = np.asarray(user, float) * float(frac)
        sc = replace(sc0, eavesdroppers=eve[None, :])
        for model, h_u in (("near", h_u_near), ("far", h_u_far)):
            state = build_state(sc, config.xi_rule, h_u=h_u)
            if model == "near":
                chans = np.stack([los_channel(geom, user), los_channel(geom, eve)])
            else:
                chans = np.stack([mc.far_field_channel_variant(geom, user),
                                  mc.far_field_channel_variant(geom, eve)])
            res = mc.estimate_ber(sc, [user, eve], [stream], config.slots,
                                  config.trials, rng, state=state, channels=chans)
            rows.append((float(frac), model, "user", res.ber[0, 0],
                         res.ber_half_width[0, 0]))
            rows.append((float(frac), model, "eve", res.ber[1, 0],
                         res.ber_half_width[1, 0]))
    return [CsvArtifact("same_direction",
                        ("fraction", "model", "node", "ber", "half_width"),
                        rows, _meta(config))]


def _exp_sumrate_multipath(config: ExperimentConfig):
    sc0 = config.scenario
    if not sc0.scatterers:
        raise ValidationError("sumrate-multipath needs a scenario with scatterers")
    opts = config.options
    paths_list = [int(v) for v in opts.get("paths_list", [1, 3, 5, 7])]
    p_dbm_list = opts.get("p_t_dbm_list", [0, 10, 20, 30])
    draws = int(opts.get("draws", 40))
    share = float(opts.get("static_share", 0.01))
    frac = float(opts.get("xi_fraction", 0.9))
    if max(paths_list) > len(sc0.scatterers):
        raise ValidationError("paths_list exceeds the scenario's scatterer count")
    geom, users, eves = sc0.geometry, sc0.users, sc0.eavesdroppers
    m_users = sc0.n_users
    h_los = channel_matrix(geom, users)
    scats = sc0.scatterers
    h_scat = np.stack([los_channel(geom, s.position) for s in scats], axis=1)
    link = np.array([[scatterer_link_gain(s, u, geom) for u in users] for s in scats])
    rng = np.random.default_rng(config.seed)
    acc = {}
    for _ in range(draws):
        alpha = (rng.standard_normal((len(scats), 1)) + 1j * rng.standard_normal(
            (len(scats), 1))) * np.sqrt([[s.variance / 2.0] for s in scats])
        # cumulative channel draws share the leading scatterers across L
        h_u = h_los.copy()
        next_l = 0
        for n_paths in sorted(paths_list):
            while next_l < n_paths:
                h_u = h_u + h_scat[:, next_l:next_l + 1] * (alpha[next_l] * link[next_l])[None, :]
                next_l += 1
            for p_dbm in p_dbm_list:
                p_t = 10.0 ** ((float(p_dbm) - 30.0) / 10.0)
                f = pc.design_analog(h_u, sc0.n_rf).f
                h_eff = pc.effective_channel(f, h_u)
                gains = pc.gains_for_static_power(f, h_eff, share * p_t, m_users)
                w_static = pc.static_zf(h_eff, gains)
                p_null = pc.null_projector(h_eff)
                xi = (frac * np.sqrt(p_t)
                      / ((1.0 + np.sqrt(m_users)) * sc0.n_rf
                         * np.sqrt(m_users * geom.n_elements)))
                state = PrecoderState(f=f, h_eff=h_eff, w_static=w_static,
                                      p_null=p_null, xi=xi, gains=gains)
                rate_u = sum(np.log2(1.0 + g ** 2 / sc0.noise_power) for g in gains)
                rate_e = 0.0
                for q in range(eves.shape[0]):
                    r_cov = multipath_covariance(geom, eves[q], scats[:n_paths])
                    h_bar = los_channel(geom, eves[q])
                    sinr = an.avg_sinr_multipath(r_cov, h_bar, state, q % m_users,
                                                 sc0.noise_power)
                    rate_e += np.log2(1.0 + sinr)
                key = (float(p_dbm), n_paths)
                u_sum, e_sum = acc.get(key, (0.0, 0.0))
                acc[key] = (u_sum + rate_u, e_sum + rate_e)
    rows = [(p_dbm, n_paths, u_sum / draws, e_sum / draws)
            for (p_dbm, n_paths), (u_sum, e_sum) in sorted(acc.items())]
    return [CsvArtifact("sumrate_multipath",
                        ("p_t_dbm", "n_paths", "sum_rate_users", "sum_rate_eves"),
                        rows, _meta(config, draws=draws))]


def _exp_secrecy_rate_sweep(config: ExperimentConfig):
    """Proposed dynamic precoder vs plain ZF (xi = 0) under the same power
    constraint and symbol gains, eavesdroppers on the users' rays."""
    sc0 = config.scenario
    opts = config.options
    p_dbm_list = opts.get("p_t_dbm_list", [0, 5, 10, 15, 20])
    frac = float(opts.get("xi_fraction", 0.9))
    if "eves" in opts:
        eves = np.asarray(opts["eves"], float) * config.position_unit
    else:
        eves = sc0.eavesdroppers
    if eves.shape[0] < sc0.n_users:
        raise ValidationError("secrecy-rate-sweep needs one eavesdropper per user")
    h_u = channel_matrix(sc0.geometry, sc0.users)
    rng = np.random.default_rng(config.seed)
    rows = []
    for p_dbm in p_dbm_list:
        p_t = 10.0 ** ((float(p_dbm) - 30.0) / 10.0)
        sc = replace(sc0, eavesdroppers=eves, transmit_power=p_t)
        state = build_state(sc, {"rule": "fraction", "value": frac}, h_u=h_u)
        static_power = pc.slot_power(state.f, state.w_static)
        if static_power > p_t:
            raise Infeasible(
                f"static precoder power {static_power:.3e} W exceeds P_t at {p_dbm} dBm")
        state_zf = dataclasses.replace(state, xi=0.0)
        for scheme, st in (("proposed", state), ("zf", state_zf)):
            for m in range(sc.n_users):
                rate = mc.empirical_secrecy_rate(sc, st, m, eves[m], config.slots, rng)
                rows.append((float(p_dbm), scheme, m + 1, rate))
    return [CsvArtifact("secrecy_rate",
                        ("p_t_dbm", "scheme", "user", "secrecy_rate"),
                        rows, _meta(config))]


def _exp_outage_curve(config: ExperimentConfig):
    sc0 = config.scenario
    opts = config.options
    sinr_list = opts.get("sinr_db_list", [10, 15, 20])
    r_s_list = opts.get("r_s_list", [0.5, 1, 2, 3, 4, 5, 6, 8])
    eve_idx = int(opts.get("eve_index", 0))
    stream = int(opts.get("stream", 0))
    p_t = opts.get("transmit_watts")
    rows = []
    for sinr_db in sinr_list:
        gains = pc.gains_for_target_sinr(float(sinr_db), sc0.noise_power, sc0.n_users)
        sc = replace(sc0, symbol_gains=gains,
                     transmit_power=float(p_t) if p_t else sc0.transmit_power)
        state = build_state(sc, config.xi_rule, fully_digital=config.fully_digital)
        h_eve = los_channel(sc.geometry, sc.eavesdroppers[eve_idx])
        params = an.eve_sinr_params(h_eve, state, stream)
        for r_s in r_s_list:
            out = an.secrecy_outage(float(r_s), float(gains[stream]), sc.noise_power,
                                    params)
            rows.append((float(sinr_db), float(r_s), out,
                         params.lam_nc1, params.lam_nc2))
    return [CsvArtifact("outage_curve",
                        ("sinr_db", "r_s", "outage", "lam_nc1", "lam_nc2"),
                        rows, _meta(config, eve_index=eve_idx, stream=stream))]


def _exp_secrecy_map(config: ExperimentConfig):
    sc0 = config.scenario
    opts = config.options
    r_s = float(opts.get("r_s", 5.0))
    epsilon = float(opts.get("epsilon", 0.1))
    sinr_db = float(opts.get("sinr_db", 20.0))
    stream = int(opts.get("stream", min(1, sc0.n_users - 1)))
    digital = bool(opts.get("fully_digital", True))
    gains = pc.gains_for_target_sinr(sinr_db, sc0.noise_power, sc0.n_users)
    sc = replace(sc0, symbol_gains=gains,
                 n_rf=sc0.geometry.n_elements if digital else sc0.n_rf)
    h_u = channel_matrix(sc.geometry, sc.users)
    f = (np.eye(sc.geometry.n_elements, dtype=np.complex128) if digital
         else pc.design_analog(h_u, sc.n_rf).f)
    h_eff = pc.effective_channel(f, h_u)
    w_static = pc.static_zf(h_eff, gains)
    p_static = pc.slot_power(f, w_static)
    mult = float(opts.get("static_multiple", 5.0))
    sc = replace(sc, transmit_power=mult * p_static)
    state = build_state(sc, config.xi_rule, fully_digital=digital, h_u=h_u)
    grid = _grid(config)
    pts_m = grid.points(config.position_unit)
    result = an.secrecy_map(sc, state, stream, pts_m, r_s, epsilon)
    unit = config.position_unit
    rows = [(pts_m[i, 0] / unit, pts_m[i, 1] / unit, pts_m[i, 2] / unit,
             result.outage[i], result.method[i], bool(result.mask[i]))
            for i in range(pts_m.shape[0])]
    return [CsvArtifact("secrecy_map",
                        ("x_dF", "y_dF", "z_dF", "outage", "method", "in_zone"),
                        rows, _meta(config, r_s=r_s, epsilon=epsilon, sinr_db=sinr_db,
                                    stream=stream, fully_digital=digital))]


def _exp_validate(config: ExperimentConfig):
    """Cross-module oracle suite; the CLI exits nonzero if any row fails."""
    sc = config.scenario
    rng = np.random.default_rng(config.seed)
    state = build_state(sc, config.xi_rule, fully_digital=config.fully_digital)
    rows = []

    def check(name, value, threshold):
        rows.append((name, value, threshold, "pass" if value <= threshold else "fail"))

    # ZF exactness over random slots
    b_m = np.diag(sc.symbol_gains)
    worst = 0.0
    for child in rng.spawn(200):
        w = pc.slot_precoder(state, pc.draw_an(state.n_rf, sc.n_users, child)).w
        err = np.linalg.norm(state.h_eff.conj().T @ w - b_m) / np.linalg.norm(b_m)
        worst = max(worst, err)
    check("zf_exactness_rel", worst, 1e-9)

    # power feasibility, bound rule
    gram = state.f.conj().T @ state.f
    worst = 0.0
    for child in rng.spawn(2000):
        w = pc.slot_precoder(state, pc.draw_an(state.n_rf, sc.n_users, child)).w
        worst = max(worst, pc.slot_power(state.f, w, gram))
    check("power_bound_max_over_pt", worst / sc.transmit_power, 1.0)

    # power equality, exact rule
    worst = 0.0
    for child in rng.spawn(50):
        w_an = pc.draw_an(state.n_rf, sc.n_users, child)
        xi = pc.xi_exact(state.f, state.h_eff, sc.symbol_gains, w_an,
                         sc.transmit_power, w_static=state.w_static,
                         p_null=state.p_null, gram=gram)
        w = state.w_static + xi * (state.p_null @ w_an)
        p = pc.slot_power(state.f, w, gram)
        worst = max(worst, abs(p - sc.transmit_power) / sc.transmit_power)
    check("power_exact_rel_err", worst, 1e-6)

    # slot-average outer product vs closed form, small random instance
    rng2 = np.random.default_rng(config.seed + 1)
    h_u = (rng2.standard_normal((64, 2)) + 1j * rng2.standard_normal((64, 2)))
    f = pc.design_analog(h_u, 8).f
    h_eff = pc.effective_channel(f, h_u)
    gains = np.ones(2)
    w_s = pc.static_zf(h_eff, gains)
    p_null = pc.null_projector(h_eff)
    xi = pc.xi_bound(f, h_eff, gains, 5 * pc.slot_power(f, w_s), w_static=w_s)
    st = PrecoderState(f=f, h_eff=h_eff, w_static=w_s, p_null=p_null, xi=xi,
                       gains=gains)
    closed = an.avg_outer_product(st, 0)
    acc = np.zeros_like(closed)
    n_slots = 100_000
    chunk = 20_000
    for k0 in range(0, n_slots, chunk):
        a = pc.unit_phasors(rng2, (chunk, 8))
        w_m = w_s[:, 0][None, :] + xi * (a @ p_null.T)
        acc += np.einsum("ka,kb->ab", w_m, w_m.conj())
    mc_avg = acc / n_slots
    check("avg_outer_product_rel_frob",
          np.linalg.norm(mc_avg - closed) / np.linalg.norm(closed), 0.02)

    # dncf normalization
    series = nm.DncfSeries(2.0, 3.0, 3)
    val = nm.integrate_semi_infinite(series.pdf, tol=1e-7)
    check("dncf_normalization_err", abs(val - 1.0), 1e-4)

    # analytic vs empirical outage
    if sc.n_eves:
        h_eve = los_channel(sc.geometry, sc.eavesdroppers[0])
        params = an.eve_sinr_params(h_eve, state, 0)
        for r_s in (1.0, 3.0):
            o_a = an.secrecy_outage(r_s, float(sc.symbol_gains[0]), sc.noise_power,
                                    params)
            o_e = mc.empirical_outage(sc, state, 0, sc.eavesdroppers[0], r_s,
                                      200_000, rng)
            check(f"outage_cross_rs{r_s:g}", abs(o_a - o_e), 0.015)

    return [CsvArtifact("validate", ("check", "value", "threshold", "status"),
                        rows, _meta(config))]


_DISPATCH = {
    "beampattern": _exp_beampattern,
    "constellation": _exp_constellation,
    "ber-grid": _exp_ber_grid,
    "ber-sweep": _exp_ber_sweep,
    "same-direction": _exp_same_direction,
    "sumrate-multipath": _exp_sumrate_multipath,
    "secrecy-rate-sweep": _exp_secrecy_rate_sweep,
    "outage-curve": _exp_outage_curve,
    "secrecy-map": _exp_secrecy_map,
    "validate": _exp_validate,
}


def run_experiment(config: ExperimentConfig) -> list[CsvArtifact]:
    """Run one experiment; artifacts are returned fully built, so a failure
    part-way leaves nothing on disk."""
    return _DISPATCH[config.kind](config)
