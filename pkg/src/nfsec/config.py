"""Experiment configuration: YAML schema, validation, and shipped presets.

Positions are given either in meters or in units of the array's Fraunhofer
distance (the default, matching how the reference scenarios are stated);
they are resolved to meters at load time.  Every config must carry an
explicit seed — there is no implicit entropy anywhere in the pipeline.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml

from .errors import ParseError, ValidationError
from .geometry import ArrayGeometry, Scatterer, Scenario, channel_matrix, fraunhofer_distance
from . import precoding as pc
from .montecarlo import ModulationScheme

EXPERIMENT_KINDS = (
    "beampattern", "constellation", "ber-grid", "ber-sweep", "same-direction",
    "sumrate-multipath", "secrecy-rate-sweep", "outage-curve", "secrecy-map",
    "validate",
)

PRESETS = ("desk", "sec5-full", "table2-multipath")


@dataclass(frozen=True)
class GridSpec:
    """Square lattice in the z = const plane, extents in position units."""

    nx: int
    ny: int
    extent: float
    z: float

    def axes(self):
        return (np.linspace(-self.extent, self.extent, self.nx),
                np.linspace(-self.extent, self.extent, self.ny))

    def points(self, unit: float) -> np.ndarray:
        """(nx*ny, 3) points in meters, x fastest."""
        xs, ys = self.axes()
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, self.z)])
        return pts * unit


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description."""

    kind: str
    scenario: Scenario
    seed: int
    slots: int
    trials: int
    grid: GridSpec | None
    options: dict
    xi_rule: dict
    fully_digital: bool
    position_unit: float
    config_hash: str
    power_spec: dict = field(default_factory=dict)


def _fail(errors: list, msg: str):
    errors.append(msg)


def _resolve_noise(power: dict, errors: list) -> float:
    has_dbm = "noise_dbm" in power
    has_w = "noise_watts" in power
    if has_dbm == has_w:
        _fail(errors, "power block needs exactly one of noise_dbm / noise_watts")
        return 1.0
    return 10.0 ** ((power["noise_dbm"] - 30.0) / 10.0) if has_dbm else float(power["noise_watts"])


def _dbm_to_watts(v: float) -> float:
    return 10.0 ** ((v - 30.0) / 10.0)


def parse_config_dict(raw: dict) -> ExperimentConfig:
    """Validate a config dictionary and resolve it to an ExperimentConfig.

    Raises ValidationError listing every violated invariant at once.
    """
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a mapping")

    geom = None
    g = raw.get("geometry")
    if not isinstance(g, dict):
        _fail(errors, "missing geometry block")
    else:
        try:
            spacing = g.get("spacing", "half-wavelength")
            carrier = float(g.get("carrier_hz", 0.0))
            if spacing == "half-wavelength":
                geom = ArrayGeometry.half_wavelength(int(g["n_rows"]), int(g["n_cols"]), carrier)
            else:
                geom = ArrayGeometry(int(g["n_rows"]), int(g["n_cols"]), float(spacing), carrier)
        except (KeyError, TypeError, ValueError) as exc:
            _fail(errors, f"geometry: {exc}")

    unit = 1.0
    pos_in = raw.get("positions_in", "fraunhofer")
    if pos_in not in ("fraunhofer", "meters"):
        _fail(errors, f"positions_in must be 'fraunhofer' or 'meters', got {pos_in!r}")
    elif pos_in == "fraunhofer" and geom is not None:
        unit = fraunhofer_distance(geom)

    users = np.asarray(raw.get("users", []), dtype=float)
    if users.size == 0:
        _fail(errors, "need at least one user position")
    eves = np.asarray(raw.get("eves", []), dtype=float)
    scatterers = []
    for s in raw.get("scatterers", []) or []:
        try:
            scatterers.append(Scatterer(np.asarray(s["position"], float) * unit,
                                        float(s["variance"])))
        except (KeyError, TypeError, ValueError) as exc:
            _fail(errors, f"scatterer: {exc}")

    power = raw.get("power")
    noise_w = 1.0
    if not isinstance(power, dict):
        _fail(errors, "missing power block")
        power = {}
    else:
        noise_w = _resolve_noise(power, errors)

    mods = tuple(raw.get("modulations", []) or [])
    for m in mods:
        try:
            ModulationScheme.parse(m)
        except ValueError as exc:
            _fail(errors, str(exc))

    exp = raw.get("experiment")
    kind, seed, slots, trials, grid, options = "", 0, 1, 1, None, {}
    if not isinstance(exp, dict):
        _fail(errors, "missing experiment block")
    else:
        kind = exp.get("kind", "")
        if kind not in EXPERIMENT_KINDS:
            _fail(errors, f"unknown experiment kind {kind!r}")
        if "seed" not in exp:
            _fail(errors, "experiment.seed is required (no implicit entropy)")
        else:
            seed = int(exp["seed"])
        slots = int(exp.get("slots", 1))
        trials = int(exp.get("trials", 1))
        if slots < 1:
            _fail(errors, "experiment.slots must be >= 1")
        if trials < 1:
            _fail(errors, "experiment.trials must be >= 1")
        gd = exp.get("grid")
        if gd is not None:
            try:
                grid = GridSpec(nx=int(gd.get("nx", 41)), ny=int(gd.get("ny", 41)),
                                extent=float(gd.get("extent", 0.8)),
                                z=float(gd.get("z", 0.55)))
            except (TypeError, ValueError) as exc:
                _fail(errors, f"grid: {exc}")
        options = dict(exp.get("options", {}) or {})

    fully_digital = bool(raw.get("fully_digital", False))
    n_rf = int(raw.get("n_rf", 0) or 0)
    if geom is not None and fully_digital:
        n_rf = geom.n_elements

    xi_rule = dict(power.get("xi", {"rule": "bound"}))
    if xi_rule.get("rule") not in ("bound", "fraction", "fixed"):
        _fail(errors, f"xi rule must be bound/fraction/fixed, got {xi_rule.get('rule')!r}")

    # resolve symbol gains and transmit power; some rules need a LoS design
    gains_spec = dict(power.get("gains", {}))
    transmit_spec = dict(power.get("transmit", {}))
    if "static_share" in gains_spec and "static_multiple" in transmit_spec:
        _fail(errors, "gains.static_share with transmit.static_multiple is circular")

    if errors:
        raise ValidationError("; ".join(errors))

    m_users = users.shape[0]
    users_m = users * unit
    eves_m = eves * unit if eves.size else np.zeros((0, 3))

    f = h_eff = None
    needs_design = "static_multiple" in transmit_spec or "static_share" in gains_spec
    if needs_design:
        h_u = channel_matrix(geom, users_m)
        f = (np.eye(geom.n_elements, dtype=np.complex128) if fully_digital
             else pc.design_analog(h_u, n_rf).f)
        h_eff = pc.effective_channel(f, h_u)

    if "target_sinr_db" in gains_spec:
        gains = pc.gains_for_target_sinr(float(gains_spec["target_sinr_db"]), noise_w, m_users)
    elif "explicit" in gains_spec:
        gains = np.asarray(gains_spec["explicit"], dtype=float)
    elif "static_share" in gains_spec:
        gains = None  # resolved after transmit power below
    else:
        raise ValidationError("power.gains needs target_sinr_db, explicit, or static_share")

    if "static_multiple" in transmit_spec:
        p_static = pc.slot_power(f, pc.static_zf(h_eff, gains))
        p_t = float(transmit_spec["static_multiple"]) * p_static
    elif "dbm" in transmit_spec:
        p_t = _dbm_to_watts(float(transmit_spec["dbm"]))
    elif "watts" in transmit_spec:
        p_t = float(transmit_spec["watts"])
    else:
        raise ValidationError("power.transmit needs static_multiple, dbm, or watts")

    if gains is None:
        gains = pc.gains_for_static_power(f, h_eff, float(gains_spec["static_share"]) * p_t,
                                          m_users)

    try:
        scenario = Scenario(geometry=geom, users=users_m, eavesdroppers=eves_m,
                            n_rf=n_rf, noise_power=noise_w, transmit_power=p_t,
                            symbol_gains=gains, modulations=mods,
                            scatterers=tuple(scatterers))
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()[:16]
    return ExperimentConfig(kind=kind, scenario=scenario, seed=seed, slots=slots,
                            trials=trials, grid=grid, options=options, xi_rule=xi_rule,
                            fully_digital=fully_digital, position_unit=unit,
                            config_hash=digest, power_spec=dict(power))


def load_config_dict(path) -> dict:
    try:
        with open(path, "r") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: config root must be a mapping")
    return raw


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML experiment config file."""
    return parse_config_dict(load_config_dict(path))


def preset_dict(name: str) -> dict:
    """Raw dictionary of a shipped preset."""
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("nfsec").joinpath(f"presets/{name}.yaml").read_text()
    return yaml.safe_load(text)


def load_preset(name: str, overrides: dict | None = None) -> ExperimentConfig:
    """Load a shipped preset, optionally with experiment-block overrides."""
    raw = preset_dict(name)
    for key, val in (overrides or {}).items():
        if key in ("kind", "seed", "slots", "trials", "grid", "options"):
            if key == "options":
                raw["experiment"].setdefault("options", {}).update(val)
            else:
                raw["experiment"][key] = val
        else:
            raw[key] = val
    return parse_config_dict(raw)
