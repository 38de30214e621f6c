"""Declarative study configuration with unit-suffixed TOML keys."""

from __future__ import annotations

import copy
import hashlib
import math
import sys
from dataclasses import dataclass
from importlib import resources

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from scipy import constants

from .photonics import CASES, FiberSpec
from .trap import ATOMIC_POLARIZABILITY, AtomSpec, Polarizability

SWEEP_VARIABLES = {
    "radius": "nm",
    "temperature": "K",
    "power": "mW",
    "resonator_length": "um",
    "trap_frequency": "kHz",
}
UNIT_SUFFIXES = (
    "_nm", "_um", "_mm", "_K", "_GPa", "_g_per_cm3", "_kg", "_hbar", "_THz_nm3", "_deg", "_rad", "_au",
    "_mW", "_Hz", "_kHz", "_per_um", "_count", "_dimensionless", "_K_per_mW", "_K_per_mW2",
)


class ConfigError(ValueError):
    """The configuration document is malformed or fails validation."""


def _spec(**keys):
    return keys


# key -> (kind, required)
FIBER_KEYS = _spec(
    radius_nm=("float", True),
    relative_permittivity_dimensionless=("float", True),
    young_modulus_GPa=("float", True),
    poisson_ratio_dimensionless=("float", True),
    density_g_per_cm3=("float", True),
    photoelastic_p1_dimensionless=("float", True),
    photoelastic_p2_dimensionless=("float", True),
    temperature_K=("float", True),
    length_mm=("float", True),
)
ATOM_KEYS = _spec(
    mass_kg=("float", True),
    F_hbar=("float", True),
    M_F_hbar=("float", True),
    J_hbar=("float", True),
    I_hbar=("float", True),
    casimir_polder_C_over_h_THz_nm3=("float", True),
    quantization_azimuth_deg=("float", True),
    polarizability=("table", True),
)
POLARIZABILITY_KEYS = _spec(scalar_au=("float", True), vector_au=("float", True), tensor_au=("float", False))
LASER_KEYS = _spec(
    wavelength_nm=("float", True),
    power_mW=("float", True),
    case=("str", True),
    theta_rad=("float", False),
    theta_phi_rad=("float", False),
    theta_z_rad=("float", False),
    theta_z_reference=("str", False),
)
TRAP_KEYS = _spec(
    seed_r_nm=("float", True),
    seed_phi_rad=("float", True),
    site_z_over_length_dimensionless=("floats", True),
    include_casimir_polder=("bool", False),
)
PHONON_KEYS = _spec(
    torsional_kappa_over_2pi_Hz=("float", True),
    torsional_modes_count=("int", False),
    standing_convention=("str", False),
)
BAND_KEYS = _spec(
    photon_k_min_per_um=("float", True),
    photon_k_max_per_um=("float", True),
    photon_k_points_count=("int", True),
    photon_bands=("strs", True),
    phonon_p_min_per_um=("float", True),
    phonon_p_max_per_um=("float", True),
    phonon_p_points_count=("int", True),
    phonon_bands=("strs", True),
)
RESONATOR_KEYS = _spec(
    length_min_um=("float", True),
    length_max_um=("float", True),
    length_points_count=("int", True),
    kappa_over_2pi_Hz=("floats", True),
    z0_over_length_dimensionless=("float", True),
    trap_frequency_over_2pi_kHz=("float", True),
    require_regime=("str", False),
)
SWEEP_BASE_KEYS = _spec(
    variable=("str", True),
    points_count=("int", True),
    spacing=("str", False),
    resonator_length_um=("float", False),
    temperature_m0_K=("float", False),
    temperature_m1_K_per_mW=("float", False),
    temperature_m2_K_per_mW2=("float", False),
    blue_to_red_power_ratio_dimensionless=("float", False),
)
TOP_KEYS = _spec(
    fiber=("table", True), atom=("table", True), lasers=("table", True), trap=("table", True),
    phonons=("table", True), bands=("table", False), resonator=("table", False), sweep=("tables", False),
)
REGIMES = ("none", "below", "above", "resonant")


def _check_value(where: str, key: str, kind: str, value):
    ok = {
        "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "floats": lambda v: isinstance(v, list) and len(v) > 0 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in v),
        "str": lambda v: isinstance(v, str),
        "strs": lambda v: isinstance(v, list) and all(isinstance(x, str) for x in v),
        "bool": lambda v: isinstance(v, bool),
        "table": lambda v: isinstance(v, dict),
        "tables": lambda v: isinstance(v, list) and all(isinstance(x, dict) for x in v),
    }[kind](value)
    if not ok:
        raise ConfigError(f"{where}.{key}: expected {kind}, got {value!r}")


def _check_table(where: str, table: dict, keys: dict):
    for key, value in table.items():
        if key in keys:
            _check_value(where, key, keys[key][0], value)
            continue
        numeric = isinstance(value, (int, float, list)) and not isinstance(value, bool)
        if numeric and not key.endswith(UNIT_SUFFIXES):
            raise ConfigError(f"{where}.{key}: numeric keys must carry a unit suffix")
        raise ConfigError(f"{where}.{key}: unknown key")
    missing = [k for k, (_, required) in keys.items() if required and k not in table]
    if missing:
        raise ConfigError(f"{where}: missing keys {', '.join(missing)}")


def validate(document: dict) -> None:
    """Raise :class:`ConfigError` unless ``document`` follows the study schema."""
    _check_table("config", document, TOP_KEYS)
    _check_table("fiber", document["fiber"], FIBER_KEYS)
    atom = document["atom"]
    _check_table("atom", atom, ATOM_KEYS)
    lasers = document["lasers"]
    if not lasers:
        raise ConfigError("lasers: at least one color is required")
    for color, laser in lasers.items():
        _check_value("lasers", color, "table", laser)
        _check_table(f"lasers.{color}", laser, LASER_KEYS)
        if laser["case"] not in CASES:
            raise ConfigError(f"lasers.{color}.case: expected one of {CASES}")
        if laser.get("theta_z_reference", "origin") not in ("origin", "fiber-center"):
            raise ConfigError(f"lasers.{color}.theta_z_reference: expected origin or fiber-center")
        if color not in atom["polarizability"]:
            raise ConfigError(f"atom.polarizability: missing color {color!r}")
    for color, pol in atom["polarizability"].items():
        _check_value("atom.polarizability", color, "table", pol)
        _check_table(f"atom.polarizability.{color}", pol, POLARIZABILITY_KEYS)
    _check_table("trap", document["trap"], TRAP_KEYS)
    _check_table("phonons", document["phonons"], PHONON_KEYS)
    if document["phonons"].get("standing_convention", "physical") not in ("physical", "cos-running"):
        raise ConfigError("phonons.standing_convention: expected physical or cos-running")
    if "bands" in document:
        _check_table("bands", document["bands"], BAND_KEYS)
    if "resonator" in document:
        _check_table("resonator", document["resonator"], RESONATOR_KEYS)
        if document["resonator"].get("require_regime", "none") not in REGIMES:
            raise ConfigError(f"resonator.require_regime: expected one of {REGIMES}")
    for i, sweep in enumerate(document.get("sweep", [])):
        variable = sweep.get("variable")
        if variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep[{i}].variable: expected one of {tuple(SWEEP_VARIABLES)}")
        unit = SWEEP_VARIABLES[variable]
        keys = dict(SWEEP_BASE_KEYS, **{f"start_{unit}": ("float", True), f"stop_{unit}": ("float", True)})
        if variable == "power":
            for k in ("temperature_m0_K", "temperature_m1_K_per_mW", "temperature_m2_K_per_mW2",
                      "blue_to_red_power_ratio_dimensionless"):
                keys[k] = ("float", True)
        if variable == "trap_frequency":
            keys["resonator_length_um"] = ("float", True)
        _check_table(f"sweep[{i}]", sweep, keys)
        if sweep.get("spacing", "linear") not in ("linear", "log"):
            raise ConfigError(f"sweep[{i}].spacing: expected linear or log")
        if sweep["points_count"] < 1:
            raise ConfigError(f"sweep[{i}].points_count: must be positive")
        if variable in ("trap_frequency", "resonator_length") and "resonator" not in document:
            raise ConfigError(f"sweep[{i}]: a {variable} sweep needs the resonator table")


@dataclass(frozen=True)
class LaserSpec:
    color: str
    wavelength: float
    power: float
    case: str
    theta: float
    theta_phi: float
    theta_z: float
    theta_z_reference: str

    @property
    def omega(self) -> float:
        return 2 * math.pi * constants.c / self.wavelength

    @property
    def beams(self) -> int:
        return 2 if self.case == "quasilinear-stand" else 1


@dataclass(frozen=True)
class StudyConfig:
    """A validated configuration document; SI objects are derived on access."""

    document: dict

    def __post_init__(self):
        validate(self.document)
        try:
            self.fiber
            self.atom
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def fiber(self) -> FiberSpec:
        d = self.document["fiber"]
        return FiberSpec(
            radius=d["radius_nm"] / 1e9,
            permittivity=float(d["relative_permittivity_dimensionless"]),
            young_modulus=d["young_modulus_GPa"] * 1e9,
            poisson_ratio=float(d["poisson_ratio_dimensionless"]),
            density=d["density_g_per_cm3"] * 1e3,
            p1=float(d["photoelastic_p1_dimensionless"]),
            p2=float(d["photoelastic_p2_dimensionless"]),
            temperature=float(d["temperature_K"]),
            length=d["length_mm"] / 1e3,
        )

    @property
    def atom(self) -> AtomSpec:
        d = self.document["atom"]
        pols = {c: Polarizability(p["scalar_au"] * ATOMIC_POLARIZABILITY, p["vector_au"] * ATOMIC_POLARIZABILITY,
                                  p.get("tensor_au", 0.0) * ATOMIC_POLARIZABILITY)
                for c, p in d["polarizability"].items()}
        return AtomSpec(
            mass=float(d["mass_kg"]),
            F=float(d["F_hbar"]),
            M_F=float(d["M_F_hbar"]),
            J=float(d["J_hbar"]),
            I=float(d["I_hbar"]),
            polarizabilities=pols,
            c_cp=d["casimir_polder_C_over_h_THz_nm3"] * 1e12 * 1e-27 * constants.h,
            phi_B=math.radians(d["quantization_azimuth_deg"]),
        )

    @property
    def lasers(self) -> dict:
        out = {}
        for color, d in self.document["lasers"].items():
            out[color] = LaserSpec(color, d["wavelength_nm"] / 1e9, d["power_mW"] / 1e3, d["case"],
                                   float(d.get("theta_rad", 0.0)), float(d.get("theta_phi_rad", 0.0)),
                                   float(d.get("theta_z_rad", 0.0)), d.get("theta_z_reference", "origin"))
        return out

    @property
    def temperature(self) -> float:
        return float(self.document["fiber"]["temperature_K"])

    @property
    def trap_seed(self) -> tuple[float, float]:
        d = self.document["trap"]
        return d["seed_r_nm"] / 1e9, float(d["seed_phi_rad"])

    @property
    def site_fractions(self) -> list[float]:
        return [float(x) for x in self.document["trap"]["site_z_over_length_dimensionless"]]

    @property
    def include_cp(self) -> bool:
        return bool(self.document["trap"].get("include_casimir_polder", True))

    @property
    def torsional_kappa(self) -> float:
        return 2 * math.pi * self.document["phonons"]["torsional_kappa_over_2pi_Hz"]

    @property
    def torsional_modes(self) -> int:
        return int(self.document["phonons"].get("torsional_modes_count", 1))

    @property
    def standing_convention(self) -> str:
        return self.document["phonons"].get("standing_convention", "physical")

    @property
    def sweeps(self) -> list[dict]:
        return list(self.document.get("sweep", []))

    def section(self, name: str) -> dict:
        if name not in self.document:
            raise ConfigError(f"config has no {name} table")
        return self.document[name]

    def replace(self, path: tuple, value) -> "StudyConfig":
        """Copy with one value changed; ``path`` lists the nested keys."""
        doc = copy.deepcopy(self.document)
        node = doc
        for key in path[:-1]:
            node = node[key]
        node[path[-1]] = value
        return StudyConfig(doc)

    def dumps(self) -> str:
        return dumps(self)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()


def loads(text: str) -> StudyConfig:
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return StudyConfig(document)


def load(path) -> StudyConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def dumps(config: StudyConfig) -> str:
    return tomli_w.dumps(config.document)


def bundled_case_study_text() -> str:
    return resources.files("artifact").joinpath("data/case_study.toml").read_text()


def bundled_case_study() -> StudyConfig:
    """The nanofiber two-color trap case study shipped with the package."""
    return loads(bundled_case_study_text())
