"""Torsion-pendulum experiment budgeting.

Restores units for the noise bound and estimates what it takes to run the
test on gravitationally coupled torsional oscillators: the coupling g from
the dumbbell density, thermal phonon occupation, per-shot time, and the
integration time for a target significance. Two frequency conventions are
supported because the quoted mHz figures are only mutually consistent under
one of them each; reports carry both rather than silently choosing.
"""

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import G_NEWTON, HBAR, K_BOLTZMANN, YEAR_SECONDS
from .dynamics import QuadraticHamiltonian
from .errors import PhysicsRejection
from .noise import NoiseReport

OMEGA_CONVENTIONS = ("hz-cycles", "rad-s")


def angular_frequency(value: float, convention: str) -> float:
    """Interpret a frequency figure: 'hz-cycles' multiplies by 2 pi."""
    if convention not in OMEGA_CONVENTIONS:
        raise ValueError(f"omega convention must be one of {OMEGA_CONVENTIONS}")
    return 2.0 * math.pi * value if convention == "hz-cycles" else float(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Physical parameters of one oscillator-pair experiment (SI units)."""

    mass_density: float          # kg / m^3
    omega: float                 # rad / s (use angular_frequency to convert)
    quality_factor: float
    temperature: float           # K
    geometry_factor: float = 1.0
    sigma_target: float = 5.0
    shot_time: float = None      # s; defaults to 1/g
    moment_of_inertia: float = None  # kg m^2, optional

    def __post_init__(self):
        positive = {
            "mass_density": self.mass_density,
            "omega": self.omega,
            "quality_factor": self.quality_factor,
            "temperature": self.temperature,
            "sigma_target": self.sigma_target,
        }
        for name, value in positive.items():
            if not (value > 0 and math.isfinite(value)):
                raise PhysicsRejection(f"{name} must be positive and finite, got {value}")
        if not 0.1 <= self.geometry_factor <= 10.0:
            raise PhysicsRejection(
                f"geometry_factor must lie in [0.1, 10], got {self.geometry_factor}"
            )
        if self.shot_time is not None and not self.shot_time > 0:
            raise PhysicsRejection(f"shot_time must be positive, got {self.shot_time}")
        if self.moment_of_inertia is not None and not self.moment_of_inertia > 0:
            raise PhysicsRejection("moment_of_inertia must be positive")


def coupling_g(config: ExperimentConfig) -> float:
    """Gravitational coupling rate, geometry_factor * G * density / omega (1/s)."""
    if config.omega == 0:
        raise PhysicsRejection("omega must be nonzero")
    return config.geometry_factor * G_NEWTON * config.mass_density / config.omega


def thermal_occupation(config: ExperimentConfig) -> float:
    """Steady-state phonon occupation k_B T / (hbar omega)."""
    nbar = K_BOLTZMANN * config.temperature / (HBAR * config.omega)
    if nbar < 10.0:
        warnings.warn(
            f"thermal occupation {nbar:.3g} is not >> 1; the high-temperature "
            "shot-noise model is outside its regime",
            stacklevel=2,
        )
    return nbar


@dataclass(frozen=True)
class BudgetReport:
    """Derived quantities for one configuration (SI units)."""

    g: float                     # 1/s
    nbar: float
    kappa: float                 # 1/s
    tau: float                   # s, single-shot time
    snr_per_shot_group: float    # S/N accumulated in one 2*tau block
    t_int_target: float          # s, from inverting the S/N formula
    t_int_closed_form: float     # s, the 50/g (kT / hbar g Q)^2 estimate
    t_int_target_years: float
    t_int_closed_form_years: float
    closed_form_ratio: float
    noise_bound: float = None    # 2 g hbar I omega, when I is supplied

    def as_dict(self) -> dict:
        out = {
            "g_per_s": self.g,
            "nbar": self.nbar,
            "kappa_per_s": self.kappa,
            "tau_s": self.tau,
            "snr_per_shot_group": self.snr_per_shot_group,
            "t_int_target_s": self.t_int_target,
            "t_int_target_years": self.t_int_target_years,
            "t_int_closed_form_s": self.t_int_closed_form,
            "t_int_closed_form_years": self.t_int_closed_form_years,
            "closed_form_ratio": self.closed_form_ratio,
        }
        if self.noise_bound is not None:
            out["noise_bound_J_per_s"] = self.noise_bound
        return out


def budget(config: ExperimentConfig) -> BudgetReport:
    """Full experiment budget for one configuration.

    The integration time comes from inverting S/N = (g / (nbar kappa)) *
    sqrt(T / (2 tau)) at the target significance; the closed-form variant
    assumes tau = 1/g and is reported alongside with their ratio.
    """
    g = coupling_g(config)
    nbar = thermal_occupation(config)
    kappa = config.omega / config.quality_factor
    tau = config.shot_time if config.shot_time is not None else 1.0 / g
    snr_one_group = (g / (nbar * kappa))
    t_int = 2.0 * tau * (config.sigma_target * nbar * kappa / g) ** 2
    closed = (50.0 / g) * (K_BOLTZMANN * config.temperature
                           / (HBAR * g * config.quality_factor)) ** 2
    noise_bound = None
    if config.moment_of_inertia is not None:
        noise_bound = 2.0 * g * HBAR * config.moment_of_inertia * config.omega
    return BudgetReport(
        g=g,
        nbar=nbar,
        kappa=kappa,
        tau=tau,
        snr_per_shot_group=snr_one_group,
        t_int_target=t_int,
        t_int_closed_form=closed,
        t_int_target_years=t_int / YEAR_SECONDS,
        t_int_closed_form_years=closed / YEAR_SECONDS,
        closed_form_ratio=t_int / closed if closed > 0 else math.inf,
        noise_bound=noise_bound,
    )


@dataclass(frozen=True)
class GravitationalHamiltonian:
    """Quadratic torsion Hamiltonian coefficients (SI units)."""

    moment_of_inertia: float     # I = 2 M R^2
    omega: float                 # rad/s
    g: float                     # 1/s
    stiffness: float             # coefficient of theta_a^2 + theta_b^2
    cross_term: float            # coefficient of theta_a theta_b

    def to_unit_oscillator(self) -> QuadraticHamiltonian:
        """Dimensionless form (hbar = omega = 1): shifts g/omega, coupling -g/omega."""
        ratio = self.g / self.omega
        return QuadraticHamiltonian(nu_a=ratio, nu_b=ratio, g=-ratio)


def gravitational_hamiltonian(
    M: float, R: float, r: float, omega: float, geometry_factor: float = 1.0
) -> GravitationalHamiltonian:
    """Coefficients of the coupled-dumbbell Hamiltonian.

    Each dumbbell carries two spheres of mass M and radius r at distance R
    from the rotation axis; expanding the gravitational interaction of
    adjacent spheres to quadratic order gives kinetic L^2 / 2I, a stiffness
    (I omega (omega + g) / 2) theta^2 per oscillator, and the cross term
    -I omega g theta_a theta_b.
    """
    if not (M > 0 and R > 0 and r > 0 and omega > 0):
        raise PhysicsRejection("mass, lengths, and frequency must be positive")
    if r >= R:
        raise PhysicsRejection(
            f"sphere radius r = {r} must be smaller than the arm length R = {R}"
        )
    density = M / (4.0 / 3.0 * math.pi * r ** 3)
    I = 2.0 * M * R ** 2
    g = geometry_factor * G_NEWTON * density / omega
    return GravitationalHamiltonian(
        moment_of_inertia=I,
        omega=omega,
        g=g,
        stiffness=0.5 * I * omega * (omega + g),
        cross_term=-I * omega * g,
    )


# --- damping transforms (beyond the dimensionless model) ---


def damped_dynamics(dyn, kappa: float, nbar: float):
    """Add weak-coupling thermal damping to a Gaussian generator.

    drift -= kappa/2, diffusion += kappa (2 nbar + 1). This weak-coupling
    bath is extra modeling beyond the dimensionless core: the damped form of
    the noise test only needs the (d/dt + kappa) transform, not this bath.
    """
    from .dynamics import GaussianDynamics

    drift = dyn.drift - 0.5 * kappa * np.eye(4)
    diffusion = dyn.diffusion + kappa * (2.0 * nbar + 1.0) * np.eye(4)
    return GaussianDynamics(drift=drift, diffusion=diffusion, hamiltonian=dyn.hamiltonian)


def damped_rate_series(report: NoiseReport, kappa: float) -> np.ndarray:
    """(d/dt + kappa) applied to the excess series: the damped-test statistic."""
    return report.rate + kappa * report.excess


# --- configuration files ---

_CONFIG_KEYS = {
    "mass_density": float,
    "frequency": float,
    "omega_convention": str,
    "quality_factor": float,
    "temperature": float,
    "geometry_factor": float,
    "sigma_target": float,
    "shot_time": float,
    "moment_of_inertia": float,
}
_REQUIRED_KEYS = ("mass_density", "frequency", "quality_factor", "temperature")


def parse_config_text(text: str) -> dict:
    """Parse 'key = value' lines (or a JSON object) into raw config fields.

    Raises ValueError with the offending line number on malformed input.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {exc.lineno}: invalid JSON config ({exc.msg})") from exc
        if not isinstance(raw, dict):
            raise ValueError("line 1: JSON config must be an object")
        items = list(raw.items())
    else:
        items = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in body.split("=", 1))
            items.append((key, value, lineno))

    fields_out = {}
    for item in items:
        key, value, lineno = item if len(item) == 3 else (item[0], item[1], 0)
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        caster = _CONFIG_KEYS[key]
        try:
            fields_out[key] = caster(value)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {key} = {value!r}") from exc
    missing = [key for key in _REQUIRED_KEYS if key not in fields_out]
    if missing:
        raise ValueError(f"config is missing required keys: {', '.join(missing)}")
    return fields_out


def config_from_fields(fields: dict, convention: str) -> ExperimentConfig:
    kwargs = {
        "mass_density": fields["mass_density"],
        "omega": angular_frequency(fields["frequency"], convention),
        "quality_factor": fields["quality_factor"],
        "temperature": fields["temperature"],
    }
    for key in ("geometry_factor", "sigma_target", "shot_time", "moment_of_inertia"):
        if key in fields:
            kwargs[key] = fields[key]
    return ExperimentConfig(**kwargs)


def plan_experiment(fields: dict) -> dict:
    """Budget the same raw figures under both frequency conventions.

    The coupling figure is reproduced by the cycles convention while the
    integration-time lore matches the angular one, so the report surfaces
    both and their 2-pi relation instead of choosing.
    """
    reports = {}
    for convention in OMEGA_CONVENTIONS:
        cfg = config_from_fields(fields, convention)
        reports[convention] = budget(cfg).as_dict()
    ratio = reports["rad-s"]["g_per_s"] / reports["hz-cycles"]["g_per_s"]
    return {
        "input": dict(fields),
        "reports": reports,
        "convention_g_ratio": ratio,
        "notes": [
            "g values under the two conventions differ by exactly 2*pi",
            "integration-time figures are reported under both conventions; "
            "they are not mutually consistent with a single convention, "
            "so neither is treated as ground truth",
        ],
    }
