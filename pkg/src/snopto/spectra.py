"""Output-light noise spectra for the three measurement prescriptions.

Everything is shot-noise normalized: a bare interferometer reads 1/2 at all
frequencies (double-sided convention), and mechanical motion adds on top.
Three predictions share that baseline.

  qm    standard quantum mechanics; back-action drives the classical
        response g_c, thermal noise adds a Lorentzian at omega_cm, and
        nothing happens at omega_q.
  pre   the nonlinear gravitational term evaluated along the forward
        evolution adds a narrow Lorentzian peak at omega_q of height h_pre
        and width gamma_m on the local baseline 1/2 + beta gamma_sq.
  post  evaluating it along the measured (retrodicted) trajectory instead
        correlates the record with itself through the filter k_filter, and
        the peak turns into a wide shallow dip, depth d_post and width
        (beta + 1) gamma_m.

The filter form used here,

    S_BA = (alpha^2 dG g_q* / hbar^2) (alpha^2 / 2 + s_fzp),

follows from the fact that only the in-phase light quadrature and the
zero-point force are correlated with the nonlinear term; the out-of-phase
shot noise is not and drops out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import HBAR
from .errors import ConfigError, DomainError
from .materials import MaterialSpec, delta_x_zp as _dx_from_b
from .response import (
    OpticalConfig,
    OscillatorConfig,
    alpha_squared,
    beta as _beta,
    g_c,
    g_q,
    delta_g,
    gamma_squared,
    s_fzp,
    s_x_th,
)

PRESCRIPTIONS = ("qm", "pre", "post")


@dataclass(frozen=True)
class SpectrumParams:
    """Oscillator plus measurement strength; the argument bundle for all spectra."""

    osc: OscillatorConfig
    alpha_sq: float

    def __post_init__(self):
        if self.alpha_sq < 0:
            raise DomainError(f"alpha_sq must be >= 0, got {self.alpha_sq}")

    @classmethod
    def from_optics(cls, osc: OscillatorConfig, opt: OpticalConfig) -> "SpectrumParams":
        return cls(osc=osc, alpha_sq=alpha_squared(opt))

    @classmethod
    def from_beta(cls, osc: OscillatorConfig, beta_value: float) -> "SpectrumParams":
        """Convenient when the dimensionless strength is the natural knob."""
        if beta_value < 0:
            raise DomainError(f"beta must be >= 0, got {beta_value}")
        a2 = beta_value * osc.mass * HBAR * osc.gamma_m * osc.omega_q
        return cls(osc=osc, alpha_sq=a2)

    @property
    def beta(self) -> float:
        if self.alpha_sq == 0.0:
            return 0.0
        return _beta(self.alpha_sq, self.osc)

    @property
    def gamma_sq(self) -> float:
        return gamma_squared(self.osc)

    @property
    def omega_q(self) -> float:
        return self.osc.omega_q

    @property
    def baseline(self) -> float:
        return 0.5 + self.beta * self.gamma_sq

    @property
    def well_resolved(self) -> bool:
        """Whether the thermal peak at omega_cm stays clear of the feature at omega_q."""
        return abs(self.osc.omega_q - self.osc.omega_cm) > 10.0 * self.osc.gamma_m


@dataclass(frozen=True)
class LorentzianFeature:
    kind: str  # "peak" | "dip"
    prescription: str  # "pre" | "post"
    center: float  # rad/s
    amplitude: float  # relative to baseline
    fwhm: float  # rad/s
    baseline: float
    valid_narrowband: bool

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError("feature amplitude must be >= 0")
        if self.kind == "dip" and self.amplitude >= 1:
            raise DomainError("dip depth must be < 1")
        if self.fwhm <= 0:
            raise DomainError("fwhm must be > 0")

    def as_dict(self) -> dict:
        return {
            "prescription": self.prescription,
            "kind": self.kind,
            "center": self.center,
            "amplitude": self.amplitude,
            "fwhm": self.fwhm,
            "baseline": self.baseline,
            "valid_narrowband": self.valid_narrowband,
        }


@dataclass(frozen=True)
class OutputSpectrum:
    grid: np.ndarray
    values: np.ndarray
    prescription: str
    well_resolved: bool


def s_qm(omega, params: SpectrumParams):
    """Standard-QM output spectrum: shot floor, back action on g_c, thermal noise."""
    p, osc = params, params.osc
    gc2 = np.abs(g_c(omega, osc)) ** 2
    return 0.5 + (p.alpha_sq**2 / (2.0 * HBAR**2)) * gc2 + (p.alpha_sq / HBAR**2) * s_x_th(omega, osc)


def s_aa(omega, params: SpectrumParams):
    """Ensemble-free part of the record: shot floor plus g_q driven by back action and zero-point force."""
    p, osc = params, params.osc
    gq2 = np.abs(g_q(omega, osc)) ** 2
    return 0.5 + (p.alpha_sq**2 / (2.0 * HBAR**2)) * gq2 + (p.alpha_sq / HBAR**2) * gq2 * s_fzp(omega, osc)


def s_pre_total(omega, params: SpectrumParams):
    """Forward-evaluated prescription: s_aa plus the classical thermal Lorentzian."""
    p, osc = params, params.osc
    return s_aa(omega, params) + (p.alpha_sq / HBAR**2) * s_x_th(omega, osc)


def k_filter(omega, params: SpectrumParams):
    """Correlation filter K = S_BA / S_AA; identically zero when omega_sn = 0."""
    p, osc = params, params.osc
    s_ba = (
        (p.alpha_sq / HBAR**2)
        * delta_g(omega, osc)
        * np.conj(g_q(omega, osc))
        * (p.alpha_sq / 2.0 + s_fzp(omega, osc))
    )
    return s_ba / s_aa(omega, params)


def s_post_total(omega, params: SpectrumParams):
    """Retrodicted prescription: |1 + K|^2 s_aa plus the thermal Lorentzian."""
    p, osc = params, params.osc
    filtered = np.abs(1.0 + k_filter(omega, params)) ** 2 * s_aa(omega, params)
    return filtered + (p.alpha_sq / HBAR**2) * s_x_th(omega, osc)


def evaluate(prescription: str, omega, params: SpectrumParams) -> OutputSpectrum:
    try:
        fn = {"qm": s_qm, "pre": s_pre_total, "post": s_post_total}[prescription]
    except KeyError:
        raise ConfigError(f"prescription must be one of {PRESCRIPTIONS}, got {prescription!r}")
    omega = np.asarray(omega, dtype=float)
    return OutputSpectrum(
        grid=omega,
        values=np.asarray(fn(omega, params), dtype=float),
        prescription=prescription,
        well_resolved=params.well_resolved,
    )


def pre_feature(params: SpectrumParams) -> LorentzianFeature:
    """Closed-form peak: h = beta (beta + 2) / (2 (1/2 + beta gamma_sq)), width gamma_m."""
    b, g2 = params.beta, params.gamma_sq
    return LorentzianFeature(
        kind="peak",
        prescription="pre",
        center=params.omega_q,
        amplitude=b * (b + 2.0) / (2.0 * (0.5 + b * g2)),
        fwhm=params.osc.gamma_m,
        baseline=0.5 + b * g2,
        valid_narrowband=params.well_resolved,
    )


def post_feature(params: SpectrumParams) -> LorentzianFeature:
    """Closed-form dip: depth h_pre / (beta + 1)^2, width (beta + 1) gamma_m."""
    b, g2 = params.beta, params.gamma_sq
    return LorentzianFeature(
        kind="dip",
        prescription="post",
        center=params.omega_q,
        amplitude=b * (b + 2.0) / (2.0 * (0.5 + b * g2) * (b + 1.0) ** 2),
        fwhm=(b + 1.0) * params.osc.gamma_m,
        baseline=0.5 + b * g2,
        valid_narrowband=params.well_resolved,
    )


def delta_x_cm(params: SpectrumParams) -> float:
    """Steady-state center-of-mass spread sqrt((beta + 2)/2) times the omega_q ground-state width."""
    return float(np.sqrt((params.beta + 2.0) / 2.0 * HBAR / (2.0 * params.osc.mass * params.omega_q)))


class BetaLimit(NamedTuple):
    limit: float
    recommended: float  # limit / 10


def beta_limit(params: SpectrumParams, material) -> BetaLimit:
    """Largest beta before the measured spread reaches the lattice zero-point spread.

    Requiring delta_x_cm <= sqrt(2) delta_x_zp gives
    beta <= 2 delta_x_zp^2 / (hbar / 2 M omega_q); running at a tenth of that
    keeps the rigid-lattice picture comfortably valid. `material` may be a
    MaterialSpec or a raw delta_x_zp in meters.
    """
    if isinstance(material, MaterialSpec):
        dx = _dx_from_b(material.debye_waller_B)
    else:
        dx = float(material)
        if dx <= 0:
            raise DomainError(f"delta_x_zp must be > 0, got {dx}")
    lim = 2.0 * dx**2 / (HBAR / (2.0 * params.osc.mass * params.omega_q))
    return BetaLimit(limit=lim, recommended=lim / 10.0)


def default_grid(params: SpectrumParams, prescription: str = "pre", n_broad: int = 600, n_fine: int = 801) -> np.ndarray:
    """Log-spaced broad grid with linear refinements around omega_cm and omega_q.

    Both features are narrow (widths of order gamma_m, which can be many
    orders below omega_q), so a plain log grid would miss them entirely;
    each resonance gets a +-20 FWHM linear window.
    """
    osc = params.osc
    wq = params.omega_q
    fwhm_q = (params.beta + 1.0) * osc.gamma_m if prescription == "post" else osc.gamma_m
    pieces = [np.geomspace(wq * 1e-3, wq * 1e3, n_broad)]
    for center, width in ((osc.omega_cm, osc.gamma_m), (wq, fwhm_q)):
        if center > 0 and width > 0:
            lo = max(center - 20.0 * width, center * 1e-6)
            pieces.append(np.linspace(lo, center + 20.0 * width, n_fine))
    grid = np.unique(np.concatenate(pieces))
    return grid[grid > 0]


def measure_feature(omega, values, kind: str):
    """Numeric (center, amplitude, fwhm, baseline) from a sampled spectrum window.

    The window should bracket one feature and nothing else; the baseline is
    estimated from the outer 20 percent of samples on each side. Amplitude
    follows the same relative-to-baseline convention as the closed forms.
    Half-width points are located by linear interpolation on each flank.
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    if omega.ndim != 1 or omega.size < 16 or omega.shape != values.shape:
        raise ConfigError("need matching 1-d arrays with at least 16 samples")
    edge = max(2, omega.size // 5)
    baseline = float(np.median(np.concatenate([values[:edge], values[-edge:]])))
    if baseline <= 0:
        raise DomainError("non-positive baseline estimate")
    idx = int(np.argmax(values)) if kind == "peak" else int(np.argmin(values))
    center = float(omega[idx])
    extremum = float(values[idx])
    if kind == "peak":
        amplitude = (extremum - baseline) / baseline
        half = baseline + (extremum - baseline) / 2.0
        above = values >= half
    elif kind == "dip":
        amplitude = (baseline - extremum) / baseline
        half = baseline - (baseline - extremum) / 2.0
        above = values <= half
    else:
        raise ConfigError(f"kind must be 'peak' or 'dip', got {kind!r}")

    def crossing(i_from, i_to, step):
        prev = i_from
        for i in range(i_from, i_to, step):
            if not above[i]:
                x0, x1 = omega[i], omega[prev]
                y0, y1 = values[i], values[prev]
                if y1 == y0:
                    return x0
                return x0 + (half - y0) * (x1 - x0) / (y1 - y0)
            prev = i
        raise DomainError("half-maximum crossing not inside the window")

    left = crossing(idx, -1, -1)
    right = crossing(idx, omega.size, 1)
    return center, amplitude, float(right - left), baseline
