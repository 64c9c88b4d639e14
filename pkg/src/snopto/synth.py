"""Stationary Gaussian record synthesis and demodulation.

The measured photocurrent, shot-noise normalized, is modeled around a
narrow feature as a unit white floor plus a Lorentzian peak or dip:

    S(omega) = 1 +- a / (1 + 4 omega^2 / gamma^2)

in double-sided convention with the d omega / 2 pi measure. Its
autocovariance is a delta at lag zero (value 1/dt once discretized)
plus +- a (gamma/4) exp(-gamma |tau| / 2).

Records are drawn two ways and cross-validated against each other: an
exact Cholesky factorization of the Toeplitz covariance for short series,
and circulant embedding with frequency-domain synthesis for long ones.
Both are exact samplers of a stationary Gaussian law; they simply spend
their floating-point effort differently, and they consume the random
stream differently, so series from the two methods with the same seed are
different realizations of the same law.

Short records are statistically legitimate at any length >= 2 (the
covariance is exact, nothing here is asymptotic); they are only
spectrally unresolved. A caller who wants a periodogram that resolves the
feature should use durations well beyond 1/gamma, e.g. the default 200/gamma.

Demodulation mixes a band around a carrier down to zero frequency:
forward transform, keep the bins in [center - sigma, center + sigma],
inverse transform, multiply by exp(-i center t). Since the kept band
lives entirely at positive frequencies the complex baseband is proper
(its pseudo-spectrum would need support at -2 center, which is outside
the band), which is exactly why its real and imaginary parts come out as
independent quadratures.

Seed discipline, used verbatim by the decision Monte Carlo: trial i of a
run with master seed s draws from
numpy.random.default_rng(numpy.random.SeedSequence(entropy=s, spawn_key=(i,))).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import cholesky, toeplitz

from .errors import ConfigError, DomainError

KINDS = ("flat", "peak", "dip")

# beyond the cholesky_max_n cutoff the O(n^3) factorization stops paying
CHOLESKY_MAX_N = 4000


@dataclass(frozen=True)
class BasebandModel:
    kind: str
    amplitude: float = 0.0  # h for a peak, d for a dip
    fwhm_gamma: float = 0.0  # rad/s

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.amplitude < 0:
            raise DomainError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.kind != "flat":
            if self.fwhm_gamma <= 0:
                raise ConfigError("peak/dip models need fwhm_gamma > 0")
            if self.kind == "dip" and self.amplitude >= 1:
                raise DomainError(
                    f"dip amplitude {self.amplitude} >= 1 makes the spectrum non-positive"
                )

    @property
    def tag(self) -> str:
        if self.kind == "flat":
            return "flat"
        return f"{self.kind}(a={self.amplitude:g},gamma={self.fwhm_gamma:g})"

    @property
    def _sign(self) -> float:
        return {"flat": 0.0, "peak": 1.0, "dip": -1.0}[self.kind]

    def psd(self, omega):
        """Double-sided spectrum, unit white floor plus the feature."""
        omega = np.asarray(omega, dtype=float)
        if self.kind == "flat":
            return np.ones_like(omega)
        lor = 1.0 / (1.0 + 4.0 * omega**2 / self.fwhm_gamma**2)
        return 1.0 + self._sign * self.amplitude * lor


@dataclass(frozen=True)
class BasebandSeries:
    dt: float
    samples: np.ndarray
    seed: int
    model_tag: str

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.dt <= 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise DomainError("a series needs at least 2 samples")
        if not np.all(np.isfinite(self.samples)):
            raise DomainError("series contains non-finite samples")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt


@dataclass(frozen=True)
class ComplexBaseband:
    dt: float
    samples: np.ndarray
    seed: int
    model_tag: str
    center: float
    halfwidth: float

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.dt


@dataclass(frozen=True)
class DemodConfig:
    center: float  # rad/s, the carrier (the trap-stiffened resonance in use)
    halfwidth_sigma: float  # rad/s

    def __post_init__(self):
        if self.halfwidth_sigma <= 0:
            raise ConfigError("halfwidth_sigma must be > 0")
        if self.center - self.halfwidth_sigma <= 0:
            raise ConfigError(
                "band must sit at positive frequencies: center - halfwidth must be > 0"
            )


def target_autocovariance(model: BasebandModel, lag, dt: float | None = None):
    """Autocovariance of the model spectrum at the given lag (s).

    The continuous part is +- a (gamma/4) exp(-gamma |lag| / 2); the white
    floor contributes only at lag 0, where its discretized value 1/dt is
    added when dt is supplied. Without dt the white part is omitted, which
    is the convenient convention for closed-form checks of the feature.
    """
    lag = np.asarray(lag, dtype=float)
    if model.kind == "flat":
        cont = np.zeros_like(lag)
    else:
        g = model.fwhm_gamma
        cont = model._sign * model.amplitude * (g / 4.0) * np.exp(-g * np.abs(lag) / 2.0)
    if dt is not None:
        cont = cont + np.where(lag == 0.0, 1.0 / dt, 0.0)
    return cont if cont.ndim else float(cont)


def covariance_row(model: BasebandModel, n: int, dt: float) -> np.ndarray:
    """First row of the n x n discrete covariance (Toeplitz) matrix."""
    if n < 1:
        raise ConfigError("need n >= 1")
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    row = np.asarray(target_autocovariance(model, np.arange(n) * dt), dtype=float)
    row[0] += 1.0 / dt
    return row


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Per-trial generator; the documented bit-exact derivation rule."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return np.random.default_rng(ss)


def _check_resolution(model: BasebandModel, dt: float):
    if model.kind != "flat" and dt * model.fwhm_gamma > 0.5:
        raise ConfigError(
            f"dt * gamma = {dt * model.fwhm_gamma:.3f} > 0.5: the feature is unresolved"
        )


@lru_cache(maxsize=8)
def _cholesky_factor(kind: str, amplitude: float, fwhm_gamma: float, n: int, dt: float):
    model = BasebandModel(kind, amplitude, fwhm_gamma)
    sigma = toeplitz(covariance_row(model, n, dt))
    return cholesky(sigma, lower=True)


@lru_cache(maxsize=8)
def _embedding_eigs(kind: str, amplitude: float, fwhm_gamma: float, n: int, dt: float):
    """Eigenvalues of the circulant embedding of the covariance.

    The covariance row is periodized to length 2n - 2 (the classic minimal
    embedding); its discrete transform gives the circulant eigenvalues.
    For an exponentially decaying row on top of a dominant white diagonal
    they are provably positive; tiny negative round-off is clamped to zero,
    anything materially negative means the embedding failed.
    """
    model = BasebandModel(kind, amplitude, fwhm_gamma)
    row = covariance_row(model, n, dt)
    ext = np.concatenate([row, row[-2:0:-1]])
    lam = np.fft.fft(ext).real
    floor = -1e-12 * lam.max()
    if lam.min() < floor:
        raise DomainError(
            f"circulant embedding not non-negative definite (min eig {lam.min():.3e})"
        )
    return np.clip(lam, 0.0, None)


def gen_baseband(
    model: BasebandModel,
    duration: float,
    dt: float,
    seed: int,
    method: str = "auto",
) -> BasebandSeries:
    """Draw one zero-mean stationary Gaussian record of the model spectrum.

    n = round(duration / dt) samples. method "cholesky" factorizes the
    exact Toeplitz covariance (cost n^3, used automatically up to
    n = 4000); "circulant" synthesizes through the embedding transform
    (n log n, used above). Deterministic given (model, duration, dt, seed,
    method actually used).
    """
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    n = int(round(duration / dt))
    if n < 2:
        raise ConfigError(f"duration {duration} at dt {dt} gives {n} samples; need >= 2")
    _check_resolution(model, dt)
    if method not in ("auto", "cholesky", "circulant"):
        raise ConfigError(f"unknown method {method!r}")

    rng = trial_rng(int(seed), 0)
    if model.kind == "flat":
        samples = rng.standard_normal(n) / np.sqrt(dt)
    elif method == "cholesky" or (method == "auto" and n <= CHOLESKY_MAX_N):
        lfac = _cholesky_factor(model.kind, model.amplitude, model.fwhm_gamma, n, dt)
        samples = lfac @ rng.standard_normal(n)
    else:
        lam = _embedding_eigs(model.kind, model.amplitude, model.fwhm_gamma, n, dt)
        m = lam.size
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        samples = np.fft.fft(z * np.sqrt(lam / m)).real[:n]
    return BasebandSeries(dt=dt, samples=samples, seed=int(seed), model_tag=model.tag)


def gen_ensemble(
    model: BasebandModel,
    duration: float,
    dt: float,
    master_seed: int,
    n_trials: int,
    method: str = "auto",
) -> np.ndarray:
    """(n_trials, n) array of independent records, one per derived trial seed.

    Row i is drawn from trial_rng(master_seed, i); the heavy factor or
    eigenvalue table is computed once and the Gaussian draws are applied
    in a single matrix product, so large ensembles cost what they should.
    """
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1")
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    n = int(round(duration / dt))
    if n < 2:
        raise ConfigError(f"duration {duration} at dt {dt} gives {n} samples; need >= 2")
    _check_resolution(model, dt)

    if model.kind == "flat":
        out = np.empty((n_trials, n))
        for i in range(n_trials):
            out[i] = trial_rng(master_seed, i).standard_normal(n)
        return out / np.sqrt(dt)

    if method == "cholesky" or (method == "auto" and n <= CHOLESKY_MAX_N):
        lfac = _cholesky_factor(model.kind, model.amplitude, model.fwhm_gamma, n, dt)
        z = np.empty((n, n_trials))
        for i in range(n_trials):
            z[:, i] = trial_rng(master_seed, i).standard_normal(n)
        return (lfac @ z).T
    if method in ("auto", "circulant"):
        lam = _embedding_eigs(model.kind, model.amplitude, model.fwhm_gamma, n, dt)
        m = lam.size
        scale = np.sqrt(lam / m)
        out = np.empty((n_trials, n))
        for i in range(n_trials):
            rng = trial_rng(master_seed, i)
            z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            out[i] = np.fft.fft(z * scale).real[:n]
        return out
    raise ConfigError(f"unknown method {method!r}")


def gen_from_psd(psd, duration: float, dt: float, seed: int) -> BasebandSeries:
    """Record with an arbitrary smooth double-sided spectrum psd(omega).

    Frequency-domain synthesis on the record's own grid: bin k gets
    variance psd(omega_k)/dt. Exact for the circularly-stationary law whose
    spectrum is the sampled psd; for smooth spectra that is the target law
    up to resolution, which is all the full-record demodulation tests need.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    n = int(round(duration / dt))
    if n < 2:
        raise ConfigError(f"duration {duration} at dt {dt} gives {n} samples; need >= 2")
    omega = 2 * np.pi * np.fft.fftfreq(n, d=dt)
    lam = np.asarray(psd(omega), dtype=float) / dt
    if lam.min() < 0:
        raise DomainError(f"psd must be >= 0 everywhere (min {lam.min():.3e})")
    rng = trial_rng(int(seed), 0)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    samples = np.fft.fft(z * np.sqrt(lam / n)).real
    return BasebandSeries(dt=dt, samples=samples, seed=int(seed), model_tag="psd")


def demodulate(series: BasebandSeries, cfg: DemodConfig) -> ComplexBaseband:
    """Mix the band [center - sigma, center + sigma] down to zero frequency.

    Returns the complex baseband at the original sampling; the caller
    usually trims the edges, where the sharp band truncation rings.
    """
    nyquist = np.pi / series.dt
    if cfg.center + cfg.halfwidth_sigma > nyquist:
        raise ConfigError(
            f"band edge {cfg.center + cfg.halfwidth_sigma:.4g} exceeds the Nyquist"
            f" frequency {nyquist:.4g} rad/s"
        )
    n = series.n
    spec = np.fft.fft(series.samples)
    omega = 2 * np.pi * np.fft.fftfreq(n, d=series.dt)
    keep = (omega >= cfg.center - cfg.halfwidth_sigma) & (omega <= cfg.center + cfg.halfwidth_sigma)
    xi = np.fft.ifft(spec * keep) * np.exp(-1j * cfg.center * series.times)
    return ComplexBaseband(
        dt=series.dt,
        samples=xi,
        seed=series.seed,
        model_tag=series.model_tag,
        center=cfg.center,
        halfwidth=cfg.halfwidth_sigma,
    )


def quadratures(xi: ComplexBaseband) -> tuple[BasebandSeries, BasebandSeries]:
    """Split the complex baseband into its two real quadratures.

    xi_c = (xi + xi*)/2 is the real part, xi_s = (xi - xi*)/2i the
    imaginary part. Because the demodulation band excludes the mirror
    frequencies the baseband is proper and the two come out statistically
    independent, each carrying half the band's spectral density.
    """
    return (
        BasebandSeries(xi.dt, xi.samples.real, xi.seed, xi.model_tag + ":c"),
        BasebandSeries(xi.dt, xi.samples.imag.copy(), xi.seed, xi.model_tag + ":s"),
    )


def write_series(series: BasebandSeries, path) -> None:
    """Plain-text dump, one sample per line, self-describing header."""
    header = (
        f"dt = {series.dt!r}\n"
        f"n = {series.n}\n"
        f"seed = {series.seed}\n"
        f"model = {series.model_tag}"
    )
    np.savetxt(path, series.samples, fmt="%.17g", header=header)


def read_series(path) -> BasebandSeries:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
    samples = np.loadtxt(path)
    return BasebandSeries(
        dt=float(meta["dt"]),
        samples=samples,
        seed=int(meta["seed"]),
        model_tag=meta.get("model", ""),
    )
