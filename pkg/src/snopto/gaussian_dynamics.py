"""First and second moments of a Gaussian state under the gravitationally
trapped oscillator.

For a quadratic Hamiltonian a Gaussian state stays Gaussian, so five numbers
evolve in closed form and nothing else exists. The closure splits:

    d<x>/dt  =  <p>/M            d Vxx/dt = 2 Cxp / M
    d<p>/dt  = -M w_cm^2 <x>     d Cxp/dt = Vpp / M - M w_q^2 Vxx
                                 d Vpp/dt = -2 M w_q^2 Cxp

The means feel only the bare pendulum frequency omega_cm while the
covariance rotates at omega_q = sqrt(omega_cm^2 + omega_sn^2). That split is
the whole observable: watch the center ring at one frequency and the
uncertainty ellipse at another.

The conserved energy is

    E = <p^2>/2M + (1/2) M w_cm^2 <x^2> + (1/2) M w_sn^2 Vxx

with <p^2> = Vpp + <p>^2 and <x^2> = Vxx + <x>^2. The last term carries a
factor 1/2 on the full gravitational potential expectation M w_sn^2 Vxx;
dE/dt = 0 follows directly from the equations above, and dropping that half
(sn_weight = 1) produces a secular drift proportional to Cxp, which is the
standard numerical control for having the factor right.

No damping or light enters here; this module is the closed-system picture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .errors import ConfigError, DomainError
from .response import OscillatorConfig


@dataclass(frozen=True)
class GaussianState:
    mean_x: float  # m
    mean_p: float  # kg m/s
    var_xx: float  # m^2
    cov_xp: float  # kg m^2/s
    var_pp: float  # kg^2 m^2/s^2

    def __post_init__(self):
        if self.var_xx <= 0 or self.var_pp <= 0:
            raise DomainError("variances must be > 0")
        het = self.var_xx * self.var_pp - self.cov_xp**2
        if het < (HBAR / 2) ** 2 * (1 - 1e-9):
            raise DomainError(
                f"state violates the uncertainty bound: Vxx Vpp - Cxp^2 = {het:.6e}"
                f" < (hbar/2)^2"
            )

    @classmethod
    def ground(cls, osc: OscillatorConfig, at: float | None = None) -> "GaussianState":
        """Vacuum of the oscillator at frequency `at` (default omega_q)."""
        w = osc.omega_q if at is None else at
        if w <= 0:
            raise DomainError("ground state needs a positive frequency")
        return cls(0.0, 0.0, HBAR / (2 * osc.mass * w), 0.0, HBAR * osc.mass * w / 2)

    def displaced(self, dx: float = 0.0, dp: float = 0.0) -> "GaussianState":
        return GaussianState(self.mean_x + dx, self.mean_p + dp, self.var_xx, self.cov_xp, self.var_pp)

    def squeezed(self, r: float) -> "GaussianState":
        """Scale var_xx by exp(-2r) and var_pp by exp(+2r) (pure x squeeze)."""
        if self.cov_xp != 0.0:
            raise DomainError("squeeze helper expects an axis-aligned state")
        return GaussianState(
            self.mean_x, self.mean_p,
            self.var_xx * np.exp(-2 * r), 0.0, self.var_pp * np.exp(2 * r),
        )


@dataclass(frozen=True)
class MomentTrajectory:
    times: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    var_xx: np.ndarray
    cov_xp: np.ndarray
    var_pp: np.ndarray
    energy: np.ndarray

    def state_at(self, i: int) -> GaussianState:
        return GaussianState(
            float(self.mean_x[i]), float(self.mean_p[i]),
            float(self.var_xx[i]), float(self.cov_xp[i]), float(self.var_pp[i]),
        )


def energy(state: GaussianState, osc: OscillatorConfig, sn_weight: float = 0.5) -> float:
    """Total energy (J); sn_weight = 0.5 is the conserved definition.

    sn_weight multiplies the gravitational potential expectation
    M omega_sn^2 var_xx. Pass 1.0 to reproduce the non-conserved naive form
    used as a negative control in the tests.
    """
    m = osc.mass
    p2 = state.var_pp + state.mean_p**2
    x2 = state.var_xx + state.mean_x**2
    return p2 / (2 * m) + 0.5 * m * osc.omega_cm**2 * x2 + sn_weight * m * osc.omega_sn**2 * state.var_xx


def _drift_matrix(osc: OscillatorConfig) -> np.ndarray:
    m = osc.mass
    wcm2 = osc.omega_cm**2
    wq2 = osc.omega_q**2
    a = np.zeros((5, 5))
    a[0, 1] = 1.0 / m
    a[1, 0] = -m * wcm2
    a[2, 3] = 2.0 / m
    a[3, 2] = -m * wq2
    a[3, 4] = 1.0 / m
    a[4, 3] = -2.0 * m * wq2
    return a


def _rk4_step_matrix(a: np.ndarray, dt: float) -> np.ndarray:
    """One fixed step of the classical 4th-order scheme for dz/dt = A z.

    For a linear system the scheme collapses to the degree-4 Taylor
    polynomial of the exponential, so the whole step is a constant matrix.
    """
    s = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, 5):
        term = term @ a * (dt / k)
        s = s + term
    return s


def evolve_moments(
    state0: GaussianState,
    osc: OscillatorConfig,
    t_final: float,
    dt: float | None = None,
    sn_weight: float = 0.5,
    store_every: int = 1,
) -> MomentTrajectory:
    """Propagate moments to t_final with fixed step dt.

    dt defaults to a thousandth of the omega_q period and must resolve it to
    at least one hundredth (resolution guard). store_every > 1 keeps every
    k-th sample: the discrete flow is identical, applied in blocks of
    S^store_every, only the recording thins out. The energy column uses the
    given sn_weight so the conservation control can be run side by side.
    """
    wq = osc.omega_q
    if wq <= 0:
        raise DomainError("evolution needs omega_q > 0")
    period = 2 * np.pi / wq
    if dt is None:
        dt = period / 1000.0
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    if dt > period / 100.0:
        raise ConfigError(
            f"dt = {dt:.3e} too coarse: need dt <= {period / 100.0:.3e} (one hundredth of the omega_q period)"
        )
    if t_final <= 0:
        raise ConfigError(f"t_final must be > 0, got {t_final}")
    if store_every < 1:
        raise ConfigError("store_every must be >= 1")

    n_steps = int(np.ceil(t_final / dt))
    n_rec = n_steps // store_every + 1
    a = _drift_matrix(osc)
    s1 = _rk4_step_matrix(a, dt)
    block = np.linalg.matrix_power(s1, store_every)

    z = np.array([state0.mean_x, state0.mean_p, state0.var_xx, state0.cov_xp, state0.var_pp])
    out = np.empty((n_rec, 5))
    out[0] = z
    for i in range(1, n_rec):
        z = block @ z
        out[i] = z

    times = np.arange(n_rec) * (dt * store_every)
    m = osc.mass
    en = (
        (out[:, 4] + out[:, 1] ** 2) / (2 * m)
        + 0.5 * m * osc.omega_cm**2 * (out[:, 2] + out[:, 0] ** 2)
        + sn_weight * m * osc.omega_sn**2 * out[:, 2]
    )
    return MomentTrajectory(
        times=times,
        mean_x=out[:, 0],
        mean_p=out[:, 1],
        var_xx=out[:, 2],
        cov_xp=out[:, 3],
        var_pp=out[:, 4],
        energy=en,
    )


def symplectic_invariant(traj: MomentTrajectory) -> np.ndarray:
    """Vxx Vpp - Cxp^2 along the trajectory (conserved by the exact flow)."""
    return traj.var_xx * traj.var_pp - traj.cov_xp**2


def ellipse_angle(traj: MomentTrajectory, osc: OscillatorConfig) -> np.ndarray:
    """Unwrapped principal-axis angle of the uncertainty ellipse (rad).

    Momentum is rescaled by M omega_q so the exact covariance flow is a pure
    rotation; the angle then falls linearly in time at the rotation rate.
    One full turn of the ellipse looks the same twice, hence the unwrap
    works on 2 theta. Degenerate (circular) states give a meaningless angle.
    """
    scale = osc.mass * osc.omega_q
    vxx = traj.var_xx
    vpp = traj.var_pp / scale**2
    cxp = traj.cov_xp / scale
    theta2 = np.arctan2(2 * cxp, vxx - vpp)
    return np.unwrap(theta2) / 2.0


def ellipse_frequency(traj: MomentTrajectory, osc: OscillatorConfig) -> float:
    """Ellipse rotation rate (rad/s) from a least-squares slope of the angle."""
    theta = ellipse_angle(traj, osc)
    t = traj.times - traj.times.mean()
    slope = float(np.dot(t, theta - theta.mean()) / np.dot(t, t))
    return abs(slope)


def fft_peak_frequency(times: np.ndarray, signal: np.ndarray) -> float:
    """Dominant frequency (rad/s) of an evenly sampled real record.

    Hann window, discrete transform, then a three-point parabolic refinement
    of the peak bin on log magnitude. The DC bin is excluded. Note that a
    variance record oscillates at twice the underlying rotation rate; the
    caller halves where appropriate.
    """
    y = np.asarray(signal, dtype=float)
    t = np.asarray(times, dtype=float)
    if y.size != t.size or y.size < 16:
        raise ConfigError("need matching arrays with at least 16 samples")
    dt = t[1] - t[0]
    y = (y - y.mean()) * np.hanning(y.size)
    mag = np.abs(np.fft.rfft(y))
    k = int(np.argmax(mag[1:])) + 1
    if 1 <= k < mag.size - 1 and mag[k - 1] > 0 and mag[k + 1] > 0:
        lm, l0, lp = np.log(mag[k - 1]), np.log(mag[k]), np.log(mag[k + 1])
        denom = lm - 2 * l0 + lp
        delta = 0.5 * (lm - lp) / denom if denom != 0 else 0.0
    else:
        delta = 0.0
    return float((k + delta) * 2 * np.pi / (y.size * dt))


def mean_frequency(traj: MomentTrajectory) -> float:
    """Oscillation frequency (rad/s) of the mean position record."""
    return fft_peak_frequency(traj.times, traj.mean_x)


def ellipse_frequency_fft(traj: MomentTrajectory) -> float:
    """Ellipse rotation rate from the var_xx record (oscillates at twice the rate)."""
    return fft_peak_frequency(traj.times, traj.var_xx) / 2.0
