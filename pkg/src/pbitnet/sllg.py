"""Macrospin stochastic LLG model of a low-barrier circular in-plane magnet.

CGS-Gaussian units throughout (Oe, emu/cm^3, erg).  The easy plane is y-z:
the demagnetizing field ``-4 pi Ms m_x`` penalizes the out-of-plane x
component and there is no in-plane anisotropy.  The MTJ fixed layer and the
spin current point along +z.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.optimize import curve_fit

from .errors import InputDomainError

GAMMA = 1.76e7  # rad s^-1 Oe^-1
K_B = 1.380649e-16  # erg / K
KT_300 = 4.14e-14  # erg
MU_B = 9.274e-21  # erg / G
Q_E = 1.602176634e-19  # C
DT = 1e-12

_CHUNK = 1 << 18


@dataclass(frozen=True)
class MagnetParams:
    alpha: float = 0.01
    Ms: float = 1100.0
    volume: float = math.pi * (11e-7) ** 2 * 2e-7
    temperature: float = 300.0
    gamma: float = GAMMA
    polarization: float = 0.5

    def __post_init__(self):
        for name in ("alpha", "Ms", "volume", "gamma", "polarization"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InputDomainError(f"{name} must be positive, got {v}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise InputDomainError("temperature must be non-negative")

    @classmethod
    def from_geometry(cls, diameter_cm=22e-7, thickness_cm=2e-7, **kw):
        return cls(volume=math.pi * (diameter_cm / 2.0) ** 2 * thickness_cm, **kw)

    @property
    def n_spins(self) -> float:
        """Number of Bohr magnetons in the free layer, Ms V / mu_B."""
        return self.Ms * self.volume / MU_B

    @property
    def kT(self) -> float:
        if self.temperature == 300.0:
            return KT_300
        return K_B * self.temperature

    @property
    def demag_barrier(self) -> float:
        """2 pi Ms^2 V / kT: out-of-plane energy cost in units of kT."""
        return 2.0 * math.pi * self.Ms ** 2 * self.volume / self.kT if self.temperature > 0 else math.inf

    def noise_std(self, dt: float) -> float:
        if dt <= 0:
            raise InputDomainError("dt must be positive")
        if self.temperature == 0:
            return 0.0
        return math.sqrt(2.0 * self.alpha * self.kT / (abs(self.gamma) * self.Ms * self.volume * dt))

    def spin_rate(self, I_S: float) -> float:
        """I_S / (q N) in 1/s."""
        return I_S / (Q_E * self.n_spins)


@dataclass(frozen=True)
class MtjParams:
    G0: float = 1.0 / 6e3
    TMR: float = 1.10

    def __post_init__(self):
        if not self.G0 > 0:
            raise InputDomainError("G0 must be positive")
        if not self.TMR >= 0:
            raise InputDomainError("TMR must be non-negative")


def demag_energy(m, params: MagnetParams) -> np.ndarray:
    """2 pi Ms^2 V m_x^2 in erg."""
    m = np.asarray(m, dtype=float)
    return 2.0 * math.pi * params.Ms ** 2 * params.volume * m[..., 0] ** 2


def thermal_field(params: MagnetParams, dt: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Gaussian thermal field in Oe, shape (3,) or (size, 3).

    The white-noise strength 2 alpha kT / (|gamma| Ms V) is a spectral
    density, so a field held constant over one step has variance that over dt.
    """
    shape = (3,) if size is None else (size, 3)
    sigma = params.noise_std(dt)
    if sigma == 0.0:
        return np.zeros(shape)
    return sigma * rng.standard_normal(shape)


def _check_unit(m):
    m = np.array(m, dtype=float).reshape(3)
    if abs(np.linalg.norm(m) - 1.0) > 1e-9:
        raise InputDomainError(f"magnetization must be a unit vector, |m| = {np.linalg.norm(m)}")
    return m


def effective_field(m, params: MagnetParams, noise=None) -> np.ndarray:
    m = _check_unit(m)
    H = np.array([-4.0 * math.pi * params.Ms * m[0], 0.0, 0.0])
    if noise is not None:
        H = H + np.asarray(noise, dtype=float)
    return H


@numba.njit(cache=True)
def _rhs(m0, m1, m2, h0, h1, h2, gamma, alpha, s, pre):
    c0 = m1 * h2 - m2 * h1
    c1 = m2 * h0 - m0 * h2
    c2 = m0 * h1 - m1 * h0
    d0 = m1 * c2 - m2 * c1
    d1 = m2 * c0 - m0 * c2
    d2 = m0 * c1 - m1 * c0
    # m x (z x m) = z |m|^2 - m_z m ;  m x z = (m_y, -m_x, 0)
    mm = m0 * m0 + m1 * m1 + m2 * m2
    f0 = -gamma * c0 - alpha * gamma * d0 + s * (-m2 * m0) + alpha * s * m1
    f1 = -gamma * c1 - alpha * gamma * d1 + s * (-m2 * m1) - alpha * s * m0
    f2 = -gamma * c2 - alpha * gamma * d2 + s * (mm - m2 * m2)
    return pre * f0, pre * f1, pre * f2


@numba.njit(cache=True)
def _heun_kernel(m, noise, demag, gamma, alpha, s, dt, record_every, out, block_sgn, flips):
    """Integrate len(noise) steps in place on ``m``.

    Every ``record_every`` steps a snapshot goes to ``out`` and the summed
    sgn(m_z) over that block to ``block_sgn``.  Returns the zero crossings of m_z.
    """
    pre = 1.0 / (1.0 + alpha * alpha)
    m0, m1, m2 = m[0], m[1], m[2]
    acc = 0.0
    rec = 0
    last = 1.0 if m2 >= 0.0 else -1.0
    for k in range(noise.shape[0]):
        n0, n1, n2 = noise[k, 0], noise[k, 1], noise[k, 2]
        a0, a1, a2 = _rhs(m0, m1, m2, demag * m0 + n0, n1, n2, gamma, alpha, s, pre)
        p0 = m0 + a0 * dt
        p1 = m1 + a1 * dt
        p2 = m2 + a2 * dt
        b0, b1, b2 = _rhs(p0, p1, p2, demag * p0 + n0, n1, n2, gamma, alpha, s, pre)
        m0 += 0.5 * (a0 + b0) * dt
        m1 += 0.5 * (a1 + b1) * dt
        m2 += 0.5 * (a2 + b2) * dt
        inv = 1.0 / math.sqrt(m0 * m0 + m1 * m1 + m2 * m2)
        m0 *= inv
        m1 *= inv
        m2 *= inv
        sg = 1.0 if m2 >= 0.0 else -1.0
        if sg != last:
            flips += 1
            last = sg
        acc += sg
        if (k + 1) % record_every == 0:
            out[rec, 0] = m0
            out[rec, 1] = m1
            out[rec, 2] = m2
            block_sgn[rec] = acc
            acc = 0.0
            rec += 1
    m[0], m[1], m[2] = m0, m1, m2
    return flips


def _integrate(m, params, I_S, dt, n_steps, rng, record_every):
    """Drive the kernel in noise chunks; returns (snapshots, block sgn sums, flips)."""
    m = np.array(m, dtype=float)
    sigma = params.noise_std(dt)
    n_rec = n_steps // record_every
    out = np.empty((n_rec, 3))
    block = np.empty(n_rec)
    chunk = max(record_every, (_CHUNK // record_every) * record_every)
    flips = 0
    done = 0
    demag = -4.0 * math.pi * params.Ms
    s = params.spin_rate(I_S)
    while done < n_steps:
        k = min(chunk, n_steps - done)
        noise = sigma * rng.standard_normal((k, 3)) if sigma > 0 else np.zeros((k, 3))
        r0 = done // record_every
        r1 = (done + k) // record_every
        flips = _heun_kernel(m, noise, demag, params.gamma, params.alpha, s, dt, record_every,
                             out[r0:r1], block[r0:r1], flips)
        done += k
    return out, block, m, flips


def sllg_step(m, I_S: float, params: MagnetParams, dt: float, rng: np.random.Generator,
              noise=None) -> np.ndarray:
    """One stochastic Heun step; the same thermal field is used by predictor and corrector."""
    m = _check_unit(m)
    if noise is None:
        noise = thermal_field(params, dt, rng)
    noise = np.asarray(noise, dtype=float).reshape(1, 3)
    out = np.empty((1, 3))
    block = np.empty(1)
    _heun_kernel(m, noise, -4.0 * math.pi * params.Ms, params.gamma, params.alpha,
                 params.spin_rate(I_S), dt, 1, out, block, 0)
    return out[0]


def _generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    time: np.ndarray
    m: np.ndarray
    flips: int
    dt: float
    I_S: float

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "m_x", "m_y", "m_z"])
            for t, (x, y, z) in zip(self.time, self.m):
                w.writerow([f"{t:.6e}", f"{x:.9f}", f"{y:.9f}", f"{z:.9f}"])


def run_trajectory(params: MagnetParams, I_S: float = 0.0, duration: float = 1e-9, dt: float = DT,
                   seed=0, m0=(0.0, 1.0, 0.0), record_every: int = 1) -> Trajectory:
    if not (dt > 0 and duration >= dt):
        raise InputDomainError("need 0 < dt <= duration")
    n_steps = int(round(duration / dt))
    m0 = _check_unit(m0)
    m, _, _, flips = _integrate(m0, params, I_S, dt, n_steps, _generator(seed), int(record_every))
    time = dt * record_every * np.arange(1, m.shape[0] + 1)
    return Trajectory(time=time, m=m, flips=flips, dt=dt, I_S=I_S)


def mtj_conductance(m_z: float, mtj: MtjParams = MtjParams()) -> float:
    if not (-1.0 <= m_z <= 1.0):
        raise InputDomainError(f"m_z={m_z} outside [-1, 1]")
    return mtj.G0 * (1.0 + m_z * mtj.TMR / (2.0 + mtj.TMR))


@dataclass
class SigmoidResult:
    currents: np.ndarray
    response: np.ndarray
    stderr: np.ndarray
    flips: np.ndarray
    I_scale: float
    r_squared: float
    low_flip_warning: bool = False
    rows: list = field(default_factory=list)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["I_S", "avg_sgn_mz"])
            for i, r in zip(self.currents, self.response):
                w.writerow([f"{i:.6e}", f"{r:.6f}"])


def _batch_stderr(block_means):
    b = np.asarray(block_means)
    if b.size < 2:
        return float("nan")
    return float(np.std(b, ddof=1) / math.sqrt(b.size))


def sigmoid_response(params: MagnetParams, currents, T_avg: float = 1e-6, seed=0, dt: float = DT,
                     n_blocks: int = 50, min_flips: int = 100) -> SigmoidResult:
    """Time-average sgn(m_z) at each spin current and fit tanh(I_S / I_scale).

    Each sweep point uses its own seed stream; the standard error comes from
    ``n_blocks`` batch means, which absorbs the telegraph autocorrelation.
    """
    currents = np.asarray(currents, dtype=float)
    n_steps = int(round(T_avg / dt))
    block_len = max(1, n_steps // n_blocks)
    n_steps = block_len * n_blocks
    resp, err, flips = [], [], []
    for k, I in enumerate(currents):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(k,))))
        _, block, _, f = _integrate(np.array([0.0, 1.0, 0.0]), params, float(I), dt, n_steps, rng, block_len)
        means = block / block_len
        resp.append(float(means.mean()))
        err.append(_batch_stderr(means))
        flips.append(f)
    resp = np.array(resp)
    flips = np.array(flips)
    zero = np.argmin(np.abs(currents))
    warn = bool(flips[zero] < min_flips)
    if warn:
        warnings.warn(f"only {flips[zero]} telegraph flips at I_S={currents[zero]:g}; averages are unreliable")
    span = float(np.max(np.abs(currents))) or 1.0
    (scale,), _ = curve_fit(lambda x, s: np.tanh(x / s), currents, resp, p0=[span / 3.0])
    ss_res = float(np.sum((resp - np.tanh(currents / scale)) ** 2))
    ss_tot = float(np.sum((resp - resp.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return SigmoidResult(currents=currents, response=resp, stderr=np.array(err), flips=flips,
                         I_scale=float(abs(scale)), r_squared=r2, low_flip_warning=warn)
