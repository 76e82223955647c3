import math

import numpy as np
import pytest

from pbitnet.errors import InputDomainError
from pbitnet.sllg import MagnetParams, MtjParams, demag_energy, effective_field, mtj_conductance
from pbitnet.sllg import run_trajectory, sigmoid_response, sllg_step, thermal_field

DEFAULT = MagnetParams()


def test_geometry_and_spin_count():
    vol = math.pi * (11e-7) ** 2 * 2e-7
    assert DEFAULT.volume == pytest.approx(7.60e-19, rel=1e-3)
    assert DEFAULT.volume == pytest.approx(vol, rel=1e-12)
    assert DEFAULT.n_spins == pytest.approx(1100 * vol / 9.274e-21, rel=1e-9)
    assert DEFAULT.n_spins == pytest.approx(9.0e4, rel=0.01)
    assert MagnetParams.from_geometry(22e-7, 2e-7).volume == pytest.approx(vol, rel=1e-12)


def test_thermal_std_hand_value():
    # 2 * 0.01 * 4.14e-14 / (1.76e7 * 1100 * 7.6027e-19 * 1e-12) = 5.6255e4 Oe^2
    assert DEFAULT.noise_std(1e-12) == pytest.approx(math.sqrt(5.6255e4), rel=1e-4)
    assert DEFAULT.noise_std(1e-12) == pytest.approx(237.18, abs=0.01)


def test_thermal_field_zero_temperature():
    cold = MagnetParams(temperature=0.0)
    rng = np.random.default_rng(0)
    assert np.all(thermal_field(cold, 1e-12, rng) == 0)
    assert np.all(thermal_field(cold, 1e-12, rng, size=10) == 0)


def test_thermal_field_statistics():
    rng = np.random.default_rng(1)
    h = thermal_field(DEFAULT, 1e-12, rng, size=1_000_000)
    std = DEFAULT.noise_std(1e-12)
    assert np.all(np.abs(h.mean(axis=0)) <= 4 * std / 1000)
    np.testing.assert_allclose(h.std(axis=0), std, rtol=0.005)
    assert abs(np.corrcoef(h.T)[0, 1]) < 0.005


def test_effective_field():
    assert np.all(effective_field([0, 0.6, 0.8], DEFAULT) == 0)
    H = effective_field([1, 0, 0], DEFAULT)
    assert H[0] == pytest.approx(-4 * math.pi * 1100) and H[0] == pytest.approx(-13823, abs=1)
    noise = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(effective_field([0, 1, 0], DEFAULT, noise), noise)
    with pytest.raises(InputDomainError):
        effective_field([1, 1, 0], DEFAULT)


def reference_heun(m, I_S, p, dt, noise):
    """Direct vector transcription of the sLLG right-hand side with np.cross."""
    z = np.array([0.0, 0.0, 1.0])
    s = I_S / (1.602176634e-19 * p.n_spins)

    def f(m):
        H = np.array([-4 * math.pi * p.Ms * m[0], 0, 0]) + noise
        out = (-p.gamma * np.cross(m, H) - p.alpha * p.gamma * np.cross(m, np.cross(m, H))
               + s * np.cross(m, np.cross(z, m)) + p.alpha * s * np.cross(m, z))
        return out / (1 + p.alpha ** 2)

    a = f(m)
    b = f(m + a * dt)
    new = m + 0.5 * (a + b) * dt
    return new / np.linalg.norm(new)


@pytest.mark.parametrize("I_S", [0.0, 2e-4, -5e-5])
def test_step_matches_reference(I_S):
    rng = np.random.default_rng(4)
    m = np.array([0.3, -0.5, 0.2])
    m /= np.linalg.norm(m)
    noise = thermal_field(DEFAULT, 1e-12, rng)
    got = sllg_step(m, I_S, DEFAULT, 1e-12, rng, noise=noise)
    np.testing.assert_allclose(got, reference_heun(m, I_S, DEFAULT, 1e-12, noise), rtol=1e-12, atol=1e-15)


def test_zero_torque_steps():
    cold = MagnetParams(temperature=0.0)
    rng = np.random.default_rng(0)
    for m in ([0.0, 0.6, 0.8], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]):
        np.testing.assert_allclose(sllg_step(m, 0.0, cold, 1e-12, rng), m, atol=1e-15)
    with pytest.raises(InputDomainError):
        sllg_step([0.5, 0.5, 0.0], 0.0, cold, 1e-12, rng)


def test_large_current_pins_along_z():
    tr = run_trajectory(DEFAULT, 1e-3, 1e-6, seed=2, record_every=10)
    assert tr.m[:, 2].mean() > 0.95


def test_norm_conserved_every_step():
    tr = run_trajectory(DEFAULT, 1e-4, 20e-9, seed=3)
    assert np.max(np.abs(np.linalg.norm(tr.m, axis=1) - 1)) <= 1e-12


def test_demag_energy_non_increasing_at_zero_temperature():
    cold = MagnetParams(temperature=0.0)
    m0 = np.array([0.6, 0.0, 0.8])
    tr = run_trajectory(cold, 0.0, 5e-9, m0=m0)
    E = demag_energy(np.vstack([m0, tr.m]), cold)
    assert np.all(np.diff(E) <= 0)
    assert E[-1] < 1e-6 * E[0]


def test_out_of_plane_suppressed():
    tr = run_trajectory(DEFAULT, 0.0, 4e-6, seed=6, record_every=10)
    mx2, mz2 = np.mean(tr.m[:, 0] ** 2), np.mean(tr.m[:, 2] ** 2)
    assert mx2 < 0.02 * mz2
    # equipartition for the demag energy: <m_x^2> = kT / (4 pi Ms^2 V)
    assert mx2 == pytest.approx(1 / (2 * DEFAULT.demag_barrier), rel=0.05)


def test_trajectory_reproducible():
    a = run_trajectory(DEFAULT, 5e-5, 2e-9, seed=9)
    b = run_trajectory(DEFAULT, 5e-5, 2e-9, seed=9)
    c = run_trajectory(DEFAULT, 5e-5, 2e-9, seed=10)
    assert a.m.tobytes() == b.m.tobytes()
    assert a.m.tobytes() != c.m.tobytes()
    assert a.m.shape == (2000, 3)


def test_mtj_conductance():
    mtj = MtjParams(G0=2.0, TMR=1.10)
    assert mtj_conductance(0.0, mtj) == 2.0
    assert mtj_conductance(1.0, mtj) == pytest.approx(1.3548 * 2.0, rel=1e-4)
    assert mtj_conductance(-1.0, mtj) == pytest.approx(0.6452 * 2.0, rel=1e-4)
    with pytest.raises(InputDomainError):
        mtj_conductance(1.01, mtj)


def test_sigmoid_sweep_shape():
    currents = np.linspace(-3e-4, 3e-4, 7)
    res = sigmoid_response(DEFAULT, currents, T_avg=0.5e-6, seed=1)
    mid = len(currents) // 2
    assert abs(res.response[mid]) <= 0.05
    assert res.flips[mid] >= 100 and not res.low_flip_warning
    assert np.all(np.diff(res.response) >= -2 * (res.stderr[1:] + res.stderr[:-1]))
    assert res.r_squared >= 0.98


def test_sigmoid_flags_short_averaging():
    with pytest.warns(UserWarning):
        res = sigmoid_response(DEFAULT, [-1e-4, 0.0, 1e-4], T_avg=1e-10, seed=1, n_blocks=10)
    assert res.low_flip_warning
