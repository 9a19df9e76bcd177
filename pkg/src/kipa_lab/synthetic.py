"""Seeded synthetic-data generators for plant-and-recover workflows.

Every generator takes a numpy Generator (PCG64 recommended; the CLI builds
one from --seed) so identical seeds give bit-identical datasets within one
build.  Returned truth dictionaries carry the planted parameters.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .fitkit import SweepRecord
from .io_dynamics import GainCurve, PumpedCavity, signal_gain
from .ki_device import ResonatorParams, resonance_vs_bias
from .noise_cal import ReceiverChain, VtsSetpoint, hemt_input_noise, input_noise, vts_output_noise
from .quantities import BOLTZMANN
from .env_models import FieldModel, field_frequency_shift


def gain_sweep(
    kappa_hz: float,
    gamma_hz: float,
    delta_hz: float,
    xi_frac_of_kbar: float,
    f_pump_hz: float,
    span_hz: float,
    n_points: int,
    noise_db: float,
    rng: np.random.Generator,
) -> Tuple[SweepRecord, Dict[str, float]]:
    """Driven-cavity power-gain curve in dB with additive Gaussian noise."""
    kbar_hz = kappa_hz + gamma_hz / 2.0
    xi_hz = xi_frac_of_kbar * kbar_hz
    cav = PumpedCavity.from_ordinary(kappa_hz, gamma_hz, delta_hz, -1j * xi_hz, f_pump_hz)
    f = np.linspace(f_pump_hz / 2.0 - span_hz / 2.0, f_pump_hz / 2.0 + span_hz / 2.0, n_points)
    curve = GainCurve.from_cavity(cav, f)
    y = curve.power_gain_db + (rng.normal(0.0, noise_db, n_points) if noise_db > 0 else 0.0)
    sigma = np.full(n_points, noise_db) if noise_db > 0 else None
    truth = {
        "kappa_hz": kappa_hz,
        "gamma_hz": gamma_hz,
        "delta_hz": delta_hz,
        "xi_hz": xi_hz,
        "f_pump_hz": f_pump_hz,
    }
    return SweepRecord(f, y, sigma, meta={"kind": "gain_db_vs_f"}), truth


def gain_db_model(f: np.ndarray, p: Sequence[float], f_pump_hz: float) -> np.ndarray:
    """Fit model: power gain in dB vs absolute frequency.

    p = [kappa_hz, gamma_hz, delta_hz, xi_hz]; the pump frequency is a fixed
    property of the sweep, not a fitted parameter.  Rate parameters enter
    through their absolute values so trial steps of an optimizer cannot
    leave the physical domain.
    """
    kappa_hz, gamma_hz, delta_hz, xi_hz = p
    cav = PumpedCavity.from_ordinary(
        abs(kappa_hz), abs(gamma_hz), delta_hz, -1j * abs(xi_hz), f_pump_hz
    )
    g = signal_gain(cav, np.asarray(f, dtype=float), allow_unstable=True)
    return 10.0 * np.log10(np.abs(g) ** 2)


def noise_sweep(
    chain: ReceiverChain,
    t_kipa: float,
    f_signal_hz: float,
    f_idler_hz: float,
    t_vts_values: Sequence[float],
    noise_frac: float,
    rng: np.random.Generator,
) -> Tuple[SweepRecord, Dict[str, float]]:
    """(T_in, P_out) thermometry sweep with the device in line."""
    t_add = t_kipa + chain.t_hemt / chain.g
    xs, ys = [], []
    for t_vts in t_vts_values:
        sp = VtsSetpoint(t_vts, f_signal_hz, f_idler_hz, g_conv=chain.g - 1.0)
        t_in = input_noise(vts_output_noise(sp, chain.g), chain)
        p_out = chain.g_tot * BOLTZMANN * chain.bandwidth * (
            t_in + t_add + chain.t_bkg / (chain.g_hemt * chain.g)
        )
        xs.append(t_in)
        ys.append(p_out)
    xs = np.array(xs)
    ys = np.array(ys)
    sigma = None
    if noise_frac > 0:
        sigma = noise_frac * ys
        ys = ys + rng.normal(0.0, sigma)
    truth = {"t_add_k": t_add, "t_kipa_k": t_kipa}
    return SweepRecord(xs, ys, sigma, meta={"kind": "t_in_vs_p_out"}), truth


def hemt_sweep(
    chain: ReceiverChain,
    f_signal_hz: float,
    t_vts_values: Sequence[float],
    noise_frac: float,
    rng: np.random.Generator,
) -> Tuple[SweepRecord, Dict[str, float]]:
    """(T_VTS, P_out) sweep with a 50-ohm through in place of the device."""
    xs, ys = [], []
    for t_vts in t_vts_values:
        t_in = hemt_input_noise(t_vts, f_signal_hz, chain)
        p_out = chain.g_tot * BOLTZMANN * chain.bandwidth * (
            t_in + chain.t_hemt + chain.t_bkg / chain.g_hemt
        )
        xs.append(t_vts)
        ys.append(p_out)
    xs = np.array(xs)
    ys = np.array(ys)
    sigma = None
    if noise_frac > 0:
        sigma = noise_frac * ys
        ys = ys + rng.normal(0.0, sigma)
    return SweepRecord(xs, ys, sigma, meta={"kind": "t_vts_vs_p_out"}), {"t_hemt_k": chain.t_hemt}


def compression_sweep(
    small_signal_gain_db: float,
    p_mid_dbm: float,
    softness_db: float,
    depth_db: float,
    p_grid_dbm: np.ndarray,
    noise_db: float,
    rng: np.random.Generator,
) -> Tuple[SweepRecord, Dict[str, float]]:
    """Logistic gain-compression curve with an analytic planted 1-dB point.

    gain(P) = g0 - depth/(1 + exp(-(P - p_mid)/softness)); the true 1-dB
    input power is p_mid - softness*ln(depth - 1).
    """
    if depth_db <= 1.0:
        raise ValueError("depth_db must exceed 1 dB for a 1-dB point to exist")
    g = small_signal_gain_db - depth_db / (1.0 + np.exp(-(p_grid_dbm - p_mid_dbm) / softness_db))
    sigma = None
    if noise_db > 0:
        sigma = np.full(p_grid_dbm.size, noise_db)
        g = g + rng.normal(0.0, noise_db, p_grid_dbm.size)
    p_1db = p_mid_dbm - softness_db * math.log(depth_db - 1.0)
    truth = {"p_in_1db_dbm": p_1db, "p_out_sat_dbm": p_1db + small_signal_gain_db - 1.0}
    return SweepRecord(p_grid_dbm, g, sigma, meta={"kind": "gain_db_vs_p_in_dbm"}), truth


def clem_tuning_sweep(
    res: ResonatorParams,
    currents_a: np.ndarray,
    noise_frac: float,
    rng: np.random.Generator,
) -> Tuple[SweepRecord, Dict[str, float]]:
    """(bias current, resonance frequency) sweep from the tuning law."""
    f = np.array([resonance_vs_bias(i, res) for i in currents_a])
    sigma = None
    if noise_frac > 0:
        sigma = noise_frac * f
        f = f + rng.normal(0.0, sigma)
    truth = {"i_star_a": res.i_star, "clem_exponent": res.clem_exponent}
    return SweepRecord(currents_a, f, sigma, meta={"kind": "i_vs_f"}), truth


def field_shift_sweep(
    model: FieldModel,
    b_values_t: np.ndarray,
    noise_abs: float,
    rng: np.random.Generator,
) -> Tuple[SweepRecord, Dict[str, float]]:
    """(B, d_omega/omega) sweep from the quadratic field law."""
    y = np.array([field_frequency_shift(b, model) for b in b_values_t])
    sigma = None
    if noise_abs > 0:
        sigma = np.full(b_values_t.size, noise_abs)
        y = y + rng.normal(0.0, noise_abs, b_values_t.size)
    truth = {"theta_b_rad": model.theta_b}
    return SweepRecord(b_values_t, y, sigma, meta={"kind": "b_vs_relshift"}), truth


def pump_gain_map(
    kappa_hz: float,
    gamma_hz: float,
    f_r_hz: float,
    xi_hz_per_sqrt_mw: float,
) -> Callable[[float, float], float]:
    """Model-backed evaluator (f_pump_hz, p_pump_dbm) -> peak gain in dB.

    The pump power sets |xi| through an amplitude coupling
    |xi|/2pi = xi_hz_per_sqrt_mw * sqrt(P/1 mW); the detuning follows the
    pump frequency as Delta = 2pi*(f_r - f_pump/2).  Returns NaN in the
    self-oscillation regime.
    """
    kbar_hz = kappa_hz + gamma_hz / 2.0

    def evaluator(f_pump_hz: float, p_pump_dbm: float) -> float:
        xi_hz = xi_hz_per_sqrt_mw * 10.0 ** (p_pump_dbm / 20.0)
        if xi_hz >= kbar_hz:
            return math.nan
        delta_hz = f_r_hz - f_pump_hz / 2.0
        cav = PumpedCavity.from_ordinary(kappa_hz, gamma_hz, delta_hz, -1j * xi_hz, f_pump_hz)
        span = 6.0 * kappa_hz
        f = np.linspace(f_pump_hz / 2.0 - span, f_pump_hz / 2.0 + span, 241)
        g = signal_gain(cav, f, allow_unstable=True)
        return float(np.max(10.0 * np.log10(np.abs(g) ** 2)))

    return evaluator


def vts_setpoint_ladder(lo_k: float = 0.1, hi_k: float = 2.0, n: int = 4) -> List[float]:
    """Geometric ladder of source temperatures, endpoints included."""
    return list(np.geomspace(lo_k, hi_k, n))
