"""Input-output theory of the dc-pumped cavity measured in transmission.

Frequency-domain steady state only: signal and idler gains, degenerate
phase-sensitive gain, quadrature transfer, output quadrature variances,
gain-bandwidth product extraction, pump-point search and 1-dB compression
extraction.

Conventions
-----------
* Both ports share the same external rate kappa; kappa_bar = (2k+g)/2 is the
  transmission half-linewidth, kappa_tilde = (k+g)/2 the reflection one.
* The gain formulas take the signal offset from half the pump frequency,
  omega = 2*pi*(f - f_pump/2); public functions take absolute f in Hz.
* The pump phase enters through the complex pump strength xi.  With
  arg(xi) = -pi/2 the X quadrature at band center is the deamplified
  (squeezed) one; that alignment is assumed by the variance helpers.
* |xi| >= kappa_bar is the self-oscillation regime.  It is representable
  (a flag, not a hard error) so searches can report it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from .errors import DomainError, ExtractionError, SingularityError
from .fitkit import SweepRecord

_POLE_GUARD = 1e-12


@dataclass(frozen=True)
class PumpedCavity:
    """Dynamical parameters of the driven cavity (angular rates, rad/s)."""

    kappa: float  # rad/s, external rate per port
    gamma: float  # rad/s, internal loss rate
    delta: float  # rad/s, pump-frame detuning
    xi: complex  # rad/s, three-wave-mixing pump strength
    f_pump: float  # Hz, pump frequency

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise DomainError("kappa must be positive")
        if self.gamma < 0.0:
            raise DomainError("gamma must be non-negative")
        if self.f_pump <= 0.0:
            raise DomainError("pump frequency must be positive")

    @property
    def kappa_bar(self) -> float:
        return (2.0 * self.kappa + self.gamma) / 2.0

    @property
    def kappa_tilde(self) -> float:
        return (self.kappa + self.gamma) / 2.0

    @property
    def is_stable(self) -> bool:
        return abs(self.xi) < self.kappa_bar

    @classmethod
    def from_ordinary(
        cls,
        kappa_hz: float,
        gamma_hz: float,
        delta_hz: float,
        xi: complex,
        f_pump_hz: float,
    ) -> "PumpedCavity":
        """Build from ordinary-frequency rates in Hz (xi also in cycles/s)."""
        two_pi = 2.0 * math.pi
        return cls(
            kappa=two_pi * kappa_hz,
            gamma=two_pi * gamma_hz,
            delta=two_pi * delta_hz,
            xi=two_pi * xi,
            f_pump=f_pump_hz,
        )


def _offset_omega(cav: PumpedCavity, f_hz) -> np.ndarray:
    return 2.0 * math.pi * (np.asarray(f_hz, dtype=float) - cav.f_pump / 2.0)


def _denominator(cav: PumpedCavity, omega) -> np.ndarray:
    kb = cav.kappa_bar
    den = cav.delta**2 + (kb - 1j * omega) ** 2 - abs(cav.xi) ** 2
    if np.any(np.abs(den) < _POLE_GUARD * kb**2):
        raise SingularityError("gain evaluated too close to a pole of the response")
    return den


def _require_stable(cav: PumpedCavity, allow_unstable: bool) -> None:
    if not allow_unstable and not cav.is_stable:
        raise DomainError(
            f"|xi| = {abs(cav.xi):.4e} >= kappa_bar = {cav.kappa_bar:.4e}: "
            "self-oscillation regime (pass allow_unstable=True to evaluate anyway)"
        )


def signal_gain(cav: PumpedCavity, f_hz, allow_unstable: bool = False):
    """Complex signal gain g_s at absolute frequency f (scalar or array).

    g_s(w) = [k*kb - i*k*(Delta + w)] / [Delta^2 + (kb - i*w)^2 - |xi|^2]
    with w the offset from half the pump frequency.
    """
    _require_stable(cav, allow_unstable)
    w = _offset_omega(cav, f_hz)
    den = _denominator(cav, w)
    g = (cav.kappa * cav.kappa_bar - 1j * cav.kappa * (cav.delta + w)) / den
    return complex(g) if np.isscalar(f_hz) else g


def idler_gain(cav: PumpedCavity, f_hz, allow_unstable: bool = False):
    """Complex idler gain g_i(w) = -i*xi*k / [Delta^2 + (kb - i*w)^2 - |xi|^2]."""
    _require_stable(cav, allow_unstable)
    w = _offset_omega(cav, f_hz)
    den = _denominator(cav, w)
    g = -1j * cav.xi * cav.kappa / den
    return complex(g) if np.isscalar(f_hz) else g


def photon_number_residual(cav: PumpedCavity, f_hz) -> float:
    """Diagnostic |g_s|^2 - |g_i|^2 at frequency f.

    In this two-port transmission convention the difference is not pinned to
    one (at band center with gamma = 0 it equals Re g_s); it is reported for
    inspection, never asserted.
    """
    gs = signal_gain(cav, f_hz, allow_unstable=True)
    gi = idler_gain(cav, f_hz, allow_unstable=True)
    return abs(gs) ** 2 - abs(gi) ** 2


@dataclass
class GainCurve:
    """Gain sampled on a frequency grid; power_gain_db = 10*log10|g|^2."""

    f_hz: np.ndarray
    complex_gain: np.ndarray
    power_gain_db: np.ndarray

    def __post_init__(self):
        self.f_hz = np.asarray(self.f_hz, dtype=float)
        self.complex_gain = np.asarray(self.complex_gain, dtype=complex)
        self.power_gain_db = np.asarray(self.power_gain_db, dtype=float)
        if not (self.f_hz.shape == self.complex_gain.shape == self.power_gain_db.shape):
            raise DomainError("GainCurve arrays must share one shape")

    @classmethod
    def from_gains(cls, f_hz, g) -> "GainCurve":
        g = np.asarray(g, dtype=complex)
        return cls(f_hz, g, 10.0 * np.log10(np.abs(g) ** 2))

    @classmethod
    def from_cavity(cls, cav: PumpedCavity, f_hz, allow_unstable: bool = False) -> "GainCurve":
        return cls.from_gains(f_hz, signal_gain(cav, np.asarray(f_hz, dtype=float), allow_unstable))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["f_hz", "re_g", "im_g", "gain_db"])
            for i in range(self.f_hz.size):
                w.writerow(
                    [
                        repr(float(self.f_hz[i])),
                        repr(float(self.complex_gain[i].real)),
                        repr(float(self.complex_gain[i].imag)),
                        repr(float(self.power_gain_db[i])),
                    ]
                )

    @classmethod
    def from_csv(cls, path) -> "GainCurve":
        f, re, im = [], [], []
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        for r in rows[1:]:
            if not r:
                continue
            f.append(float(r[0]))
            re.append(float(r[1]))
            im.append(float(r[2]))
        return cls.from_gains(np.array(f), np.array(re) + 1j * np.array(im))


def degenerate_gain(cav: PumpedCavity, psi_p: float, phase_offset: float = 0.0) -> complex:
    """Phase-sensitive gain at the degenerate point f = f_pump/2.

    g(psi) = [k*kb + i*k*Delta + i*k*|xi|*exp(-i*(psi+offset))]
             / [Delta^2 + kb^2 - |xi|^2]

    Under this alignment |g| is maximal at psi = pi/2 and minimal at
    psi = 3*pi/2; use phase_offset to match a differently referenced data
    set.  At the minimum the magnitude reduces to the closed form of
    transmission_deamp.
    """
    kb = cav.kappa_bar
    den = cav.delta**2 + kb**2 - abs(cav.xi) ** 2
    if abs(den) < _POLE_GUARD * kb**2:
        raise SingularityError("degenerate gain evaluated at its pole")
    num = cav.kappa * kb + 1j * cav.kappa * cav.delta
    num += 1j * cav.kappa * abs(cav.xi) * np.exp(-1j * (psi_p + phase_offset))
    return complex(num / den)


def transmission_deamp(cav: PumpedCavity) -> float:
    """Minimum phase-sensitive gain magnitude in transmission.

    |g| = k / (kb + |xi|), the destructive-interference limit of the
    degenerate gain; approaches 1/2 from above as |xi| -> kappa with no
    internal loss.  Regular for every |xi| >= 0.
    """
    return cav.kappa / (cav.kappa_bar + abs(cav.xi))


def reflection_deamp(cav: PumpedCavity) -> float:
    """Maximum achievable deamplification magnitude in reflection.

    |g| = |k / (kt + |xi|) - 1| with kt = (k+g)/2; reaches exactly zero at
    |xi| = k/2 for a lossless cavity, and at xi = 0 for a critically coupled
    one (gamma = kappa).
    """
    return abs(cav.kappa / (cav.kappa_tilde + abs(cav.xi)) - 1.0)


def quadrature_transfer(cav: PumpedCavity, f_hz: float) -> np.ndarray:
    """2x2 real quadrature transfer matrix [[Re e, -Im e], [Im e', Re e']]
    with e = g_s + conj(g_i) and e' = g_s - conj(g_i).

    The variance bookkeeping assumes the deamplification alignment
    arg(xi) = -pi/2 and zero detuning; entry [0, 0] is then the squeezed
    quadrature gain G_X.
    """
    gs = signal_gain(cav, f_hz, allow_unstable=True)
    gi = idler_gain(cav, f_hz, allow_unstable=True)
    eps = gs + np.conj(gi)
    eps_p = gs - np.conj(gi)
    return np.array([[eps.real, -eps.imag], [eps_p.imag, eps_p.real]])


def quadrature_gain_x(cav: PumpedCavity, f_hz: Optional[float] = None) -> float:
    """Squeezed-quadrature gain G_X = Re(g_s + conj(g_i)).

    With f_hz omitted, evaluates at band center through the pole-free
    algebraic form k*(kb + Im xi)/(kb^2 - |xi|^2 + Delta^2), taking the
    destructive-alignment limit k/(kb + |xi|) when numerator and
    denominator vanish together (|xi| -> kb, arg xi = -pi/2).
    """
    if f_hz is not None:
        return float(quadrature_transfer(cav, f_hz)[0, 0])
    kb = cav.kappa_bar
    num = kb + cav.xi.imag
    den = cav.delta**2 + kb**2 - abs(cav.xi) ** 2
    if abs(den) < _POLE_GUARD * kb**2:
        if abs(num) < _POLE_GUARD * kb and cav.delta == 0.0:
            return cav.kappa / (kb + abs(cav.xi))
        raise SingularityError("quadrature gain evaluated at its pole")
    return cav.kappa * num / den


def n_kappa2_term(g_x: float, x2_in_var: float = 0.25) -> float:
    """Second-port noise term [(sqrt(Gx)-1)/(sqrt(Gx)+1)] * <X^2_2,in>."""
    if g_x <= 0.0:
        raise DomainError("quadrature gain must be positive")
    s = math.sqrt(g_x)
    return (s - 1.0) / (s + 1.0) * x2_in_var


def n_gamma_term(kappa: float, gamma: float, xb_in_var: float = 0.25) -> float:
    """Internal-loss noise term (gamma/kappa) * <X^2_b,in>."""
    if kappa <= 0.0 or gamma < 0.0:
        raise DomainError("need kappa > 0 and gamma >= 0")
    return gamma / kappa * xb_in_var


def output_quadrature_variance(
    cav: PumpedCavity, x_in_var: float, n_kappa2: float, n_gamma: float
) -> float:
    """Band-center output variance of the squeezed quadrature,

    <X^2_out> = G_X*x_in_var + (G_X - 1)*n_kappa2 + G_X*n_gamma,

    with G_X taken from the cavity at the deamplification alignment.  The
    n_kappa2 and n_gamma inputs come from the helper accessors above.
    """
    g_x = quadrature_gain_x(cav)
    if g_x <= 0.0:
        raise DomainError(f"non-positive quadrature gain G_X = {g_x}")
    return g_x * x_in_var + (g_x - 1.0) * n_kappa2 + g_x * n_gamma


def _cross_interp(f: np.ndarray, gdb: np.ndarray, i_from: int, i_to: int, target: float) -> float:
    """Linear-in-dB interpolated frequency where gdb crosses target."""
    f0, f1 = f[i_from], f[i_to]
    g0, g1 = gdb[i_from], gdb[i_to]
    if g1 == g0:
        return float(f1)
    return float(f0 + (target - g0) * (f1 - f0) / (g1 - g0))


def gbp_extract(curve: GainCurve) -> float:
    """Gain-bandwidth product sqrt(G_peak) * df_3dB in Hz.

    The band edges are where the curve reads exactly 3 dB below the peak
    (power factor 10^-0.3, the way a dB plot is read), found by linear
    interpolation of gain in dB against frequency.  For the driven-cavity
    response this makes GBP/kappa approach sqrt(10^0.3 - 1)/1, about 0.998,
    at large gain.  Requires a single interior maximum at least 3 dB above
    both edges of the scan.
    """
    gdb = curve.power_gain_db
    f = curve.f_hz
    if f.size < 5:
        raise ExtractionError("gain curve too short for bandwidth extraction")
    i_pk = int(np.argmax(gdb))
    peak = float(gdb[i_pk])
    target = peak - 3.0
    if i_pk in (0, f.size - 1) or float(np.ptp(gdb)) < 3.0:
        raise ExtractionError("no 3 dB bandwidth resolvable in the gain curve")
    left = None
    for j in range(i_pk - 1, -1, -1):
        if gdb[j] <= target:
            left = _cross_interp(f, gdb, j, j + 1, target)
            break
    right = None
    for j in range(i_pk + 1, f.size):
        if gdb[j] <= target:
            right = _cross_interp(f, gdb, j - 1, j, target)
            break
    if left is None or right is None:
        raise ExtractionError("gain does not fall 3 dB below the peak inside the scan")
    g_peak = 10.0 ** (peak / 10.0)
    return math.sqrt(g_peak) * (right - left)


class CompressionPoint(NamedTuple):
    p_in_1db_dbm: float
    p_out_sat_dbm: float


def compression_point(
    gain_vs_power: SweepRecord, small_signal_gain_db: float
) -> CompressionPoint:
    """1-dB compression point from a (input power dBm, gain dB) sweep.

    Finds by linear interpolation in the dB domain the first input power at
    which the gain is 1 dB below the small-signal value; the saturated
    output power is that input plus the compressed gain.
    """
    order = np.argsort(gain_vs_power.x)
    p = gain_vs_power.x[order]
    g = gain_vs_power.y[order]
    target = small_signal_gain_db - 1.0
    if g[0] <= target:
        raise ExtractionError("no small-signal plateau: first point is already compressed")
    for k in range(1, p.size):
        if g[k] <= target:
            frac = (target - g[k - 1]) / (g[k] - g[k - 1])
            p_in = float(p[k - 1] + frac * (p[k] - p[k - 1]))
            return CompressionPoint(p_in, p_in + target)
    raise ExtractionError("gain never compresses by 1 dB within the sweep")


@dataclass
class PumpSearchResult:
    """Outcome of the optimal-pump search.

    On success the point is the lowest-power pump setting reaching the
    target gain; on failure it is the best point seen.
    """

    success: bool
    f_pump_hz: Optional[float]
    p_pump_dbm: Optional[float]
    gain_db: float
    self_oscillation: bool
    n_evaluations: int
    message: str = ""


def find_optimal_pump(
    evaluator: Callable[[float, float], float],
    target_db: float,
    f_bounds: Tuple[float, float],
    p_bounds_dbm: Tuple[float, float],
    n_f_coarse: int = 41,
    p_step_db: float = 0.25,
    refine_to_hz: float = 1e4,
    max_refinements: int = 8,
) -> PumpSearchResult:
    """Grid search for the cheapest pump setting reaching a target gain.

    ``evaluator(f_pump_hz, p_pump_dbm)`` must be pure and reentrant and
    return the peak gain in dB; a non-finite return marks self-oscillation
    and stops the power ramp at that frequency.  The frequency grid is
    refined tenfold around the best candidate until its spacing is at most
    ``refine_to_hz``.
    """
    f_lo, f_hi = f_bounds
    p_lo, p_hi = p_bounds_dbm
    if not (f_hi > f_lo and p_hi >= p_lo):
        raise DomainError("search bounds must be ordered")
    p_grid = np.arange(p_lo, p_hi + 0.5 * p_step_db, p_step_db)

    state = {"n": 0, "osc": False, "best": (-math.inf, None, None)}

    def scan(f_values):
        # Candidate ordering: lowest power first, then highest achieved gain
        # (at equal quantized power the gain peaks at the optimal frequency),
        # then frequency for determinism.
        found = []
        for f in f_values:
            for pw in p_grid:
                g = evaluator(float(f), float(pw))
                state["n"] += 1
                if not math.isfinite(g):
                    state["osc"] = True
                    break
                if g > state["best"][0]:
                    state["best"] = (g, float(f), float(pw))
                if g >= target_db:
                    found.append((float(pw), -g, float(f)))
                    break
        return found

    f_grid = np.linspace(f_lo, f_hi, n_f_coarse)
    step = (f_hi - f_lo) / (n_f_coarse - 1)
    candidates = scan(f_grid)
    if not candidates:
        g_best, f_best, p_best = state["best"]
        return PumpSearchResult(
            success=False,
            f_pump_hz=f_best,
            p_pump_dbm=p_best,
            gain_db=g_best,
            self_oscillation=state["osc"],
            n_evaluations=state["n"],
            message="target gain not reached inside the search rectangle",
        )
    p_best, neg_g, f_best = min(candidates)
    g_best = -neg_g
    refinements = 0
    while step > refine_to_hz and refinements < max_refinements:
        lo = max(f_lo, f_best - step)
        hi = min(f_hi, f_best + step)
        step /= 10.0
        fine = np.arange(lo, hi + 0.5 * step, step)
        found = scan(fine)
        if found:
            p_best, neg_g, f_best = min(found)
            g_best = -neg_g
        refinements += 1
    return PumpSearchResult(
        success=True,
        f_pump_hz=f_best,
        p_pump_dbm=p_best,
        gain_db=g_best,
        self_oscillation=state["osc"],
        n_evaluations=state["n"],
        message=f"refined to {step:.3g} Hz frequency resolution",
    )
