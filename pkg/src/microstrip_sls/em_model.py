"""Two-slot transmission-line surrogate for a rectangular patch.

The patch is modelled as two radiating slots of width ``W`` separated by a
length of wide microstrip. Each slot carries a radiation conductance
(numerical quadrature of the radiated-power integral) and an open-end
susceptance equal to the fringing extension ``delta_L`` seen as a short
line stub. Only the fundamental longitudinal mode is represented: the line
section is replaced by its single-resonance (parallel RLC) equivalent whose
susceptance slope matches the full line at resonance. Samples well above
that resonance are therefore flagged as extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .design import ETA0, GHZ, MM, SPEED_OF_LIGHT, PatchGeometry, analyze_microstrip
from .errors import DomainError, ModelRangeError, SingularityError

F_MIN_GHZ = 1.0
F_MAX_GHZ = 30.0
VSWR_CLAMP = 1e6
EXTRAPOLATION_RATIO = 1.5
N_QUAD = 128

_GL_X, _GL_W = np.polynomial.legendre.leggauss(N_QUAD)
_THETA = (_GL_X + 1) * (math.pi / 2)
_THETA_W = _GL_W * (math.pi / 2)


def _check_band(f) -> np.ndarray:
    f = np.atleast_1d(np.asarray(f, dtype=float))
    if not np.all(np.isfinite(f)) or f.min() < F_MIN_GHZ or f.max() > F_MAX_GHZ:
        raise ModelRangeError(
            f"frequency outside model validity window [{F_MIN_GHZ}, {F_MAX_GHZ}] GHz"
        )
    return f


def _conductance_integrand(k0w_half: np.ndarray, theta: np.ndarray) -> np.ndarray:
    # sin^2(a cos t) / cos^2(t) * sin^3(t), written via sinc to avoid 0/0 at t = pi/2
    a = k0w_half[..., None]
    ct = np.cos(theta)
    return a**2 * np.sinc(a * ct / math.pi) ** 2 * np.sin(theta) ** 3


def slot_conductances(geometry: PatchGeometry, f) -> tuple[np.ndarray, np.ndarray]:
    """Self (G1) and mutual (G12) conductance of the radiating slots, in S.

    ``f`` may be a scalar or array of GHz; arrays broadcast element-wise.
    """
    f = _check_band(f)
    k0 = 2 * math.pi * f * GHZ / SPEED_OF_LIGHT
    core = _conductance_integrand(k0 * geometry.W * MM / 2, _THETA)
    g1 = (core * _THETA_W).sum(axis=-1) / (120 * math.pi**2)
    coupling = j0(k0[:, None] * geometry.L * MM * np.sin(_THETA))
    g12 = (core * coupling * _THETA_W).sum(axis=-1) / (120 * math.pi**2)
    return g1, g12


def _line_admittance(geometry: PatchGeometry) -> float:
    z_patch, _ = analyze_microstrip(geometry.W, geometry.substrate.h, geometry.substrate.eps_r)
    return 1 / z_patch


def slot_admittance(geometry: PatchGeometry, f: float) -> complex:
    """Admittance of one radiating slot: self conductance plus open-end susceptance."""
    g1, _ = slot_conductances(geometry, f)
    y_c = _line_admittance(geometry)
    beta = 2 * math.pi * f * GHZ * math.sqrt(geometry.eps_eff) / SPEED_OF_LIGHT
    b = y_c * math.tan(beta * geometry.delta_L * MM)
    return complex(float(g1[0]), b)


def edge_impedance(geometry: PatchGeometry, f, mutual: bool = True) -> np.ndarray:
    """Impedance (ohm) seen at the radiating edge, ``Fi = 0``."""
    f = _check_band(f)
    g1, g12 = slot_conductances(geometry, f)
    g = g1 + g12 if mutual else g1
    y_c = _line_admittance(geometry)
    f0 = geometry.resonant_frequency
    alpha = math.pi * geometry.delta_L / (geometry.L + 2 * geometry.delta_L)
    slope = y_c * math.pi / (2 * math.cos(alpha) ** 2)
    g_dielectric = slope * geometry.substrate.loss_tangent
    y_edge = 2 * g + g_dielectric + 1j * slope * (f / f0 - f0 / f)
    return 1 / y_edge


def input_impedance(geometry: PatchGeometry, f, mutual: bool = True):
    """Input impedance (ohm) at the inset feed point.

    The edge impedance is scaled by ``cos^2(pi * Fi / L)``. Returns a complex
    scalar for scalar ``f`` and an array otherwise.
    """
    z = edge_impedance(geometry, f, mutual) * math.cos(math.pi * geometry.Fi / geometry.L) ** 2
    return complex(z[0]) if np.ndim(f) == 0 else z


def reflection_coefficient(z_in, z0: float = 50.0):
    """``(z_in - z0) / (z_in + z0)``; works on scalars or arrays."""
    if not z0 > 0:
        raise DomainError(f"reference impedance must be > 0, got {z0}")
    z_in = np.asarray(z_in, dtype=complex)
    den = z_in + z0
    if np.any(den == 0):
        raise SingularityError("z_in = -z0 has no finite reflection coefficient")
    gamma = (z_in - z0) / den
    return complex(gamma) if gamma.ndim == 0 else gamma


def saturated(gamma_mag):
    """True where ``vswr`` would exceed its clamp."""
    return np.asarray(gamma_mag) >= 1 - 2 / (VSWR_CLAMP + 1)


def vswr(gamma_mag):
    """Voltage standing-wave ratio, clamped to ``VSWR_CLAMP`` near total reflection."""
    g = np.asarray(gamma_mag, dtype=float)
    if np.any(g < 0) or np.any(~np.isfinite(g)):
        raise DomainError("reflection magnitude must be finite and >= 0")
    sat = saturated(g)
    safe = np.where(sat, 0.0, g)
    out = np.where(sat, VSWR_CLAMP, (1 + safe) / (1 - safe))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SweepResult:
    frequencies: np.ndarray  # GHz
    z_in: np.ndarray  # ohm
    gamma: np.ndarray
    s11_db: np.ndarray
    vswr: np.ndarray
    saturated: np.ndarray
    f_resonance: float  # GHz, fundamental of the surrogate

    @property
    def extrapolated(self) -> np.ndarray:
        """Samples far enough above resonance that unmodelled modes matter."""
        return self.frequencies > EXTRAPOLATION_RATIO * self.f_resonance

    def minimum(self) -> tuple[float, float, float]:
        """``(f, s11_db, vswr)`` at the sample with the lowest |S11|."""
        i = int(np.argmin(self.s11_db))
        return float(self.frequencies[i]), float(self.s11_db[i]), float(self.vswr[i])


def sweep(
    geometry: PatchGeometry,
    f_start: float = 2.4,
    f_stop: float = 24.0,
    n_points: int = 500,
    z0: float = 50.0,
    mutual: bool = True,
) -> SweepResult:
    if not f_start < f_stop:
        raise DomainError(f"f_start={f_start} must be below f_stop={f_stop}")
    if n_points < 2:
        raise DomainError(f"n_points must be >= 2, got {n_points}")
    freqs = np.linspace(f_start, f_stop, int(n_points))
    z = input_impedance(geometry, freqs, mutual)
    gamma = reflection_coefficient(z, z0)
    mag = np.abs(gamma)
    with np.errstate(divide="ignore"):
        s11 = 20 * np.log10(mag)
    return SweepResult(
        frequencies=freqs,
        z_in=z,
        gamma=gamma,
        s11_db=s11,
        vswr=vswr(mag),
        saturated=saturated(mag),
        f_resonance=geometry.resonant_frequency,
    )


# --- far field -------------------------------------------------------------


@dataclass(frozen=True)
class RadiationPattern:
    theta_grid: np.ndarray  # rad, [0, pi/2]
    phi_grid: np.ndarray  # rad, [0, 2pi)
    intensity: np.ndarray  # shape (n_theta, n_phi), peak 1
    frequency: float  # GHz


def radiation_intensity(geometry: PatchGeometry, f: float, theta, phi) -> np.ndarray:
    """Un-normalized two-slot intensity; equals 1 at broadside.

    The patch lies in the x-y plane with its resonant length along x, so
    ``phi = 0`` is the E-plane and ``phi = pi/2`` the H-plane.
    """
    k0 = 2 * math.pi * f * GHZ / SPEED_OF_LIGHT
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st, sp, cp = np.sin(theta), np.sin(phi), np.cos(phi)
    polarization = 1 - st**2 * sp**2  # cos^2(phi) + cos^2(theta) sin^2(phi)
    width_factor = np.sinc(k0 * geometry.W * MM / 2 * st * sp / math.pi) ** 2
    height_factor = np.sinc(k0 * geometry.substrate.h * MM / 2 * st * cp / math.pi) ** 2
    spacing = (geometry.L + 2 * geometry.delta_L) * MM
    array_factor = np.cos(k0 * spacing / 2 * st * cp) ** 2
    return polarization * width_factor * height_factor * array_factor


def far_field(
    geometry: PatchGeometry, f: float, n_theta: int = 46, n_phi: int = 72
) -> RadiationPattern:
    """Sample the normalized upper-hemisphere pattern on a regular grid.

    ``theta`` includes both 0 and pi/2; ``phi`` steps by ``2*pi/n_phi`` from 0.
    """
    if n_theta < 8 or n_phi < 8:
        raise DomainError(f"grid counts must be >= 8, got {n_theta}x{n_phi}")
    _check_band(f)
    theta = np.linspace(0.0, math.pi / 2, int(n_theta))
    phi = np.arange(int(n_phi)) * (2 * math.pi / n_phi)
    u = radiation_intensity(geometry, f, theta[:, None], phi[None, :])
    return RadiationPattern(theta, phi, u / u.max(), float(f))


def _theta_weights(theta: np.ndarray) -> np.ndarray:
    # exact integral of sin(theta) against each piecewise-linear hat function
    a, b = theta[:-1], theta[1:]
    span = b - a
    left = (np.sin(a) - np.sin(b) + span * np.cos(a)) / span
    right = (np.sin(b) - np.sin(a) - span * np.cos(b)) / span
    w = np.zeros_like(theta)
    w[:-1] += left
    w[1:] += right
    return w


def radiated_power(pattern: RadiationPattern) -> float:
    """Hemispheric integral of intensity (same units as intensity x sr)."""
    w_theta = _theta_weights(pattern.theta_grid)
    d_phi = 2 * math.pi / len(pattern.phi_grid)
    return float((pattern.intensity.sum(axis=1) * w_theta).sum() * d_phi)


def directivity(pattern: RadiationPattern) -> float:
    """Peak directivity in dBi, ``4*pi*U_max / P_rad``."""
    u_max = float(pattern.intensity.max())
    p_rad = radiated_power(pattern)
    if u_max <= 0 or p_rad <= 0:
        raise DomainError("degenerate pattern: no radiated power")
    return 10 * math.log10(4 * math.pi * u_max / p_rad)


def half_power_beamwidth(geometry: PatchGeometry, f: float, plane: str = "E") -> float:
    """Full -3 dB beamwidth (degrees) in the E- or H-plane.

    Returns 180 when the cut never drops to half power above the ground plane.
    """
    from scipy.optimize import brentq

    phi = {"E": 0.0, "H": math.pi / 2}[plane.upper()]

    def excess(t):
        return float(radiation_intensity(geometry, f, t, phi)) - 0.5

    grid = np.linspace(0.0, math.pi / 2, 2001)
    vals = radiation_intensity(geometry, f, grid, phi) - 0.5
    below = np.nonzero(vals < 0)[0]
    if below.size == 0:
        return 180.0
    i = int(below[0])
    return 2 * math.degrees(brentq(excess, grid[i - 1], grid[i], xtol=1e-12))


# --- link budget -------------------------------------------------------------

# 20*log10(4*pi/c) in the (km, MHz) unit system customary for link budgets
FSPL_CONSTANT_DB = 32.44


def fspl(d: float, f: float) -> float:
    """Free-space path loss (dB) over ``d`` metres at ``f`` GHz."""
    if not (math.isfinite(d) and d > 0):
        raise DomainError(f"distance must be > 0 m, got {d}")
    if not (math.isfinite(f) and f > 0):
        raise DomainError(f"frequency must be > 0 GHz, got {f}")
    return 20 * math.log10(d / 1e3) + 20 * math.log10(f * 1e3) + FSPL_CONSTANT_DB


@dataclass(frozen=True)
class LinkBudget:
    p_tx: float  # dBm
    g_tx: float  # dBi
    g_rx: float  # dBi
    distance: float  # m
    frequency: float  # GHz
    p_rx: float  # dBm
    sensitivity: float  # dBm
    feasible: bool

    @property
    def margin(self) -> float:
        return self.p_rx - self.sensitivity


def link_budget(
    p_tx: float, g_tx: float, g_rx: float, d: float, f: float, sensitivity: float
) -> LinkBudget:
    p_rx = p_tx + g_tx + g_rx - fspl(d, f)
    return LinkBudget(p_tx, g_tx, g_rx, d, f, p_rx, sensitivity, p_rx >= sensitivity)
