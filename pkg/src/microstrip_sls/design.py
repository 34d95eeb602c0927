"""Closed-form synthesis of rectangular inset-fed microstrip patches.

Public functions take frequencies in GHz and lengths in mm; each converts to
SI units before evaluating its formula and converts the result back.

Two geometry modes are supported:

* ``DesignMode.PAPER`` -- patch length fixed at twice the width, with the
  ground plane at twice the patch in each direction. This reproduces the
  published FR4 parameter table (W 36.27, L 72.54, Fi 4.8, ...).
* ``DesignMode.RESONANT`` -- patch length from the effective-length /
  fringing-extension equations, ``L = L_eff - 2*dL``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError, GeometryError, SingularityError

SPEED_OF_LIGHT = 2.998e8  # m/s
ETA0 = 120 * math.pi  # free-space wave impedance (ohm)

GHZ = 1e9
MM = 1e-3

INSET_GAP_MM = 1.0
DEFAULT_FEED_OHM = 50.0


class DesignMode(str, enum.Enum):
    PAPER = "paper"
    RESONANT = "resonant"


@dataclass(frozen=True)
class SubstrateSpec:
    """Dielectric stack-up. Heights are in mm."""

    eps_r: float
    h: float
    t_copper: float = 0.035
    loss_tangent: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.eps_r) and self.eps_r >= 1):
            raise DomainError(f"eps_r must be >= 1, got {self.eps_r}")
        if not (math.isfinite(self.h) and self.h > 0):
            raise DomainError(f"h must be > 0, got {self.h}")
        if not (math.isfinite(self.t_copper) and self.t_copper >= 0):
            raise DomainError(f"t_copper must be >= 0, got {self.t_copper}")
        if not (math.isfinite(self.loss_tangent) and self.loss_tangent >= 0):
            raise DomainError(f"loss_tangent must be >= 0, got {self.loss_tangent}")


FR4 = SubstrateSpec(eps_r=4.7, h=1.6, t_copper=0.035)


@dataclass(frozen=True)
class DesignRequest:
    f_design: float  # GHz
    substrate: SubstrateSpec = FR4
    z_feed: float = DEFAULT_FEED_OHM
    mode: DesignMode = DesignMode.PAPER

    def __post_init__(self):
        if not (math.isfinite(self.f_design) and self.f_design > 0):
            raise DomainError(f"f_design must be > 0, got {self.f_design}")
        if not (math.isfinite(self.z_feed) and self.z_feed > 0):
            raise DomainError(f"z_feed must be > 0, got {self.z_feed}")
        object.__setattr__(self, "mode", DesignMode(self.mode))


@dataclass(frozen=True)
class PatchGeometry:
    """Physical dimensions of a patch, its inset feed and ground plane (mm)."""

    W: float
    L: float
    eps_eff: float
    delta_L: float
    L_eff: float
    Fi: float
    Wf: float
    Gpf: float
    Lg: float
    Wg: float
    substrate: SubstrateSpec = field(default=FR4)

    def __post_init__(self):
        for name in ("W", "L", "delta_L", "L_eff", "Fi", "Wf", "Gpf", "Lg", "Wg"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise GeometryError(f"{name} must be > 0, got {value}")
        if self.Fi >= self.L / 2:
            raise GeometryError(f"inset depth Fi={self.Fi} must be < L/2={self.L / 2}")
        if not 1.0 <= self.eps_eff <= self.substrate.eps_r:
            raise GeometryError(
                f"eps_eff={self.eps_eff} outside [1, eps_r={self.substrate.eps_r}]"
            )

    def table(self) -> dict[str, float]:
        """The nine rows of the parameter table, in mm."""
        return {
            "W": self.W,
            "L": self.L,
            "Fi": self.Fi,
            "Wf": self.Wf,
            "Gpf": self.Gpf,
            "Lg": self.Lg,
            "Wg": self.Wg,
            "Ht": self.substrate.t_copper,
            "Hs": self.substrate.h,
        }

    @property
    def resonant_frequency(self) -> float:
        """Fundamental resonance (GHz) implied by ``L + 2*delta_L``."""
        length = (self.L + 2 * self.delta_L) * MM
        return SPEED_OF_LIGHT / (2 * length * math.sqrt(self.eps_eff)) / GHZ


def compute_width(f: float, eps_r: float) -> float:
    """Patch width (mm) for efficient radiation at ``f`` GHz."""
    if not (math.isfinite(f) and f > 0):
        raise DomainError(f"frequency must be > 0 GHz, got {f}")
    if not (math.isfinite(eps_r) and eps_r >= 1):
        raise DomainError(f"eps_r must be >= 1, got {eps_r}")
    w = SPEED_OF_LIGHT / (2 * f * GHZ * math.sqrt((eps_r + 1) / 2))
    return w / MM


def compute_eps_eff(eps_r: float, h: float, W: float) -> float:
    """Effective permittivity of a microstrip of width ``W`` on height ``h`` (mm)."""
    if not (W > 0):
        raise DomainError(f"W must be > 0, got {W}")
    if not (h > 0):
        raise DomainError(f"h must be > 0, got {h}")
    if not (eps_r >= 1):
        raise DomainError(f"eps_r must be >= 1, got {eps_r}")
    return (eps_r + 1) / 2 + (eps_r - 1) / 2 * (1 + 12 * h / W) ** -0.5


def compute_delta_l(h: float, eps_eff: float, W: float) -> float:
    """Fringing length extension (mm) at each radiating edge.

    Uses the corrected denominator ``(eps_eff - 0.258) * (W/h + 0.8)``.
    """
    if not (W > 0 and h > 0):
        raise DomainError(f"W and h must be > 0, got W={W}, h={h}")
    if eps_eff <= 0.258:
        raise SingularityError(f"eps_eff={eps_eff} must exceed 0.258")
    u = W / h
    return 0.412 * h * (eps_eff + 0.3) * (u + 0.264) / ((eps_eff - 0.258) * (u + 0.8))


def compute_resonant_length(f: float, eps_eff: float, delta_L: float) -> tuple[float, float]:
    """Return ``(L_eff, L)`` in mm for a half-wave patch at ``f`` GHz."""
    if not (f > 0):
        raise DomainError(f"frequency must be > 0 GHz, got {f}")
    if not (eps_eff >= 1):
        raise DomainError(f"eps_eff must be >= 1, got {eps_eff}")
    if delta_L < 0:
        raise DomainError(f"delta_L must be >= 0, got {delta_L}")
    l_eff = SPEED_OF_LIGHT / (2 * f * GHZ * math.sqrt(eps_eff)) / MM
    if 2 * delta_L >= l_eff:
        raise GeometryError(
            f"fringing extension 2*delta_L={2 * delta_L:.4g} mm swallows L_eff={l_eff:.4g} mm"
        )
    return l_eff, l_eff - 2 * delta_L


def analyze_microstrip(w: float, h: float, eps_r: float) -> tuple[float, float]:
    """Characteristic impedance (ohm) and effective permittivity of a strip.

    Hammerstad's zero-thickness closed forms; ``w`` and ``h`` share any unit.
    """
    if not (w > 0 and h > 0):
        raise DomainError(f"strip width and height must be > 0, got w={w}, h={h}")
    u = w / h
    if u <= 1:
        eps_eff = (eps_r + 1) / 2 + (eps_r - 1) / 2 * (
            (1 + 12 / u) ** -0.5 + 0.04 * (1 - u) ** 2
        )
        z0 = 60 / math.sqrt(eps_eff) * math.log(8 / u + u / 4)
    else:
        eps_eff = (eps_r + 1) / 2 + (eps_r - 1) / 2 * (1 + 12 / u) ** -0.5
        z0 = ETA0 / (math.sqrt(eps_eff) * (u + 1.393 + 0.667 * math.log(u + 1.444)))
    return z0, eps_eff


def synthesize_feed_width(z0: float, eps_r: float, h: float) -> float:
    """Strip width (same unit as ``h``) giving characteristic impedance ``z0``.

    Wheeler's narrow-strip expression is tried first and kept when it
    yields ``W/h < 2``; otherwise the wide-strip expression is used.
    """
    if not (z0 > 0):
        raise DomainError(f"z0 must be > 0, got {z0}")
    if not (eps_r >= 1 and h > 0):
        raise DomainError(f"need eps_r >= 1 and h > 0, got eps_r={eps_r}, h={h}")
    a = z0 / 60 * math.sqrt((eps_r + 1) / 2) + (eps_r - 1) / (eps_r + 1) * (
        0.23 + 0.11 / eps_r
    )
    u = 8 * math.exp(a) / (math.exp(2 * a) - 2)
    if not 0 < u < 2:
        b = ETA0 * math.pi / (2 * z0 * math.sqrt(eps_r))
        u = (2 / math.pi) * (
            b
            - 1
            - math.log(2 * b - 1)
            + (eps_r - 1) / (2 * eps_r) * (math.log(b - 1) + 0.39 - 0.61 / eps_r)
        )
    return u * h


def design_patch(request: DesignRequest) -> PatchGeometry:
    """Assemble a complete patch geometry for ``request``."""
    sub = request.substrate
    f = request.f_design
    w = compute_width(f, sub.eps_r)
    eps_eff = compute_eps_eff(sub.eps_r, sub.h, w)
    delta_l = compute_delta_l(sub.h, eps_eff, w)
    l_eff, l_res = compute_resonant_length(f, eps_eff, delta_l)
    length = 2 * w if request.mode is DesignMode.PAPER else l_res
    return PatchGeometry(
        W=w,
        L=length,
        eps_eff=eps_eff,
        delta_L=delta_l,
        L_eff=l_eff,
        Fi=6 * sub.h / 2,
        Wf=synthesize_feed_width(request.z_feed, sub.eps_r, sub.h),
        Gpf=INSET_GAP_MM,
        Lg=2 * length,
        Wg=2 * w,
        substrate=sub,
    )
