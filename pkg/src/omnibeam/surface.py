"""Coupled reflect/refract element coefficients and surface configurations.

Each element simultaneously reflects and refracts the incident field.  The
two coefficients of element l,

    psi_t = gamma_t * exp(j phi_t)      (reflective side, y > 0)
    psi_r = gamma_r * exp(j phi_r)      (refractive side, y < 0)

are coupled by energy conservation gamma_t^2 + gamma_r^2 = 1 and by the
hardware phase constraint phi_t - phi_r = c (mod 2 pi) with c a constant of
the surface.  Consequently the whole refractive matrix is a scaled copy of
the reflective one:

    Psi_r = exp(-j c) * diag(gamma_r / gamma_t) * Psi_t,

the identity behind the mirror-symmetric twin beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ElementCoefficients",
    "SurfaceSpec",
    "SurfaceConfiguration",
    "make_element",
    "quantize_phase",
    "surface_matrices",
]

TWO_PI = 2.0 * math.pi
EQUAL_SPLIT = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ElementCoefficients:
    """Amplitudes and phases of one element's coefficient pair."""

    gamma_t: float
    gamma_r: float
    phi_t: float
    phi_r: float

    @property
    def psi_t(self) -> complex:
        return self.gamma_t * complex(math.cos(self.phi_t), math.sin(self.phi_t))

    @property
    def psi_r(self) -> complex:
        return self.gamma_r * complex(math.cos(self.phi_r), math.sin(self.phi_r))


def make_element(phi_t: float, gamma_t: float, coupling: float) -> ElementCoefficients:
    """Build a coupled coefficient pair from the reflective phase and split.

    gamma_r is fixed by energy conservation, phi_r by the phase coupling
    constant.  Phases are stored wrapped to [0, 2 pi).
    """
    if not 0.0 <= gamma_t <= 1.0:
        raise ValueError(f"gamma_t={gamma_t} outside [0, 1]")
    gamma_r = math.sqrt(max(0.0, 1.0 - gamma_t * gamma_t))
    pt = phi_t % TWO_PI
    pr = (phi_t - coupling) % TWO_PI
    return ElementCoefficients(gamma_t, gamma_r, pt, pr)


def quantize_phase(phi: float, bits: int) -> float:
    """Snap a phase to the uniform 2^bits grid over [0, 2 pi).

    Nearest level wins; exact midpoints round toward the lower level.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    n = 1 << bits
    step = TWO_PI / n
    k = int(math.ceil((phi % TWO_PI) / step - 0.5)) % n
    return k * step


@dataclass(frozen=True)
class SurfaceSpec:
    """Surface-wide hardware parameters: coupling constant, split, phase grid.

    `phase_bits = None` means continuously tunable phases.  The default split
    sends equal power to both sides.
    """

    coupling: float = math.pi / 2.0
    gamma_t: float = EQUAL_SPLIT
    phase_bits: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.gamma_t <= 1.0:
            raise ValueError("gamma_t must lie in [0, 1]")
        if self.phase_bits is not None and self.phase_bits < 1:
            raise ValueError("phase_bits must be >= 1 when set")

    @property
    def gamma_r(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.gamma_t * self.gamma_t))


@dataclass(frozen=True)
class SurfaceConfiguration:
    """A concrete phase/amplitude state for all L elements.

    `phi_t` and `gamma_t` are length-L vectors; the refractive state follows
    from the coupling.  When `phase_bits` is set, every stored phase must sit
    on the quantization grid.
    """

    phi_t: np.ndarray
    gamma_t: np.ndarray
    coupling: float
    phase_bits: int | None = None

    def __post_init__(self):
        phi = np.asarray(self.phi_t, dtype=float)
        gam = np.asarray(self.gamma_t, dtype=float)
        if phi.ndim != 1 or gam.shape != phi.shape:
            raise ValueError("phi_t and gamma_t must be equal-length vectors")
        if np.any((gam < 0) | (gam > 1)):
            raise ValueError("gamma_t entries must lie in [0, 1]")
        if self.phase_bits is not None:
            snapped = np.array([quantize_phase(p, self.phase_bits) for p in phi])
            if not np.allclose(phi % TWO_PI, snapped, atol=1e-12):
                raise ValueError("phases are off the quantization grid")
        object.__setattr__(self, "phi_t", phi)
        object.__setattr__(self, "gamma_t", gam)

    @classmethod
    def from_phases(cls, phi_t, spec: SurfaceSpec) -> "SurfaceConfiguration":
        """Wrap (and if required quantize) phases under a hardware spec."""
        phi = np.asarray(phi_t, dtype=float) % TWO_PI
        if spec.phase_bits is not None:
            phi = np.array([quantize_phase(p, spec.phase_bits) for p in phi])
        gam = np.full(phi.shape, spec.gamma_t, dtype=float)
        return cls(phi, gam, spec.coupling, spec.phase_bits)

    @property
    def count(self) -> int:
        return self.phi_t.shape[0]

    @property
    def gamma_r(self) -> np.ndarray:
        return np.sqrt(np.maximum(0.0, 1.0 - self.gamma_t ** 2))

    @property
    def phi_r(self) -> np.ndarray:
        return (self.phi_t - self.coupling) % TWO_PI

    @property
    def psi_t_diag(self) -> np.ndarray:
        return self.gamma_t * np.exp(1j * self.phi_t)

    @property
    def psi_r_diag(self) -> np.ndarray:
        return self.gamma_r * np.exp(1j * self.phi_r)

    def diag_for_side(self, side) -> np.ndarray:
        return self.psi_t_diag if int(side) > 0 else self.psi_r_diag

    def element(self, l: int) -> ElementCoefficients:
        return ElementCoefficients(float(self.gamma_t[l]), float(self.gamma_r[l]),
                                   float(self.phi_t[l]), float(self.phi_r[l]))


def surface_matrices(config: SurfaceConfiguration) -> tuple[np.ndarray, np.ndarray]:
    """Dense diagonal coefficient matrices (Psi_t, Psi_r), shape (L, L)."""
    return np.diag(config.psi_t_diag), np.diag(config.psi_r_diag)
