"""Bloch-vector geometry, exceptional points, winding numbers, phase labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ResolutionError, SingularityError
from .model import (
    BlochVector,
    CouplingSet,
    bloch_nssh1,
    bloch_nssh2,
    energy_nssh1,
    energy_nssh2,
)

__all__ = [
    "Phase",
    "PhaseLabel",
    "WindingResult",
    "default_bz_grid",
    "ep_locations_nssh2",
    "winding_pair",
    "winding_integral",
    "classify_phase_real",
    "ep_nssh1",
    "classify_phase_imag",
    "parametric_energy_loops",
]

CRITICAL_BAND = 1e-6


class Phase(enum.Enum):
    TRIVIAL = "trivial"        # nu = 0
    MOEBIUS = "moebius"        # nu = 1/2 (real regime only)
    NONTRIVIAL = "nontrivial"  # nu = 1
    CRITICAL = "critical"      # at a phase boundary, invariant undefined


@dataclass(frozen=True)
class PhaseLabel:
    tag: Phase
    boundaries: tuple  # delta thresholds used for classification
    nu: float | None = None


@dataclass(frozen=True)
class WindingResult:
    nu1: float
    nu2: float
    nu: float
    grid_size: int
    imag_residual: float


def default_bz_grid(n_points: int = 2001) -> np.ndarray:
    """Uniform Brillouin-zone grid on [-pi, pi), endpoint excluded."""
    if n_points < 401:
        raise DomainError(f"winding grids need >= 401 points, got {n_points}")
    return np.linspace(-np.pi, np.pi, n_points, endpoint=False)


def ep_locations_nssh2(c: CouplingSet):
    """The two fixed exceptional points in the (d_x^r, d_y^r) plane.

    Returns (EP1, EP2, degenerate) where degenerate flags the Hermitian
    theta=0 limit in which both collapse to the origin.
    """
    wm = 0.5 * (c.w_l - c.w_r)
    ep1 = np.array([wm, 0.0])
    ep2 = -ep1
    return ep1, ep2, bool(c.theta == 0.0)


def _wrap(a: np.ndarray) -> np.ndarray:
    """Map angles to (-pi, pi]."""
    return -((-a + np.pi) % (2 * np.pi) - np.pi)


def _phi_angles(bloch: BlochVector):
    """The two shifted angles phi_1, phi_2 (atan2 arguments as (y, x) pairs)."""
    dxr, dyr = bloch.dr
    dxi, dyi = bloch.di
    phi1 = np.arctan2(dyr + dxi, dxr - dyi)
    phi2 = np.arctan2(dyr - dxi, dxr + dyi)
    return phi1, phi2


def winding_pair(d_provider, grid: np.ndarray) -> WindingResult:
    """Winding numbers (nu1, nu2, nu) via wrapped angle increments over the BZ.

    ``d_provider`` maps momentum -> BlochVector.  Each consecutive wrapped
    increment must stay within pi/2; larger jumps mean the grid cannot
    distinguish a fast winding from an aliased one near an EP.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 401:
        raise DomainError(f"winding grids need >= 401 points, got {grid.size}")
    phi1 = np.empty(grid.size)
    phi2 = np.empty(grid.size)
    for i, k in enumerate(grid):
        phi1[i], phi2[i] = _phi_angles(d_provider(k))
    total = np.empty(2)
    for j, phi in enumerate((phi1, phi2)):
        inc = _wrap(np.diff(np.append(phi, phi[0])))  # includes closure step
        if np.abs(inc).max() > np.pi / 2:
            raise ResolutionError(
                "wrapped angle increment exceeds pi/2; grid too coarse near an "
                "exceptional point"
            )
        total[j] = inc.sum() / (2 * np.pi)
    # the closed-loop integral of each phase derivative has no imaginary part;
    # report how far each winding sits from the nearest quantized value
    residual = float(max(abs(total[0] - round(total[0])),
                         abs(total[1] - round(total[1]))))
    return WindingResult(
        nu1=float(total[0]),
        nu2=float(total[1]),
        nu=float(0.5 * (total[0] + total[1])),
        grid_size=int(grid.size),
        imag_residual=residual,
    )


def winding_integral(d_provider, grid: np.ndarray) -> complex:
    """Closed-loop winding integral with the full complex Bloch vector.

    nu = (1/2 pi) oint dk (d_x d_k d_y - d_y d_k d_x) / (d_x^2 + d_y^2);
    the real part is the invariant, the imaginary part a residual that must
    vanish over the closed loop.  Derivatives are spectral (the components
    are trigonometric polynomials), the quadrature is the periodic trapezoid
    rule, so the grid must be uniform over [-pi, pi).
    """
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    if n < 401:
        raise DomainError(f"winding grids need >= 401 points, got {n}")
    steps = np.diff(grid)
    if np.abs(steps - steps[0]).max() > 1e-10:
        raise DomainError("winding_integral requires a uniform momentum grid")
    dx = np.empty(n, dtype=complex)
    dy = np.empty(n, dtype=complex)
    for i, k in enumerate(grid):
        b = d_provider(k)
        dx[i], dy[i] = b.dx, b.dy
    denom = dx**2 + dy**2
    if np.abs(denom).min() < 1e-12:
        raise SingularityError(
            "d_x^2 + d_y^2 vanishes on the grid: parameters at/near an "
            "exceptional point"
        )
    m = np.fft.fftfreq(n, d=1.0 / n)  # integer mode numbers
    if n % 2 == 0:
        m[n // 2] = 0.0  # drop the unpaired Nyquist mode
    ddx = np.fft.ifft(1j * m * np.fft.fft(dx))
    ddy = np.fft.ifft(1j * m * np.fft.fft(dy))
    integrand = (dx * ddy - dy * ddx) / denom
    return complex(integrand.mean())


def classify_phase_real(c: CouplingSet) -> PhaseLabel:
    """Phase of the real-regime chain from the delta thresholds."""
    lower = (1.0 - np.exp(c.theta)) / (1.0 + np.exp(c.theta))
    boundaries = (float(lower), 0.0)
    if min(abs(c.delta - lower), abs(c.delta - 0.0)) < CRITICAL_BAND:
        return PhaseLabel(tag=Phase.CRITICAL, boundaries=boundaries)
    if c.delta < lower:
        return PhaseLabel(tag=Phase.TRIVIAL, boundaries=boundaries, nu=0.0)
    if c.delta < 0.0:
        return PhaseLabel(tag=Phase.MOEBIUS, boundaries=boundaries, nu=0.5)
    return PhaseLabel(tag=Phase.NONTRIVIAL, boundaries=boundaries, nu=1.0)


def ep_nssh1(c: CouplingSet):
    """Exceptional-point data of the single-EP block.

    Returns (v_critical, k_star, delta0): the critical intracell coupling,
    the momentum where both X(k) and Y(k) vanish, and the transition value
    of delta at the given theta.
    """
    v_crit = np.sqrt(0.5 * (c.w_r**2 + c.w_l**2))
    arg = -(c.w_r + c.w_l) / np.sqrt(2.0 * (c.w_r**2 + c.w_l**2))
    if abs(arg) > 1.0 + 1e-12:
        raise DomainError(f"arccos argument {arg} outside [-1, 1]")
    k_star = float(np.arccos(np.clip(arg, -1.0, 1.0)))
    s = np.sqrt(0.5 * (1.0 + np.exp(2.0 * c.theta)))
    delta0 = (1.0 - s) / (1.0 + s)
    return float(v_crit), k_star, float(delta0)


def classify_phase_imag(c: CouplingSet, grid: np.ndarray | None = None) -> PhaseLabel:
    """Phase of the imaginary-regime chain from the single-EP winding."""
    if grid is None:
        grid = default_bz_grid()
    _, _, delta0 = ep_nssh1(c)
    boundaries = (float(delta0),)
    if abs(c.delta - delta0) < CRITICAL_BAND:
        return PhaseLabel(tag=Phase.CRITICAL, boundaries=boundaries)
    res = winding_pair(lambda k: bloch_nssh1(k, c), grid)
    nu = res.nu
    tag = Phase.NONTRIVIAL if abs(nu - 1.0) < 0.25 else Phase.TRIVIAL
    # independent cross-check against the closed-form transition point
    expected = Phase.NONTRIVIAL if c.delta > delta0 else Phase.TRIVIAL
    if tag is not expected:
        raise ResolutionError(
            f"winding nu={nu:.4f} disagrees with delta0={delta0:.6f} "
            f"classification at delta={c.delta}"
        )
    return PhaseLabel(tag=tag, boundaries=boundaries, nu=float(nu))


def parametric_energy_loops(c: CouplingSet, grid: np.ndarray | None = None,
                            which: str = "nssh2"):
    """Complex-energy traces of the +/- bands over the BZ.

    Returns (E_plus, E_minus, merged) where merged reports whether the two
    loops share a point within 1e-8 (single bigger loop).
    """
    if grid is None:
        grid = default_bz_grid()
    energy = energy_nssh2 if which == "nssh2" else energy_nssh1
    grid = np.asarray(grid, dtype=float)
    e = np.asarray(energy(grid, c), dtype=complex)
    e_plus, e_minus = e, -e
    # the two loops share a point exactly where E^2 = d.d crosses the
    # negative real axis: there E = i sqrt(|d.d|) and the conjugation
    # symmetry d.d(-k) = conj(d.d(k)) puts -E on the same band's trace;
    # scan for sign changes of Im(d.d) and refine the crossing by bisection
    merged = False
    dd = np.append(e**2, e[0] ** 2)
    kk = np.append(grid, grid[0] + 2 * np.pi)
    for i in np.nonzero(np.diff(np.sign(dd.imag)) != 0)[0]:
        a, b = kk[i], kk[i + 1]
        fa = complex(energy(a, c)) ** 2
        for _ in range(80):
            m = 0.5 * (a + b)
            fm = complex(energy(m, c)) ** 2
            if fa.imag * fm.imag <= 0:
                b = m
            else:
                a, fa = m, fm
        z = complex(energy(0.5 * (a + b), c)) ** 2
        if abs(z.imag) < 1e-8 and z.real < -1e-12:
            merged = True
            break
    return e_plus, e_minus, bool(merged)
