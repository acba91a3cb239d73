"""Model construction: couplings, Bloch data and every matrix of the chain.

The chain has four sublattices A, B, C, D per unit cell.  Two SSH-like legs
(A-B and C-D) are coupled by pairing terms whose strength is controlled by
``theta``; ``delta`` sets the intra/intercell hopping asymmetry.  All matrices
are built from a single immutable :class:`CouplingSet` so the (J, delta,
theta) and (v, w_r, w_l) parameterizations can never drift apart.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, ValidationError

__all__ = [
    "CouplingSet",
    "Regime",
    "PBC",
    "OBC",
    "BlochVector",
    "derive_couplings",
    "coupling_functions",
    "hamiltonian_nssh2_k",
    "bloch_nssh2",
    "energy_nssh2",
    "hamiltonian_qb_k",
    "dynamical_qb_k",
    "nssh1_k",
    "bloch_nssh1",
    "energy_nssh1",
    "realspace_hamiltonian_blocks",
    "realspace_dynamical",
    "fourier_project",
    "quadrature_dynamical",
    "build_dynamical_from_blocks",
    "nambu_basis_label",
    "realspace_basis_label",
    "TAU1",
    "TAU3",
]

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])

#: tau_i = sigma_i (x) I_4, acting on the 8-dim Nambu space of one momentum.
TAU1 = np.kron(_SX, np.eye(4))
TAU3 = np.kron(_SZ, np.eye(4))


class Regime(enum.Enum):
    """Whether hopping/pairing amplitudes enter as real or purely imaginary."""

    REAL = "real"
    IMAGINARY = "imaginary"

    @property
    def factor(self) -> complex:
        return 1.0 if self is Regime.REAL else 1.0j


@dataclass(frozen=True)
class CouplingSet:
    """Physical parameters (J, delta, theta) plus derived couplings.

    Invariants: v = J(1-delta), w_r = J(1+delta), w_l = w_r * exp(theta).
    Construct through :func:`derive_couplings`.
    """

    J: float
    delta: float
    theta: float
    v: float = field(init=False)
    w_r: float = field(init=False)
    w_l: float = field(init=False)

    def __post_init__(self):
        if self.J <= 0:
            raise DomainError(f"energy scale J must be positive, got {self.J}")
        object.__setattr__(self, "v", self.J * (1.0 - self.delta))
        object.__setattr__(self, "w_r", self.J * (1.0 + self.delta))
        object.__setattr__(self, "w_l", self.w_r * math.exp(self.theta))


def derive_couplings(J: float, delta: float, theta: float) -> CouplingSet:
    """Build a coupling set from the physical parameters."""
    return CouplingSet(J=float(J), delta=float(delta), theta=float(theta))


@dataclass(frozen=True)
class PBC:
    """Periodic boundary, carrying the Brillouin-zone momentum grid."""

    k_grid: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k_grid, dtype=float)
        if k.ndim != 1 or k.size == 0:
            raise DomainError("PBC momentum grid must be a non-empty 1d array")
        if np.any(np.diff(k) <= 0):
            raise DomainError("PBC momentum grid must be strictly increasing")
        if k[0] < -np.pi - 1e-12 or k[-1] >= np.pi:
            raise DomainError("PBC momentum grid must lie in [-pi, pi)")
        object.__setattr__(self, "k_grid", k)

    @classmethod
    def uniform(cls, n_points: int) -> "PBC":
        return cls(np.linspace(-np.pi, np.pi, n_points, endpoint=False))


@dataclass(frozen=True)
class OBC:
    """Open boundary with a fixed number of unit cells."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 2:
            raise DomainError(f"OBC needs at least 2 unit cells, got {self.n_cells}")


@dataclass(frozen=True)
class BlochVector:
    """Real and imaginary planar parts of the complex vector d(k)."""

    dr: np.ndarray  # (d_x^r, d_y^r)
    di: np.ndarray  # (d_x^i, d_y^i)

    @property
    def dx(self) -> complex:
        return self.dr[0] + 1j * self.di[0]

    @property
    def dy(self) -> complex:
        return self.dr[1] + 1j * self.di[1]


# ---------------------------------------------------------------------------
# k-space building blocks
# ---------------------------------------------------------------------------

def coupling_functions(k, c: CouplingSet):
    """The two k-dependent coefficients (f1, f2) entering every k-space matrix."""
    phase = np.exp(-1j * np.asarray(k, dtype=float))
    f1 = c.v + 0.5 * (c.w_l + c.w_r) * phase
    f2 = 0.5 * (c.w_l - c.w_r) * phase
    return f1, f2


def hamiltonian_nssh2_k(k: float, c: CouplingSet) -> np.ndarray:
    """2x2 two-EP non-Hermitian SSH block (real-parameter regime)."""
    return np.array(
        [
            [0.0, c.v + c.w_r * np.exp(-1j * k)],
            [c.v + c.w_l * np.exp(1j * k), 0.0],
        ],
        dtype=complex,
    )


def bloch_nssh2(k: float, c: CouplingSet) -> BlochVector:
    """Planar Bloch vector of the two-EP block, split into real/imaginary parts."""
    wp = 0.5 * (c.w_l + c.w_r)
    wm = 0.5 * (c.w_l - c.w_r)
    dr = np.array([c.v + wp * np.cos(k), wp * np.sin(k)])
    di = np.array([wm * np.sin(k), -wm * np.cos(k)])
    return BlochVector(dr=dr, di=di)


def energy_nssh2(k, c: CouplingSet):
    """Principal-branch quasiparticle energy; the band pair is (+E, -E)."""
    k = np.asarray(k, dtype=float)
    rad = c.v**2 + c.w_r * c.w_l + c.v * (
        c.w_l * np.exp(1j * k) + c.w_r * np.exp(-1j * k)
    )
    return np.sqrt(rad)


def nssh1_k(k: float, c: CouplingSet) -> np.ndarray:
    """2x2 single-EP non-Hermitian SSH block (imaginary-parameter regime)."""
    p1 = c.v + 0.5 * (1 + 1j) * (c.w_l - 1j * c.w_r) * np.exp(-1j * k)
    p2 = c.v + 0.5 * (1 - 1j) * (c.w_l + 1j * c.w_r) * np.exp(-1j * k)
    return np.array([[0.0, p1], [np.conj(p2), 0.0]], dtype=complex)


def bloch_nssh1(k: float, c: CouplingSet) -> BlochVector:
    """Planar Bloch vector of the single-EP block.

    Components follow from decomposing the 2x2 block into Pauli matrices, so
    that (dx^2 + dy^2) reproduces the band energies exactly.
    """
    wp = 0.5 * (c.w_l + c.w_r)
    wm = 0.5 * (c.w_l - c.w_r)
    dr = np.array([c.v + wp * np.cos(k), wp * np.sin(k)])
    di = np.array([wm * np.cos(k), wm * np.sin(k)])
    return BlochVector(dr=dr, di=di)


def energy_nssh1(k, c: CouplingSet):
    """Principal-branch energy of the single-EP block."""
    k = np.asarray(k, dtype=float)
    x = c.v**2 + c.v * (c.w_r + c.w_l) * np.cos(k) + c.w_r * c.w_l
    y = (c.w_l - c.w_r) * (c.v * np.cos(k) + 0.5 * (c.w_r + c.w_l))
    return np.sqrt(x + 1j * y)


def _pq_blocks(k: float, c: CouplingSet, regime: Regime):
    f1, f2 = coupling_functions(k, c)
    f1c = np.conj(f1)
    f2c = np.conj(f2)
    if regime is Regime.REAL:
        P = np.array(
            [
                [0, f1, 0, 0],
                [f1c, 0, 0, 0],
                [0, 0, 0, -f1],
                [0, 0, -f1c, 0],
            ],
            dtype=complex,
        )
        Q = np.array(
            [
                [0, 0, 0, -f2],
                [0, 0, f2c, 0],
                [0, f2, 0, 0],
                [-f2c, 0, 0, 0],
            ],
            dtype=complex,
        )
    else:
        # imaginary regime: couplings enter as iv, iw_r, iw_l
        P = np.array(
            [
                [0, 1j * f1, 0, 0],
                [-1j * f1c, 0, 0, 0],
                [0, 0, 0, -1j * f1],
                [0, 0, 1j * f1c, 0],
            ],
            dtype=complex,
        )
        Q = np.array(
            [
                [0, 0, 0, 1j * f2],
                [0, 0, 1j * f2c, 0],
                [0, 1j * f2, 0, 0],
                [1j * f2c, 0, 0, 0],
            ],
            dtype=complex,
        )
    return P, Q


def hamiltonian_qb_k(k: float, c: CouplingSet, regime: Regime = Regime.REAL) -> np.ndarray:
    """Hermitian 8x8 Bogoliubov Hamiltonian in the Nambu basis.

    Basis ordering: see :func:`nambu_basis_label`.
    """
    P, Q = _pq_blocks(k, c, regime)
    if regime is Regime.REAL:
        return np.block([[P, Q], [Q, P]])
    return np.block([[P, Q], [-Q, -P]])


def dynamical_qb_k(k: float, c: CouplingSet, regime: Regime = Regime.REAL) -> np.ndarray:
    """Non-Hermitian generator of Heisenberg evolution, tau_3 times the Hamiltonian."""
    return TAU3 @ hamiltonian_qb_k(k, c, regime)


def nambu_basis_label() -> str:
    return "(A_k, B_k, C_k, D_k, A_-k^dag, B_-k^dag, C_-k^dag, D_-k^dag)"


def realspace_basis_label(n_cells: int) -> str:
    return (
        f"(a_1..a_{4 * n_cells}, a_1^dag..a_{4 * n_cells}^dag) with modes "
        "ordered cell-major as (1A, 1B, 1C, 1D, 2A, ...)"
    )


# ---------------------------------------------------------------------------
# real space
# ---------------------------------------------------------------------------

def realspace_hamiltonian_blocks(c: CouplingSet, n_cells: int, regime: Regime = Regime.REAL,
                                 pbc: bool = False):
    """Hopping block K (Hermitian) and pairing block Delta (symmetric), 4N x 4N.

    Mode ordering is cell-major (A, B, C, D).  Under OBC the intercell sums
    truncate at the chain ends; under PBC they wrap around.
    """
    if n_cells < 2:
        raise DomainError(f"need at least 2 unit cells, got {n_cells}")
    z = regime.factor
    tv = z * c.v
    tw = z * 0.5 * (c.w_r + c.w_l)
    g = z * 0.5 * (c.w_l - c.w_r)
    n = 4 * n_cells
    K = np.zeros((n, n), dtype=complex)
    D = np.zeros((n, n), dtype=complex)

    def idx(cell, sub):
        return 4 * (cell % n_cells) + sub

    A, B, C, Dd = 0, 1, 2, 3
    for i in range(n_cells):
        K[idx(i, A), idx(i, B)] += tv
        K[idx(i, B), idx(i, A)] += np.conj(tv)
        K[idx(i, C), idx(i, Dd)] += -tv
        K[idx(i, Dd), idx(i, C)] += -np.conj(tv)
    last = n_cells if pbc else n_cells - 1
    for i in range(last):
        K[idx(i + 1, A), idx(i, B)] += tw
        K[idx(i, B), idx(i + 1, A)] += np.conj(tw)
        K[idx(i + 1, C), idx(i, Dd)] += -tw
        K[idx(i, Dd), idx(i + 1, C)] += -np.conj(tw)
        # pairing g * B_i^dag C_{i+1}^dag + H.c.
        D[idx(i, B), idx(i + 1, C)] += g
        D[idx(i + 1, C), idx(i, B)] += g
        # pairing -g * A_{i+1} D_i + H.c.  (creation part carries -conj(g))
        D[idx(i + 1, A), idx(i, Dd)] += -np.conj(g)
        D[idx(i, Dd), idx(i + 1, A)] += -np.conj(g)
    return K, D


def build_dynamical_from_blocks(K: np.ndarray, Delta: np.ndarray,
                                tol: float = 1e-12) -> np.ndarray:
    """Assemble the bosonic dynamical matrix [[K, Delta], [-Delta*, -K^T]].

    K must be Hermitian and Delta symmetric (bosonic statistics); violations
    are rejected.
    """
    K = np.asarray(K, dtype=complex)
    Delta = np.asarray(Delta, dtype=complex)
    if K.shape != Delta.shape or K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("K and Delta must be square matrices of equal size")
    scale = max(1.0, np.abs(K).max(), np.abs(Delta).max())
    if np.abs(K - K.conj().T).max() > tol * scale:
        raise ValidationError("hopping block K is not Hermitian")
    if np.abs(Delta - Delta.T).max() > tol * scale:
        raise ValidationError("pairing block Delta is not symmetric (Delta^T != Delta)")
    return np.block([[K, Delta], [-Delta.conj(), -K.T]])


def realspace_dynamical(c: CouplingSet, n_cells: int, regime: Regime = Regime.REAL,
                        boundary=None) -> np.ndarray:
    """8N x 8N real-space dynamical matrix; basis per :func:`realspace_basis_label`."""
    pbc = isinstance(boundary, PBC)
    if boundary is not None and not isinstance(boundary, (PBC, OBC)):
        raise DomainError(f"unknown boundary {boundary!r}")
    if isinstance(boundary, OBC) and boundary.n_cells != n_cells:
        raise DomainError("boundary.n_cells disagrees with n_cells argument")
    K, D = realspace_hamiltonian_blocks(c, n_cells, regime, pbc=pbc)
    return build_dynamical_from_blocks(K, D)


def fourier_project(G: np.ndarray, n_cells: int, k: float) -> np.ndarray:
    """Project a PBC real-space dynamical matrix onto momentum k (8x8 block).

    Serves as the independent oracle tying real-space and k-space builders
    together: the result must equal :func:`dynamical_qb_k`.
    """
    n = 4 * n_cells
    W = np.zeros((8, 2 * n), dtype=complex)
    cells = np.arange(n_cells)
    ph = np.exp(-1j * k * (cells + 1)) / np.sqrt(n_cells)
    for s in range(4):
        W[s, 4 * cells + s] = ph
        W[4 + s, n + 4 * cells + s] = ph
    return W @ G @ W.conj().T


# ---------------------------------------------------------------------------
# quadrature basis (imaginary regime)
# ---------------------------------------------------------------------------

def quadrature_dynamical(c: CouplingSet, n_cells: int, boundary=None):
    """OBC generators (h_x, h_p) of the decoupled X and P quadrature dynamics.

    Only the imaginary-parameter regime decouples the quadratures; these are
    the 4N x 4N real matrices in the basis (1A, 1B, 1C, 1D, 2A, ...).
    """
    if n_cells < 2:
        raise DomainError(f"need at least 2 unit cells, got {n_cells}")
    if isinstance(boundary, PBC):
        raise DomainError("quadrature generators are defined here for OBC only")
    n = 4 * n_cells
    hx = np.zeros((n, n))
    hp = np.zeros((n, n))
    wp = 0.5 * (c.w_r + c.w_l)
    wm = 0.5 * (c.w_l - c.w_r)

    def ix(cell, sub):
        return 4 * cell + sub

    A, B, C, D = 0, 1, 2, 3
    for j in range(n_cells):
        for h in (hx, hp):
            h[ix(j, A), ix(j, B)] = c.v
            h[ix(j, B), ix(j, A)] = -c.v
            h[ix(j, C), ix(j, D)] = -c.v
            h[ix(j, D), ix(j, C)] = c.v
        if j > 0:
            hx[ix(j, A), ix(j - 1, B)] = wp
            hx[ix(j, A), ix(j - 1, D)] = wm
            hx[ix(j, C), ix(j - 1, D)] = -wp
            hx[ix(j, C), ix(j - 1, B)] = wm
            hp[ix(j, A), ix(j - 1, B)] = wp
            hp[ix(j, A), ix(j - 1, D)] = -wm
            hp[ix(j, C), ix(j - 1, D)] = -wp
            hp[ix(j, C), ix(j - 1, B)] = -wm
        if j < n_cells - 1:
            hx[ix(j, B), ix(j + 1, A)] = -wp
            hx[ix(j, B), ix(j + 1, C)] = wm
            hx[ix(j, D), ix(j + 1, C)] = wp
            hx[ix(j, D), ix(j + 1, A)] = wm
            hp[ix(j, B), ix(j + 1, A)] = -wp
            hp[ix(j, B), ix(j + 1, C)] = -wm
            hp[ix(j, D), ix(j + 1, C)] = wp
            hp[ix(j, D), ix(j + 1, A)] = -wm
    return hx, hp
