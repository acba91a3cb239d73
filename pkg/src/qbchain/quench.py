"""Sudden-quench engine: Loschmidt amplitude, return rate, Fisher zeros,
critical times, Pancharatnam geometric phase and DTOPs.

All quenches act on the two-band real-regime blocks.  The complex Bloch
vector is normalized with the bilinear product d.d = d_x^2 + d_y^2 (not the
Hermitian one); this is the unique convention for which a self-quench gives
g_k = exp(iEt).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    BranchCutError,
    DomainError,
    ExceptionalPointError,
    ResolutionError,
)
from .model import CouplingSet, bloch_nssh2, hamiltonian_nssh2_k

__all__ = [
    "QuenchProtocol",
    "LoschmidtResult",
    "CriticalTimes",
    "PgpField",
    "DtopSeries",
    "loschmidt_gk",
    "loschmidt_oracle",
    "return_rate",
    "fisher_zeros",
    "critical_set",
    "pgp_field",
    "dtop",
]


def _overlap_fields(k, ci: CouplingSet, cf: CouplingSet):
    """(E^i, E^f, overlap) with bilinear-normalized Bloch vectors, vectorized in k."""
    k = np.asarray(k, dtype=float)
    bi = bloch_nssh2(k, ci)
    bf = bloch_nssh2(k, cf)
    ddi = bi.dx**2 + bi.dy**2
    ddf = bf.dx**2 + bf.dy**2
    if np.abs(ddi).min() < 1e-14 or np.abs(ddf).min() < 1e-14:
        raise ExceptionalPointError(
            "d.d vanishes: Bloch-vector normalization undefined at an "
            "exceptional point"
        )
    Ei = np.sqrt(ddi)
    Ef = np.sqrt(ddf)
    ov = (bi.dx * bf.dx + bi.dy * bf.dy) / (Ei * Ef)
    return Ei, Ef, ov


def loschmidt_gk(k, ci: CouplingSet, cf: CouplingSet, t):
    """Loschmidt amplitude g_k(t) = cos(E^f t) + i (d^i_hat . d^f_hat) sin(E^f t)."""
    _, Ef, ov = _overlap_fields(k, ci, cf)
    t = np.asarray(t)  # complex times allowed (Fisher-zero checks)
    return np.cos(Ef * t) + 1j * ov * np.sin(Ef * t)


def _mode_parameter(H: np.ndarray):
    """(u, E) with eigenvectors (pm u, 1) of the 2x2 block and b*u = +E.

    The two principal square roots sqrt(a/b) and sqrt(ab) can land on
    inconsistent sheets for complex entries; the sign of u is fixed so the
    pair multiplies back to the principal E.
    """
    a, b = H[0, 1], H[1, 0]
    if min(abs(a), abs(b)) < 1e-14:
        raise ExceptionalPointError("2x2 block is defective (off-diagonal vanishes)")
    E = np.sqrt(a * b)
    u = np.sqrt(a / b)
    if abs(b * u - E) > abs(b * u + E):
        u = -u
    return u, E


def loschmidt_oracle(k: float, ci: CouplingSet, cf: CouplingSet, t: float,
                     method: str = "fq") -> complex:
    """Independent Loschmidt amplitudes for cross-validation.

    method="fq": assemble the Bogoliubov coefficients F_{1,2}, Q_{1,2}
    relating initial and final normal modes and evaluate
    (Q2 F2 e^{-iE^f t} + Q1 F1 e^{iE^f t}) / ((Q2^2-Q1^2)(F2^2-F1^2)).

    method="biortho": evolve the lower-band initial right eigenvector under
    the final 2x2 block through its biorthogonal eigendecomposition and
    contract with the matching left eigenvector.
    """
    ui, _ = _mode_parameter(hamiltonian_nssh2_k(k, ci))
    Hf = hamiltonian_nssh2_k(k, cf)
    uf, Ef = _mode_parameter(Hf)
    if method == "fq":
        rho = ui / uf
        F1, F2 = 0.5 * (1 + rho), 0.5 * (1 - rho)
        Q1, Q2 = 0.5 * (1 + 1 / rho), 0.5 * (1 - 1 / rho)
        den = (Q2**2 - Q1**2) * (F2**2 - F1**2)
        return complex(
            (Q2 * F2 * np.exp(-1j * Ef * t) + Q1 * F1 * np.exp(1j * Ef * t)) / den
        )
    if method == "biortho":
        psi = np.array([-ui, 1.0])           # initial -E right eigenvector
        chi = 0.5 * np.array([-1 / ui, 1.0])  # matching left eigenvector
        psf_p, psf_m = np.array([uf, 1.0]), np.array([-uf, 1.0])
        chf_p = 0.5 * np.array([1 / uf, 1.0])
        chf_m = 0.5 * np.array([-1 / uf, 1.0])
        ev = (np.exp(-1j * Ef * t) * np.outer(psf_p, chf_p)
              + np.exp(1j * Ef * t) * np.outer(psf_m, chf_m))
        return complex(chi @ ev @ psi)
    raise DomainError(f"unknown oracle method {method!r}")


@dataclass(frozen=True)
class QuenchProtocol:
    """Initial/final couplings plus momentum and time grids for one quench."""

    initial: CouplingSet
    final: CouplingSet
    k_grid: np.ndarray
    t_grid: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k_grid, dtype=float)
        t = np.asarray(self.t_grid, dtype=float)
        if k.ndim != 1 or k.size < 2 or np.any(np.diff(k) <= 0):
            raise DomainError("k grid must be strictly increasing")
        # half-zone DTOPs need matched +-k pairs
        if not np.allclose(np.sort(-k[k < 0]), k[k > 0], atol=1e-12):
            raise DomainError("k grid must contain matched +-k pairs")
        if t.ndim != 1 or t.size < 2 or t[0] < 0 or np.any(np.diff(t) <= 0):
            raise DomainError("t grid must be strictly increasing and >= 0")
        object.__setattr__(self, "k_grid", k)
        object.__setattr__(self, "t_grid", t)

    @classmethod
    def default(cls, initial: CouplingSet, final: CouplingSet,
                t_max: float = 12.0, n_half: int = 1000,
                n_t: int = 800) -> "QuenchProtocol":
        """Symmetric momentum grid of n_half midpoints per half zone."""
        half = (np.arange(n_half) + 0.5) * np.pi / n_half
        k = np.concatenate([-half[::-1], half])
        t = np.linspace(0.0, t_max, n_t)
        return cls(initial=initial, final=final, k_grid=k, t_grid=t)


@dataclass
class LoschmidtResult:
    gk: np.ndarray            # complex, shape (n_k, n_t)
    return_rate: np.ndarray   # real, shape (n_t,), +inf where G(t) = 0
    log_scale: bool = True


def return_rate(p: QuenchProtocol) -> LoschmidtResult:
    """RR(t) = -(1/N_k) sum_k log |g_k(t)|^2, as a sum of logs."""
    _, Ef, ov = _overlap_fields(p.k_grid, p.initial, p.final)
    phase = Ef[:, None] * p.t_grid[None, :]
    gk = np.cos(phase) + 1j * ov[:, None] * np.sin(phase)
    mag2 = np.abs(gk) ** 2
    rr = np.full(p.t_grid.size, np.inf)
    ok = (mag2 > 0.0).all(axis=0)
    with np.errstate(divide="ignore"):
        rr[ok] = -np.mean(np.log(mag2[:, ok]), axis=0)
    return LoschmidtResult(gk=gk, return_rate=rr)


def fisher_zeros(k: float, ci: CouplingSet, cf: CouplingSet, n_range=range(10)):
    """Complex Fisher zeros omega_n of g_k at fixed momentum."""
    _, Ef, ov = _overlap_fields(float(k), ci, cf)
    if ov.imag == 0.0 and abs(ov.real) >= 1.0:
        raise BranchCutError(
            f"atanh argument {ov.real} lies on the real branch cut |x| >= 1"
        )
    at = np.arctanh(ov)
    return [1j * np.pi * (2 * n + 1) / (2 * Ef) + at / Ef for n in n_range]


@dataclass
class CriticalTimes:
    """Solutions (n, side, k_c, t_c) of the Fisher-zero real-axis crossings."""

    entries: list = field(default_factory=list)  # (n, side, k_c, t_c, residual)

    def times(self, side: str | None = None):
        sel = [e[3] for e in self.entries if side is None or e[1] == side]
        return np.array(sorted(sel))


def _kc_equation(k, ci, cf, n):
    # real-time zero condition of g_k: from e^{2iE t} = -(1-ov)/(1+ov) the
    # time is real iff pi(n+1/2) Im E = Re(conj(E) atanh(ov)); the side label
    # then marks the half zone where g_k actually vanishes
    _, Ef, ov = _overlap_fields(k, ci, cf)
    return -np.pi * (n + 0.5) * Ef.imag + np.real(np.conj(Ef) * np.arctanh(ov))


def critical_set(p: QuenchProtocol, n_range=range(10)) -> CriticalTimes:
    """Critical momenta/times from sign changes of the k_c equation.

    Each half zone is scanned separately; brackets are refined by bisection
    to 1e-12 in k, then the closed-form t_c is evaluated.  Times outside the
    protocol's t span are discarded.
    """
    out = CriticalTimes()
    t_lo, t_hi = p.t_grid[0], p.t_grid[-1]
    for side, ks in (("+", p.k_grid[p.k_grid > 0]), ("-", p.k_grid[p.k_grid < 0])):
        if ks.size < 2:
            continue
        for n in n_range:
            vals = _kc_equation(ks, p.initial, p.final, n)
            sign_flip = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
            for i in sign_flip:
                a, b = ks[i], ks[i + 1]
                fa = _kc_equation(a, p.initial, p.final, n)
                while b - a > 1e-12:
                    m = 0.5 * (a + b)
                    fm = _kc_equation(m, p.initial, p.final, n)
                    if fa * fm <= 0:
                        b = m
                    else:
                        a, fa = m, fm
                kc = 0.5 * (a + b)
                _, Ef, ov = _overlap_fields(kc, p.initial, p.final)
                tc = (np.pi * (n + 0.5) * Ef.real
                      - np.imag(np.conj(Ef) * np.arctanh(ov))) / abs(Ef) ** 2
                if tc <= 0 or tc < t_lo or tc > t_hi:
                    continue
                residual = float(_kc_equation(kc, p.initial, p.final, n))
                out.entries.append((int(n), side, float(kc), float(tc), residual))
    out.entries.sort(key=lambda e: e[3])
    return out


@dataclass
class PgpField:
    phi_pgp: np.ndarray    # (n_k, n_t)
    phi_dyn: np.ndarray
    phi_total: np.ndarray
    holes: np.ndarray      # boolean (n_k, n_t), True where g_k = 0


def pgp_field(p: QuenchProtocol) -> PgpField:
    """Pancharatnam geometric phase over the (k, t) grid.

    The total phase arg g_k(t) is unwrapped along t per momentum; the
    dynamical phase is the real part of E^f (d^i_hat . d^f_hat) t.
    """
    _, Ef, ov = _overlap_fields(p.k_grid, p.initial, p.final)
    phase = Ef[:, None] * p.t_grid[None, :]
    gk = np.cos(phase) + 1j * ov[:, None] * np.sin(phase)
    holes = np.abs(gk) == 0.0
    phi_total = np.unwrap(np.angle(gk), axis=1)
    phi_dyn = np.real(Ef * ov)[:, None] * p.t_grid[None, :]
    return PgpField(phi_pgp=phi_total - phi_dyn, phi_dyn=phi_dyn,
                    phi_total=phi_total, holes=holes)


@dataclass
class DtopSeries:
    t: np.ndarray
    dtop_plus: np.ndarray
    dtop_minus: np.ndarray


def _wrap(a):
    return -((-a + np.pi) % (2 * np.pi) - np.pi)


def dtop(p: QuenchProtocol, max_refine: int = 3) -> DtopSeries:
    """Half-zone winding of the PGP at each time.

    DTOP_pm(t) = (1/2 pi) sum over the half zone of wrapped k-increments of
    phi_pgp.  Steps whose wrapped increment exceeds pi/2 are refined by
    inserting intermediate momenta; if the cap is hit a resolution error is
    raised.
    """
    field_ = pgp_field(p)
    pos = p.k_grid > 0
    neg = p.k_grid < 0
    nt = p.t_grid.size
    dplus = np.empty(nt)
    dminus = np.empty(nt)

    def phi_at(k_vals, t):
        _, Ef, ov = _overlap_fields(k_vals, p.initial, p.final)
        g = np.cos(Ef * t) + 1j * ov * np.sin(Ef * t)
        return np.angle(g) - np.real(Ef * ov) * t

    for it, t in enumerate(p.t_grid):
        for mask, store in ((pos, dplus), (neg, dminus)):
            ks = p.k_grid[mask]
            phi = field_.phi_pgp[mask, it]
            inc = _wrap(np.diff(phi))
            bad = np.nonzero(np.abs(inc) > np.pi / 2)[0]
            total = inc.sum()
            for i in bad:
                # re-difference this step over a locally refined sub-grid
                a, b = ks[i], ks[i + 1]
                sub_ok = False
                npts = 8
                for _ in range(max_refine):
                    sub = np.linspace(a, b, npts + 1)
                    sub_inc = _wrap(np.diff(phi_at(sub, t)))
                    if np.abs(sub_inc).max() <= np.pi / 2:
                        sub_ok = True
                        break
                    npts *= 8
                if not sub_ok:
                    raise ResolutionError(
                        f"phase slip at k in ({a:.6f}, {b:.6f}), t={t:.6f} "
                        "not resolved by local refinement"
                    )
                total += sub_inc.sum() - inc[i]
            store[it] = total / (2 * np.pi)
    return DtopSeries(t=p.t_grid.copy(), dtop_plus=dplus, dtop_minus=dminus)
