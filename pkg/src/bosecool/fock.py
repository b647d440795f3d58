"""Exact collision dynamics of the excitation-exchange interaction.

The system mode (dimension d_S) couples to a single machine mode (dimension
d_M) through H = omega0 a^dag a + omega1 b^dag b + chi (a b^dag^p + a^dag b^p).
Everything here is brute force on the truncated joint Fock space and serves as
the ground truth against which the closed-form collision predictions are
checked.

The interaction moves excitations in (1, p) bundles, so K = p n_S + n_M is
conserved exactly, truncation included.  Each K sector is a real symmetric
tridiagonal block; the engine eigendecomposes the blocks once and reuses them
for every evolution time, which keeps single collisions, long iterated runs,
and stationary states cheap at any cutoff the tail rule asks for.

States that are diagonal in the Fock basis stay exactly diagonal under a
collision with a thermal machine (off-diagonal sectors connect different K
and vanish), so iterated cooling reduces to a fixed population transfer
matrix applied once per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceError,
    CutoffTooSmallError,
    DimensionMismatchError,
    DomainError,
    InvalidStateError,
)

DENSITY_HERMITICITY_TOL = 1e-12
DENSITY_TRACE_TOL = 1e-10
DENSITY_EIG_TOL = 1e-9
UNITARITY_TOL = 1e-10
DEFAULT_TAIL_TOL = 1e-10


def gibbs_tail_mass(nbar: float, dim: int) -> float:
    """Probability mass of a Gibbs state at or above the Fock level ``dim``."""
    if nbar < 0:
        raise DomainError("nbar must be nonnegative")
    if nbar == 0.0:
        return 0.0
    q = nbar / (nbar + 1.0)
    return q**dim


def minimum_cutoff(nbar: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest dimension whose Gibbs tail mass stays below ``tail_tol``."""
    if nbar <= 0.0:
        return 1
    d = math.ceil(math.log(1.0 / tail_tol) / math.log1p(1.0 / nbar))
    return max(d, 1)


def gibbs_probabilities(
    nbar: float, dim: int, tail_tol: float = DEFAULT_TAIL_TOL
) -> tuple[np.ndarray, float]:
    """Truncated, renormalized Gibbs populations and the renormalization deficit.

    Raises CutoffTooSmallError when the discarded tail exceeds ``tail_tol``;
    the deficit is never silently absorbed.
    """
    deficit = gibbs_tail_mass(nbar, dim)
    if deficit > tail_tol:
        raise CutoffTooSmallError(
            f"Gibbs tail mass {deficit:.3e} at dimension {dim} exceeds {tail_tol:.1e}"
            f" for nbar={nbar}",
            deficit=deficit,
        )
    n = np.arange(dim)
    if nbar == 0.0:
        probs = np.zeros(dim)
        probs[0] = 1.0
        return probs, 0.0
    logq = math.log(nbar) - math.log1p(nbar)
    probs = np.exp(n * logq)
    probs /= probs.sum()
    return probs, deficit


@dataclass(frozen=True)
class FockCutoff:
    """Truncation dimensions for the system and machine modes."""

    d_s: int
    d_m: int

    def __post_init__(self):
        if self.d_s < 2 or self.d_m < 2:
            raise DomainError("cutoff dimensions must be at least 2")

    @classmethod
    def for_occupations(
        cls,
        nbar_s: float,
        nbar_m: float,
        p: int = 1,
        tail_tol: float = DEFAULT_TAIL_TOL,
        minimum: int = 16,
    ) -> "FockCutoff":
        """Cutoffs satisfying the tail rule for both inputs (and >= p + 2)."""
        floor = max(minimum, p + 2)
        return cls(
            d_s=max(floor, minimum_cutoff(nbar_s, tail_tol)),
            d_m=max(floor, minimum_cutoff(nbar_m, tail_tol)),
        )

    def validate_occupations(
        self, nbar_s: float, nbar_m: float, tail_tol: float = DEFAULT_TAIL_TOL
    ) -> None:
        for label, nbar, dim in (("system", nbar_s, self.d_s), ("machine", nbar_m, self.d_m)):
            tail = gibbs_tail_mass(nbar, dim)
            if tail > tail_tol:
                raise CutoffTooSmallError(
                    f"{label} Gibbs tail {tail:.3e} exceeds {tail_tol:.1e}", deficit=tail
                )


@dataclass(frozen=True)
class FockDensity:
    """Density matrix on a truncated Fock space."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatchError(f"density matrix must be square, got {rho.shape}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > DENSITY_HERMITICITY_TOL:
            raise InvalidStateError(f"density not Hermitian (deviation {herm:.3e})")
        rho = 0.5 * (rho + rho.conj().T)
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > DENSITY_TRACE_TOL:
            raise InvalidStateError(f"trace {tr} deviates from 1")
        min_eig = float(np.linalg.eigvalsh(rho)[0])
        if min_eig < -DENSITY_EIG_TOL:
            raise InvalidStateError(f"negative eigenvalue {min_eig:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))

    @classmethod
    def from_populations(cls, probs: Sequence[float]) -> "FockDensity":
        return cls(rho=np.diag(np.asarray(probs, dtype=complex)))

    @classmethod
    def gibbs(
        cls, nbar: float, dim: int, tail_tol: float = DEFAULT_TAIL_TOL
    ) -> "FockDensity":
        probs, _ = gibbs_probabilities(nbar, dim, tail_tol)
        return cls.from_populations(probs)


@dataclass(frozen=True)
class _Sector:
    """One conserved-K block: members (n, m = K - p n) ordered by n."""

    ns: np.ndarray
    ms: np.ndarray
    flat: np.ndarray  # joint indices n * d_m + m
    evals: np.ndarray
    evecs: np.ndarray  # real orthogonal

    def unitary(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.evals * t)
        return (self.evecs * phases) @ self.evecs.T


@dataclass(frozen=True, eq=False)
class ExchangeHamiltonian:
    """p-excitation exchange Hamiltonian on a truncated two-mode Fock space."""

    p: int
    chi: float
    omega0: float
    omega1: float
    cutoff: FockCutoff
    _sectors: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.p < 1 or int(self.p) != self.p:
            raise DomainError("p must be a positive integer")
        if self.cutoff.d_s < self.p + 2 or self.cutoff.d_m < self.p + 2:
            raise DomainError(
                f"cutoff ({self.cutoff.d_s}, {self.cutoff.d_m}) too small for p={self.p}"
            )
        object.__setattr__(self, "_sectors", self._build_sectors())

    def _build_sectors(self) -> tuple:
        p, d_s, d_m = self.p, self.cutoff.d_s, self.cutoff.d_m
        sectors = []
        for k in range(p * (d_s - 1) + (d_m - 1) + 1):
            n_min = max(0, -((d_m - 1 - k) // p))  # ceil((k - (d_m-1)) / p)
            n_max = min(d_s - 1, k // p)
            if n_min > n_max:
                continue
            ns = np.arange(n_min, n_max + 1)
            ms = k - p * ns
            diag = self.omega0 * ns + self.omega1 * ms
            # <n, m | H_I | n+1, m-p> = chi sqrt(n+1) sqrt((m-p+1)...(m)).
            if ns.shape[0] > 1:
                m_hi = ms[:-1]  # machine occupation of the lower-n member
                prod = np.ones_like(m_hi, dtype=float)
                for i in range(p):
                    prod *= m_hi - i
                off = self.chi * np.sqrt(ns[1:] * prod)
                evals, evecs = scipy.linalg.eigh_tridiagonal(diag.astype(float), off)
            else:
                evals = diag.astype(float)
                evecs = np.ones((1, 1))
            sectors.append(
                _Sector(ns=ns, ms=ms, flat=ns * d_m + ms, evals=evals, evecs=evecs)
            )
        return tuple(sectors)

    @property
    def dim(self) -> int:
        return self.cutoff.d_s * self.cutoff.d_m

    @property
    def matrix(self) -> np.ndarray:
        """Dense joint-space Hamiltonian (system index major)."""
        h = np.zeros((self.dim, self.dim))
        for sec in self._sectors:
            block = sec.evecs @ np.diag(sec.evals) @ sec.evecs.T
            h[np.ix_(sec.flat, sec.flat)] = block
        return h


def build_hamiltonian(
    p: int, chi: float, omega0: float, omega1: float, cutoff: FockCutoff
) -> ExchangeHamiltonian:
    return ExchangeHamiltonian(p=p, chi=chi, omega0=omega0, omega1=omega1, cutoff=cutoff)


def evolve_unitary(h: ExchangeHamiltonian, t: float) -> np.ndarray:
    """Dense joint-space unitary exp(-i H t), assembled sector by sector.

    Each sector is checked for unitarity; sectors partition the basis, so the
    per-sector residuals bound the global one.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    u = np.zeros((h.dim, h.dim), dtype=complex)
    for sec in h._sectors:
        uk = sec.unitary(t)
        res = np.max(np.abs(uk.conj().T @ uk - np.eye(uk.shape[0])))
        if res > UNITARITY_TOL:
            raise ConvergenceError(f"sector unitarity residual {res:.3e}", residual=float(res))
        u[np.ix_(sec.flat, sec.flat)] = uk
    return u


def transfer_matrix(
    h: ExchangeHamiltonian,
    nbar_m: float,
    t: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> tuple[np.ndarray, float]:
    """Population transfer matrix of one collision with a fresh thermal machine.

    T[n_out, n_in] is the probability that a system level n_in ends at n_out
    after the joint unitary and the machine is traced out; columns sum to 1.
    Exact for Fock-diagonal system states.  Also returns the machine
    truncation deficit.
    """
    q, deficit = gibbs_probabilities(nbar_m, h.cutoff.d_m, tail_tol)
    d_s = h.cutoff.d_s
    tmat = np.zeros((d_s, d_s))
    for sec in h._sectors:
        w = np.abs(sec.unitary(t)) ** 2
        tmat[np.ix_(sec.ns, sec.ns)] += w * q[sec.ms][None, :]
    return tmat, deficit


def _partial_trace_machine(rho_joint: np.ndarray, d_s: int, d_m: int) -> np.ndarray:
    return np.einsum("nmkm->nk", rho_joint.reshape(d_s, d_m, d_s, d_m))


def _is_diagonal(rho: np.ndarray) -> bool:
    return float(np.max(np.abs(rho - np.diag(np.diag(rho))))) < 1e-14


def single_collision(
    rho_s: FockDensity,
    nbar_m: float,
    h: ExchangeHamiltonian,
    t: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> FockDensity:
    """One recharging step: evolve rho_s x tau_M jointly, trace out the machine."""
    if rho_s.dim != h.cutoff.d_s:
        raise DimensionMismatchError(
            f"system dimension {rho_s.dim} does not match cutoff {h.cutoff.d_s}"
        )
    if _is_diagonal(rho_s.rho):
        tmat, _ = transfer_matrix(h, nbar_m, t, tail_tol)
        return FockDensity.from_populations(tmat @ rho_s.populations)
    q, _ = gibbs_probabilities(nbar_m, h.cutoff.d_m, tail_tol)
    u = evolve_unitary(h, t)
    rho_joint = np.kron(rho_s.rho, np.diag(q).astype(complex))
    out = u @ rho_joint @ u.conj().T
    return FockDensity(rho=_partial_trace_machine(out, h.cutoff.d_s, h.cutoff.d_m))


def mean_excitation(rho: FockDensity) -> float:
    n = np.arange(rho.dim)
    return float(np.real(np.sum(rho.populations * n)))


def second_moment(rho: FockDensity) -> float:
    n = np.arange(rho.dim)
    return float(np.real(np.sum(rho.populations * n * n)))


def lowering_operator(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim))
    np.fill_diagonal(a[:-1, 1:], np.sqrt(np.arange(1, dim)))
    return a


def first_moment_a(rho: FockDensity) -> complex:
    return complex(np.trace(rho.rho @ lowering_operator(rho.dim)))


def moment_a2(rho: FockDensity) -> complex:
    a = lowering_operator(rho.dim)
    return complex(np.trace(rho.rho @ a @ a))


def fano_factor(mean_n: float, mean_n2: float) -> float:
    """Excess-variance witness: zero exactly for a Gibbs-distributed occupation."""
    if mean_n <= 0:
        return 0.0
    return (mean_n2 - mean_n**2) / (mean_n * (mean_n + 1.0)) - 1.0


@dataclass(frozen=True)
class CollisionTrace:
    """Per-round moments of an iterated collision run."""

    rounds: np.ndarray
    mean_n: np.ndarray
    mean_n2: np.ndarray
    fano_q: np.ndarray
    final: FockDensity
    machine_deficit: float


def iterate_collisions(
    rho_s0: FockDensity,
    nbar_m: float,
    h: ExchangeHamiltonian,
    t: float,
    rounds: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> CollisionTrace:
    """Repeat single collisions with a freshly thermalized machine.

    Fock-diagonal initial states evolve through the population transfer
    matrix (exact, one matrix-vector product per round); general states fall
    back to the dense joint-space evolution per round.
    """
    if rounds < 1:
        raise DomainError("rounds must be >= 1")
    n = np.arange(h.cutoff.d_s)
    n2 = n * n
    mean = np.empty(rounds)
    mean2 = np.empty(rounds)

    if _is_diagonal(rho_s0.rho):
        tmat, deficit = transfer_matrix(h, nbar_m, t, tail_tol)
        probs = rho_s0.populations.copy()
        for l in range(rounds):
            probs = tmat @ probs
            mean[l] = probs @ n
            mean2[l] = probs @ n2
        final = FockDensity.from_populations(probs)
    else:
        deficit = gibbs_tail_mass(nbar_m, h.cutoff.d_m)
        state = rho_s0
        for l in range(rounds):
            state = single_collision(state, nbar_m, h, t, tail_tol)
            mean[l] = mean_excitation(state)
            mean2[l] = second_moment(state)
        final = state

    fano = np.array([fano_factor(m1, m2) for m1, m2 in zip(mean, mean2)])
    return CollisionTrace(
        rounds=np.arange(1, rounds + 1),
        mean_n=mean,
        mean_n2=mean2,
        fano_q=fano,
        final=final,
        machine_deficit=deficit,
    )


def stationary_populations(
    h: ExchangeHamiltonian,
    nbar_m: float,
    t: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> np.ndarray:
    """Fixed point of the collision channel on Fock-diagonal states.

    Eigenvector of the population transfer matrix at its unit eigenvalue;
    this is the exact asymptote of iterated cooling, independent of how many
    rounds a finite run performs.
    """
    tmat, _ = transfer_matrix(h, nbar_m, t, tail_tol)
    evals, evecs = np.linalg.eig(tmat)
    idx = int(np.argmin(np.abs(evals - 1.0)))
    if abs(evals[idx] - 1.0) > 1e-9:
        raise ConvergenceError(
            f"no unit eigenvalue in transfer matrix (closest {evals[idx]})",
            residual=float(abs(evals[idx] - 1.0)),
        )
    vec = np.real(evecs[:, idx])
    if vec.sum() < 0:
        vec = -vec
    vec = np.clip(vec, 0.0, None)
    return vec / vec.sum()
