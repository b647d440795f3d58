"""Closed-form predictions for excitation-exchange collision cooling.

Short-time second-order expressions for a single collision, the induced
linear recursion for iterated collisions with machine resets, its geometric
closed form and asymptote, and the excess-variance (Fano) trajectory that
witnesses thermalization.  All of it is perturbative in chi*t; the exact
engine in ``bosecool.fock`` is the ground truth it is checked against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, ValidityError

# (chi t)^2 p! (1+nbar_M)^p beyond this marks the expansion as untrustworthy.
VALIDITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class CollisionParams:
    """Inputs of one collision family: interaction order, coupling, states.

    ``beta``, ``omega0`` and ``omega1`` are optional bookkeeping; when given,
    the occupations must be the thermal ones they imply.
    """

    p: int
    chi: float
    t: float
    nbar_s0: float
    nbar_m: float
    beta: float | None = None
    omega0: float | None = None
    omega1: float | None = None

    def __post_init__(self):
        if self.p < 1 or int(self.p) != self.p:
            raise DomainError("p must be a positive integer")
        if self.t < 0:
            raise DomainError("t must be nonnegative")
        if self.nbar_s0 < 0 or self.nbar_m < 0:
            raise DomainError("occupations must be nonnegative")
        for nbar, omega, label in (
            (self.nbar_s0, self.omega0, "system"),
            (self.nbar_m, self.omega1, "machine"),
        ):
            if omega is not None and self.beta is not None:
                implied = 1.0 / math.expm1(self.beta * omega)
                if abs(implied - nbar) > 1e-9 * max(1.0, nbar):
                    raise DomainError(
                        f"{label} occupation {nbar} inconsistent with "
                        f"beta*omega (implies {implied})"
                    )
        if not self.is_perturbative:
            warnings.warn(
                f"(chi t)^2 p! (1+nbar_M)^p = {self.validity_factor:.3g} > "
                f"{VALIDITY_THRESHOLD}; short-time expressions are unreliable here",
                stacklevel=2,
            )

    @classmethod
    def from_frequencies(
        cls, p: int, chi: float, t: float, beta: float, omega0: float, omega1: float
    ) -> "CollisionParams":
        if beta <= 0 or omega0 <= 0 or omega1 <= 0:
            raise DomainError("beta and frequencies must be positive")
        return cls(
            p=p,
            chi=chi,
            t=t,
            nbar_s0=1.0 / math.expm1(beta * omega0),
            nbar_m=1.0 / math.expm1(beta * omega1),
            beta=beta,
            omega0=omega0,
            omega1=omega1,
        )

    @property
    def chit(self) -> float:
        return self.chi * self.t

    @property
    def validity_factor(self) -> float:
        return self.chit**2 * math.factorial(self.p) * (1.0 + self.nbar_m) ** self.p

    @property
    def is_perturbative(self) -> bool:
        return self.validity_factor <= VALIDITY_THRESHOLD


@dataclass(frozen=True)
class IterationCoefficients:
    """Per-round coefficients of the linear moment recursions.

    The mean obeys  n  ->  (1 - a) n + b  and the second moment
    m2 -> (1 - 2a) m2 + c_fano * n + b,  with

        a      = (chi t)^2 p! [(1 + nbar_M)^p - nbar_M^p]
        b      = (chi t)^2 p! nbar_M^p
        c_fano = (chi t)^2 p! [(1 + nbar_M)^p + 3 nbar_M^p]

    The sign in ``a`` is fixed by requiring the recursion to reproduce the
    single-collision mean update and its fixed point b/a = 1/(e^{p beta
    omega1} - 1); the exact Fock engine confirms this choice.  Note the
    identity c_fano = a + 4 b, which is what drives the excess variance to
    zero at the fixed point.
    """

    a: float
    b: float
    c_fano: float

    @classmethod
    def from_params(cls, params: CollisionParams) -> "IterationCoefficients":
        scale = params.chit**2 * math.factorial(params.p)
        up = (1.0 + params.nbar_m) ** params.p
        down = params.nbar_m**params.p
        return cls(a=scale * (up - down), b=scale * down, c_fano=scale * (up + 3 * down))


def short_time_update(params: CollisionParams) -> float:
    """System occupation after one short collision.

    nbar_S - (chi t)^2 p! [(1+nbar_M)^p nbar_S - nbar_M^p (1+nbar_S)].
    """
    ns, nm, p = params.nbar_s0, params.nbar_m, params.p
    bracket = (1.0 + nm) ** p * ns - nm**p * (1.0 + ns)
    return ns - params.chit**2 * math.factorial(p) * bracket


def cooling_condition(p: int, omega0: float, omega1: float) -> bool:
    """Whether a p-excitation exchange can cool below the bath: p*omega1 > omega0."""
    if p < 1 or omega0 <= 0 or omega1 <= 0:
        raise DomainError("need p >= 1 and positive frequencies")
    return p * omega1 > omega0


def cooling_threshold_nbar(p: int, nbar_m: float) -> float:
    """System occupation above which a collision cools: nbar_M^p / ((1+nbar_M)^p - nbar_M^p).

    For a thermal machine this equals 1/(e^{p beta omega1} - 1).
    """
    if p < 1 or nbar_m < 0:
        raise DomainError("need p >= 1 and nonnegative machine occupation")
    up = (1.0 + nbar_m) ** p
    down = nbar_m**p
    return down / (up - down)


def crossing_time(params: CollisionParams) -> float | None:
    """Time at which the system occupation drops past the machine's.

    Requires initial cooling toward the machine (nbar_S > nbar_M and a
    negative short-time bracket); returns None when no crossing occurs,
    and 0.0 on the degenerate boundary nbar_S = nbar_M.
    """
    ns, nm, p = params.nbar_s0, params.nbar_m, params.p
    if ns == nm:
        return 0.0
    bracket = (1.0 + nm) ** p * ns - nm**p * (1.0 + ns)
    if ns < nm or bracket <= 0:
        return None
    return math.sqrt((ns - nm) / (math.factorial(p) * bracket)) / params.chi


def iterate_closed_form(params: CollisionParams, rounds: int) -> float:
    """Occupation after ``rounds`` collisions: n0 (1-a)^L + b (1-(1-a)^L)/a."""
    coeff = IterationCoefficients.from_params(params)
    if rounds < 0:
        raise DomainError("rounds must be nonnegative")
    if coeff.a == 0.0:  # no coupling: nothing moves
        return params.nbar_s0
    if not 0.0 < coeff.a < 1.0:
        raise ValidityError(f"contraction coefficient a={coeff.a} outside (0, 1)")
    decay = (1.0 - coeff.a) ** rounds
    return params.nbar_s0 * decay + coeff.b * (1.0 - decay) / coeff.a


def asymptote(params: CollisionParams) -> float:
    """Large-round limit b/a; thermal at the p-fold boosted inverse temperature."""
    coeff = IterationCoefficients.from_params(params)
    if coeff.a <= 0.0:
        raise ValidityError("no contraction; asymptote undefined")
    return coeff.b / coeff.a


def second_moment_closed_form(params: CollisionParams, rounds: int) -> float:
    """<n^2> after ``rounds`` collisions from a Gibbs start.

    Exact geometric solution of the coupled recursions
    m2 -> (1-2a) m2 + c_fano n + b and n -> (1-a) n + b, with the Gibbs
    initial second moment 2 n0^2 + n0.  Its large-round limit
    (b/2a)(1 + c_fano/a) is exactly the Gibbs second moment of the
    asymptotic occupation (via c_fano = a + 4b), so the excess variance
    vanishes there.
    """
    coeff = IterationCoefficients.from_params(params)
    a, b, c = coeff.a, coeff.b, coeff.c_fano
    n0 = params.nbar_s0
    m2_0 = 2.0 * n0**2 + n0
    if a == 0.0:  # no coupling: nothing moves
        return m2_0
    if not 0.0 < a < 0.5:
        raise ValidityError(f"second-moment recursion needs a in (0, 1/2), got {a}")
    da = (1.0 - a) ** rounds
    d2a = (1.0 - 2.0 * a) ** rounds
    return (
        d2a * m2_0
        + n0 * c * (da - d2a) / a
        + (c * b / a) * ((1.0 - d2a) / (2.0 * a) - (da - d2a) / a)
        + b * (1.0 - d2a) / (2.0 * a)
    )


def fano_closed_form(params: CollisionParams, rounds: int) -> float:
    """Excess-variance witness after ``rounds`` collisions; 0 marks a Gibbs profile."""
    mean = iterate_closed_form(params, rounds)
    m2 = second_moment_closed_form(params, rounds)
    if mean <= 0:
        return 0.0
    return (m2 - mean**2) / (mean * (mean + 1.0)) - 1.0
