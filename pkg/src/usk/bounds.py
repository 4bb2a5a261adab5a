"""
Closed-form secrecy quantities: key-space scale factors, tail bounds on the
lattice volume, power and constellation prescriptions, the beta-function
lower bound on the cdf of the radius ratio, and the AN-to-signal power
ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "BoundParams",
    "kappa",
    "phi",
    "upsilon",
    "delta",
    "fd_upper_bound",
    "theorem2_power",
    "theorem3_constellation",
    "next_square_qam",
    "theta",
    "reg_inc_beta",
    "lemma4_cdf_lower_bound",
    "power_ratio",
]


@dataclass(frozen=True)
class BoundParams:
    n_a: int
    n_b: int
    n_e: int
    d: int = 2
    eps: float = 0.1

    def __post_init__(self):
        if not self.n_e >= self.n_b >= 1:
            raise DomainError(f"requires N_E >= N_B >= 1 (got N_B={self.n_b}, N_E={self.n_e})")
        if not self.n_a > self.n_b:
            raise DomainError(f"requires N_A > N_B (got N_A={self.n_a}, N_B={self.n_b})")
        if self.d < 2:
            raise DomainError(f"requires d >= 2, got {self.d}")
        if not 0 < self.eps < 1:
            raise DomainError(f"requires 0 < eps < 1, got {self.eps}")

    @property
    def n(self) -> int:
        """Diversity order ``N_E - N_B + 1``."""
        return self.n_e - self.n_b + 1

    @property
    def n_min(self) -> int:
        return min(self.n, self.n_b)


def kappa(d: float, n_e: int) -> float:
    """``d^(1/(2 N_E)) / sqrt(pi)``."""
    if d < 1:
        raise DomainError("d must be >= 1")
    return math.exp(math.log(d) / (2 * n_e)) / math.sqrt(math.pi)


def phi(n_b: int, n_e: int) -> float:
    """``[(N_E - N_B)! / N_E!]^(1/(2 N_B))`` evaluated through log-gamma."""
    if n_e < n_b:
        raise DomainError("requires N_E >= N_B")
    return math.exp((math.lgamma(n_e - n_b + 1) - math.lgamma(n_e + 1)) / (2 * n_b))


def upsilon(x: float, n_b: int, n_e: int) -> float:
    """Tail bound ``sum_{i=1}^{N_B} (x e^(1-x))^(N_E-i+1)``."""
    if not x > 0:
        raise DomainError("x must be positive")
    log_base = math.log(x) + 1.0 - x
    return sum(math.exp(log_base * (n_e - i + 1)) for i in range(1, n_b + 1))


def delta(d: float, pv: float, log_vol: float, n_e: int) -> float:
    """``kappa(d)^(2 N_E) vol / pv^N_E`` with the volume given as a log."""
    if not pv > 0:
        raise DomainError("pv must be positive")
    return math.exp(2 * n_e * math.log(kappa(d, n_e)) + log_vol - n_e * math.log(pv))


def fd_upper_bound(rho_over_kappa: float, n_b: int, n_e: int) -> float:
    """Finite-N_B bound on ``Pr{D < d}``: ``x^(-N_B) + Upsilon(x)``.

    Valid only for ``x = rho / kappa(d) > 1``. The result can exceed one,
    in which case it is vacuous but still returned.
    """
    if not rho_over_kappa > 1:
        raise DomainError(f"bound requires rho/kappa > 1, got {rho_over_kappa}")
    return rho_over_kappa ** (-n_b) + upsilon(rho_over_kappa, n_b, n_e)


def theorem2_power(p: BoundParams) -> float:
    """Peak AN power ``eps^(-2/N_min) kappa(d)^2 / Phi^(2 N_B / N_E)``."""
    k2 = kappa(p.d, p.n_e) ** 2
    return p.eps ** (-2.0 / p.n_min) * k2 / phi(p.n_b, p.n_e) ** (2.0 * p.n_b / p.n_e)


def theorem3_constellation(p: BoundParams) -> float:
    """Smallest admissible QAM size ``eps^(-3-2/N_min) kappa(d)^2`` (real-valued)."""
    return p.eps ** (-3.0 - 2.0 / p.n_min) * kappa(p.d, p.n_e) ** 2


def next_square_qam(m_min: float) -> int:
    """Smallest square QAM of the form ``4^j`` (4, 16, 64, ...) that is ``>= m_min``."""
    m = 4
    while m < m_min:
        m *= 4
    return m


def theta(pv: float, r_max: float, m: int, r_eff: float) -> float:
    """Ratio ``2 R_max / (sqrt(M) r_eff)``; ``pv`` is carried for bookkeeping only."""
    if not r_eff > 0:
        raise DomainError("effective radius must be positive")
    if m < 4:
        raise DomainError("QAM size must be >= 4")
    return 2.0 * r_max / (math.sqrt(m) * r_eff)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def reg_inc_beta(a: int, b: int, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)`` for integer ``a, b >= 1``.

    Uses the binomial-tail identity
    ``I_x(a, b) = sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^(a+b-1-j)``.
    """
    if a < 1 or b < 1 or int(a) != a or int(b) != b:
        raise DomainError("a and b must be integers >= 1")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    n = a + b - 1
    lx, l1x = math.log(x), math.log1p(-x)
    terms = [_log_binom(n, j) + j * lx + (n - j) * l1x for j in range(a, n + 1)]
    top = max(terms)
    return min(1.0, math.exp(top) * math.fsum(math.exp(t - top) for t in terms))


def lemma4_cdf_lower_bound(x: float, p: BoundParams, pv: float, m: int) -> float:
    """Lower bound on ``Pr{Theta(pv) < x}`` as a product of F-distribution cdfs.

    Term ``j`` is ``I_{a g/(a g + b_j)}(a, b_j)`` with ``a = N_E (N_A - N_B)``,
    ``b_j = N_E - j + 1`` and
    ``g = x^2 M N_B b_j / (4 pi e pv N_E (N_A - N_B))``.
    """
    if x <= 0:
        return 0.0
    if not pv > 0:
        raise DomainError("pv must be positive")
    a = p.n_e * (p.n_a - p.n_b)
    out = 1.0
    for j in range(1, p.n_b + 1):
        b = p.n_e - j + 1
        g = x * x * m * p.n_b * b / (4.0 * math.pi * math.e * pv * a)
        ag = a * g
        arg = 1.0 if math.isinf(ag) else ag / (ag + b)
        out *= reg_inc_beta(a, b, arg)
    return out


def power_ratio(pv: float, m: int, n_b: int) -> float:
    """Peak AN power over mean signal power of centred M-QAM, ``3 pv / (2 (M-1) N_B)``."""
    if m < 4:
        raise DomainError("QAM size must be >= 4")
    return 3.0 * pv / (2.0 * (m - 1) * n_b)
