"""Key rates for the tilted-measurement B92 variant.

Three figures of merit, all in bits per emitted signal:

* asymptotic: ``eta * (q - 2 H(Q))`` (Devetak-Winter with the entropic
  uncertainty bound ``H(X|E) >= q - H(Q)``),
* finite: ``(eta - n/N) * (q - 2 H(Q_worst))``,
* composable: ``l / N`` with ``l`` the secure key length after sampling,
  error-correction leakage and the secrecy/correctness penalty.

``q = log2(1/c)`` is used as-is, except for orthogonal signals (``c = 0``)
where it is capped at one bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gsd import OutcomeProbs, SignalPair, check_phi, closed_form, probs_closed

Q_CLAMP = 0.5
MAX_Q_BITS = 1.0


@dataclass(frozen=True)
class FiniteKeyParams:
    N: int = 10**6
    n: int = 10**5
    eps_pe: float = 1e-10
    eps_sec: float = 1e-10
    eps_cor: float = 1e-10
    f: float = 1.15

    def __post_init__(self):
        if not 0 < self.n < self.N:
            raise ValueError(f"need 0 < n < N, got n={self.n}, N={self.N}")
        for name in ("eps_pe", "eps_sec", "eps_cor"):
            eps = getattr(self, name)
            if not 0.0 < eps < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {eps}")
        if self.f < 1.0:
            raise ValueError(f"error-correction efficiency f must be >= 1, got {self.f}")

    @property
    def delta(self) -> float:
        return hoeffding_delta(self.n, self.eps_pe)

    @property
    def penalty_bits(self) -> float:
        """``log2(2 / (eps_sec^2 eps_cor))``."""
        return math.log2(2.0) - 2 * math.log2(self.eps_sec) - math.log2(self.eps_cor)


DEFAULTS = FiniteKeyParams()


@dataclass(frozen=True)
class KeyRateReport:
    theta: float
    phi: float
    probs: OutcomeProbs
    eta: float
    qber: float
    delta: float
    q_worst: float
    q_worst_clamped: bool
    h_q: float
    h_qworst: float
    r_asymptotic: float
    r_finite: float
    key_length: float
    r_secure: float
    positive: dict = field(default_factory=dict)


def binary_entropy(x):
    """Shannon entropy of a Bernoulli(x) variable in bits; works on arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise ValueError("binary_entropy argument must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -arr * np.log2(arr) - (1.0 - arr) * np.log2(1.0 - arr)
    h = np.where((arr == 0.0) | (arr == 1.0), 0.0, h)
    return float(h) if np.ndim(h) == 0 else h


def preparation_quality(sp: SignalPair) -> float:
    """``log2(1/c)``, capped at one bit only when the signals are orthogonal."""
    return MAX_Q_BITS if math.isinf(sp.q) else sp.q


def qber(p: OutcomeProbs) -> float:
    eta = 1.0 - p.p_q
    if eta <= 0.0:
        raise ValueError("QBER undefined without conclusive outcomes")
    return p.p_e / eta


def hoeffding_delta(n: int, eps_pe: float) -> float:
    """Two-sided Hoeffding half-width at failure probability ``eps_pe``."""
    if n < 1 or not 0.0 < eps_pe < 1.0:
        raise ValueError("need n >= 1 and eps_pe in (0, 1)")
    return math.sqrt(math.log(2.0 / eps_pe) / (2.0 * n))


def worst_qber(q, delta):
    return np.minimum(q + delta, Q_CLAMP)


def key_length_from_counts(n_sifted, n_test, q_worst, q_bits, fk: FiniteKeyParams):
    """Secure key length for ``n_sifted`` conclusive rounds, ``n_test`` of them sacrificed.

    Real-valued and unclamped; callers floor it when extracting a real key.
    """
    remaining = n_sifted - n_test
    h = binary_entropy(q_worst)
    return remaining * (q_bits - h) - remaining * fk.f * h - fk.penalty_bits


# Array kernels, shared by the scalar API and the optimizer's grid scans.


def _eta_q(theta, phi):
    p_s, p_e, _ = closed_form(theta, phi)
    eta = p_s + p_e
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(eta > 0, p_e / np.where(eta > 0, eta, 1.0), 0.0)
    return eta, q


def asymptotic_kernel(theta, phi, q_bits):
    eta, q = _eta_q(theta, phi)
    return eta * (q_bits - 2.0 * binary_entropy(q))


def finite_kernel(theta, phi, q_bits, fk: FiniteKeyParams):
    eta, q = _eta_q(theta, phi)
    qw = worst_qber(q, fk.delta)
    return (eta - fk.n / fk.N) * (q_bits - 2.0 * binary_entropy(qw))


def key_length_kernel(theta, phi, q_bits, fk: FiniteKeyParams):
    eta, q = _eta_q(theta, phi)
    return key_length_from_counts(eta * fk.N, fk.n, worst_qber(q, fk.delta), q_bits, fk)


def secure_kernel(theta, phi, q_bits, fk: FiniteKeyParams):
    return key_length_kernel(theta, phi, q_bits, fk) / fk.N


def sample_feasible(theta, phi, fk: FiniteKeyParams):
    """True where the expected sifted count exceeds the test sample."""
    eta, _ = _eta_q(theta, phi)
    return eta * fk.N > fk.n


def asymptotic_rate(sp: SignalPair, phi: float) -> float:
    phi = check_phi(sp, phi)
    return float(asymptotic_kernel(sp.theta, phi, preparation_quality(sp)))


def finite_rate(sp: SignalPair, phi: float, fk: FiniteKeyParams = DEFAULTS) -> float:
    phi = check_phi(sp, phi)
    return float(finite_kernel(sp.theta, phi, preparation_quality(sp), fk))


def composable_key_length(sp: SignalPair, phi: float, fk: FiniteKeyParams = DEFAULTS) -> float:
    phi = check_phi(sp, phi)
    return float(key_length_kernel(sp.theta, phi, preparation_quality(sp), fk))


def secure_rate(sp: SignalPair, phi: float, fk: FiniteKeyParams = DEFAULTS) -> float:
    return composable_key_length(sp, phi, fk) / fk.N


def b92_secure_rate(sp: SignalPair, fk: FiniteKeyParams = DEFAULTS) -> float:
    """Composable rate of unambiguous-discrimination B92: ``eta = 1 - cos(theta)``, ``Q = 0``."""
    eta = 1.0 - math.cos(sp.theta)
    q_worst = float(worst_qber(0.0, fk.delta))
    ell = key_length_from_counts(eta * fk.N, fk.n, q_worst, preparation_quality(sp), fk)
    return ell / fk.N


def key_rate_report(sp: SignalPair, phi: float, fk: FiniteKeyParams = DEFAULTS) -> KeyRateReport:
    phi = check_phi(sp, phi)
    p = probs_closed(sp, phi)
    eta = p.p_s + p.p_e
    q = p.p_e / eta if eta > 0 else 0.0
    delta = fk.delta
    q_worst = float(worst_qber(q, delta))
    r_asym = asymptotic_rate(sp, phi)
    r_fin = finite_rate(sp, phi, fk)
    ell = composable_key_length(sp, phi, fk)
    feasible = eta * fk.N > fk.n
    return KeyRateReport(
        theta=sp.theta,
        phi=phi,
        probs=p,
        eta=eta,
        qber=q,
        delta=delta,
        q_worst=q_worst,
        q_worst_clamped=q + delta > Q_CLAMP,
        h_q=binary_entropy(q),
        h_qworst=binary_entropy(q_worst),
        r_asymptotic=r_asym,
        r_finite=r_fin,
        key_length=ell,
        r_secure=ell / fk.N,
        positive={
            "asymptotic": r_asym > 0,
            "finite": feasible and r_fin > 0,
            "composable": feasible and ell > 0,
        },
    )
