"""Generalized state discrimination: the tilted POVM family and its statistics.

Two equiprobable signals ``psi1 = |0>`` and ``psi2 = cos(theta)|0> + sin(theta)|1>``
are measured with a POVM built on the orthogonal complements of the signals
tilted outward by ``phi``. ``phi = 0`` is unambiguous discrimination (IDP),
``phi = pi/4 - theta/2`` is the minimum-error (Helstrom) measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .numerics import bisect
from .qmath import Ket2

DOMAIN_TOL = 1e-12
ROOT_MARGIN = 1e-6


@dataclass(frozen=True)
class SignalPair:
    theta: float
    psi1: Ket2
    psi2: Ket2
    c: float
    q: float  # log2(1/c); +inf when the signals are orthogonal

    @property
    def phi_med(self) -> float:
        return phi_med(self.theta)


@dataclass(frozen=True)
class TiltedPovm:
    pi1: np.ndarray
    pi2: np.ndarray
    pi0: np.ndarray

    @property
    def elements(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.pi1, self.pi2, self.pi0

    def completeness_residual(self) -> float:
        return float(np.max(np.abs(self.pi1 + self.pi2 + self.pi0 - np.eye(2))))


@dataclass(frozen=True)
class OutcomeProbs:
    p_s: float
    p_e: float
    p_q: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_s, self.p_e, self.p_q)


@dataclass(frozen=True)
class DiscriminationMetrics:
    chi: float  # accuracy, percent
    zeta: float  # efficiency, percent


def phi_med(theta):
    """Tilt at which the tilted signals become orthogonal."""
    return np.pi / 4 - theta / 2


def make_signal_pair(theta: float) -> SignalPair:
    if not 0.0 < theta <= math.pi / 2 + DOMAIN_TOL:
        raise ValueError(f"theta must lie in (0, pi/2], got {theta}")
    theta = min(theta, math.pi / 2)
    psi1 = qmath.ket(1.0, 0.0)
    psi2 = qmath.real_ket(theta)
    c = abs(psi1.inner(psi2)) ** 2
    # cos(pi/2) is ~6e-17, not 0
    if theta == math.pi / 2 or c < 1e-30:
        c = 0.0
    q = math.inf if c == 0.0 else math.log2(1.0 / c)
    return SignalPair(theta, psi1, psi2, c, q)


def check_phi(sp: SignalPair, phi: float) -> float:
    top = sp.phi_med
    if not -DOMAIN_TOL <= phi <= top + DOMAIN_TOL:
        raise ValueError(f"phi={phi} outside [0, {top}] for theta={sp.theta}")
    return min(max(phi, 0.0), top)


def tilted_states(sp: SignalPair, phi: float) -> tuple[Ket2, Ket2]:
    """Signals rotated outward by ``phi`` each, inner angle ``theta + 2 phi``."""
    phi = check_phi(sp, phi)
    return qmath.real_ket(-phi), qmath.real_ket(sp.theta + phi)


def build_povm(sp: SignalPair, phi: float) -> TiltedPovm:
    t1, t2 = tilted_states(sp, phi)
    overlap = abs(t1.inner(t2))
    pi1 = qmath.outer(qmath.orthogonal(t2)) / (1.0 + overlap)
    pi2 = qmath.outer(qmath.orthogonal(t1)) / (1.0 + overlap)
    pi0 = np.eye(2) - pi1 - pi2
    pi0 = 0.5 * (pi0 + pi0.conj().T)
    povm = TiltedPovm(pi1, pi2, pi0)
    if not qmath.psd_check(pi0, 1e-10):
        raise ValueError("inconclusive element is not PSD; phi outside the valid domain")
    if povm.completeness_residual() > 1e-10:
        raise ArithmeticError("POVM completeness violated")
    return povm


def gamma_state(sp: SignalPair, phi: float) -> Ket2:
    """Direction of the inconclusive element, the normalized ``|psi1'> + |psi2'>``."""
    t1, t2 = tilted_states(sp, phi)
    ov = t2.inner(t1)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return qmath.ket(*(t1.vec + phase * t2.vec))


def closed_form(theta, phi):
    """Vectorized ``(p_s, p_e, p_q)`` from the trigonometric closed forms."""
    denom = 1.0 + np.abs(np.cos(theta + 2 * phi))
    p_s = np.sin(theta + phi) ** 2 / denom
    p_e = np.sin(phi) ** 2 / denom
    return p_s, p_e, 1.0 - p_s - p_e


def inconclusive_bracket_form(theta, phi):
    """Inconclusive probability as the squared-bracket expression (real overlaps only)."""
    ct = np.cos(theta + 2 * phi)
    return ct * (np.cos(phi) + np.cos(theta + phi)) ** 2 / (1.0 + np.abs(ct)) ** 2


def probs_closed(sp: SignalPair, phi: float) -> OutcomeProbs:
    phi = check_phi(sp, phi)
    return OutcomeProbs(*(float(x) for x in closed_form(sp.theta, phi)))


def conditional_probs(sp: SignalPair, povm: TiltedPovm) -> np.ndarray:
    """Row ``j`` holds ``(<psi_j|Pi1|psi_j>, <psi_j|Pi2|psi_j>, <psi_j|Pi0|psi_j>)``."""
    return np.array(
        [[qmath.expectation(k, e) for e in povm.elements] for k in (sp.psi1, sp.psi2)]
    )


def probs_operator(sp: SignalPair, povm: TiltedPovm) -> OutcomeProbs:
    m = conditional_probs(sp, povm)
    p_s = 0.5 * (m[0, 0] + m[1, 1])
    p_e = 0.5 * (m[0, 1] + m[1, 0])
    p_q = 0.5 * (m[0, 2] + m[1, 2])
    return OutcomeProbs(p_s, p_e, p_q)


def helstrom_probs(sp: SignalPair) -> OutcomeProbs:
    s = math.sin(sp.theta)
    return OutcomeProbs((1 + s) / 2, (1 - s) / 2, 0.0)


def _crossing(sp: SignalPair, g) -> float:
    if sp.theta >= math.pi / 2:
        raise ValueError("no crossing for orthogonal signals")
    return bisect(g, ROOT_MARGIN, sp.phi_med - ROOT_MARGIN)


def find_ctp(sp: SignalPair) -> float:
    """Confidence threshold point: tilt where ``p_s == p_q``.

    Exists only for ``theta < pi/3``; beyond that ``p_s > p_q`` already at
    ``phi = 0`` and :class:`~phiqkd.numerics.BracketError` is raised.
    """

    def g(phi):
        p_s, _, p_q = closed_form(sp.theta, phi)
        return float(p_s - p_q)

    return _crossing(sp, g)


def find_erp(sp: SignalPair) -> float:
    """Equal-risk point: tilt where ``p_e == p_q``."""

    def g(phi):
        _, p_e, p_q = closed_form(sp.theta, phi)
        return float(p_e - p_q)

    return _crossing(sp, g)


def metrics(p: OutcomeProbs) -> DiscriminationMetrics:
    conclusive = 1.0 - p.p_q
    if conclusive <= 0.0:
        raise ValueError("accuracy undefined without conclusive outcomes")
    return DiscriminationMetrics(100.0 * p.p_s / conclusive, 100.0 * conclusive)
