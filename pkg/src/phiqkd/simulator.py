"""Seeded Monte Carlo runs of the protocol and a Neumark-dilation sampler.

Randomness is split into fixed-size chunks. Chunk ``i`` draws from a PCG64
stream seeded by ``SeedSequence(seed, spawn_key=(0, i))``; test-bit selection
uses ``spawn_key=(1,)``. Results therefore do not depend on how many worker
threads process the chunks.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import keyrate, qmath
from .gsd import SignalPair, TiltedPovm, build_povm, check_phi, conditional_probs, make_signal_pair
from .keyrate import DEFAULTS, FiniteKeyParams

CHUNK = 1 << 16
HIST_CHUNK = 1 << 22
LABELS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class SimulationConfig:
    theta: float
    phi: float
    fk: FiniteKeyParams = DEFAULTS
    seed: int = 0
    shots: int = 10**6


@dataclass(frozen=True)
class SimulationSummary:
    counts: tuple[int, int, int]  # correct, incorrect, inconclusive
    n_sifted: int
    n_test: int
    q_hat: float | None
    delta: float
    q_worst_hat: float | None
    key_length_hat: int
    r_secure_hat: float
    ok: bool
    message: str = ""


@dataclass(frozen=True)
class DilationOutcomeMap:
    """Bit-pair read out for each event when ``psi1`` is sent.

    Sending ``psi2`` swaps the roles of the correct and incorrect labels.
    """

    label_correct: str = "00"
    label_incorrect: str = "01"
    label_inconclusive: str = "10"


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _protocol_chunk(seed: int, index: int, size: int, cdf: np.ndarray):
    rng = _stream(seed, 0, index)
    sent = rng.integers(0, 2, size=size)
    u = rng.random(size)
    # element: 0 -> Pi1, 1 -> Pi2, 2 -> Pi0
    element = (u[:, None] >= cdf[sent][:, :2]).sum(axis=1)
    conclusive = element < 2
    errors = (element != sent) & conclusive
    n_inc = int(size - conclusive.sum())
    n_err = int(errors.sum())
    n_cor = int(size - n_inc - n_err)
    return (n_cor, n_err, n_inc), errors[conclusive]


def partial_fisher_yates(rng: np.random.Generator, population: int, k: int) -> np.ndarray:
    """First ``k`` entries of a Fisher-Yates shuffle of ``range(population)``."""
    idx = np.arange(population)
    picks = rng.integers(np.arange(k), population)
    for i, j in enumerate(picks):
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k]


def run_protocol(cfg: SimulationConfig, workers: int | None = None) -> SimulationSummary:
    """Simulate ``fk.N`` rounds: preparation, measurement, sifting, estimation, key length."""
    sp = make_signal_pair(cfg.theta)
    phi = check_phi(sp, cfg.phi)
    fk = cfg.fk
    cond = np.clip(conditional_probs(sp, build_povm(sp, phi)), 0.0, 1.0)
    cdf = np.cumsum(cond, axis=1)

    p_conclusive = 1.0 - 0.5 * (cond[0, 2] + cond[1, 2])
    if fk.n > p_conclusive * fk.N:
        warnings.warn(
            f"test sample n={fk.n} exceeds the expected sifted count {p_conclusive * fk.N:.0f}",
            RuntimeWarning,
            stacklevel=2,
        )

    sizes = [min(CHUNK, fk.N - start) for start in range(0, fk.N, CHUNK)]
    parts = _map(lambda i: _protocol_chunk(cfg.seed, i, sizes[i], cdf), range(len(sizes)), workers)
    counts = tuple(int(sum(p[0][k] for p in parts)) for k in range(3))
    sifted_errors = np.concatenate([p[1] for p in parts])
    n_sifted = counts[0] + counts[1]
    delta = fk.delta

    if n_sifted < fk.n:
        return SimulationSummary(
            counts, n_sifted, 0, None, delta, None, 0, 0.0, False,
            f"only {n_sifted} sifted bits for a test sample of {fk.n}",
        )

    test = partial_fisher_yates(_stream(cfg.seed, 1), n_sifted, fk.n)
    q_hat = float(sifted_errors[test].mean())
    q_worst_hat = float(keyrate.worst_qber(q_hat, delta))
    ell = keyrate.key_length_from_counts(
        n_sifted, fk.n, q_worst_hat, keyrate.preparation_quality(sp), fk
    )
    key_length_hat = max(int(math.floor(ell)), 0)
    return SimulationSummary(
        counts, n_sifted, fk.n, q_hat, delta, q_worst_hat,
        key_length_hat, key_length_hat / fk.N, True,
    )


def neumark_unitary(povm: TiltedPovm) -> tuple[np.ndarray, DilationOutcomeMap]:
    """Two-qubit unitary realizing ``povm`` as a computational-basis measurement.

    Basis index is ``2 * system + ancilla``; the system qubit enters with the
    ancilla in ``|0>``, so columns 0 and 2 carry the isometry.

    Raises:
        ValueError: if a POVM element has rank 2.
    """
    omap = DilationOutcomeMap()
    placement = (omap.label_correct, omap.label_incorrect, omap.label_inconclusive)
    iso = np.zeros((4, 2), dtype=complex)
    for element, label in zip(povm.elements, placement):
        w, v = np.linalg.eigh(element)
        if w[0] > 1e-10:
            raise ValueError("Neumark construction needs rank-1 POVM elements")
        u = math.sqrt(max(w[1], 0.0)) * v[:, 1]
        iso[int(label, 2), :] = u.conj()
    w = qmath.complete_to_unitary([iso[:, 0], iso[:, 1]])
    return w[:, [0, 2, 1, 3]], omap


def label_probabilities(u: np.ndarray, k: qmath.Ket2) -> dict[str, float]:
    """Born probabilities of each two-bit readout for input ``k`` (ancilla in ``|0>``)."""
    amp = u @ np.kron(k.vec, np.array([1.0, 0.0]))
    p = np.abs(amp) ** 2
    return {lab: float(p[i]) for i, lab in enumerate(LABELS)}


def event_probabilities(
    u: np.ndarray, omap: DilationOutcomeMap, sp: SignalPair, signal: int
) -> tuple[float, float, float]:
    """(correct, incorrect, inconclusive) when signal ``signal`` (0 or 1) is sent."""
    p = label_probabilities(u, sp.psi1 if signal == 0 else sp.psi2)
    correct, incorrect = omap.label_correct, omap.label_incorrect
    if signal == 1:
        correct, incorrect = incorrect, correct
    return p[correct], p[incorrect], p[omap.label_inconclusive]


def _histogram_chunk(seed: int, index: int, size: int, probs: np.ndarray) -> np.ndarray:
    rng = _stream(seed, 2, index)
    n1 = int(rng.binomial(size, 0.5))
    return rng.multinomial(n1, probs[0]) + rng.multinomial(size - n1, probs[1])


def dilation_histogram(cfg: SimulationConfig, workers: int | None = None) -> dict[str, int]:
    """Event counts over ``cfg.shots`` equiprobable signals, keyed as in the circuit readout.

    ``00`` correct, ``01`` incorrect, ``10`` inconclusive, ``11`` never occurs.
    """
    sp = make_signal_pair(cfg.theta)
    u, omap = neumark_unitary(build_povm(sp, check_phi(sp, cfg.phi)))
    probs = np.array([event_probabilities(u, omap, sp, s) for s in (0, 1)])
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    sizes = [min(HIST_CHUNK, cfg.shots - s) for s in range(0, cfg.shots, HIST_CHUNK)]
    parts = _map(lambda i: _histogram_chunk(cfg.seed, i, sizes[i], probs), range(len(sizes)), workers)
    total = np.sum(parts, axis=0) if parts else np.zeros(3, dtype=int)
    return {"00": int(total[0]), "01": int(total[1]), "10": int(total[2]), "11": 0}
