"""Small complex linear algebra for qubit states, 2x2 operators and 4x4 unitaries.

Kets are immutable :class:`Ket2` values. Operators are plain ``numpy`` arrays
(2x2 for single-qubit operators, 4x4 for system+ancilla unitaries).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-12


@dataclass(frozen=True)
class Ket2:
    """Normalized single-qubit pure state ``a0|0> + a1|1>``.

    The global phase is fixed so that the first nonzero amplitude is real and
    non-negative; use :func:`ket` to build one from raw amplitudes.
    """

    a0: complex
    a1: complex

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    def inner(self, other: Ket2) -> complex:
        """Return ``<self|other>``."""
        return complex(np.vdot(self.vec, other.vec))


def ket(a0: complex, a1: complex = 0.0) -> Ket2:
    """Normalize ``(a0, a1)`` and fix the global phase."""
    v = np.array([a0, a1], dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    v = v / norm
    lead = v[0] if abs(v[0]) > ATOL else v[1]
    v = v * (abs(lead) / lead)
    # strip rounding residue from the phase-fixed amplitude
    if abs(v[0]) > ATOL:
        v[0] = v[0].real
    else:
        v[1] = v[1].real
    return Ket2(complex(v[0]), complex(v[1]))


def real_ket(angle: float) -> Ket2:
    """``cos(angle)|0> + sin(angle)|1>``."""
    return ket(np.cos(angle), np.sin(angle))


def outer(k: Ket2) -> np.ndarray:
    """Rank-1 projector ``|k><k|``."""
    v = k.vec
    return np.outer(v, v.conj())


def orthogonal(k: Ket2) -> Ket2:
    """The state orthogonal to ``k`` (unique up to phase for a qubit)."""
    return ket(-np.conj(k.a1), np.conj(k.a0))


def expectation(k: Ket2, op: np.ndarray) -> float:
    """Real part of ``<k|op|k>``; ``op`` is assumed Hermitian."""
    v = k.vec
    return float(np.real(np.vdot(v, op @ v)))


def is_hermitian(m: np.ndarray, tol: float = ATOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def psd_check(m: np.ndarray, tol: float = ATOL) -> bool:
    """PSD test for a Hermitian 2x2 matrix via trace and determinant.

    Raises:
        ValueError: if ``m`` is not 2x2 Hermitian within ``tol``.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2) or not is_hermitian(m, tol):
        raise ValueError("psd_check requires a 2x2 Hermitian matrix")
    tr = float(np.real(np.trace(m)))
    det = float(np.real(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]))
    return tr >= -tol and det >= -tol


def complete_to_unitary(cols, tol: float = 1e-10) -> np.ndarray:
    """Extend up to four orthonormal 4-vectors to a 4x4 unitary.

    The supplied vectors become the leading columns, in order. The rest come
    from modified Gram-Schmidt (two passes) over the canonical basis.

    Raises:
        ValueError: if the inputs are not orthonormal within ``tol``.
    """
    cols = [np.asarray(c, dtype=complex).reshape(4) for c in cols]
    if len(cols) > 4:
        raise ValueError("at most 4 columns")
    if cols:
        a = np.column_stack(cols)
        if np.max(np.abs(a.conj().T @ a - np.eye(len(cols)))) > tol:
            raise ValueError("input columns are not orthonormal")
    basis = list(cols)
    for e in np.eye(4, dtype=complex):
        if len(basis) == 4:
            break
        v = e.copy()
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        # a canonical vector inside the current span leaves ~nothing behind
        if norm > 1e-6:
            basis.append(v / norm)
    return np.column_stack(basis)


def is_unitary(u: np.ndarray, tol: float = ATOL) -> bool:
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)
