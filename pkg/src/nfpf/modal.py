"""Eigendecomposition with bi-orthonormal left/right eigenvectors.

Provides :func:`decompose` (mode shapes Phi as columns, mode compositions
Psi as rows, with conjugate-pair bookkeeping), linear participation
factors ``p[k, i] = Phi[k, i] * Psi[i, k]`` and contribution factors
``B[k, i] = (Psi[i] . x0) * Phi[k, i]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import DefectiveMatrixError

__all__ = ["ModalBasis", "decompose", "linear_pf", "contribution_factors"]

GAP_TOL = 1e-10


@dataclass(frozen=True)
class ModalBasis:
    """Eigenvalues with bi-orthonormal right/left eigenvectors.

    ``Phi`` holds right eigenvectors as columns (mode shapes), ``Psi``
    left eigenvectors as rows (mode compositions), with ``Psi @ Phi = I``.
    ``pair_of[i]`` is the index of mode i's conjugate partner (itself for
    real modes); partners are adjacent and entrywise conjugate by
    construction.
    """

    lambdas: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    pair_of: np.ndarray
    freq_hz: np.ndarray

    def __post_init__(self):
        for arr in (self.lambdas, self.Phi, self.Psi, self.pair_of, self.freq_hz):
            np.asarray(arr).setflags(write=False)

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]

    @property
    def damping_ratio(self) -> np.ndarray:
        """-Re(lam)/|lam| per mode; 0 for a zero eigenvalue."""
        mag = np.abs(self.lambdas)
        return np.where(mag > 0, -self.lambdas.real / np.where(mag > 0, mag, 1.0), 0.0)

    @property
    def representatives(self) -> np.ndarray:
        """Indices of conjugate-pair representatives (Im >= 0), in mode order."""
        return np.flatnonzero(self.lambdas.imag >= 0.0)


def _as_real_matrix(A):
    A = np.asarray(A)
    if np.iscomplexobj(A):
        if np.max(np.abs(A.imag), initial=0.0) > 0:
            raise ValueError("state matrix must be real")
        A = A.real
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"state matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("state matrix contains non-finite entries")
    return A


def decompose(A) -> ModalBasis:
    """Diagonalize a real state matrix into a :class:`ModalBasis`.

    Modes are sorted by (|Im| ascending, Re descending) with the +Im member
    of each conjugate pair first and its partner adjacent.  Each right
    eigenvector is scaled so its largest-magnitude entry is 1+0j; Psi is
    the inverse of Phi, which guarantees Psi @ Phi = I.

    Raises
    ------
    DefectiveMatrixError
        If eigenvalues cluster within 1e-10 while their eigenvectors are
        nearly parallel, or the eigenvector matrix fails to reproduce A.
    """
    A = _as_real_matrix(A)
    n = A.shape[0]
    w, V = la.eig(A)

    # Near-defective detection: clustered eigenvalues with dependent vectors.
    Vn = V / np.linalg.norm(V, axis=0, keepdims=True)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) < GAP_TOL:
                overlap = abs(np.vdot(Vn[:, i], Vn[:, j]))
                if overlap > 1.0 - 1e-8:
                    raise DefectiveMatrixError(
                        f"near-defective matrix: eigenvalues {w[i]:.6g} and "
                        f"{w[j]:.6g} are clustered with dependent eigenvectors"
                    )

    order = np.lexsort((-w.imag, -w.real, np.abs(w.imag)))
    w = w[order]
    V = V[:, order]

    lambdas = np.zeros(n, dtype=complex)
    Phi = np.zeros((n, n), dtype=complex)
    pair_of = np.arange(n)
    pos = 0
    while pos < n:
        lam, v = w[pos], V[:, pos]
        if lam.imag == 0.0:
            v = v.real.astype(complex)
            v = v / v[np.argmax(np.abs(v))]
            lambdas[pos] = lam.real
            Phi[:, pos] = v
            pos += 1
            continue
        if lam.imag < 0.0 or pos + 1 >= n or abs(w[pos + 1] - lam.conjugate()) > 1e-9 * max(1.0, abs(lam)):
            raise DefectiveMatrixError(
                f"eigenvalue {lam:.6g} of a real matrix has no conjugate partner"
            )
        v = v / v[np.argmax(np.abs(v))]
        lambdas[pos] = lam
        lambdas[pos + 1] = lam.conjugate()
        Phi[:, pos] = v
        Phi[:, pos + 1] = v.conjugate()
        pair_of[pos] = pos + 1
        pair_of[pos + 1] = pos
        pos += 2

    try:
        Psi = np.linalg.inv(Phi)
    except np.linalg.LinAlgError:
        raise DefectiveMatrixError("eigenvector matrix is singular") from None

    recon = (Phi * lambdas) @ Psi
    scale = max(float(np.linalg.norm(A)), 1e-30)
    if np.linalg.norm(recon - A) / scale > 1e-8:
        raise DefectiveMatrixError(
            "eigendecomposition failed to reconstruct the state matrix; "
            "matrix is likely non-diagonalizable within tolerance"
        )

    freq_hz = np.abs(lambdas.imag) / (2.0 * np.pi)
    return ModalBasis(lambdas=lambdas, Phi=Phi, Psi=Psi, pair_of=pair_of, freq_hz=freq_hz)


def linear_pf(basis: ModalBasis) -> np.ndarray:
    """Linear participation factors p[k, i] = Phi[k, i] * Psi[i, k].

    Bi-orthonormality makes every row and every column sum to 1.
    """
    return basis.Phi * basis.Psi.T


def contribution_factors(basis: ModalBasis, x0) -> np.ndarray:
    """Modal amplitudes B[k, i] = (Psi[i] . x0) * Phi[k, i] excited by x0.

    The linear response is x_k(t) = sum_i B[k, i] exp(lam_i t); for the
    unit vector x0 = e_k, row k equals row k of :func:`linear_pf`.
    """
    x0 = np.asarray(x0)
    excitation = basis.Psi @ x0
    return basis.Phi * excitation[None, :]
