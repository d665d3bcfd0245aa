"""2nd-order normal form of a quadratic model in modal coordinates.

Substituting ``x = Phi y`` into the quadratic model gives modal equations

    dy_i/dt = lam_i y_i + sum_pq C[i, p, q] y_p y_q

and the near-identity transformation ``y_i = z_i + sum_pq h2[i, p, q] z_p z_q``
removes the quadratic terms wherever the denominator ``lam_p + lam_q - lam_i``
is not (near) zero:

    h2[i, p, q] = C[i, p, q] / (lam_p + lam_q - lam_i)

All tensors are stored symmetric in (p, q) and all quadratic sums run over
every ordered pair, which fixes the factor-of-two convention once.
Near-resonant triples are zeroed in h2 and reported in a ledger instead of
blowing up.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ResonanceWarning
from .modal import ModalBasis
from .sysmodel import QuadraticModel

__all__ = [
    "SecondOrderNF",
    "second_order_coeffs",
    "h2_coefficients",
    "invert_initial_condition",
    "reconstruct_response",
]

DEFAULT_DENOM_TOL = 1e-6
INVERSION_TOL = 1e-12
INVERSION_MAX_ITER = 20


@dataclass(frozen=True)
class SecondOrderNF:
    """Modal quadratic coefficients, normal-form coefficients and the
    resonance ledger.

    ``resonant`` holds one entry per unordered triple (i, p, q) with p <= q
    whose denominator magnitude fell at or below ``denom_tol``; the
    corresponding h2 entries (both orders) are zero.
    """

    C: np.ndarray
    h2: np.ndarray
    resonant: tuple = field(default_factory=tuple)
    denom_tol: float = DEFAULT_DENOM_TOL

    def __post_init__(self):
        self.C.setflags(write=False)
        self.h2.setflags(write=False)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def has_resonances(self) -> bool:
        return len(self.resonant) > 0


def second_order_coeffs(model: QuadraticModel, basis: ModalBasis) -> np.ndarray:
    """Quadratic coefficients C[i, p, q] of the modal (y-space) equations.

    C[i, p, q] = 0.5 * sum_l Psi[i, l] * (Phi[:, p]' H[l] Phi[:, q]),
    symmetrized over (p, q).
    """
    if model.n != basis.n:
        raise ValueError(
            f"dimension mismatch: model has n={model.n}, basis has n={basis.n}"
        )
    modal_hessian = np.einsum("lab,ap,bq->lpq", model.H, basis.Phi, basis.Phi)
    C = 0.5 * np.einsum("il,lpq->ipq", basis.Psi, modal_hessian)
    return 0.5 * (C + C.transpose(0, 2, 1))


def h2_coefficients(C, lambdas, denom_tol=DEFAULT_DENOM_TOL) -> SecondOrderNF:
    """Normal-form coefficients with near-resonance detection.

    Where |lam_p + lam_q - lam_i| <= ``denom_tol`` the h2 entry is set to
    zero.  A triple enters the ledger (with a :class:`ResonanceWarning`)
    only if the dropped coefficient C[i, p, q] is significant, so systems
    with no quadratic term at a resonant combination stay silent.
    Resonance is a reported condition, not a failure.
    """
    if denom_tol <= 0:
        raise ValueError(f"denom_tol must be positive, got {denom_tol}")
    C = np.asarray(C, dtype=complex)
    n = C.shape[0]
    if C.shape != (n, n, n):
        raise ValueError(f"C must be an (n, n, n) tensor, got shape {C.shape}")
    lambdas = np.asarray(lambdas, dtype=complex)
    if lambdas.shape != (n,):
        raise ValueError(f"lambdas must have {n} entries, got shape {lambdas.shape}")
    C = 0.5 * (C + C.transpose(0, 2, 1))

    denom = lambdas[None, :, None] + lambdas[None, None, :] - lambdas[:, None, None]
    safe = np.abs(denom) > denom_tol
    h2 = np.zeros_like(C)
    np.divide(C, denom, out=h2, where=safe)

    c_floor = 1e-12 * max(1.0, float(np.max(np.abs(C), initial=0.0)))
    resonant = []
    for i, p, q in zip(*np.nonzero(~safe)):
        if p <= q and abs(C[i, p, q]) > c_floor:
            resonant.append((int(i), int(p), int(q), float(abs(denom[i, p, q]))))
    resonant.sort()
    if resonant:
        worst = min(resonant, key=lambda t: t[3])
        warnings.warn(
            f"{len(resonant)} near-resonant mode triple(s) detected "
            f"(|lam_p + lam_q - lam_i| <= {denom_tol:g}); the corresponding "
            f"h2 entries were zeroed.  Closest: (i, p, q) = {worst[:3]} with "
            f"|denominator| = {worst[3]:.3e}",
            ResonanceWarning,
            stacklevel=2,
        )
    return SecondOrderNF(C=C, h2=h2, resonant=tuple(resonant), denom_tol=float(denom_tol))


def quadratic_map(nf: SecondOrderNF, u, v=None):
    """Evaluate the bilinear form q_i = sum_pq h2[i, p, q] u_p v_q."""
    if v is None:
        v = u
    return np.einsum("ipq,p,q->i", nf.h2, u, v)


def invert_initial_condition(basis: ModalBasis, nf: SecondOrderNF, x0) -> np.ndarray:
    """Initial normal-form state z0 solving y0 = z + h2(z, z) with y0 = Psi x0.

    Fixed-point iteration z <- y0 - h2(z, z) starting from z = y0; for
    x0 = e_k the first iterate is exactly
    z_i = Psi[i, k] - sum_pq h2[i, p, q] Psi[p, k] Psi[q, k].

    Raises
    ------
    ConvergenceError
        If the update exceeds 1e-12 after 20 iterations (x0 outside the
        transformation's region of validity).
    """
    y0 = basis.Psi @ np.asarray(x0)
    z = y0.astype(complex)
    residual = np.inf
    for _ in range(INVERSION_MAX_ITER):
        z_next = y0 - quadratic_map(nf, z)
        if not np.all(np.isfinite(z_next.view(float))):
            raise ConvergenceError(
                np.inf, "initial-condition inversion diverged; x0 is outside "
                "the 2nd-order transformation's validity"
            )
        residual = float(np.max(np.abs(z_next - z), initial=0.0))
        z = z_next
        if residual < INVERSION_TOL:
            return z
    raise ConvergenceError(
        residual,
        f"initial-condition inversion did not converge within "
        f"{INVERSION_MAX_ITER} iterations (last update {residual:.3e}); "
        f"x0 is likely outside the 2nd-order transformation's validity",
    )


def reconstruct_response(basis: ModalBasis, nf: SecondOrderNF, z0, times) -> np.ndarray:
    """2nd-order modal reconstruction x(t) on the given time grid.

    z_i(t) = z0_i exp(lam_i t);
    y_i(t) = z_i(t) + sum_pq h2[i, p, q] z0_p z0_q exp((lam_p + lam_q) t);
    x(t) = Phi y(t).  Returns the real part as an (n, T) array; for a z0
    obtained from a real x0 the imaginary residue is below 1e-8 and is
    discarded.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be a 1-D grid")
    if times.size and times.min() < 0:
        raise ValueError("times must be nonnegative")
    z0 = np.asarray(z0, dtype=complex)
    lam = basis.lambdas

    y_t = z0[:, None] * np.exp(lam[:, None] * times[None, :])
    pair_amp = nf.h2 * np.outer(z0, z0)[None, :, :]
    pair_lam = lam[:, None] + lam[None, :]
    # Chunk the (n^2, T) pair exponentials to bound memory on fine grids.
    n = lam.shape[0]
    chunk = max(1, int(2e6 // max(n * n, 1)))
    for start in range(0, times.size, chunk):
        t_slice = times[start : start + chunk]
        exps = np.exp(pair_lam[:, :, None] * t_slice[None, None, :])
        y_t[:, start : start + chunk] += np.einsum("ipq,pqt->it", pair_amp, exps)
    x_t = basis.Phi @ y_t

    residue = float(np.max(np.abs(x_t.imag), initial=0.0))
    if residue > 1e-6 * max(1.0, float(np.max(np.abs(x_t.real), initial=0.0))):
        warnings.warn(
            f"reconstructed trajectory has imaginary residue {residue:.3e}; "
            "was z0 derived from a real initial state?",
            stacklevel=2,
        )
    return x_t.real
