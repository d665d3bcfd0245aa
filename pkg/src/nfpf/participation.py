"""Nonlinear, extended and time-variant participation factors.

Built on the 2nd-order normal form, this module evaluates, for each state
k perturbed alone with scale alpha_k:

* the nonlinear PF ``p2[k, i] = Phi[k, i] (a_k Psi[i, k] + a_k^2 psi2[i, k])``
  where ``psi2[m, k] = -sum_pq h2[m, p, q] Psi[p, k] Psi[q, k]`` is the
  2nd-order correction to the mode composition,
* resonance PFs for every unordered mode pair (p, q), carried by the
  mode-pair shape ``phi_pair[k, p, q] = sum_i h2[i, p, q] Phi[k, i]``,
* time-variant versions of both in which every term keeps its natural
  decay exponent (``exp(lam_i t)`` for linear-mode terms,
  ``exp((lam_p + lam_q) t)`` for quadratic interactions), so the
  normalized values transition to the linear PF as the transient decays,
* a participation spectrum over linear and resonance frequencies, with a
  unit-peak Gaussian kernel for aggregating it at any target frequency.

An unordered pair's resonance PF is the total coefficient of
``exp((lam_p + lam_q) t)`` in the state response, i.e. the ordered sum (a
factor 2 for p != q under the symmetric-tensor convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .modal import ModalBasis, linear_pf
from .normalform import SecondOrderNF

__all__ = [
    "ParticipationSet",
    "TNPFConfig",
    "PFSpectrum",
    "SpectrumPoint",
    "BandMode",
    "mode_pairs",
    "nonlinear_pf",
    "extended_pf",
    "tnpf_terms",
    "pf_spectrum",
    "convolve_at",
    "nonlinear_modes",
    "rank_states",
]

DEFAULT_SIGMA_HZ = 0.1


def mode_pairs(n: int) -> tuple:
    """Canonical ordering of unordered mode pairs: (p, q) with p <= q."""
    return tuple((p, q) for p in range(n) for q in range(p, n))


def _resolve_alpha(alpha, n: int) -> np.ndarray:
    arr = np.asarray(alpha, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"alpha must be scalar or have {n} entries, got shape {arr.shape}")
    if np.any(arr <= 0):
        raise ValueError("alpha entries must be positive")
    return arr


@dataclass(frozen=True)
class TNPFConfig:
    """Excitation scales, kernel width and optional evaluation grid.

    ``alpha`` is a positive scalar or per-state vector (default 1);
    ``sigma_hz`` the Gaussian kernel width in Hz (default 0.1).
    """

    alpha: object = 1.0
    sigma_hz: float = DEFAULT_SIGMA_HZ
    time_grid: object = None

    def __post_init__(self):
        if self.sigma_hz <= 0:
            raise ValueError(f"sigma_hz must be positive, got {self.sigma_hz}")
        arr = np.asarray(self.alpha, dtype=float)
        if np.any(arr <= 0):
            raise ValueError("alpha entries must be positive")
        if self.time_grid is not None:
            grid = np.asarray(self.time_grid, dtype=float)
            if grid.size and grid.min() < 0:
                raise ValueError("time_grid must be nonnegative")
            grid.setflags(write=False)
            object.__setattr__(self, "time_grid", grid)

    def alpha_vector(self, n: int) -> np.ndarray:
        return _resolve_alpha(self.alpha, n)


@dataclass(frozen=True)
class ParticipationSet:
    """Linear, nonlinear and resonance participation factors.

    ``p2 = p_lin + p2nl`` holds exactly; ``p2res[k, j]`` is the resonance
    PF of state k in the mode pair ``pairs[j]``; ``psi2[m, k]`` the
    2nd-order mode-composition correction.
    """

    p_lin: np.ndarray
    p2: np.ndarray
    p2nl: np.ndarray
    psi2: np.ndarray
    pairs: tuple
    p2res: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        for arr in (self.p_lin, self.p2, self.p2nl, self.psi2, self.p2res, self.alpha):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.p_lin.shape[0]

    def res_pair(self, k: int, p: int, q: int) -> complex:
        """Resonance PF of state k in the unordered pair {p, q}."""
        key = (p, q) if p <= q else (q, p)
        return complex(self.p2res[k, self.pairs.index(key)])


def _h2_weighted(h2, u, v, exps):
    """sum_pq h2[i, p, q] u_p v_q exps[p, q], the shared quadratic kernel.

    Every quadratic sum in this module funnels through this one einsum so
    that evaluations which must agree exactly (t = 0, alpha = 1 anchoring)
    share their floating-point reduction order.
    """
    return np.einsum("ipq,p,q,pq->i", h2, u, v, exps)


def _pair_matrix(pair_shape_k, a, b, weights):
    """V[p, q] = pair_shape_k[p, q] * a_p * b_q * weights[p, q]."""
    return pair_shape_k * np.outer(a, b) * weights


def _pair_totals(V, pairs):
    """Total coefficient per unordered pair: both orders for p != q."""
    out = np.empty(len(pairs), dtype=complex)
    for j, (p, q) in enumerate(pairs):
        out[j] = V[p, q] if p == q else V[p, q] + V[q, p]
    return out


def mode_pair_shape(basis: ModalBasis, nf: SecondOrderNF) -> np.ndarray:
    """Mode-pair shapes phi_pair[k, p, q] = sum_i h2[i, p, q] Phi[k, i]."""
    return np.einsum("ipq,ki->kpq", nf.h2, basis.Phi)


def _unit_pair_weights(n: int) -> np.ndarray:
    return np.ones((n, n), dtype=complex)


def nonlinear_pf(basis: ModalBasis, nf: SecondOrderNF, alpha=1.0) -> ParticipationSet:
    """Nonlinear and resonance PFs for single-state excitations.

    For each state k the initial condition x0 = alpha_k e_k is inverted to
    first order, z0_i = alpha_k Psi[i, k] + alpha_k^2 psi2[i, k], giving

        p2[k, i]      = Phi[k, i] * z0_i
        p2res[k, pq]  = phi_pair[k, p, q] * z0_p * z0_q   (ordered total).

    ``p2`` is assembled as ``p_lin + p2nl`` so that identity is exact.
    With alpha = 1 and h2 = 0 it degenerates to the linear PF.  Reported
    tables normalize each mode column by its largest magnitude.
    """
    n = basis.n
    alpha_vec = _resolve_alpha(alpha, n)
    ones = _unit_pair_weights(n)

    p_lin = linear_pf(basis)
    psi2 = np.empty((n, n), dtype=complex)
    for k in range(n):
        psi_k = basis.Psi[:, k]
        psi2[:, k] = -_h2_weighted(nf.h2, psi_k, psi_k, ones)

    pairs = mode_pairs(n)
    pair_shape = mode_pair_shape(basis, nf)
    p2nl = np.empty((n, n), dtype=complex)
    p2res = np.empty((n, len(pairs)), dtype=complex)
    for k in range(n):
        a_k = alpha_vec[k]
        psi_k = basis.Psi[:, k]
        lin_row = basis.Phi[k, :] * psi_k
        correction = _h2_weighted(nf.h2, a_k * psi_k, a_k * psi_k, ones)
        p2nl[k, :] = (a_k * lin_row - lin_row) - basis.Phi[k, :] * correction
        z0 = a_k * psi_k + a_k**2 * psi2[:, k]
        p2res[k, :] = _pair_totals(_pair_matrix(pair_shape[k], z0, z0, ones), pairs)

    return ParticipationSet(
        p_lin=p_lin,
        p2=p_lin + p2nl,
        p2nl=p2nl,
        psi2=psi2,
        pairs=pairs,
        p2res=p2res,
        alpha=alpha_vec,
    )


def tnpf_terms(basis: ModalBasis, nf: SecondOrderNF, config: TNPFConfig, k: int, t: float):
    """Time-variant PF terms of state k at time t.

    Returns ``(per_mode, per_pair)`` where

        per_mode[i] = a_k e^(lam_i t) Phi[k, i] Psi[i, k]
                      - Phi[k, i] sum_pq a_p a_q e^((lam_p+lam_q) t)
                                          h2[i, p, q] Psi[p, k] Psi[q, k]

        per_pair[j] = a_p a_q e^((lam_p+lam_q) t) phi_pair[k, p, q]
                      (Psi[p, k] + psi2[p, k]) (Psi[q, k] + psi2[q, k])

    summed over both orders for p != q.  All decay exponents are capped at
    2nd order.  At t = 0 with alpha = 1 this reproduces
    :func:`nonlinear_pf` exactly (shared floating-point paths).
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    n = basis.n
    if not 0 <= k < n:
        raise ValueError(f"state index {k} out of range for n={n}")
    alpha_vec = config.alpha_vector(n)
    lam = basis.lambdas
    pair_exp = np.exp((lam[:, None] + lam[None, :]) * t)
    ones = _unit_pair_weights(n)

    psi_k = basis.Psi[:, k]
    lin_row = basis.Phi[k, :] * psi_k
    correction = _h2_weighted(nf.h2, alpha_vec * psi_k, alpha_vec * psi_k, pair_exp)
    per_mode = (alpha_vec[k] * np.exp(lam * t)) * lin_row - basis.Phi[k, :] * correction

    psi2_k = -_h2_weighted(nf.h2, psi_k, psi_k, ones)
    u = psi_k + psi2_k
    pairs = mode_pairs(n)
    pair_shape_k = mode_pair_shape(basis, nf)[k]
    weights = np.outer(alpha_vec, alpha_vec) * pair_exp
    per_pair = _pair_totals(_pair_matrix(pair_shape_k, u, u, weights), pairs)
    return per_mode, per_pair


def extended_pf(basis: ModalBasis, nf: SecondOrderNF, k: int, scales, t: float = 0.0) -> np.ndarray:
    """Average per-unit-excitation PF of state k over a set of scales.

    The arithmetic mean over alpha in ``scales`` of the time-variant
    linear-mode term evaluated with alpha_k = alpha, divided by alpha.
    """
    scales = list(scales)
    if not scales:
        raise ValueError("scales must be a nonempty collection of positive reals")
    n = basis.n
    total = np.zeros(n, dtype=complex)
    for a in scales:
        alpha_vec = np.ones(n)
        alpha_vec[k] = a
        per_mode, _ = tnpf_terms(basis, nf, TNPFConfig(alpha=alpha_vec), k, t)
        total += per_mode / a
    return total / len(scales)


# ---------------------------------------------------------------------------
# Participation spectrum and Gaussian aggregation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumPoint:
    freq_hz: float
    amplitude: complex
    kind: str  # "linear" or "resonance"
    source: object  # mode index, or (p, q) pair


@dataclass(frozen=True)
class PFSpectrum:
    """Frequency-indexed participation amplitudes of one state at one time.

    Linear points sit at |Im lam_i| / 2pi, one per conjugate-pair
    representative; resonance points at |Im(lam_p + lam_q)| / 2pi, one per
    unordered mode pair (pairs of a mode with its conjugate land at 0 Hz).
    """

    points: tuple
    state_index: int
    eval_time: float
    sigma_hz: float = DEFAULT_SIGMA_HZ

    def linear_points(self) -> tuple:
        return tuple(p for p in self.points if p.kind == "linear")

    def resonance_points(self) -> tuple:
        return tuple(p for p in self.points if p.kind == "resonance")


def pf_spectrum(basis: ModalBasis, nf: SecondOrderNF, config: TNPFConfig, k: int, t: float) -> PFSpectrum:
    """Participation spectrum of state k at time t under the given config."""
    per_mode, per_pair = tnpf_terms(basis, nf, config, k, t)
    lam = basis.lambdas
    points = []
    for i in map(int, basis.representatives):
        points.append(
            SpectrumPoint(
                freq_hz=float(abs(lam[i].imag) / (2.0 * np.pi)),
                amplitude=complex(per_mode[i]),
                kind="linear",
                source=i,
            )
        )
    for j, (p, q) in enumerate(mode_pairs(basis.n)):
        freq = float(abs((lam[p] + lam[q]).imag) / (2.0 * np.pi))
        points.append(
            SpectrumPoint(freq_hz=freq, amplitude=complex(per_pair[j]), kind="resonance", source=(p, q))
        )
    return PFSpectrum(
        points=tuple(points), state_index=int(k), eval_time=float(t), sigma_hz=config.sigma_hz
    )


def convolve_at(spectrum: PFSpectrum, f_target: float, sigma_hz: float) -> complex:
    """Gaussian-weighted sum of all spectrum points at a target frequency.

    Uses the unit-peak kernel K(df) = exp(-df^2 / (2 sigma^2)), so an
    isolated point evaluated at its own frequency returns its amplitude
    unchanged.
    """
    if sigma_hz <= 0:
        raise ValueError(f"sigma_hz must be positive, got {sigma_hz}")
    total = 0.0 + 0.0j
    for point in spectrum.points:
        df = f_target - point.freq_hz
        total += np.exp(-(df**2) / (2.0 * sigma_hz**2)) * point.amplitude
    return complex(total)


@dataclass(frozen=True)
class BandMode:
    """Gaussian-weighted aggregate of the spectrum points inside one band."""

    f_lower: float
    f_upper: float
    center: float
    value: complex
    points: tuple


def nonlinear_modes(spectrum: PFSpectrum, bands, sigma_hz=None) -> list:
    """Aggregate the spectrum into per-band values (one "nonlinear mode" each).

    Each band (f_lower, f_upper] collects the linear and resonance points
    inside it, weighted by the Gaussian kernel centered at the band
    midpoint.  Bands must be disjoint and ordered.
    """
    if sigma_hz is None:
        sigma_hz = spectrum.sigma_hz
    bands = [(float(lo), float(hi)) for lo, hi in bands]
    for lo, hi in bands:
        if not lo < hi:
            raise ValueError(f"band ({lo}, {hi}] is empty")
    for (lo1, hi1), (lo2, hi2) in zip(bands, bands[1:]):
        if hi1 > lo2:
            raise ValueError(f"bands ({lo1}, {hi1}] and ({lo2}, {hi2}] overlap or are unordered")

    out = []
    for lo, hi in bands:
        members = tuple(p for p in spectrum.points if lo < p.freq_hz <= hi)
        center = 0.5 * (lo + hi)
        value = 0.0 + 0.0j
        for point in members:
            df = center - point.freq_hz
            value += np.exp(-(df**2) / (2.0 * sigma_hz**2)) * point.amplitude
        out.append(BandMode(f_lower=lo, f_upper=hi, center=center, value=complex(value), points=members))
    return out


def rank_states(values) -> list:
    """Rank states by normalized magnitude (max = 1), descending.

    Ties break toward the lower state index.  All-zero input is rejected.
    """
    values = np.asarray(values)
    mags = np.abs(values).astype(float)
    peak = float(mags.max(initial=0.0))
    if peak == 0.0:
        raise ValueError("cannot rank an all-zero participation vector")
    normalized = mags / peak
    order = sorted(range(len(normalized)), key=lambda k: (-normalized[k], k))
    return [(k, float(normalized[k])) for k in order]
