"""Quadratic (2nd-order Taylor) state-space models and their builders.

A :class:`QuadraticModel` stores the deviation dynamics around an
equilibrium::

    dx/dt = A x + 0.5 * [x' H[0] x, ..., x' H[n-1] x]'

where ``x`` is the deviation from ``x_eq``, ``A`` is the state matrix and
``H[k]`` is the symmetric Hessian of the k-th state equation.  Three ways
to obtain one:

* give ``A`` and ``H`` explicitly,
* central finite differences of a black-box vector field
  (:func:`quadratize_finite_diff`),
* the analytic multi-machine classical swing model
  (:func:`build_swing_model`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EquilibriumError, NotAtEquilibriumError, SchemaError

__all__ = [
    "QuadraticModel",
    "SwingParams",
    "quadratize_finite_diff",
    "solve_equilibrium",
    "build_swing_model",
    "electrical_power",
    "swing_vector_field",
    "swing_deviation_field",
    "model_from_dict",
    "load_model",
    "save_model",
]

EQUILIBRIUM_TOL = 1e-10
NEWTON_MAX_ITER = 50


def _frozen_array(value, dtype, shape, name):
    arr = np.array(value, dtype=dtype)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr.view(float) if np.iscomplexobj(arr) else arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadraticModel:
    """2nd-order Taylor truncation of a vector field around an equilibrium.

    Attributes
    ----------
    A : (n, n) ndarray
        State matrix (per-unit/s).
    H : (n, n, n) ndarray
        ``H[k]`` is the symmetric Hessian of the k-th state equation;
        symmetrized over its last two axes on construction.
    x_eq : (n,) ndarray
        Equilibrium point in the original coordinates.  The model itself
        is expressed in deviations from it.
    labels : tuple of str
        Distinct state-variable names, one per state.
    """

    A: np.ndarray
    H: np.ndarray
    x_eq: np.ndarray
    labels: tuple

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        H = np.array(self.H, dtype=float)
        if H.shape != (n, n, n):
            raise ValueError(f"H must have shape {(n, n, n)}, got {H.shape}")
        H = 0.5 * (H + H.transpose(0, 2, 1))
        x_eq = np.array(self.x_eq, dtype=float)
        if x_eq.shape != (n,):
            raise ValueError(f"x_eq must have shape ({n},), got {x_eq.shape}")
        for name, arr in (("A", A), ("H", H), ("x_eq", x_eq)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        labels = tuple(str(s) for s in self.labels)
        if len(labels) != n:
            raise ValueError(f"labels must have {n} entries, got {len(labels)}")
        if len(set(labels)) != n:
            raise ValueError("labels must be distinct")
        for arr in (A, H, x_eq):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "x_eq", x_eq)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def rhs(self, x):
        """Evaluate dx/dt at deviation state x (vectorizes over trailing axes)."""
        x = np.asarray(x, dtype=float)
        quad = 0.5 * np.einsum("kij,i...,j...->k...", self.H, x, x)
        return self.A @ x + quad

    def to_dict(self) -> dict:
        return {
            "kind": "quadratic",
            "n": self.n,
            "A": self.A.tolist(),
            "H": self.H.tolist(),
            "x_eq": self.x_eq.tolist(),
            "labels": list(self.labels),
        }


def default_labels(n: int) -> tuple:
    return tuple(f"x{k + 1}" for k in range(n))


def quadratize_finite_diff(f, x_eq, step=None) -> QuadraticModel:
    """Build a :class:`QuadraticModel` from a black-box vector field.

    Central differences estimate the Jacobian and the per-equation
    Hessians of ``f`` at ``x_eq``.  They are exact (up to roundoff) for
    polynomial fields of total degree <= 2.

    Parameters
    ----------
    f : callable
        Maps a real n-vector to a real n-vector.
    x_eq : array_like
        Equilibrium point; ``f(x_eq)`` must vanish to 1e-8 per component.
    step : float, optional
        Difference step.  Default ``max(1e-5, 1e-5 * max|x_eq|)``.

    Raises
    ------
    NotAtEquilibriumError
        If the residual at ``x_eq`` exceeds the tolerance.
    ValueError
        If any evaluation of ``f`` is non-finite, or step <= 0.
    """
    x_eq = np.asarray(x_eq, dtype=float)
    n = x_eq.shape[0]
    if step is None:
        step = max(1e-5, 1e-5 * float(np.max(np.abs(x_eq), initial=0.0)))
    step = float(step)
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")

    def fv(x):
        val = np.asarray(f(x), dtype=float)
        if val.shape != (n,):
            raise ValueError(f"f must return shape ({n},), got {val.shape}")
        if not np.all(np.isfinite(val)):
            raise ValueError("f returned non-finite values during differencing")
        return val

    f0 = fv(x_eq)
    residual = float(np.max(np.abs(f0), initial=0.0))
    if residual > 1e-8:
        raise NotAtEquilibriumError(residual)

    eye = np.eye(n)
    f_plus = np.array([fv(x_eq + step * eye[j]) for j in range(n)])
    f_minus = np.array([fv(x_eq - step * eye[j]) for j in range(n)])
    A = (f_plus - f_minus).T / (2.0 * step)

    H = np.zeros((n, n, n))
    for i in range(n):
        H[:, i, i] = (f_plus[i] - 2.0 * f0 + f_minus[i]) / step**2
    for i in range(n):
        for j in range(i + 1, n):
            mixed = (
                fv(x_eq + step * (eye[i] + eye[j]))
                - fv(x_eq + step * (eye[i] - eye[j]))
                - fv(x_eq - step * (eye[i] - eye[j]))
                + fv(x_eq - step * (eye[i] + eye[j]))
            ) / (4.0 * step**2)
            H[:, i, j] = mixed
            H[:, j, i] = mixed

    return QuadraticModel(A=A, H=H, x_eq=x_eq, labels=default_labels(n))


# ---------------------------------------------------------------------------
# Classical multi-machine swing model over a reduced admittance network.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwingParams:
    """Classical-model generator and reduced-network parameters.

    Attributes
    ----------
    inertia : (m,) ndarray
        Per-generator inertia constants H_i (s); all positive.
    damping : (m,) ndarray
        Damping coefficients D_i (per-unit torque per per-unit speed).
    p_mech : (m,) ndarray
        Mechanical powers (per-unit).
    emf : (m,) ndarray
        Internal EMF magnitudes (per-unit).
    Y : (m, m) complex ndarray
        Reduced admittance matrix (per-unit); symmetric for a reciprocal
        network.
    omega_s : float
        Synchronous angular frequency (rad/s); positive.
    """

    inertia: np.ndarray
    damping: np.ndarray
    p_mech: np.ndarray
    emf: np.ndarray
    Y: np.ndarray
    omega_s: float

    def __post_init__(self):
        inertia = np.array(self.inertia, dtype=float)
        m = inertia.shape[0]
        damping = _frozen_array(self.damping, float, (m,), "damping")
        p_mech = _frozen_array(self.p_mech, float, (m,), "p_mech")
        emf = _frozen_array(self.emf, float, (m,), "emf")
        Y = _frozen_array(self.Y, complex, (m, m), "Y")
        if np.any(inertia <= 0):
            raise ValueError("all inertia constants must be positive")
        omega_s = float(self.omega_s)
        if omega_s <= 0:
            raise ValueError("omega_s must be positive")
        asym = np.max(np.abs(Y - Y.T), initial=0.0)
        if asym > 1e-12 * max(1.0, float(np.max(np.abs(Y)))):
            raise ValueError(f"Y must be symmetric; max asymmetry {asym:.3e}")
        inertia.setflags(write=False)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "damping", damping)
        object.__setattr__(self, "p_mech", p_mech)
        object.__setattr__(self, "emf", emf)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "omega_s", omega_s)

    @property
    def m(self) -> int:
        return self.inertia.shape[0]

    def to_dict(self) -> dict:
        return {
            "kind": "swing",
            "inertia": self.inertia.tolist(),
            "damping": self.damping.tolist(),
            "p_mech": self.p_mech.tolist(),
            "emf": self.emf.tolist(),
            "Y_re": self.Y.real.tolist(),
            "Y_im": self.Y.imag.tolist(),
            "omega_s": self.omega_s,
        }


def electrical_power(params: SwingParams, delta):
    """Air-gap powers P_e(delta) over the reduced network, one per machine."""
    delta = np.asarray(delta, dtype=float)
    G, B = params.Y.real, params.Y.imag
    dd = delta[:, None] - delta[None, :]
    ee = np.outer(params.emf, params.emf)
    return np.sum(ee * (G * np.cos(dd) + B * np.sin(dd)), axis=1)


def _power_jacobian(params, delta):
    """dP[i, a] = d P_e_i / d delta_a at the given angles."""
    G, B = params.Y.real, params.Y.imag
    dd = delta[:, None] - delta[None, :]
    ee = np.outer(params.emf, params.emf)
    t1 = ee * (-G * np.sin(dd) + B * np.cos(dd))
    np.fill_diagonal(t1, 0.0)
    dP = -t1
    np.fill_diagonal(dP, t1.sum(axis=1))
    return dP


def _power_hessian(params, delta):
    """d2P[i, a, b] = d^2 P_e_i / d delta_a d delta_b at the given angles."""
    m = params.m
    G, B = params.Y.real, params.Y.imag
    dd = delta[:, None] - delta[None, :]
    ee = np.outer(params.emf, params.emf)
    t2 = ee * (-G * np.cos(dd) - B * np.sin(dd))
    np.fill_diagonal(t2, 0.0)
    d2P = np.zeros((m, m, m))
    for i in range(m):
        d2P[i, i, i] = t2[i].sum()
        for a in range(m):
            if a == i:
                continue
            d2P[i, i, a] = -t2[i, a]
            d2P[i, a, i] = -t2[i, a]
            d2P[i, a, a] = t2[i, a]
    return d2P


def solve_equilibrium(params: SwingParams, guess):
    """Solve the power balance P_mech = P_e(delta) for the machine angles.

    The last machine's angle is pinned to its value in ``guess`` and Newton
    iteration adjusts the remaining m-1 angles.  The returned angles satisfy
    the full balance max|P_mech - P_e| <= 1e-10, including the pinned
    machine (which requires the mechanical powers to be consistent with the
    network losses).

    Raises
    ------
    EquilibriumError
        On non-convergence within 50 iterations, a singular Jacobian, or a
        residual left on the pinned machine.
    """
    guess = np.asarray(guess, dtype=float)
    m = params.m
    if guess.shape != (m,):
        raise ValueError(f"guess must have {m} entries, got shape {guess.shape}")
    delta = guess.copy()
    residual = params.p_mech - electrical_power(params, delta)
    for _ in range(NEWTON_MAX_ITER):
        if np.max(np.abs(residual[:-1]), initial=0.0) <= EQUILIBRIUM_TOL:
            break
        jac = -_power_jacobian(params, delta)[: m - 1, : m - 1]
        try:
            step = np.linalg.solve(jac, -residual[: m - 1])
        except np.linalg.LinAlgError:
            raise EquilibriumError(
                "singular Jacobian in equilibrium Newton iteration",
                residual=float(np.max(np.abs(residual))),
            ) from None
        delta[: m - 1] += step
        if not np.all(np.isfinite(delta)):
            raise EquilibriumError("Newton iteration diverged")
        residual = params.p_mech - electrical_power(params, delta)
    final = float(np.max(np.abs(residual), initial=0.0))
    if final > EQUILIBRIUM_TOL:
        raise EquilibriumError(
            f"no equilibrium within {NEWTON_MAX_ITER} Newton steps; "
            f"final residual {final:.3e}",
            residual=final,
        )
    return delta


def _swing_labels(m: int) -> tuple:
    ang = tuple(f"ang{i + 1}_{m}" for i in range(m - 1))
    spd = tuple(f"spd{i + 1}" for i in range(m))
    return ang + spd


def swing_vector_field(params: SwingParams):
    """Right-hand side in relative-angle coordinates.

    The state is ``s = (ang_1, ..., ang_{m-1}, w_1, ..., w_m)`` with
    ``ang_i = delta_i - delta_m`` (rad) and ``w_i`` the speed deviation
    from synchronous (rad/s).  Referencing machine m removes the
    angle-translation symmetry, so the state dimension is 2m-1.
    """
    m = params.m
    gain = params.omega_s / (2.0 * params.inertia)
    damp = params.damping / (2.0 * params.inertia)

    def rhs(s):
        s = np.asarray(s, dtype=float)
        delta = np.concatenate([s[: m - 1], [0.0]])
        w = s[m - 1 :]
        pe = electrical_power(params, delta)
        dang = w[: m - 1] - w[m - 1]
        dw = gain * (params.p_mech - pe) - damp * w
        return np.concatenate([dang, dw])

    return rhs


def swing_deviation_field(params: SwingParams, x_eq):
    """Swing right-hand side in deviations from the given equilibrium state."""
    rhs = swing_vector_field(params)
    x_eq = np.asarray(x_eq, dtype=float)
    return lambda x: rhs(x_eq + np.asarray(x, dtype=float))


def build_swing_model(params: SwingParams, guess=None) -> QuadraticModel:
    """Analytic 2nd-order model of the classical swing dynamics.

    States are relative angles referenced to machine m plus all machine
    speed deviations (n = 2m-1).  ``A`` and ``H`` come from differentiating
    the trigonometric power flow at the solved equilibrium, so the model is
    exact through 2nd order with no differencing error.
    """
    m = params.m
    if guess is None:
        guess = np.zeros(m)
    delta_eq = solve_equilibrium(params, guess)
    n = 2 * m - 1
    gain = params.omega_s / (2.0 * params.inertia)
    damp = params.damping / (2.0 * params.inertia)

    dP = _power_jacobian(params, delta_eq)
    d2P = _power_hessian(params, delta_eq)

    A = np.zeros((n, n))
    H = np.zeros((n, n, n))
    # d ang_i / dt = w_i - w_m
    for i in range(m - 1):
        A[i, m - 1 + i] = 1.0
        A[i, n - 1] = -1.0
    # d w_i / dt = gain_i (P_mech_i - P_e_i) - damp_i w_i
    for i in range(m):
        r = m - 1 + i
        A[r, : m - 1] = -gain[i] * dP[i, : m - 1]
        A[r, r] += -damp[i]
        H[r, : m - 1, : m - 1] = -gain[i] * d2P[i, : m - 1, : m - 1]

    theta_eq = delta_eq[: m - 1] - delta_eq[m - 1]
    x_eq = np.concatenate([theta_eq, np.zeros(m)])
    return QuadraticModel(A=A, H=H, x_eq=x_eq, labels=_swing_labels(m))


# ---------------------------------------------------------------------------
# Model file schema (JSON-shaped structured text).
# ---------------------------------------------------------------------------

_QUAD_FIELDS = {"kind", "n", "A", "H", "x_eq", "labels"}
_SWING_FIELDS = {"kind", "inertia", "damping", "p_mech", "emf", "Y_re", "Y_im", "omega_s"}


def _require(cond, path, message):
    if not cond:
        raise SchemaError(path, message)


def _as_number(value, path):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), path, "expected a number")
    return float(value)


def _as_vector(value, path, length=None):
    _require(isinstance(value, list), path, "expected a list of numbers")
    if length is not None:
        _require(len(value) == length, path, f"expected {length} entries, got {len(value)}")
    return np.array([_as_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _as_matrix(value, path, rows=None, cols=None):
    _require(isinstance(value, list), path, "expected a list of rows")
    if rows is not None:
        _require(len(value) == rows, path, f"expected {rows} rows, got {len(value)}")
    n_cols = cols
    out = []
    for i, row in enumerate(value):
        if n_cols is None and isinstance(row, list):
            n_cols = len(row)
        out.append(_as_vector(row, f"{path}[{i}]", n_cols))
    return np.array(out) if out else np.zeros((0, 0))


def model_from_dict(data: dict) -> QuadraticModel:
    """Validate a model dictionary and build the quadratic model it describes.

    Raises :class:`SchemaError` with the offending field path on violations.
    """
    _require(isinstance(data, dict), "$", "expected a JSON object")
    kind = data.get("kind")
    _require(kind in ("quadratic", "swing"), "kind", f"expected 'quadratic' or 'swing', got {kind!r}")

    if kind == "quadratic":
        extra = set(data) - _QUAD_FIELDS
        _require(not extra, sorted(extra)[0] if extra else "", "unexpected field")
        missing = _QUAD_FIELDS - set(data)
        _require(not missing, sorted(missing)[0] if missing else "", "missing field")
        _require(isinstance(data["n"], int) and not isinstance(data["n"], bool), "n", "expected an integer")
        n = data["n"]
        _require(n >= 1, "n", "state dimension must be >= 1")
        A = _as_matrix(data["A"], "A", rows=n, cols=n)
        _require(isinstance(data["H"], list) and len(data["H"]) == n, "H", f"expected {n} matrices")
        H = np.array([_as_matrix(data["H"][k], f"H[{k}]", rows=n, cols=n) for k in range(n)])
        x_eq = _as_vector(data["x_eq"], "x_eq", n)
        labels = data["labels"]
        _require(
            isinstance(labels, list) and all(isinstance(s, str) for s in labels),
            "labels",
            "expected a list of strings",
        )
        _require(len(labels) == n, "labels", f"expected {n} entries, got {len(labels)}")
        _require(len(set(labels)) == n, "labels", "labels must be distinct")
        try:
            return QuadraticModel(A=A, H=H, x_eq=x_eq, labels=tuple(labels))
        except ValueError as exc:
            raise SchemaError("$", str(exc)) from None

    extra = set(data) - _SWING_FIELDS
    _require(not extra, sorted(extra)[0] if extra else "", "unexpected field")
    missing = _SWING_FIELDS - set(data)
    _require(not missing, sorted(missing)[0] if missing else "", "missing field")
    inertia = _as_vector(data["inertia"], "inertia")
    m = inertia.shape[0]
    _require(m >= 1, "inertia", "at least one machine required")
    damping = _as_vector(data["damping"], "damping", m)
    p_mech = _as_vector(data["p_mech"], "p_mech", m)
    emf = _as_vector(data["emf"], "emf", m)
    Y_re = _as_matrix(data["Y_re"], "Y_re", rows=m, cols=m)
    Y_im = _as_matrix(data["Y_im"], "Y_im", rows=m, cols=m)
    omega_s = _as_number(data["omega_s"], "omega_s")
    try:
        params = SwingParams(
            inertia=inertia,
            damping=damping,
            p_mech=p_mech,
            emf=emf,
            Y=Y_re + 1j * Y_im,
            omega_s=omega_s,
        )
    except ValueError as exc:
        raise SchemaError("$", str(exc)) from None
    return build_swing_model(params)


def load_model(path) -> QuadraticModel:
    """Load a quadratic or swing model file (see :func:`model_from_dict`)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc}") from None
    return model_from_dict(data)


def save_model(obj, path):
    """Write a QuadraticModel or SwingParams to a model file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj.to_dict(), fh, indent=1)
        fh.write("\n")
