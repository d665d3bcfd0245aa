"""Command-line surface: load a model file, run the analysis pipeline and
emit plot-ready structured text (tables and CSV).

Exit codes: 0 success, 1 numeric failure (defective matrix, divergence,
non-convergence), 2 input or schema error.  All floating-point output uses
12 significant digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NfpfError, SchemaError
from .modal import decompose, linear_pf
from .normalform import h2_coefficients, second_order_coeffs
from .participation import (
    TNPFConfig,
    convolve_at,
    nonlinear_pf,
    pf_spectrum,
    tnpf_terms,
)
from .simkit import integrate, reconstruction_error
from .sysmodel import load_model

FMT = ".12g"


def _f(x) -> str:
    return format(float(x), FMT)


def _parse_alpha(text, n):
    parts = text.split(",")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise SchemaError("--alpha", f"expected a number or comma list, got {text!r}") from None
    if len(values) == 1:
        return values[0]
    if len(values) != n:
        raise SchemaError("--alpha", f"expected 1 or {n} values, got {len(values)}")
    return np.array(values)


def _parse_range(text, flag):
    parts = text.split(":")
    if len(parts) != 3:
        raise SchemaError(flag, f"expected start:stop:count, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise SchemaError(flag, f"expected start:stop:count, got {text!r}") from None
    if count < 2 or stop <= start:
        raise SchemaError(flag, "need stop > start and count >= 2")
    return np.linspace(start, stop, count)


def _state_index(model, text):
    """Resolve a 1-based index or a state label."""
    if text in model.labels:
        return model.labels.index(text)
    try:
        k = int(text)
    except ValueError:
        raise SchemaError("--state", f"unknown state {text!r}; labels: {list(model.labels)}") from None
    if not 1 <= k <= model.n:
        raise SchemaError("--state", f"state index {k} out of range 1..{model.n}")
    return k - 1


def _parse_x0(text, model):
    if text.startswith("ek:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise SchemaError("--x0", f"expected ek:<index>:<scale>, got {text!r}")
        try:
            k, scale = int(parts[1]), float(parts[2])
        except ValueError:
            raise SchemaError("--x0", f"expected ek:<index>:<scale>, got {text!r}") from None
        if not 1 <= k <= model.n:
            raise SchemaError("--x0", f"state index {k} out of range 1..{model.n}")
        x0 = np.zeros(model.n)
        x0[k - 1] = scale
        return x0
    try:
        values = [float(p) for p in text.split(",")]
    except ValueError:
        raise SchemaError("--x0", f"expected ek:<index>:<scale> or a comma vector, got {text!r}") from None
    if len(values) != model.n:
        raise SchemaError("--x0", f"expected {model.n} components, got {len(values)}")
    return np.array(values)


@dataclass
class AnalysisReport:
    """Rendered mode table, PF tables, resonance ledger and staged warnings."""

    mode_rows: list
    labels: list
    rep_indices: list
    pf_linear: np.ndarray
    pf_nonlinear: np.ndarray
    resonant: tuple
    denom_tol: float
    warnings: list

    def to_json_dict(self) -> dict:
        return {
            "modes": [
                {
                    "index": r["index"] + 1,
                    "eigenvalue": [r["re"], r["im"]],
                    "freq_hz": r["freq_hz"],
                    "damping_ratio": r["zeta"],
                }
                for r in self.mode_rows
            ],
            "states": self.labels,
            "pf_columns": [i + 1 for i in self.rep_indices],
            "pf_linear_normalized": self.pf_linear.tolist(),
            "pf_nonlinear_normalized": self.pf_nonlinear.tolist(),
            "resonant_triples": [
                {"i": i + 1, "p": p + 1, "q": q + 1, "abs_denominator": d}
                for i, p, q, d in self.resonant
            ],
            "denom_tol": self.denom_tol,
            "warnings": self.warnings,
        }

    def render(self) -> str:
        lines = ["# modes", "index,re,im,freq_hz,damping_ratio"]
        for r in self.mode_rows:
            lines.append(
                f"{r['index'] + 1},{_f(r['re'])},{_f(r['im'])},{_f(r['freq_hz'])},{_f(r['zeta'])}"
            )
        for title, table in (("linear", self.pf_linear), ("nonlinear", self.pf_nonlinear)):
            lines.append(f"# pf_{title}_normalized")
            lines.append("state," + ",".join(f"mode{i + 1}" for i in self.rep_indices))
            for k, label in enumerate(self.labels):
                lines.append(label + "," + ",".join(_f(v) for v in table[k]))
        lines.append("# resonance_ledger")
        lines.append(f"denom_tol,{_f(self.denom_tol)}")
        if self.resonant:
            lines.append("i,p,q,abs_denominator")
            for i, p, q, d in self.resonant:
                lines.append(f"{i + 1},{p + 1},{q + 1},{_f(d)}")
        else:
            lines.append("none")
        lines.append("# warnings")
        if self.warnings:
            lines.extend(self.warnings)
        else:
            lines.append("none")
        return "\n".join(lines) + "\n"


def _normalized_columns(matrix, columns):
    mags = np.abs(matrix[:, columns])
    peak = mags.max(axis=0, keepdims=True)
    peak[peak == 0.0] = 1.0
    return mags / peak


def _staged(stage, record):
    """Context manager collecting warnings tagged with their stage."""

    class _Ctx:
        def __enter__(self):
            self._cm = warnings.catch_warnings(record=True)
            self._caught = self._cm.__enter__()
            warnings.simplefilter("always")
            return self

        def __exit__(self, *exc):
            self._cm.__exit__(*exc)
            for item in self._caught:
                record.append(f"{stage}: {item.message}")
            return False

    return _Ctx()


def _pipeline(model, alpha, denom_tol):
    notes = []
    with _staged("modal", notes):
        basis = decompose(model.A)
    with _staged("normalform", notes):
        C = second_order_coeffs(model, basis)
        nf = h2_coefficients(C, basis.lambdas, denom_tol)
    with _staged("participation", notes):
        pset = nonlinear_pf(basis, nf, alpha)
    return basis, nf, pset, notes


def cmd_analyze(args) -> int:
    model = load_model(args.model_file)
    alpha = _parse_alpha(args.alpha, model.n)
    basis, nf, pset, notes = _pipeline(model, alpha, args.denom_tol)

    reps = [int(i) for i in basis.representatives]
    mode_rows = [
        {
            "index": i,
            "re": float(basis.lambdas[i].real),
            "im": float(basis.lambdas[i].imag),
            "freq_hz": float(basis.freq_hz[i]),
            "zeta": float(basis.damping_ratio[i]),
        }
        for i in range(basis.n)
    ]
    report = AnalysisReport(
        mode_rows=mode_rows,
        labels=list(model.labels),
        rep_indices=reps,
        pf_linear=_normalized_columns(pset.p_lin, reps),
        pf_nonlinear=_normalized_columns(pset.p2, reps),
        resonant=nf.resonant,
        denom_tol=nf.denom_tol,
        warnings=notes,
    )
    if args.json:
        sys.stdout.write(json.dumps(report.to_json_dict(), indent=1) + "\n")
    else:
        sys.stdout.write(report.render())
    return 0


def cmd_spectrum(args) -> int:
    model = load_model(args.model_file)
    k = _state_index(model, args.state)
    if args.time < 0:
        raise SchemaError("--time", "must be nonnegative")
    config = TNPFConfig(alpha=_parse_alpha(args.alpha, model.n), sigma_hz=args.sigma)
    basis, nf, _, notes = _pipeline(model, config.alpha, args.denom_tol)
    spec = pf_spectrum(basis, nf, config, k, args.time)

    out = ["# points", "freq_hz,amplitude_abs,kind,source"]
    for pt in spec.points:
        source = f"i={pt.source + 1}" if pt.kind == "linear" else f"p={pt.source[0] + 1};q={pt.source[1] + 1}"
        out.append(f"{_f(pt.freq_hz)},{_f(abs(pt.amplitude))},{pt.kind},{source}")
    out.append("# curve")
    out.append("freq_hz,p2_abs")
    for f_target in _parse_range(args.grid, "--grid"):
        out.append(f"{_f(f_target)},{_f(abs(convolve_at(spec, f_target, args.sigma)))}")
    for note in notes:
        out.append(f"# warning: {note}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def cmd_tnpf(args) -> int:
    model = load_model(args.model_file)
    config = TNPFConfig(alpha=_parse_alpha(args.alpha, model.n), sigma_hz=args.sigma)
    basis, nf, pset, notes = _pipeline(model, config.alpha, args.denom_tol)

    reps = [int(i) for i in basis.representatives]
    if args.mode_index is not None:
        if not 1 <= args.mode_index <= basis.n:
            raise SchemaError("--mode-index", f"mode index out of range 1..{basis.n}")
        target = args.mode_index - 1
    else:
        freqs = {i: basis.freq_hz[i] for i in reps}
        matches = [i for i, f in freqs.items() if abs(f - args.mode_freq) <= 0.5 * args.sigma]
        if not matches:
            available = ", ".join(_f(f) for f in sorted(set(freqs.values())))
            raise SchemaError(
                "--mode-freq",
                f"no mode within {_f(0.5 * args.sigma)} Hz of {_f(args.mode_freq)}; "
                f"available: {available}",
            )
        target = min(matches, key=lambda i: abs(freqs[i] - args.mode_freq))
    f_target = float(basis.freq_hz[target])

    plin = linear_pf(basis)
    lin_col = np.abs(plin[:, target])
    lin_norm = lin_col / lin_col.max()

    labels = model.labels
    header = (
        ["time"]
        + [f"tnpf_abs_{s}" for s in labels]
        + [f"res_abs_{s}" for s in labels]
        + [f"tnpf_norm_{s}" for s in labels]
        + [f"linpf_norm_{s}" for s in labels]
    )
    out = [",".join(header)]
    for t in _parse_range(args.times, "--times"):
        lin_vals = np.empty(model.n, dtype=complex)
        res_vals = np.empty(model.n, dtype=complex)
        for k in range(model.n):
            spec = pf_spectrum(basis, nf, config, k, float(t))
            per_mode = tnpf_terms(basis, nf, config, k, float(t))[0]
            lin_vals[k] = per_mode[target]
            res_vals[k] = sum(
                np.exp(-((f_target - pt.freq_hz) ** 2) / (2.0 * args.sigma**2)) * pt.amplitude
                for pt in spec.resonance_points()
            )
        mags = np.abs(lin_vals)
        norm = mags / mags.max() if mags.max() > 0 else mags
        row = (
            [_f(t)]
            + [_f(v) for v in mags]
            + [_f(abs(v)) for v in res_vals]
            + [_f(v) for v in norm]
            + [_f(v) for v in lin_norm]
        )
        out.append(",".join(row))
    for note in notes:
        out.append(f"# warning: {note}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def cmd_simulate(args) -> int:
    model = load_model(args.model_file)
    x0 = _parse_x0(args.x0, model)
    if args.dt <= 0 or args.t_end <= 0:
        raise SchemaError("--dt/--t-end", "must be positive")
    notes = []
    with _staged("simkit", notes):
        traj = integrate(model, x0, args.dt, args.t_end)
        basis = decompose(model.A)
        C = second_order_coeffs(model, basis)
        nf = h2_coefficients(C, basis.lambdas, args.denom_tol)
        max_gap, _ = reconstruction_error(model, basis, nf, x0, args.t_end, dt=args.dt)

    out = ["time," + ",".join(model.labels)]
    for j, t in enumerate(traj.times):
        out.append(_f(t) + "," + ",".join(_f(v) for v in traj.states[:, j]))
    out.append(f"# max_gap = {_f(max_gap)}")
    for note in notes:
        out.append(f"# warning: {note}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="nfpf",
        description="Participation-factor analysis of small nonlinear dynamical systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("model_file", help="path to a quadratic or swing model file (JSON)")
        p.add_argument("--alpha", default="1", help="excitation scale: scalar or comma list")
        p.add_argument("--denom-tol", type=float, default=1e-6, help="resonance denominator tolerance")

    p = sub.add_parser("analyze", help="mode table, PF tables and resonance ledger")
    common(p)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectrum", help="participation spectrum points and convolved curve")
    common(p)
    p.add_argument("--state", required=True, help="state: 1-based index or label")
    p.add_argument("--time", type=float, default=0.0, help="evaluation time (s)")
    p.add_argument("--sigma", type=float, default=0.1, help="Gaussian kernel width (Hz)")
    p.add_argument("--grid", default="0:3:301", help="frequency grid fmin:fmax:count")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("tnpf", help="time-variant PF trajectories at one mode")
    common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--mode-freq", type=float, help="target mode frequency (Hz)")
    group.add_argument("--mode-index", type=int, help="target mode: 1-based index")
    p.add_argument("--sigma", type=float, default=0.1, help="Gaussian kernel width (Hz)")
    p.add_argument("--times", default="0:20:81", help="time grid t0:t1:count")
    p.set_defaults(func=cmd_tnpf)

    p = sub.add_parser("simulate", help="RK4 trajectory plus reconstruction gap")
    common(p)
    p.add_argument("--x0", required=True, help='initial deviation: "ek:<index>:<scale>" or comma vector')
    p.add_argument("--dt", type=float, default=0.01, help="integration step (s)")
    p.add_argument("--t-end", type=float, default=10.0, help="horizon (s)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NfpfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
