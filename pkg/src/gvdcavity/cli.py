"""Command-line front end.

Every artifact starts with a header holding the package version, the
subcommand and the fully resolved config, so identical configs give
byte-identical files. CSV headers are ``#`` comment lines; JSON artifacts
carry the same information under a ``provenance`` key.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, coupling, series, validity
from .cavity import (
    cavity_mode_amplitudes,
    input_mode_amplitudes,
    LEVELS,
    pump_from_modes,
    steady_state,
)
from .config import RunConfig, emit_config, load_config, reference_config, with_overrides
from .dispersion import dispersion_report
from .errors import ConfigError, NumericalError
from .hg_basis import gauss_hermite_grid, project
from .perturbation import PTParams, equivalence_report, pt_iterate
from .roundtrip import PhaseModel, iterate_to_steady

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class Emitter:
    """Collects artifacts and writes them to a directory or stdout."""

    def __init__(self, config: RunConfig, command: str):
        self.config = config
        self.command = command
        self.directory = config.output.directory
        self.format = config.output.format
        self.provenance = {
            "artifact": "gvdcavity",
            "version": __version__,
            "command": command,
            "config": config.to_dict(),
        }

    def _write(self, name: str, text: str):
        if self.directory is None:
            sys.stdout.write(text)
            return
        out = Path(self.directory)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)

    def table(self, stem: str, columns, rows):
        rows = [tuple(r) for r in rows]
        if self.format == "json":
            payload = {"provenance": self.provenance, "columns": list(columns),
                       "rows": [[_plain(v) for v in r] for r in rows]}
            self._write(f"{stem}.json", _dump(payload))
            return
        buf = io.StringIO()
        buf.write(f"# gvdcavity {__version__}\n")
        buf.write(f"# command: {self.command}\n")
        buf.write(f"# config: {json.dumps(self.provenance['config'], sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(v) for v in r])
        self._write(f"{stem}.csv", buf.getvalue())

    def document(self, stem: str, payload: dict):
        self._write(f"{stem}.json", _dump({"provenance": self.provenance, **payload}))


def _plain(value):
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def _dump(payload) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"


def _amplitude_rows(coeffs):
    return [(n, c.real, c.imag, abs(c)) for n, c in enumerate(np.asarray(coeffs, dtype=complex))]


def _spectrum_rows(field):
    return [(x, v.real, v.imag) for x, v in zip(field.grid.nodes, field.values)]


# --- shared setup --------------------------------------------------------


class _Problem:
    """Objects every solver subcommand needs, built once from the config."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.params = config.cavity_params()
        self.n_max = config.basis.n_max
        self.grid = gauss_hermite_grid(config.q)
        coeffs = np.zeros(self.n_max, dtype=complex)
        modes = config.input_modes()
        coeffs[: len(modes)] = modes
        self.pump = pump_from_modes(coeffs, self.grid)
        self.alpha_in = input_mode_amplitudes(self.params, self.pump, self.n_max)
        self.n_gamma = series.decay_numbers(config.decay_profile())
        self.n_d = self.params.numbers().n_d
        self.o = coupling.build(self.n_max)

    def pt_params(self) -> PTParams:
        return PTParams.from_cavity(self.params, self.n_gamma, self.o, self.alpha_in)

    def phase_model(self) -> PhaseModel:
        rt = self.config.roundtrip
        if rt.phase == "full_sellmeier":
            return PhaseModel("full_sellmeier", fit=self.config.sellmeier(),
                              lambda0=self.config.material.lambda_um)
        return PhaseModel("gvd_only")


# --- subcommands ---------------------------------------------------------


def cmd_dispersion(config: RunConfig, args, out: Emitter) -> int:
    lam = args.lambda_um if args.lambda_um is not None else config.material.lambda_um
    try:
        report = dispersion_report(config.sellmeier(), lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out.document("dispersion", report)
    return EXIT_OK


def cmd_coupling(config: RunConfig, args, out: Emitter) -> int:
    o = coupling.build(config.basis.n_max)
    columns = ["n"] + [f"o_{m}" for m in range(o.shape[1])]
    out.table("coupling", columns, [(n, *row) for n, row in enumerate(o)])
    return EXIT_OK


def cmd_exact(config: RunConfig, args, out: Emitter) -> int:
    prob = _Problem(config)
    field = steady_state(prob.params, prob.pump, args.level, args.terms)
    out.table("spectrum", ["omega_tilde", "re", "im"], _spectrum_rows(field))
    out.table("amplitudes", ["n", "re", "im", "abs"],
              _amplitude_rows(project(field, prob.n_max, phased=False)))
    return EXIT_OK


def cmd_series(config: RunConfig, args, out: Emitter) -> int:
    prob = _Problem(config)
    total, diag = series.series_solve(prob.o, prob.n_gamma, prob.n_d, prob.alpha_in,
                                      m_max=config.solver.m_max, tol=config.solver.tol)
    out.table("amplitudes", ["n", "re", "im", "abs"], _amplitude_rows(total))
    report = diag.to_dict()
    report["n_lim"] = series.n_lim(float(prob.n_gamma[0]), prob.n_d) \
        if config.profile.kind == "constant" else series.first_violating_mode(prob.n_gamma, prob.n_d)
    out.document("diagnostics", report)
    if not diag.converged:
        print(f"series did not converge: {diag.terms_used} terms, last term {diag.last_term_norm:.3e}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_pt(config: RunConfig, args, out: Emitter) -> int:
    prob = _Problem(config)
    pt = prob.pt_params()
    order = config.solver.order
    out.table("equivalence", ["M", "max_abs_diff"],
              equivalence_report(pt.drive, pt.gamma, pt.coupling, order))
    out.table("amplitudes", ["n", "re", "im", "abs"],
              _amplitude_rows(pt_iterate(pt.drive, pt.gamma, pt.coupling, order)))
    return EXIT_OK


def cmd_roundtrip(config: RunConfig, args, out: Emitter) -> int:
    prob = _Problem(config)
    rt = config.roundtrip
    result = iterate_to_steady(prob.params, prob.phase_model(), prob.pump, rt.tol, rt.max_iter)
    out.table("trace", ["iteration", "residual"], result.trace)
    out.table("spectrum", ["omega_tilde", "re", "im"], _spectrum_rows(result.field))
    return EXIT_OK


def cmd_validity_map(config: RunConfig, args, out: Emitter) -> int:
    spec = config.map_spec()
    values = validity.grid(spec)
    out.table("grid", ["x", "y", "ratio"], values.rows())
    rows = []
    for level, lines in validity.contours(values, spec.levels).items():
        for seg, line in enumerate(lines):
            rows.extend((level, seg, x, y) for x, y in line)
    out.table("contours", ["level", "segment_id", "x", "y"], rows)
    return EXIT_OK


def _relative(a, b) -> float:
    ref = np.linalg.norm(a)
    return float(np.linalg.norm(a - b) / ref) if ref > 0 else float(np.linalg.norm(a - b))


def compare_solvers(config: RunConfig) -> list:
    """Pairwise relative L2 residuals between the mode-amplitude solutions.

    Returns ``[(solver_a, solver_b, residual)]`` measured relative to
    ``solver_a``. The series and perturbative solutions are truncated at
    ``solver.order``; the round-trip oracle uses the GVD-only phase.
    """
    prob = _Problem(config)
    order = config.solver.order
    pt = prob.pt_params()
    rt = config.roundtrip
    steady = iterate_to_steady(prob.params, PhaseModel("gvd_only"), prob.pump, rt.tol, rt.max_iter)
    solutions = {
        "exact_linearized": cavity_mode_amplitudes(prob.params, prob.pump, prob.n_max, "linearized"),
        "series": series.series_truncation(prob.o, prob.n_gamma, prob.n_d, prob.alpha_in, order),
        "pt": pt_iterate(pt.drive, pt.gamma, pt.coupling, order),
        "roundtrip": project(steady.field, prob.n_max, phased=False),
    }
    names = list(solutions)
    return [(a, b, _relative(solutions[a], solutions[b]))
            for i, a in enumerate(names) for b in names[i + 1:]]


def cmd_compare(config: RunConfig, args, out: Emitter) -> int:
    rows = compare_solvers(config)
    threshold = args.threshold if args.threshold is not None else config.solver.compare_threshold
    table = [(a, b, r, r <= threshold) for a, b, r in rows]
    out.table("compare", ["solver_a", "solver_b", "residual", "within_threshold"], table)
    failed = [(a, b, r) for a, b, r, ok in table if not ok]
    for a, b, r in failed:
        print(f"{a} vs {b}: residual {r:.3e} exceeds {threshold:g}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


COMMANDS = {
    "dispersion": cmd_dispersion,
    "coupling": cmd_coupling,
    "exact": cmd_exact,
    "series": cmd_series,
    "pt": cmd_pt,
    "roundtrip": cmd_roundtrip,
    "validity-map": cmd_validity_map,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run config (default: packaged reference)")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="table format")
    common.add_argument("--n-max", type=int)
    common.add_argument("--m-max", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--sqrt-r", type=float)
    common.add_argument("--k2", type=float, help="GVD in fs^2/mm")
    common.add_argument("--tau-s", type=float, help="pulse duration scale in fs")
    common.add_argument("--length", type=float, help="crystal length in mm")

    parser = _Parser(prog="gvdcavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "dispersion":
            p.add_argument("--lambda-um", type=float, help="wavelength (default: config)")
        elif name == "exact":
            p.add_argument("--level", choices=LEVELS, default="linearized")
            p.add_argument("--terms", type=int, default=64, help="Maclaurin terms")
        elif name in ("pt", "compare"):
            p.add_argument("--order", type=int, help="truncation order (default: solver.order)")
        if name == "compare":
            p.add_argument("--threshold", type=float, help="max pairwise residual")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config(args.config) if args.config else reference_config()
        config = with_overrides(
            config,
            n_max=args.n_max, m_max=args.m_max, tol=args.tol, sqrt_r=args.sqrt_r,
            k2=args.k2, tau_s=args.tau_s, length=args.length,
            order=getattr(args, "order", None), directory=args.out, format=args.format,
        )
        return COMMANDS[args.command](config, args, Emitter(config, args.command))
    except ConfigError as exc:
        print(f"gvdcavity: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"gvdcavity: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
