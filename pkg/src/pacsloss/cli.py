"""Command-line entry point: ``pacsloss <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 convergence failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import io as _io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any

from . import __version__
from ._files import open_for_write
from .channel import evolve_to
from .entanglement import ep_at, ep_sweep
from .errors import NoThresholdInRange, PacsLossError
from .fock import PacsSpec, build_pacs, density_from_state
from .io import EP_COLUMNS, PNW_COLUMNS, ep_row, pnw_row, write_csv, write_json
from .negativity import (INVISIBLE, GridPolicy, NotMonotone, THRESHOLD_EPS, pnw_at,
                         pnw_sweep, pnw_vs_alpha, vanishing_threshold)
from .wigner import (DEFAULT_HALF_WIDTH, PhaseSpaceGrid, closed_form_field, propagate_wigner,
                     wigner_cut, wigner_from_density, write_field_csv, write_field_gnuplot)

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("wigner", "cut", "pnw", "ep", "threshold", "figure")
FORMATS = ("csv", "json", "gnuplot-matrix")
FIGURES = ("1", "2", "3", "4", "5a", "5b", "5c", "5d")

FIG_ALPHAS = (0.1, 0.5, 1.0, 1.5)
FIG_CUT_TIMES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2)
FIG_SURFACE_TIMES = (0.0, 0.4, 0.8)
FIG_SWEEP_TIMES = tuple(round(0.05 * i, 10) for i in range(25))
FIG_ALPHA_AXIS = tuple(round(0.1 * i, 10) for i in range(21))
FIG_SURFACE_POINTS = 129


class ConvergenceFailure(PacsLossError):
    pass


def parse_complex(text) -> complex:
    if isinstance(text, (int, float, complex)):
        return complex(text)
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValueError(f"cannot parse complex amplitude {text!r}") from None


@dataclass
class RunConfig:
    command: str
    alpha: complex = 0.0
    m: int = 1
    gamma_t: float = 0.0
    gamma_t_range: tuple[float, float, float] | None = None
    dim: int | None = None
    grid_n: int | None = None
    half_width: float = DEFAULT_HALF_WIDTH
    p: float = 0.0
    epsilon: float = THRESHOLD_EPS
    route: str = "density"
    output: str | None = None
    format: str = "csv"
    figure: str | None = None
    outdir: str = "."

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.format == "gnuplot-matrix" and self.command != "wigner":
            raise ValueError("gnuplot-matrix output is only available for the wigner command")
        if self.m < 0:
            raise ValueError(f"m must be nonnegative, got {self.m}")
        if not math.isfinite(self.gamma_t) or self.gamma_t < 0:
            raise ValueError(f"gamma_t must be finite and nonnegative, got {self.gamma_t}")
        if self.gamma_t_range is not None:
            start, stop, step = self.gamma_t_range
            if start < 0 or stop < start or step <= 0:
                raise ValueError(f"bad gamma_t range {self.gamma_t_range}; need 0 <= start <= stop, step > 0")
        if self.grid_n is not None and self.grid_n < 64 and self.command in ("pnw", "threshold"):
            raise ValueError(f"quadrature grids need at least 64 points per axis, got {self.grid_n}")
        if self.half_width < DEFAULT_HALF_WIDTH:
            raise ValueError(f"half width must be at least {DEFAULT_HALF_WIDTH}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.route not in ("density", "propagated"):
            raise ValueError(f"route must be 'density' or 'propagated', got {self.route!r}")
        if self.command == "figure" and self.figure not in FIGURES:
            raise ValueError(f"figure id must be one of {FIGURES}, got {self.figure!r}")
        if self.command != "figure":
            self.spec()

    def spec(self) -> PacsSpec:
        return PacsSpec(self.alpha, self.m, self.dim)

    def gamma_ts(self) -> list[float]:
        if self.gamma_t_range is None:
            return [self.gamma_t]
        start, stop, step = self.gamma_t_range
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]

    def policy(self) -> GridPolicy:
        return GridPolicy(n=self.grid_n or GridPolicy.n, half_width=self.half_width, route=self.route)

    def provenance(self) -> dict:
        d = dataclasses.asdict(self)
        d["alpha"] = [self.alpha.real, self.alpha.imag]
        if self.command != "figure":
            d["dim"] = self.spec().dim
        d["library_version"] = __version__
        d["tolerances"] = {"tail_mass": 1e-10, "pnw_convergence": 1e-4, "invisible_pnw": INVISIBLE,
                           "threshold_epsilon": self.epsilon}
        return d


def load_config_file(path) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config file must hold a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return raw


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if args.config:
        values.update(load_config_file(args.config))
    for name in ("alpha", "m", "gamma_t", "gamma_t_range", "dim", "grid_n", "half_width", "p",
                 "epsilon", "route", "output", "format", "figure", "outdir"):
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    values["command"] = args.command
    if "alpha" in values:
        values["alpha"] = parse_complex(values["alpha"])
    if values.get("gamma_t_range") is not None:
        values["gamma_t_range"] = tuple(float(x) for x in values["gamma_t_range"])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# -- single-shot commands -----------------------------------------------------

def _wigner_field(cfg: RunConfig, n_default: int = 257):
    spec = cfg.spec()
    n = cfg.grid_n or n_default
    grid = PhaseSpaceGrid.for_state(spec.alpha, cfg.gamma_t, cfg.half_width, n)
    if cfg.route == "propagated":
        src = closed_form_field(spec.alpha, spec.m, PhaseSpaceGrid.for_state(spec.alpha, 0.0, cfg.half_width, n))
        return propagate_wigner(src, cfg.gamma_t, grid)
    rho = evolve_to(density_from_state(build_pacs(spec)), cfg.gamma_t)
    return wigner_from_density(rho, grid)


def run_wigner(cfg: RunConfig, out) -> None:
    f = _wigner_field(cfg).check_normalized()
    if cfg.format == "csv":
        write_field_csv(f, out)
    elif cfg.format == "gnuplot-matrix":
        write_field_gnuplot(f, out)
    else:
        doc = {"q": f.grid.q.tolist(), "p": f.grid.p.tolist(), "W": f.values.tolist(),
               "source": f.source, "metadata": cfg.provenance()}
        with open_for_write(out) as fh:
            json.dump(doc, fh)
            fh.write("\n")


def run_cut(cfg: RunConfig, out) -> None:
    cut = wigner_cut(_wigner_field(cfg), cfg.p)
    rows = [[float(q), float(w)] for q, w in cut]
    _emit(cfg, out, ("q", "W"), rows)


def run_pnw(cfg: RunConfig, out) -> None:
    spec, policy = cfg.spec(), cfg.policy()
    if cfg.gamma_t_range is None:
        results = [(cfg.gamma_t, pnw_at(spec, cfg.gamma_t, policy))]
    else:
        results = pnw_sweep(spec, cfg.gamma_ts(), policy)
    _emit(cfg, out, PNW_COLUMNS, [pnw_row(t, r) for t, r in results])
    bad = [t for t, r in results if not r.converged]
    if bad:
        raise ConvergenceFailure(f"P_NW not converged at gamma_t={bad}; increase --grid-n")


def run_ep(cfg: RunConfig, out) -> None:
    spec = cfg.spec()
    if cfg.gamma_t_range is None:
        results = [(cfg.gamma_t, ep_at(spec, cfg.gamma_t))]
    else:
        results = ep_sweep(spec, cfg.gamma_ts())
    _emit(cfg, out, EP_COLUMNS, [ep_row(t, r) for t, r in results])


def run_threshold(cfg: RunConfig, out) -> None:
    t = vanishing_threshold(cfg.spec(), cfg.epsilon, policy=cfg.policy())
    _emit(cfg, out, ("alpha_re", "alpha_im", "m", "epsilon", "threshold_gamma_t"),
          [[cfg.alpha.real, cfg.alpha.imag, cfg.m, cfg.epsilon, t]])


# -- figures ------------------------------------------------------------------

def _cut_rows(alpha: float, m: int, n: int) -> list[list]:
    rows = []
    for t in FIG_CUT_TIMES:
        spec = PacsSpec(alpha, m)
        rho = evolve_to(density_from_state(build_pacs(spec)), t)
        grid = PhaseSpaceGrid.for_state(alpha, t, DEFAULT_HALF_WIDTH, n)
        for q, w in wigner_cut(wigner_from_density(rho, grid), 0.0):
            rows.append([t, float(q), float(w)])
    return rows


def figure_files(fig: str, outdir: str, grid_n: int | None = None) -> dict[str, dict]:
    """Write the data files of one figure; returns manifest entries by file name."""
    entries: dict[str, dict] = {}
    policy = GridPolicy(n=grid_n) if grid_n else GridPolicy()

    def save(name, columns, rows, params):
        with open(os.path.join(outdir, name), "w", newline="") as fh:
            write_csv(fh, columns, rows)
        entries[name] = {"figure": fig, "columns": list(columns), "parameters": params}

    if fig in ("1", "3"):
        m = 1 if fig == "1" else 2
        n = grid_n or FIG_SURFACE_POINTS
        for t in FIG_SURFACE_TIMES:
            spec = PacsSpec(0.5, m)
            rho = evolve_to(density_from_state(build_pacs(spec)), t)
            grid = PhaseSpaceGrid.for_state(0.5, t, DEFAULT_HALF_WIDTH, n)
            name = f"fig{fig}_wigner_m{m}_alpha0.5_gt{t:.2f}.dat"
            write_field_gnuplot(wigner_from_density(rho, grid), os.path.join(outdir, name))
            entries[name] = {"figure": fig, "format": "gnuplot-matrix",
                             "parameters": {"alpha": 0.5, "m": m, "gamma_t": t, "dim": spec.dim,
                                            "grid": dataclasses.asdict(grid)}}
    elif fig in ("2", "4"):
        m = 1 if fig == "2" else 2
        n = grid_n or 257
        for a in FIG_ALPHAS:
            save(f"fig{fig}_cut_m{m}_alpha{a}.csv", ("gamma_t", "q", "W"), _cut_rows(a, m, n),
                 {"alpha": a, "m": m, "p": 0.0, "gamma_t": list(FIG_CUT_TIMES), "grid_n": n,
                  "half_width": DEFAULT_HALF_WIDTH, "dim": PacsSpec(a, m).dim})
    elif fig in ("5a", "5c"):
        m = 1 if fig == "5a" else 2
        rows = []
        for a in FIG_ALPHAS:
            rows += [[a] + pnw_row(t, r) for t, r in pnw_sweep(PacsSpec(a, m), FIG_SWEEP_TIMES, policy)]
        save(f"fig{fig}_pnw_m{m}.csv", ("alpha",) + PNW_COLUMNS, rows,
             {"alphas": list(FIG_ALPHAS), "m": m, "gamma_t": list(FIG_SWEEP_TIMES),
              "grid_n": policy.n, "half_width": policy.half_width})
    elif fig == "5b":
        rows = []
        for a in FIG_ALPHAS:
            rows += [[a] + ep_row(t, r) for t, r in ep_sweep(PacsSpec(a, 1), FIG_SWEEP_TIMES)]
        save("fig5b_ep_m1.csv", ("alpha",) + EP_COLUMNS, rows,
             {"alphas": list(FIG_ALPHAS), "m": 1, "gamma_t": list(FIG_SWEEP_TIMES),
              "dims": {str(a): PacsSpec(a, 1).dim for a in FIG_ALPHAS}})
    elif fig == "5d":
        one = pnw_vs_alpha(1, FIG_ALPHA_AXIS, policy)
        two = pnw_vs_alpha(2, FIG_ALPHA_AXIS, policy)
        rows = [[a, r1.p_nw, r2.p_nw] for (a, r1), (_, r2) in zip(one, two)]
        save("fig5d_pnw_vs_alpha.csv", ("abs_alpha", "p_nw_m1", "p_nw_m2"), rows,
             {"abs_alpha": list(FIG_ALPHA_AXIS), "gamma_t": 0.0, "grid_n": policy.n,
              "half_width": policy.half_width})
    return entries


def run_figure(cfg: RunConfig) -> None:
    os.makedirs(cfg.outdir, exist_ok=True)
    entries = figure_files(cfg.figure, cfg.outdir, cfg.grid_n)
    path = os.path.join(cfg.outdir, "manifest.json")
    manifest = {"library_version": __version__, "files": {}}
    if os.path.exists(path):
        with open(path) as fh:
            manifest = json.load(fh)
    manifest["library_version"] = __version__
    manifest["files"].update(entries)
    manifest["files"] = dict(sorted(manifest["files"].items()))
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


# -- plumbing -----------------------------------------------------------------

def _emit(cfg: RunConfig, out, columns, rows) -> None:
    with open_for_write(out) as fh:
        if cfg.format == "json":
            write_json(fh, columns, rows, cfg.provenance())
        else:
            write_csv(fh, columns, rows)


def _write_manifest(cfg: RunConfig) -> None:
    with open(cfg.output + ".manifest.json", "w") as fh:
        json.dump({"file": os.path.basename(cfg.output), **cfg.provenance()}, fh, indent=2)
        fh.write("\n")


RUNNERS = {"wigner": run_wigner, "cut": run_cut, "pnw": run_pnw, "ep": run_ep,
           "threshold": run_threshold}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacsloss",
        description="Nonclassicality of photon-added coherent states under photon loss.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
        p.add_argument("--alpha", help="coherent amplitude, e.g. 0.5 or 0.3+0.2j")
        p.add_argument("--m", type=int, help="number of added photons")
        p.add_argument("--dim", type=int, help="Fock truncation (default: automatic)")
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=FORMATS)
        if grid:
            p.add_argument("--grid-n", dest="grid_n", type=int, help="grid points per axis")
            p.add_argument("--half-width", dest="half_width", type=float,
                           help="grid half width in phase-space units (>= 5)")
            p.add_argument("--route", choices=("density", "propagated"),
                           help="Kraus evolution + parity formula, or phase-space propagation")

    def times(p):
        p.add_argument("--gamma-t", dest="gamma_t", type=float, help="decay time gamma*t")
        p.add_argument("--gamma-t-range", dest="gamma_t_range", type=float, nargs=3,
                       metavar=("START", "STOP", "STEP"), help="inclusive sweep of decay times")

    p = sub.add_parser("wigner", help="Wigner function on a grid")
    common(p)
    p.add_argument("--gamma-t", dest="gamma_t", type=float)
    p = sub.add_parser("cut", help="W(q, p) at fixed p")
    common(p)
    p.add_argument("--gamma-t", dest="gamma_t", type=float)
    p.add_argument("--p", type=float, help="momentum of the cut (default 0)")
    p = sub.add_parser("pnw", help="total negative Wigner probability")
    common(p)
    times(p)
    p = sub.add_parser("ep", help="entanglement potential (log-negativity)")
    common(p, grid=False)
    times(p)
    p = sub.add_parser("threshold", help="decay time at which P_NW vanishes")
    common(p)
    p.add_argument("--epsilon", type=float, help=f"vanishing cutoff (default {THRESHOLD_EPS})")
    p = sub.add_parser("figure", help="write the data behind one figure panel")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--outdir", help="directory for data files and manifest.json")
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--config", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        if cfg.command == "figure":
            run_figure(cfg)
        else:
            if cfg.output is None:
                out = _io.StringIO()
                try:
                    RUNNERS[cfg.command](cfg, out)
                finally:
                    sys.stdout.write(out.getvalue())
            else:
                try:
                    RUNNERS[cfg.command](cfg, cfg.output)
                finally:
                    if os.path.exists(cfg.output):
                        _write_manifest(cfg)
    except (ConvergenceFailure, NoThresholdInRange, NotMonotone) as exc:
        print(f"error: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, PacsLossError) as exc:
        print(f"error: precondition failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
