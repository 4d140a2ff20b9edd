"""Batch front-end: run geometry -> forms -> measure -> spectral pipelines.

Two subcommands:

``hanoispec run``    executes one experiment and writes all artifacts
                     (mesh/form/mass dumps, spectra, counting samples, fit
                     reports) into an output directory.
``hanoispec sweep``  executes a list of experiment configs, isolating
                     failures per run, and writes an aggregate table.

Configs come from a JSON file, with command-line flags overriding single
fields.  Exit codes: 0 success, 2 invalid parameters, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from . import forms, geometry, measure, spectral

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

BC_CHOICES = ("both", spectral.NEUMANN, spectral.DIRICHLET)


@dataclass
class ExperimentConfig:
    alpha: float
    level: int
    beta: float | None = None       # None: half the admissible bound
    subdiv: int = 1
    bc: str = "both"
    num_eigs: int | None = None     # None: the full problem dimension
    window_lo: float | None = None  # explicit fit-window bounds in x
    window_hi: float | None = None
    drop_low: int = 20
    drop_high_frac: float = 0.2
    solver: str = "auto"
    out: str = "out"
    emit_plot_data: bool = False


def _config_from_dict(data: dict) -> ExperimentConfig:
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    if "alpha" not in data or "level" not in data:
        raise ValueError("config requires at least 'alpha' and 'level'")
    return ExperimentConfig(**data)


def _resolve(config: ExperimentConfig) -> ExperimentConfig:
    """Validate a config and fill in derived defaults.

    Raises ValueError with a message naming the violated bound.
    """
    geometry.check_alpha(config.alpha)
    if config.level < 0:
        raise ValueError(f"level must be >= 0; got {config.level}")
    if config.subdiv < 1:
        raise ValueError(f"subdiv must be >= 1; got {config.subdiv}")
    if config.bc not in BC_CHOICES:
        raise ValueError(f"bc must be one of {BC_CHOICES}; got {config.bc!r}")

    beta = config.beta
    if beta is None:
        beta = measure.default_beta(config.alpha)
    measure.validate_beta(config.alpha, beta)

    dim = geometry.node_count(config.level, config.subdiv)
    if config.bc in ("both", spectral.DIRICHLET):
        dim_d = dim - 3
        if dim_d < 1:
            raise ValueError(
                f"Dirichlet problem is empty at level {config.level}: "
                f"dimension {dim} - 3 boundary nodes"
            )
        dim = dim_d
    num_eigs = config.num_eigs
    if num_eigs is not None and not (1 <= num_eigs <= dim):
        raise ValueError(
            f"num_eigs must lie in [1, {dim}] for this mesh and bc; got {num_eigs}"
        )
    return replace(config, beta=beta)


def run_experiment(config: ExperimentConfig) -> dict:
    """Run one resolved config; returns a result summary dict."""
    config = _resolve(config)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)

    with open(outdir / "config.json", "w") as fh:
        json.dump(asdict(config), fh, indent=1)
        fh.write("\n")

    mesh = geometry.build_mesh(config.alpha, config.level, config.subdiv)
    factors = forms.renorm_factors(config.alpha, max(config.level, 1))
    form = forms.assemble_energy(mesh, factors)
    mass = measure.assemble_mass(mesh, config.beta)

    geometry.dump_mesh(mesh, outdir / "mesh.json")
    forms.dump_form(form, outdir / "form.csv", outdir / "form.json")
    measure.dump_mass(mass, outdir / "mass.csv", outdir / "mass.json")

    bcs = [config.bc] if config.bc != "both" else [spectral.NEUMANN, spectral.DIRICHLET]
    spectra: dict[str, spectral.Spectrum] = {}
    fits: dict[str, spectral.FitReport | None] = {}
    for bc in bcs:
        problem = spectral.EigenProblem(form, mass, bc)
        count = config.num_eigs or problem.dimension
        spec = spectral.solve_spectrum(problem, count, method=config.solver)
        spectra[bc] = spec
        spectral.dump_spectrum(spec, outdir / f"spectrum_{bc}.csv")
        spectral.dump_counting_samples(spec, outdir / f"counting_{bc}.csv")
        if config.emit_plot_data:
            spectral.dump_plot_data(spec, outdir / f"plot_{bc}.csv")
        try:
            fits[bc] = spectral.spectral_dim_fit(
                spec,
                drop_low=config.drop_low,
                drop_high_frac=config.drop_high_frac,
                x_lo=config.window_lo,
                x_hi=config.window_hi,
            )
        except ValueError as exc:
            fits[bc] = None
            with open(outdir / f"fit_{bc}.json", "w") as fh:
                json.dump({"error": str(exc)}, fh, indent=1)
                fh.write("\n")

    summary: dict = {
        "out": str(outdir),
        "alpha": config.alpha,
        "beta": config.beta,
        "level": config.level,
        "subdiv": config.subdiv,
        "bc": config.bc,
    }
    if len(bcs) == 2:
        report = spectral.weyl_bracket_check(
            spectra[spectral.NEUMANN],
            spectra[spectral.DIRICHLET],
            drop_low=config.drop_low,
            drop_high_frac=config.drop_high_frac,
        )
        with open(outdir / "weyl_report.json", "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=1)
            fh.write("\n")
        if fits[spectral.NEUMANN] is not None:
            fits[spectral.NEUMANN].max_gap_nn_nd = report.max_gap
        summary["weyl_ok"] = report.ok
        summary["max_gap_NN_ND"] = report.max_gap

    for bc, fit in fits.items():
        if fit is None:
            continue
        with open(outdir / f"fit_{bc}.json", "w") as fh:
            json.dump(fit.to_json_dict(), fh, indent=1)
            fh.write("\n")
        if bc == spectral.NEUMANN or len(bcs) == 1:
            summary["d_s"] = fit.d_s
            summary["c1"] = fit.c1
            summary["c2"] = fit.c2
    return summary


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, help="contraction parameter in (0, 1/3)")
    parser.add_argument("--beta", type=float, help="measure parameter (default: half the bound)")
    parser.add_argument("--level", type=int, help="approximation level n >= 0")
    parser.add_argument("--subdiv", type=int, help="sub-edges per segment (M >= 1)")
    parser.add_argument("--bc", choices=BC_CHOICES, help="boundary condition(s) to solve")
    parser.add_argument("--num-eigs", type=int, dest="num_eigs",
                        help="eigenvalues to compute (default: all)")
    parser.add_argument("--window-lo", type=float, dest="window_lo",
                        help="explicit lower fit-window bound in x")
    parser.add_argument("--window-hi", type=float, dest="window_hi",
                        help="explicit upper fit-window bound in x")
    parser.add_argument("--drop-low", type=int, dest="drop_low",
                        help="low modes dropped by the default fit window")
    parser.add_argument("--drop-high-frac", type=float, dest="drop_high_frac",
                        help="top fraction of modes dropped by the default fit window")
    parser.add_argument("--solver", choices=("auto", "dense", "sparse"),
                        help="eigenvalue solver selection")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--emit-plot-data", action="store_true", default=None,
                        dest="emit_plot_data",
                        help="also write (log x, log N) pairs per spectrum")


def _merge_overrides(base: dict, args: argparse.Namespace) -> dict:
    merged = dict(base)
    for name in ExperimentConfig.__dataclass_fields__:
        val = getattr(args, name, None)
        if val is not None:
            merged[name] = val
    return merged


def _cmd_run(args: argparse.Namespace) -> int:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    try:
        config = _config_from_dict(_merge_overrides(base, args))
        config = _resolve(config)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        summary = run_experiment(config)
    except spectral.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def _sweep_worker(payload: tuple[int, dict]) -> tuple[int, dict]:
    idx, cfg_dict = payload
    row = {
        "run": idx,
        "alpha": cfg_dict.get("alpha"),
        "beta": cfg_dict.get("beta"),
        "level": cfg_dict.get("level"),
        "subdiv": cfg_dict.get("subdiv", 1),
    }
    try:
        config = _config_from_dict(cfg_dict)
        summary = run_experiment(config)
    except (ValueError, TypeError) as exc:
        row.update(status="invalid", error=str(exc))
        return EXIT_INVALID, row
    except spectral.SolverError as exc:
        row.update(status="solver-failure", error=str(exc))
        return EXIT_SOLVER, row
    row.update(
        status="ok",
        beta=summary.get("beta", cfg_dict.get("beta")),
        d_s=summary.get("d_s"),
        c1=summary.get("c1"),
        c2=summary.get("c2"),
    )
    return EXIT_OK, row


def _cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.config) as fh:
        data = json.load(fh)
    runs = data["runs"] if isinstance(data, dict) else data
    if not isinstance(runs, list) or not runs:
        print("error: sweep config must hold a nonempty list of runs", file=sys.stderr)
        return EXIT_INVALID

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    payloads = []
    for i, cfg in enumerate(runs):
        cfg = dict(cfg)
        cfg["out"] = str(outdir / f"run_{i:03d}")
        payloads.append((i, cfg))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_worker, payloads))
    else:
        results = [_sweep_worker(p) for p in payloads]

    rows = [row for _, row in results]
    with open(outdir / "sweep_report.json", "w") as fh:
        json.dump(rows, fh, indent=1)
        fh.write("\n")
    cols = ("run", "alpha", "beta", "level", "subdiv", "d_s", "c1", "c2", "status")

    def _cell(v) -> str:
        if v is None:
            return ""
        return repr(v) if isinstance(v, float) else str(v)

    with open(outdir / "sweep_report.csv", "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row.get(c)) for c in cols) + "\n")
    for row in rows:
        print(f"run {row['run']:3d}: {row['status']}"
              + (f" d_s={row['d_s']:.4f}" if row.get("d_s") is not None else "")
              + (f" ({row['error']})" if row.get("error") else ""))

    codes = [code for code, _ in results]
    if all(c == EXIT_OK for c in codes):
        return EXIT_OK
    if any(c == EXIT_INVALID for c in codes):
        return EXIT_INVALID
    return EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hanoispec",
        description="Spectral experiments on Hanoi attractors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single experiment")
    p_run.add_argument("--config", help="JSON config file; flags override its fields")
    _add_override_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a list of experiments")
    p_sweep.add_argument("--config", required=True,
                         help="JSON file with a list of run configs (or {'runs': [...]})")
    p_sweep.add_argument("--out", default="sweep", help="aggregate output directory")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="worker processes for the fan-out (default: serial)")
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
