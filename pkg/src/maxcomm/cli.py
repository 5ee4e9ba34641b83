"""Command-line interface: operators, norms, functionals, suites, experiments, corpora.

Exit status: 0 on success or suite pass, 1 on suite failure, 2 on usage or
input errors.  JSON output is deterministic for a fixed configuration.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .grid import (
    Cube,
    CubeFamily,
    Exponents,
    Grid,
    GridFunction,
    load_grid_function,
    save_grid_function,
    unit_grid,
)
from .lipschitz import (
    lip_norm_equivalence_table,
    lip_profile,
    maximal_char_functional,
    sharp_char_functional,
)
from .operators import (
    commutator_maximal,
    commutator_sharp,
    hl_maximal,
    maximal_commutator,
    restricted_maximal,
    sharp_maximal,
    weighted_fractional_maximal,
)
from .tables import dumps, render
from .verification import suites
from .verification.corpus import build_corpus
from .verification.experiments import refinement_experiment, refinement_stability
from .verification.norms import OPERATORS, estimate_operator_norm
from .verification.report import merge
from .weights import Weight, a1_constant, power_weight, uniform_weight

JOBS_ENV = "MAXCOMM_JOBS"

COMPUTE_OPS = ("hl", "restricted", "sharp", "mb", "comm", "comm_sharp", "frac")
SUITES = ("domination", "restriction", "mean_split", "converse", "holder", "commutator",
          "a1", "lemma21", "lemma22", "lemma24", "lemma25")


class InputError(click.ClickException):
    exit_code = 2


class SuiteFailed(click.ClickException):
    exit_code = 1

    def show(self, file=None):
        click.echo(f"suite failure: {self.message}", err=True)


def _jobs_default():
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# -- shared options ----------------------------------------------------------------


def grid_options(f):
    f = click.option("--dim", type=click.IntRange(1, 2), default=1, show_default=True)(f)
    f = click.option("--n", "npts", type=click.IntRange(2), default=32, show_default=True,
                     help="Lattice points per axis.")(f)
    f = click.option("--h", "spacing", type=float, default=None,
                     help="Lattice spacing (default: unit box, 1/(n-1)).")(f)
    return f


def run_options(f):
    f = click.option("--family", "family_mode", type=click.Choice(["all", "dyadic", "sampled"]),
                     default="all", show_default=True)(f)
    f = click.option("--k", "k_sampled", type=int, default=None, help="Cubes in a sampled family.")(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    f = click.option("--jobs", type=click.IntRange(1), default=_jobs_default,
                     help=f"Parallelism degree (recorded; default from ${JOBS_ENV}).")(f)
    f = click.option("--max-cubes", type=click.IntRange(1), default=None,
                     help="Switch to a sampled family above this many cubes.")(f)
    f = click.option("--max-points", type=click.IntRange(1), default=None,
                     help="Refuse grids with more lattice points.")(f)
    f = click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
                     help="Output file (default: stdout).")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                     show_default=True)(f)
    return f


def _make_grid(dim, npts, spacing) -> Grid:
    if spacing is None:
        return unit_grid(dim, npts)
    return Grid(dim, (npts,) * dim, spacing)


def _load(path, spacing, dim) -> GridFunction:
    try:
        return load_grid_function(path, 1.0 if spacing is None else spacing, dim)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read grid file {path}: {exc}") from None


def _check_points(grid: Grid, max_points):
    if max_points is not None and grid.n_points > max_points:
        raise InputError(f"grid has {grid.n_points} points, budget is {max_points}")


def _make_family(grid, mode, k, seed, max_cubes) -> tuple[CubeFamily, dict]:
    meta = {"mode": mode}
    try:
        if mode == "sampled":
            family = CubeFamily(grid, "sampled", k=k, seed=seed)
            meta["k"] = k
        else:
            family = CubeFamily(grid, mode)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if max_cubes is not None and len(family) > max_cubes:
        click.echo(f"warning: {len(family)} cubes exceed --max-cubes {max_cubes}; "
                   f"using a sampled family", err=True)
        family = CubeFamily(grid, "sampled", k=max_cubes, seed=seed)
        meta = {"mode": "sampled", "k": max_cubes, "requested_mode": mode}
    return family, meta


def _exponents(p, beta, dim, r=None, s=None) -> Exponents:
    try:
        return Exponents(p, beta, dim, r, s)
    except ValueError as exc:
        raise InputError(f"invalid exponents: {exc}") from None


def _weight(spec: str | None, grid: Grid, spacing, seed) -> Weight:
    """``uniform``, ``power:A`` (centred, epsilon 2% of the side) or a grid file."""
    if spec is None or spec == "uniform":
        return uniform_weight(grid)
    if spec.startswith("power:"):
        try:
            a = float(spec.split(":", 1)[1])
            length = grid.spacing * (min(grid.shape) - 1)
            return power_weight(grid, grid.origin + 0.5 * length, a, 0.02 * length)
        except ValueError as exc:
            raise InputError(f"bad weight {spec!r}: {exc}") from None
    base = _load(spec, spacing, grid.dim)
    if base.grid.shape != grid.shape:
        raise InputError(f"weight grid {base.grid.shape} does not match {grid.shape}")
    try:
        return Weight(GridFunction(grid, base.values), "file", {"path": str(spec)})
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _emit(obj, fmt, out_path, meta):
    if fmt == "json":
        data = obj.to_dict() if hasattr(obj, "to_dict") else dict(obj)
        data = dict(data)
        data["run"] = meta
        text = dumps(data)
    else:
        text = render(obj, "csv")
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text)


def _meta(command, grid, seed, jobs, **extra):
    out = {"command": command, "seed": seed, "jobs": jobs,
           "grid": {"dim": grid.dim, "shape": list(grid.shape), "spacing": grid.spacing}}
    out.update(extra)
    return out


def _input_grid(input_path, dim, npts, spacing):
    if input_path is None:
        return None, _make_grid(dim, npts, spacing)
    f = _load(input_path, spacing, None)
    return f, f.grid


# -- commands ------------------------------------------------------------------------


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Discrete maximal operators, commutators and weighted Lipschitz functionals."""


@main.command()
@click.option("--op", type=click.Choice(COMPUTE_OPS), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Function f (CSV or JSON grid file).")
@click.option("--symbol", "symbol_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Symbol b for mb/comm/comm_sharp.")
@click.option("--weight", "weight_spec", default=None, help="uniform, power:A, or a grid file (frac).")
@click.option("--alpha", type=float, default=0.25, show_default=True)
@click.option("--r", type=float, default=2.0, show_default=True)
@click.option("--q0", default=None, help="Restricting cube as 'i[,j]:side' (restricted).")
@click.option("--h", "spacing", type=float, default=None, help="Spacing for CSV inputs.")
@run_options
def compute(op, input_path, symbol_path, weight_spec, alpha, r, q0, spacing, family_mode,
            k_sampled, seed, jobs, max_cubes, max_points, out_path, fmt):
    """Evaluate an operator on a grid function."""
    f = _load(input_path, spacing, None)
    grid = f.grid
    _check_points(grid, max_points)
    family, fmeta = _make_family(grid, family_mode, k_sampled, seed, max_cubes)
    b = None
    if op in ("mb", "comm", "comm_sharp"):
        if symbol_path is None:
            raise InputError(f"--op {op} needs --symbol")
        b = _load(symbol_path, spacing, grid.dim)
        if b.grid.shape != grid.shape:
            raise InputError("symbol and function grids differ")
        b = GridFunction(grid, b.values)
    try:
        if op == "hl":
            res = hl_maximal(f, family).values
        elif op == "sharp":
            res = sharp_maximal(f, family).values
        elif op == "restricted":
            if q0 is None:
                raise InputError("--op restricted needs --q0")
            res = restricted_maximal(f, _parse_cube(q0, grid.dim), family).values
        elif op == "mb":
            res = maximal_commutator(b, f, family).values
        elif op == "comm":
            res = commutator_maximal(b, f, family)
        elif op == "comm_sharp":
            res = commutator_sharp(b, f, family)
        else:
            mu = _weight(weight_spec, grid, spacing, seed)
            res = weighted_fractional_maximal(f, mu, alpha, r, family).values
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from None
    meta = _meta("compute", grid, seed, jobs, op=op, family=fmeta)
    if out_path is not None and Path(out_path).suffix.lower() in (".csv", ".json"):
        save_grid_function(res, out_path, {"run": _encode_meta(meta)})
        return
    from .grid import to_json
    data = to_json(res)
    data["run"] = meta
    text = dumps(data) if fmt == "json" else _grid_csv(res)
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text)


def _encode_meta(meta):
    from .tables import encode
    return encode(meta)


def _grid_csv(f: GridFunction) -> str:
    from .grid import fmt_float
    rows = f.values[:, None] if f.grid.dim == 1 else f.values
    return "".join(",".join(fmt_float(v) for v in row) + "\n" for row in rows)


def _parse_cube(text, dim) -> Cube:
    try:
        anchor, side = text.split(":")
        idx = tuple(int(v) for v in anchor.split(","))
        if len(idx) != dim:
            raise ValueError(f"anchor needs {dim} coordinates")
        return Cube(idx, int(side))
    except ValueError as exc:
        raise InputError(f"bad cube {text!r}: {exc}") from None


@main.command()
@click.option("--op", type=click.Choice(OPERATORS), required=True)
@click.option("--p", type=float, required=True)
@click.option("--beta", type=float, required=True)
@click.option("--r", type=float, default=None, help="Exponent r of the fractional operator.")
@click.option("--symbol", "symbol_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Symbol b as a grid file (default: corpus member --symbol-name).")
@click.option("--symbol-name", default="bump_shifted", show_default=True)
@click.option("--weight", "weight_spec", default=None, help="uniform, power:A, or a grid file.")
@grid_options
@run_options
def norms(op, p, beta, r, symbol_path, symbol_name, weight_spec, dim, npts, spacing, family_mode,
          k_sampled, seed, jobs, max_cubes, max_points, out_path, fmt):
    """Estimate an operator norm over the seeded corpus."""
    grid = _make_grid(dim, npts, spacing)
    _check_points(grid, max_points)
    exps = _exponents(p, beta, dim, r)
    family, fmeta = _make_family(grid, family_mode, k_sampled, seed, max_cubes)
    corpus = build_corpus(seed, grid)
    symbol = None
    if op != "frac":
        if symbol_path is not None:
            raw = _load(symbol_path, spacing, dim)
            if raw.grid.shape != grid.shape:
                raise InputError(f"symbol grid {raw.grid.shape} does not match {grid.shape}")
            symbol = GridFunction(grid, raw.values)
        else:
            match = [m for m in corpus.symbols if m.name == symbol_name]
            if not match:
                raise InputError(f"unknown corpus symbol {symbol_name!r}")
            symbol = match[0].function
    mu = _weight(weight_spec, grid, spacing, seed)
    est = estimate_operator_norm(op, corpus, exps, mu, symbol, family)
    meta = _meta("norms", grid, seed, jobs, family=fmeta, weight=weight_spec or "uniform",
                 symbol=symbol_path or (symbol_name if op != "frac" else None))
    _emit(est, fmt, out_path, meta)


@main.command()
@click.option("--kind", type=click.Choice(["lip", "maximal_char", "sharp_char", "equivalence"]),
              required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Symbol b as a grid file (default: corpus member --symbol-name).")
@click.option("--symbol-name", default="bump_shifted", show_default=True)
@click.option("--beta", type=float, required=True)
@click.option("--p", type=float, default=1.0, show_default=True, help="Exponent of the Lipschitz norm.")
@click.option("--s", type=float, default=1.0, show_default=True, help="Exponent of the functionals.")
@click.option("--weight", "weight_spec", default=None, help="uniform, power:A, or a grid file.")
@grid_options
@run_options
def functionals(kind, input_path, symbol_name, beta, p, s, weight_spec, dim, npts, spacing,
                family_mode, k_sampled, seed, jobs, max_cubes, max_points, out_path, fmt):
    """Per-cube Lipschitz norms and characterizing functionals of a symbol."""
    b, grid = _input_grid(input_path, dim, npts, spacing)
    if b is None:
        match = [m for m in build_corpus(seed, grid).symbols if m.name == symbol_name]
        if not match:
            raise InputError(f"unknown corpus symbol {symbol_name!r}")
        b = match[0].function
    _check_points(grid, max_points)
    if not 0 < beta < 1:
        raise InputError(f"beta must lie in (0, 1), got {beta}")
    if p < 1 or s < 1:
        raise InputError("p and s must be >= 1")
    family, fmeta = _make_family(grid, family_mode, k_sampled, seed, max_cubes)
    mu = _weight(weight_spec, grid, spacing, seed)
    meta = _meta("functionals", grid, seed, jobs, kind=kind, family=fmeta,
                 weight=weight_spec or "uniform")
    if kind == "equivalence":
        table = lip_norm_equivalence_table(b, mu, beta, family, (1.0, 2.0, 4.0))
        rows = [{"p": q, "value": res.value, "witness": res.witness} for q, res in table.items()]
        _emit({"rows": rows}, fmt, out_path, meta)
        return
    if kind == "lip":
        prof = lip_profile(b, mu, beta, p, family)
    elif kind == "maximal_char":
        prof = maximal_char_functional(b, mu, beta, s, family)
    else:
        prof = sharp_char_functional(b, mu, beta, s, family)
    _emit(prof if fmt == "csv" else prof.summary(), fmt, out_path, meta)


def _run_suite(name, corpus, exps, r, family):
    beta = exps.beta
    if name == "domination":
        return suites.verify_pointwise_domination(corpus, family)
    if name == "restriction":
        return suites.verify_restriction_identities(corpus, None if family.mode == "all" else family)
    if name == "mean_split":
        return suites.verify_mean_split(corpus, family)
    if name == "converse":
        return suites.verify_converse_chain(corpus, exps, family)
    if name == "holder":
        return suites.verify_holder_monotonicity(corpus, beta, family)
    if name == "commutator":
        return suites.verify_commutator_identity(corpus, exps, family)
    if name == "a1":
        return suites.verify_a1_consistency(corpus, family)
    if name == "lemma21":
        return suites.verify_lemma21(corpus, beta, family)
    if name == "lemma22":
        return suites.verify_lemma22(corpus, beta, family)
    if name == "lemma24":
        return suites.verify_lemma24_domination(corpus, beta, r, family)
    return suites.verify_lemma25_ratios(corpus, beta, r, family)


@main.command()
@click.option("--suite", "suite_names", type=click.Choice(SUITES + ("all",)), multiple=True,
              required=True)
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--beta", type=float, default=0.25, show_default=True)
@click.option("--r", type=float, default=None, help="Exponent r for the lemma suites (default 2).")
@grid_options
@run_options
def verify(suite_names, p, beta, r, dim, npts, spacing, family_mode, k_sampled, seed, jobs,
           max_cubes, max_points, out_path, fmt):
    """Run verification suites on the seeded corpus; exit 1 if any fails."""
    grid = _make_grid(dim, npts, spacing)
    _check_points(grid, max_points)
    exps = _exponents(p, beta, dim)
    family, fmeta = _make_family(grid, family_mode, k_sampled, seed, max_cubes)
    corpus = build_corpus(seed, grid)
    names = SUITES if "all" in suite_names else tuple(dict.fromkeys(suite_names))
    try:
        reports = [_run_suite(name, corpus, exps, r, family) for name in names]
    except suites.SuiteError as exc:
        raise SuiteFailed(str(exc)) from None
    report = reports[0] if len(reports) == 1 else merge("+".join(names), reports)
    meta = _meta("verify", grid, seed, jobs, suites=list(names), family=fmeta,
                 exponents=exps.to_dict(), corpus=corpus.names())
    _emit(report, fmt, out_path, meta)
    if not report.passed:
        raise SuiteFailed(f"{report.n_failures} failures in {report.suite}")


@main.command()
@click.option("--kind", type=click.Choice(["refinement", "stability"]), required=True)
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--beta", type=float, default=0.25, show_default=True)
@click.option("--r", type=float, default=None)
@click.option("--dim", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--levels", type=int, default=4, show_default=True)
@click.option("--n0", type=click.IntRange(4), default=32, show_default=True)
@click.option("--m", "cube_points", type=click.IntRange(1), default=5, show_default=True)
@click.option("--n-coarse", type=click.IntRange(2), default=64, show_default=True)
@click.option("--n-fine", type=click.IntRange(2), default=128, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=click.IntRange(1), default=_jobs_default)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def experiment(kind, p, beta, r, dim, levels, n0, cube_points, n_coarse, n_fine, seed, jobs,
               out_path, fmt):
    """Grid-refinement experiments; exit 1 if a check fails."""
    exps = _exponents(p, beta, dim, r)
    try:
        if kind == "refinement":
            res = refinement_experiment(None, exps, levels, n0, cube_points, dim)
        else:
            res = refinement_stability(seed, exps, n_coarse, n_fine, r)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    meta = {"command": "experiment", "kind": kind, "seed": seed, "jobs": jobs,
            "exponents": exps.to_dict()}
    _emit(res, fmt, out_path, meta)
    if not res.passed:
        failed = [k for k, v in res.checks.items() if not v]
        raise SuiteFailed("; ".join(failed))


@main.command()
@grid_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv", show_default=True)
def corpus(dim, npts, spacing, seed, out_dir, fmt):
    """Write the seeded corpus as grid files plus a manifest."""
    grid = _make_grid(dim, npts, spacing)
    c = build_corpus(seed, grid)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"seed": seed, "grid": {"dim": dim, "shape": list(grid.shape), "spacing": grid.spacing},
                "functions": [], "symbols": [], "weights": []}
    for group in ("functions", "symbols"):
        for m in getattr(c, group):
            path = out / f"{group[:-1]}_{m.name}.{fmt}"
            save_grid_function(m.function, path)
            manifest[group].append({"name": m.name, "file": path.name, "nonnegative": m.nonnegative,
                                    "continuum": m.continuum, "lipschitz": m.lipschitz})
    family = CubeFamily(grid, "all")
    for i, (w, name) in enumerate(zip(c.weights, c.names()["weights"])):
        path = out / f"weight_{i}.{fmt}"
        save_grid_function(w.base, path)
        meta = w.metadata(a1_constant(w, family))
        (out / f"weight_{i}.meta.json").write_text(dumps(meta))
        manifest["weights"].append({"name": name, "file": path.name, **meta})
    (out / "manifest.json").write_text(dumps(manifest))


def run(argv=None) -> int:
    """Invoke the CLI and return its exit status instead of exiting."""
    try:
        main.main(args=argv, standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(run())
