"""Command-line interface: shape generation, field export, profiling, comparison, tau.

Every file-producing run writes a `manifest.txt` beside its outputs with the
resolved parameters, tool version, and a config hash, so reruns are
diff-able.  Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
non-convergence.  Options may also come from `SQUAREC_*` environment
variables or from a `--config` key=value overlay file (flags win).
"""

import hashlib
import os
import sys
from importlib import metadata

import click

from . import grid
from .grid import ParseError, ShapeError
from .solver import SolverConfig, solve_field
from .transform import save_field
from .complexity import complexity_profile, indicator, indicators_to_csv, profile_to_csv
from .noisegen import Rng, add_noise, derive_subseed
from .ordering import (emit_hasse, modified_kendall_tau, order_by_indicator,
                       order_to_csv, partial_order)
from .ioutil import atomic_write_text

try:
    __version__ = metadata.version("squarec")
except metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"


class NonConvergence(click.ClickException):
    exit_code = 3


def _parse_config_file(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}: bad config line {raw.rstrip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if "." in key:
                section, opt = key.split(".", 1)
                out.setdefault(section, {})[opt.replace("-", "_")] = value
            else:
                out[key.replace("-", "_")] = value
    return out


def _write_manifest(out_dir, command, params, inputs=(), outputs=(), extra=None):
    os.makedirs(out_dir, exist_ok=True)
    resolved = {k: v for k, v in sorted(params.items())}
    blob = "\n".join(f"{k}={v}" for k, v in resolved.items())
    cfg_hash = hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
    lines = [f"tool=squarec", f"version={__version__}", f"command={command}",
             f"config_hash={cfg_hash}",
             f"inputs={';'.join(str(p) for p in inputs)}",
             f"outputs={';'.join(str(p) for p in outputs)}"]
    lines += [f"flag.{k}={v}" for k, v in resolved.items()]
    if extra:
        lines += [f"{k}={v}" for k, v in sorted(extra.items())]
    atomic_write_text(os.path.join(out_dir, "manifest.txt"), "\n".join(lines) + "\n")


def _solver_config(mode, max_iters):
    cfg = SolverConfig()
    if mode:
        cfg.mode = mode
    if max_iters:
        cfg.max_iters = max_iters
    return cfg


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key=value overlay file (section.key for subcommands).")
@click.version_option(__version__)
@click.pass_context
def cli(ctx, config_path):
    """Multi-scale shape complexity with squares as the zero-complexity reference."""
    if config_path:
        ctx.default_map = _parse_config_file(config_path)


# --------------------------------------------------------------------------
# generate

@cli.group()
def generate():
    """Write shape files for the built-in generator families."""


def _out_opt(fn):
    return click.option("-o", "--out-dir", default=".", show_default=True,
                        help="Output directory.")(fn)


def _finish_generate(out_dir, command, params, named_shapes, ascii_format=False):
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    for name, shape in named_shapes:
        ext = "pbm" if shape.ndim == 2 else "vox3"
        path = os.path.join(out_dir, f"{name}.{ext}")
        grid.save_shape(shape, path, ascii_format=ascii_format)
        outputs.append(path)
    _write_manifest(out_dir, command, params, outputs=outputs)
    for p in outputs:
        click.echo(p)


@generate.command()
@click.option("--side", type=int, required=True)
@click.option("--name", default="square")
@click.option("--ascii", "ascii_format", is_flag=True, help="Write P1 instead of P4.")
@_out_opt
def square(side, name, ascii_format, out_dir):
    _finish_generate(out_dir, "generate square", {"side": side},
                     [(name, grid.make_square(side))], ascii_format)


@generate.command()
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--name", default="rect")
@_out_opt
def rect(width, height, name, out_dir):
    _finish_generate(out_dir, "generate rect", {"width": width, "height": height},
                     [(name, grid.make_rect(width, height))])


@generate.command()
@click.option("--radius", type=int, required=True)
@click.option("--name", default="disk")
@_out_opt
def disk(radius, name, out_dir):
    _finish_generate(out_dir, "generate disk", {"radius": radius},
                     [(name, grid.make_disk(radius))])


@generate.command()
@click.option("--side", type=int, required=True)
@click.option("--name", default="cube")
@_out_opt
def cube(side, name, out_dir):
    _finish_generate(out_dir, "generate cube", {"side": side},
                     [(name, grid.make_cube(side))])


@generate.command()
@click.option("--base", type=int, default=128, show_default=True,
              help="Base square side.")
@click.option("--widths", default="96,64,32", show_default=True,
              help="Comma-separated appendage contact widths.")
@click.option("--height", type=int, default=32, show_default=True,
              help="Appendage height (same for all).")
@click.option("--name", default="appendage")
@_out_opt
def appendage(base, widths, height, name, out_dir):
    """The successive-appendage family S0..Sk."""
    ws = [int(w) for w in widths.split(",") if w.strip()]
    shapes = grid.appendage_family(base, ws, heights=[height] * len(ws))
    named = [(f"{name}_s{i}", s) for i, s in enumerate(shapes)]
    _finish_generate(out_dir, "generate appendage",
                     {"base": base, "widths": widths, "height": height}, named)


@generate.command()
@click.option("--side", type=int, default=64, show_default=True)
@click.option("--appendage", "app", type=int, default=16, show_default=True)
@click.option("--name", default="cubes")
@_out_opt
def cubes(side, app, name, out_dir):
    """The ten-cube 3-D family S0, S1, S2a..S4b, S5, S6."""
    named = [(f"{name}_{nm.lower()}", s) for nm, s in grid.cube_family(side, app)]
    _finish_generate(out_dir, "generate cubes", {"side": side, "appendage": app}, named)


@generate.command()
@click.option("--side", type=int, required=True, help="Base square side.")
@click.option("--delta", required=True, help="Comma-separated integer offsets, e.g. 32,32.")
@click.option("--name", default="translate")
@_out_opt
def translate(side, delta, name, out_dir):
    """Union of a square with its translate (the diagonal zero-complexity family)."""
    parts = [int(v) for v in delta.split(",")]
    if len(parts) != 2:
        raise ShapeError("delta must have two components for 2-D shapes")
    dx, dy = parts
    shape = grid.translate_union(grid.make_square(side), (dy, dx))
    _finish_generate(out_dir, "generate translate", {"side": side, "delta": delta},
                     [(name, shape)])


@generate.command()
@click.option("--name", "plan_name", default=None,
              help="Built-in plan P0..P4.")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Plan spec file (see docs for the format).")
@click.option("--out-name", default=None)
@_out_opt
def plan(plan_name, spec_path, out_name, out_dir):
    """Rasterize a floor plan (free space becomes the shape)."""
    if (plan_name is None) == (spec_path is None):
        raise click.UsageError("give exactly one of --name or --spec")
    if plan_name:
        spec = grid.standard_plan(plan_name)
        label = out_name or plan_name.lower()
        params = {"name": plan_name}
    else:
        with open(spec_path, "r", encoding="utf-8") as fh:
            spec = grid.parse_plan(fh.read())
        label = out_name or os.path.splitext(os.path.basename(spec_path))[0]
        params = {"spec": spec_path}
    _finish_generate(out_dir, "generate plan", params,
                     [(label, grid.make_frame_plan(spec))])


@generate.command()
@click.option("--base-side", type=int, default=128, show_default=True)
@click.option("--nf", type=int, required=True)
@click.option("--count", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--name", default="noisy")
@_out_opt
def noisy(base_side, nf, count, seed, name, out_dir):
    """Apply seeded boundary noise `count` times to a base square."""
    spec = grid.NoiseSpec(nf=nf, count=count, seed=seed)
    rng = Rng(derive_subseed(spec.seed, 0))
    shape = grid.make_square(base_side)
    for _ in range(spec.count):
        shape = add_noise(shape, spec.nf, rng)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{name}.pbm")
    grid.save_shape(shape, path)
    sidecar = os.path.join(out_dir, f"{name}.txt")
    atomic_write_text(sidecar, f"seed={seed}\nnf={nf}\ncount={count}\n")
    _write_manifest(out_dir, "generate noisy",
                    {"base_side": base_side, "nf": nf, "count": count, "seed": seed},
                    outputs=[path, sidecar])
    click.echo(path)


# --------------------------------------------------------------------------
# field / profile / compare / tau

_mode_opt = click.option("--mode", type=click.Choice(["explicit", "system", "hybrid"]),
                         default="hybrid", show_default=True)
_iters_opt = click.option("--max-iters", type=int, default=None,
                          help="Safety cap for the explicit scheme.")


@cli.command("field")
@click.argument("shape_path", type=click.Path(exists=True, dir_okay=False))
@_mode_opt
@_iters_opt
@_out_opt
def field_cmd(shape_path, mode, max_iters, out_dir):
    """Solve the screened field for one shape and export it as FLD plus a report."""
    shape = grid.load_shape(shape_path)
    f, report = solve_field(shape, _solver_config(mode, max_iters))
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(shape_path))[0]
    fld = os.path.join(out_dir, f"{stem}.fld")
    rep = os.path.join(out_dir, f"{stem}_report.txt")
    save_field(f, fld)
    atomic_write_text(rep, report.text())
    _write_manifest(out_dir, "field", {"mode": mode, "max_iters": max_iters},
                    inputs=[shape_path], outputs=[fld, rep],
                    extra={"converged": str(report.converged).lower()})
    click.echo(fld)
    if not report.converged:
        raise NonConvergence(f"solver did not converge on {shape_path}")


@cli.command("profile")
@click.argument("shape_paths", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--bins", type=int, default=1024, show_default=True)
@click.option("--estimator", type=click.Choice(["entropy", "std"]), default="entropy",
              show_default=True, help="Estimator drawn in the figure.")
@click.option("--plot/--no-plot", default=True, show_default=True,
              help="Also render a scale-versus-complexity figure per run.")
@_mode_opt
@_iters_opt
@_out_opt
def profile_cmd(shape_paths, bins, estimator, plot, mode, max_iters, out_dir):
    """Per-scale complexity profile (CSV per input shape, plus one figure)."""
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    profiles = []
    failed = []
    for path in shape_paths:
        shape = grid.load_shape(path)
        stem = os.path.splitext(os.path.basename(path))[0]
        prof, report = complexity_profile(shape, _solver_config(mode, max_iters),
                                          bins=bins, shape_id=stem, return_report=True)
        csv_path = os.path.join(out_dir, f"{stem}_profile.csv")
        profile_to_csv(prof, csv_path)
        outputs.append(csv_path)
        profiles.append(prof)
        if not report.converged:
            failed.append(path)
    if plot:
        from . import report as reportmod
        fig_path = os.path.join(out_dir, "profiles.png")
        reportmod.profile_figure(profiles, fig_path, estimator=estimator)
        outputs.append(fig_path)
    _write_manifest(out_dir, "profile",
                    {"bins": bins, "estimator": estimator, "mode": mode,
                     "max_iters": max_iters, "plot": plot},
                    inputs=shape_paths, outputs=outputs,
                    extra={"partial": str(bool(failed)).lower(),
                           "non_converged": ";".join(failed)})
    for p in outputs:
        click.echo(p)
    if failed:
        raise NonConvergence("solver did not converge on: " + ", ".join(failed))


def _parse_interval(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise click.UsageError(f"bad interval {text!r}; expected e.g. 0,0.25")
    return lo, hi


@cli.command("compare")
@click.argument("shape_paths", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--interval", "intervals", multiple=True, default=("0,0.25",),
              show_default=True, help="t interval lo,hi; repeat for a partial order.")
@click.option("--tolerance", type=float, default=1e-9, show_default=True)
@click.option("--bins", type=int, default=1024, show_default=True)
@click.option("--estimator", type=click.Choice(["entropy", "std"]), default="entropy",
              show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
@_mode_opt
@_iters_opt
@_out_opt
def compare_cmd(shape_paths, intervals, tolerance, bins, estimator, plot, mode,
                max_iters, out_dir):
    """Order shapes by indicators: a linear order for one interval, a partial
    order with a Hasse diagram for several."""
    if len(shape_paths) < 2:
        raise click.UsageError("need >= 2 shapes to compare")
    ivals = [_parse_interval(t) for t in intervals]
    os.makedirs(out_dir, exist_ok=True)
    profiles = []
    failed = []
    for path in shape_paths:
        shape = grid.load_shape(path)
        stem = os.path.splitext(os.path.basename(path))[0]
        prof, report = complexity_profile(shape, _solver_config(mode, max_iters),
                                          bins=bins, shape_id=stem, return_report=True)
        profiles.append(prof)
        if not report.converged:
            failed.append(path)
    inds = [indicator(p, lo, hi, estimator) for (lo, hi) in ivals for p in profiles]
    outputs = []
    ind_csv = os.path.join(out_dir, "indicators.csv")
    indicators_to_csv(inds, ind_csv)
    outputs.append(ind_csv)
    if len(ivals) == 1:
        order = order_by_indicator(inds, tolerance)
        path = os.path.join(out_dir, "order.csv")
        order_to_csv(order, path)
        outputs.append(path)
        po = None
    else:
        table = {p.shape_id: [indicator(p, lo, hi, estimator).value for (lo, hi) in ivals]
                 for p in profiles}
        po = partial_order(table, tolerance)
        dot = os.path.join(out_dir, "hasse.dot")
        emit_hasse(po, dot)
        outputs.append(dot)
    if plot:
        from . import report as reportmod
        fig = os.path.join(out_dir, "profiles.png")
        reportmod.profile_figure(profiles, fig, estimator=estimator)
        outputs.append(fig)
        if po is not None:
            hfig = os.path.join(out_dir, "hasse.png")
            reportmod.hasse_figure(po, hfig)
            outputs.append(hfig)
    _write_manifest(out_dir, "compare",
                    {"intervals": ";".join(intervals), "tolerance": tolerance,
                     "bins": bins, "estimator": estimator, "mode": mode,
                     "max_iters": max_iters, "plot": plot},
                    inputs=shape_paths, outputs=outputs,
                    extra={"partial": str(bool(failed)).lower(),
                           "non_converged": ";".join(failed)})
    for p in outputs:
        click.echo(p)
    if failed:
        raise NonConvergence("solver did not converge on: " + ", ".join(failed))


@cli.command("tau")
@click.option("--expected", "expected_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Strict expected order: one id per line, simplest first.")
@click.option("--observed", "observed_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV of id,value rows (a header line is allowed).")
@click.option("--tolerance", type=float, default=1e-9, show_default=True)
def tau_cmd(expected_path, observed_path, tolerance):
    """Modified Kendall tau between an expected strict order and observed values."""
    with open(expected_path, "r", encoding="utf-8") as fh:
        expected = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    observed = {}
    with open(observed_path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            sid, _, value = line.partition(",")
            if ln == 1 and value.strip().lower() == "value":
                continue
            try:
                observed[sid.strip()] = float(value)
            except ValueError as exc:
                raise ParseError(f"{observed_path}:{ln}: bad value row {raw.rstrip()!r}") from exc
    click.echo(f"{modified_kendall_tau(expected, observed, tolerance):.4f}")


def main(argv=None):
    try:
        rv = cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="SQUAREC")
        sys.exit(rv or 0)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(1)
    except NonConvergence as exc:
        click.echo(f"non-convergence: {exc.format_message()}", err=True)
        sys.exit(3)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(2)
    except (ShapeError, OSError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
