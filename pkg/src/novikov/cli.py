"""``novikov`` command line.

Every option can also be set from the environment as ``NOVIKOV_<NAME>``
(``NOVIKOV_A``, ``NOVIKOV_N_PATHS``, ...). Exit codes: 0 all verdicts as
expected, 1 usage or domain error (including the beta(-1) refusal), 2 an
analytic check failed, 3 a Monte Carlo verdict contradicts the theory,
4 ``replay`` produced different numbers.
"""

from __future__ import annotations

import functools
import json
import sys

import click

from novikov import reports, runs
from novikov.certificates import solve
from novikov.poisson import dump_paths_csv, simulate
from novikov.special import BetaNonexistenceError, DomainError


def _env(name: str) -> str:
    return "NOVIKOV_" + name.upper().replace("-", "_")


def _opt(*decls, **kw):
    name = decls[0].lstrip("-")
    kw.setdefault("show_default", True)
    return click.option(*decls, envvar=_env(name), **kw)


def mc_options(fn):
    for deco in reversed(
        [
            _opt("--n-paths", type=click.IntRange(min=100), default=runs.DEFAULT_N_PATHS, help="Number of simulated paths."),
            _opt("--seed", type=click.IntRange(min=0), default=runs.DEFAULT_SEED, help="Master seed."),
            _opt("--max-jumps", type=click.IntRange(min=1), default=runs.DEFAULT_MAX_JUMPS, help="Jump budget per path."),
            _opt("--ci-level", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=runs.DEFAULT_CI_LEVEL),
        ]
    ):
        fn = deco(fn)
    return output_options(fn)


def output_options(fn):
    for deco in reversed(
        [
            _opt("--out", type=click.Path(dir_okay=False, writable=True), default=None, help="Output file [stdout]."),
            _opt("--format", "fmt", type=click.Choice(["json", "csv"]), default="json"),
            _opt("--workers", type=click.IntRange(min=1), default=1, help="Threads; never changes results."),
        ]
    ):
        fn = deco(fn)
    return fn


def _emit(report: dict, fmt: str, out: str | None, csv_text: str | None = None) -> None:
    reports.validate(report)
    text = reports.to_json(report) if fmt == "json" else (csv_text if csv_text is not None else reports.to_csv(report))
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fp:
            fp.write(text)


def _domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BetaNonexistenceError as exc:
            click.echo(f"refused: {exc}", err=True)
            sys.exit(runs.EXIT_USAGE)
        except (DomainError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(runs.EXIT_USAGE)

    return wrapper


def _finish(report: dict, code: int, fmt: str, out: str | None, **runtime) -> None:
    report["runtime"].update(output_path=out, **runtime)
    _emit(report, fmt, out)
    sys.exit(code)


@click.group(context_settings={"help_option_names": ["-h", "--help"], "max_content_width": 100})
@click.version_option(reports.package_version(), prog_name="novikov")
def main():
    """Optimal Novikov-type constants for jump martingales."""


@main.command()
@_opt("--a-lo", type=float, default=-1.0, help="Left end of the grid (>= -1).")
@_opt("--a-hi", type=float, default=20.0)
@_opt("--points", type=click.IntRange(min=2), default=10_001)
@output_options
@_domain_errors
def constants(a_lo, a_hi, points, out, fmt, workers):
    """Tabulate alpha, beta, alpha', h and g on a grid with monotonicity flags."""
    cfg = {"command": "constants", "a_lo": a_lo, "a_hi": a_hi, "points": points, "format": fmt}
    report, code = runs.run_constants(cfg, workers)
    report["runtime"]["output_path"] = out
    csv_text = reports.constants_csv(report["table"]["rows"]) if fmt == "csv" else None
    _emit(report, fmt, out, csv_text)
    sys.exit(code)


@main.command()
@_opt("--a", type=float, default=1.0, help="Jump floor a >= -1.")
@_opt("--eps", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.2, help="Slack below the optimal coefficient.")
@_opt("--variant", type=click.Choice(["alpha", "beta"]), default="alpha")
@_opt("--dump-paths", type=click.Path(dir_okay=False, writable=True), default=None, help="CSV of jump times of the first paths.")
@_opt("--dump-limit", type=click.IntRange(min=1), default=1000, help="Paths written by --dump-paths.")
@mc_options
@_domain_errors
def counterexample(a, eps, variant, dump_paths, dump_limit, n_paths, seed, max_jumps, ci_level, out, fmt, workers):
    """Certificate plus simulation showing a smaller coefficient does not suffice."""
    cfg = runs.default_config(
        "counterexample",
        a=a,
        eps=eps,
        variant=variant,
        n_paths=n_paths,
        master_seed=seed,
        max_jumps=max_jumps,
        ci_level=ci_level,
        format=fmt,
    )
    report, code = runs.run_counterexample(cfg, workers)
    if dump_paths is not None and "certificate" in report:
        cert = solve(a, eps, variant)
        batch = simulate(cert.stopping, min(dump_limit, n_paths), seed, max_jumps=max_jumps)
        with open(dump_paths, "w", encoding="utf-8", newline="") as fp:
            dump_paths_csv(fp, batch, seed)
    _finish(report, code, fmt, out, dump_paths=dump_paths)


@main.command("novikov-demo")
@_opt("--a", type=click.FloatRange(min=0), default=1.0, help="Jump size a >= 0.")
@_opt("--t0", type=click.FloatRange(min=0, min_open=True), default=1.0, help="Deterministic horizon.")
@_opt("--companion-a", type=click.FloatRange(min=0, max=1, min_open=True, max_open=True), default=0.1,
      help="Also run the counterexample at jump floor -companion_a.")
@_opt("--no-companion", is_flag=True, default=False)
@_opt("--eps", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.2)
@mc_options
@_domain_errors
def novikov_demo(a, t0, companion_a, no_companion, eps, n_paths, seed, max_jumps, ci_level, out, fmt, workers):
    """Mean-one check for nonnegative jumps and its companion counterexample."""
    cfg = runs.default_config(
        "novikov-demo",
        a=a,
        t0=t0,
        companion_a=None if no_companion else companion_a,
        eps=eps,
        n_paths=n_paths,
        master_seed=seed,
        max_jumps=max_jumps,
        ci_level=ci_level,
        format=fmt,
    )
    report, code = runs.run_novikov_demo(cfg, workers)
    _finish(report, code, fmt, out)


def _times(ctx, param, value):
    try:
        times = [float(t) for t in str(value).replace(" ", "").split(",") if t]
    except ValueError:
        raise click.BadParameter("expected comma-separated numbers") from None
    if not times:
        raise click.BadParameter("need at least one time")
    return times


@main.command("lb-martingale")
@_opt("--b", type=click.FloatRange(min=-1, min_open=True), required=True)
@_opt("--lambda", "lam", type=float, required=True)
@_opt("--times", type=str, default="0.5,1,2", callback=_times, help="Comma-separated horizons.")
@mc_options
@_domain_errors
def lb_martingale(b, lam, times, n_paths, seed, max_jumps, ci_level, out, fmt, workers):
    """Constant-mean check of the exponential martingale L^b."""
    cfg = runs.default_config(
        "lb-martingale",
        b=b,
        times=times,
        n_paths=n_paths,
        master_seed=seed,
        max_jumps=max_jumps,
        ci_level=ci_level,
        format=fmt,
        **{"lambda": lam},
    )
    report, code = runs.run_lb_martingale(cfg, workers)
    _finish(report, code, fmt, out)


@main.command()
@click.argument("report_path", type=click.Path(exists=True, dir_okay=False))
@output_options
@_domain_errors
def replay(report_path, out, fmt, workers):
    """Re-run a JSON report's config and compare every deterministic field."""
    with open(report_path, encoding="utf-8") as fp:
        old = json.load(fp)
    new, code = runs.rerun(old["config"], workers)
    new["runtime"]["output_path"] = out
    same = reports.deterministic_view(json.loads(reports.to_json(new))) == reports.deterministic_view(old)
    click.echo(f"replay: {'identical' if same else 'MISMATCH'}", err=True)
    _emit(new, fmt, out)
    sys.exit(code if same else runs.EXIT_REPLAY_MISMATCH)


@main.command()
def schema():
    """Print the JSON schema that every report validates against."""
    click.echo(json.dumps(reports.load_schema(), indent=2))


if __name__ == "__main__":  # pragma: no cover
    main()
