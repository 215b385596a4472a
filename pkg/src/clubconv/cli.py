"""Command line entry point: ``clubconv run`` and ``clubconv synth``."""

import sys
from pathlib import Path

import click
from click.core import ParameterSource

from .exceptions import InputError, NumericalError
from .io import (
    StudySpec,
    _period_label,
    analyse_panel,
    emit_csv_tables,
    emit_report,
    prepare_panel,
    read_config,
    run_study,
    write_panel_csv,
)
from .synth import SyntheticSpec, as_raw_index, generate_panel, recovery_score

EXIT_INPUT = 1
EXIT_NUMERIC = 2

# default fixture for --seed-study: four clubs of seven, 1991-2017
SEED_STUDY_SPEC = dict(
    club_sizes=(7, 7, 7, 7),
    delta_levels=(2.5, 2.0, 1.5, 1.0),
    alpha=1.0,
    noise_sigma=0.05,
    T=27,
    first_period=1991,
)


def _parse_transition(text):
    if ":" not in text:
        raise InputError(f"expected A:B with comma-separated unit lists, got {text!r}")
    a, b = text.split(":", 1)
    split = lambda s: [u.strip() for u in s.split(",") if u.strip()]
    return split(a), split(b)


def _parse_window(text):
    if not text:
        return (None, None)
    for sep in (":", ","):
        if sep in text:
            a, b = text.split(sep, 1)
            return (_period_label(a.strip()) if a.strip() else None,
                    _period_label(b.strip()) if b.strip() else None)
    parts = text.split("-")
    if len(parts) == 2:
        return _period_label(parts[0].strip()), _period_label(parts[1].strip())
    raise InputError(f"window must look like START:END, got {text!r}")


def _parse_lag(text):
    text = str(text).strip()
    if text == "auto":
        return "auto"
    try:
        lag = int(text)
    except ValueError:
        raise InputError(f"--hac-lag must be 'auto' or an integer, got {text!r}") from None
    if lag < 0:
        raise InputError("--hac-lag must be non-negative")
    return lag


def _bool(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


CONFIG_CASTS = {
    "trim": float,
    "c_star": float,
    "critical": float,
    "smooth_hp": float,
    "seed_study": int,
    "merge": _bool,
}


def _apply_config(ctx, params):
    path = params.pop("config")
    if path is None:
        return params
    values = read_config(path)
    for key, value in values.items():
        if key not in params:
            raise InputError(f"unknown config key {key!r}")
        if ctx.get_parameter_source(key) is not ParameterSource.DEFAULT:
            continue
        if key == "transition":
            value = value if isinstance(value, list) else [value]
            params[key] = tuple(value)
            continue
        if isinstance(value, list):
            raise InputError(f"config key {key!r} given more than once")
        if key in ("input", "synth_config") and not Path(value).is_absolute():
            value = str(Path(path).parent / value)
        params[key] = CONFIG_CASTS.get(key, str)(value)
    return params


@click.group()
def main():
    """Log-t convergence test and club clustering for panel data."""


@main.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="key=value file mirroring these flags.")
@click.option("--input", "input", type=click.Path(dir_okay=False), help="CSV panel of raw index values.")
@click.option("--layout", type=click.Choice(["long", "wide"]), default="wide", show_default=True)
@click.option("--base-period", default=None, help="Rebase every unit to 100 at this period.")
@click.option("--window", default=None, help="START:END period window (inclusive).")
@click.option("--category", default="", help="Free-text label copied to the report.")
@click.option("--trim", type=float, default=0.3, show_default=True, help="Fraction of periods discarded before the regression.")
@click.option("--trim-convention", type=click.Choice(["floor_rT", "floor_rT_plus_1"]), default="floor_rT_plus_1", show_default=True)
@click.option("--hac-lag", default="auto", show_default=True, help="'auto' (Newey-West rule) or a fixed lag.")
@click.option("--ordering", type=click.Choice(["mean_last_half", "last_observation"]), default="mean_last_half", show_default=True)
@click.option("--c-star", type=float, default=0.0, show_default=True, help="Sieve admission threshold.")
@click.option("--critical", type=float, default=-1.65, show_default=True, help="One-sided critical value.")
@click.option("--merge/--no-merge", default=True, show_default=True)
@click.option("--transition", multiple=True, help="Transition probe A:B, e.g. 'MT:PT,ES,IE,AT'. Repeatable.")
@click.option("--transition-adjacent", default=None, help="KTAIL:KHEAD probe between every pair of adjacent clubs.")
@click.option("--smooth-hp", type=float, default=None, help="Apply a Hodrick-Prescott trend filter with this lambda.")
@click.option("--format", "format", type=click.Choice(["text", "json", "csv"]), default="text", show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Write one file per CSV table here.")
@click.option("--seed-study", type=int, default=None, help="Analyse a synthetic four-club panel drawn with this seed.")
@click.option("--synth-config", type=click.Path(exists=True, dir_okay=False), default=None, help="key=value synthetic spec for --seed-study.")
def run(**params):
    """Run a convergence study and print the report."""
    ctx = click.get_current_context()
    try:
        params = _apply_config(ctx, params)
        spec = StudySpec(
            input=params["input"],
            layout=params["layout"],
            base_period=None if params["base_period"] is None else _period_label(str(params["base_period"])),
            window=_parse_window(params["window"]),
            category=params["category"],
            trim=params["trim"],
            trim_convention=params["trim_convention"],
            hac_lag=_parse_lag(params["hac_lag"]),
            ordering=params["ordering"],
            c_star=params["c_star"],
            critical=params["critical"],
            merge=params["merge"],
            transitions=[_parse_transition(t) for t in params["transition"]],
            smooth_hp=params["smooth_hp"],
            format=params["format"],
        )
        if params["seed_study"] is not None:
            report = _seed_study(spec, params["seed_study"], params["synth_config"])
        else:
            if spec.input is None:
                raise InputError("--input is required unless --seed-study is given")
            if params["transition_adjacent"]:
                report = _with_adjacent_transitions(spec, params["transition_adjacent"])
            else:
                report = run_study(spec)
    except (InputError, ValueError, OSError) as exc:
        _fail(exc, EXIT_INPUT)
    except NumericalError as exc:
        _fail(exc, EXIT_NUMERIC)

    if spec.format == "csv" and params["out_dir"]:
        out = Path(params["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        for name, data in emit_csv_tables(report).items():
            (out / name).write_bytes(data)
        return
    sys.stdout.buffer.write(emit_report(report, spec.format))
    sys.stdout.flush()


def _fail(exc, code):
    stage = getattr(exc, "stage", None)
    prefix = f"error [{stage}]" if stage else "error"
    click.echo(f"{prefix}: {exc}", err=True)
    sys.exit(code)


def _seed_study(spec, seed, synth_config):
    kw = dict(SEED_STUDY_SPEC)
    if synth_config:
        synth = SyntheticSpec.from_config({**SyntheticSpec(**kw).to_config(), **read_config(synth_config)})
    else:
        synth = SyntheticSpec(**kw)
    synth = SyntheticSpec.from_config({**synth.to_config(), "seed": str(seed)})
    log_panel, truth = generate_panel(synth)
    panel, screen = prepare_panel(as_raw_index(log_panel), spec)
    report = analyse_panel(panel, spec, screen, {"input": f"synthetic seed {seed}", "base_period": spec.base_period,
                                                 "window": [panel.period_labels[0], panel.period_labels[-1]]})
    exact, accuracy = recovery_score([c["members"] for c in report.merged_clubs], log_panel.unit_ids, truth)
    report.meta["synthetic"] = {"spec": synth.to_config(), "exact_recovery": exact, "unit_accuracy": accuracy}
    return report


def _with_adjacent_transitions(spec, text):
    try:
        k_tail, k_head = (int(v) for v in text.split(":"))
    except ValueError:
        raise InputError("--transition-adjacent expects KTAIL:KHEAD") from None
    first = run_study(spec)
    clubs = first.clubs
    for upper, lower in zip(clubs, clubs[1:]):
        tail = upper["members"][len(upper["members"]) - k_tail:] if k_tail else []
        head = lower["members"][:k_head]
        if len(tail) + len(head) >= 2:
            spec.transitions.append((tail, head))
    return run_study(spec)


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--synth-config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--layout", type=click.Choice(["long", "wide"]), default="wide", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), required=True)
def synth(seed, synth_config, layout, output):
    """Write a synthetic raw-index panel to CSV."""
    base = SyntheticSpec(**SEED_STUDY_SPEC).to_config()
    if synth_config:
        base.update(read_config(synth_config))
    base["seed"] = str(seed)
    panel, _ = generate_panel(SyntheticSpec.from_config(base))
    write_panel_csv(as_raw_index(panel), output, layout)


def entry(argv=None):
    """Console-script wrapper: usage errors exit with code 1, not click's 2."""
    try:
        main.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(EXIT_INPUT)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_INPUT)


if __name__ == "__main__":
    entry()
