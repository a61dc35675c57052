"""Separate the superimposed OTDR trace of a passive optical network.

Usage:
  otdr-split simulate <design> <out> [--y0=<values>] [--noise=<sigma>]
             [--seed=<n>] [--calibration=<db>] [-v...]
  otdr-split separate <design> <measured> <out-dir> [--pop=<n>] [--gens=<n>]
             [--cr=<c>] [--eta=<eta>] [--seed=<n>] [--workers=<n>]
             [--calibration=<db>] [-v...]
  otdr-split sequence <design> <name> <report> [--measured=<dir>] [-v...]
  otdr-split calibrate <design> <db> <report> [--trace=<spec>...]
             [--length=<spec>...] [--aggregate=<csv>] [--date=<iso>]
             [--tolerance=<km>] [-v...]
  otdr-split locate <design> <branch> <distance>
  otdr-split -h | --help
  otdr-split --version

Commands:
  simulate   Write the synthetic trace of the design's connected branches.
  separate   Fit every connected branch to a measured trace.
  sequence   Check the splitter equation on unplugging sequence A, B, C
             (or "all" for every subset of channels). Simulated
             unless --measured is given.
  calibrate  Compare measured branch lengths with the design and append them
             to a calibration database.
  locate     Print the map coordinate of a distance read on a branch.

Options:
  --y0=<values>       Post-splitter powers in dB, either one per connected
                      branch ("-12,-13.5") or per branch id ("1:-12,3:-14").
                      Branches not given use the design's budget.
  --noise=<sigma>     Gaussian noise added to every sample, dB [default: 0]
  --seed=<n>          Seed of the noise and of the optimizer [default: 0]
  --pop=<n>           Population size [default: 100]
  --gens=<n>          Number of generations [default: 400]
  --cr=<c>            Crossover rate [default: 0.3]
  --eta=<eta>         Differential weight [default: 0.05]
  --workers=<n>       Concurrent fitness evaluations [default: 4]
  --calibration=<db>  A calibration database whose lengths replace the
                      design's branch lengths
  --measured=<dir>    Recorded traces of the sequence: channel_NN.csv per
                      channel alone, step_NN.csv per step
  --trace=<spec>      A field trace of a single branch, as branch:path
  --length=<spec>     A measured branch length, as branch:km
  --aggregate=<csv>   A field trace of the whole network; its fiber ends are
                      matched to the nearest design branches
  --date=<iso>        Date of the field measurements (default: today)
  --tolerance=<km>    Largest difference still calibrated [default: 0]
  -v --verbose        Log more (repeat for debug output)
  -h --help           Show this screen.
  --version           Show the version.

Exit codes: 0 on success, 1 when the result fails (correlation below the
gate, no fiber end found), 2 on invalid input.
"""
import datetime
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from docopt import DocoptExit, docopt

from . import __version__
from .base import NetworkDesign, OtdrSplitError, ParameterError
from .calibration import (
    apply_calibration,
    compare,
    design_records,
    detect_fiber_end,
    load,
    match_ends,
    measured_records,
    store,
)
from .config import load_design
from .evolution import DeConfig
from .geomap import locate_event
from .harness import (
    SEQUENCES,
    all_subsets,
    load_measured,
    run_sequence,
    summarize,
    write_report,
)
from .separator import PEARSON_THRESHOLD, separate
from .traceio import (
    export_channels,
    export_overlay,
    format_number,
    read_trace,
    write_trace,
)
from .waveform import default_y0, simulate_network

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2

CALIBRATION_REPORT_HEADER = "code,branch,measured_km,design_km,diff_km,status"


def _integer(value: str, flag: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParameterError(
            "{} expects an integer, got {!r}".format(flag, value)
        )


def _number(value: str, flag: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParameterError(
            "{} expects a number, got {!r}".format(flag, value)
        )


def _pairs(spec: str, flag: str) -> List[Sequence[str]]:
    pairs = []
    for item in spec.split(","):
        key, separator, value = item.partition(":")
        if not separator:
            raise ParameterError(
                "{} expects id:value items, got {!r}".format(flag, item)
            )
        pairs.append((key.strip(), value.strip()))
    return pairs


def parse_y0(spec: Optional[str], design: NetworkDesign) -> List[float]:
    """The y0 vector of the connected branches, from the --y0 flag

    Raises:
        ParameterError: on malformed values, unknown or unplugged branches,
            or a plain vector of the wrong length
    """
    y0s = {
        branch_id: default_y0(design, branch_id)
        for branch_id in design.connected_ids
    }
    if not spec:
        return list(y0s.values())
    if ":" not in spec:
        values = [_number(value, "--y0") for value in spec.split(",")]
        if len(values) != len(y0s):
            raise ParameterError(
                "--y0 has {} values for {} connected branches".format(
                    len(values), len(y0s)
                )
            )
        return values
    for key, value in _pairs(spec, "--y0"):
        branch = design.branch(_integer(key, "--y0"))
        if not branch.connected:
            raise ParameterError("branch {} is not connected".format(branch.id))
        y0s[branch.id] = _number(value, "--y0")
    return list(y0s.values())


def _calibrated(design: NetworkDesign, args: dict) -> NetworkDesign:
    if not args["--calibration"]:
        return design
    return apply_calibration(design, load(args["--calibration"]))


def simulate_command(args: dict) -> int:
    design, settings = load_design(args["<design>"])
    design = _calibrated(design, args)
    noise = _number(args["--noise"], "--noise")
    seed = _integer(args["--seed"], "--seed")
    y0s = parse_y0(args["--y0"], design)
    trace = simulate_network(design, y0s, settings, noise, seed)
    write_trace(trace, args["<out>"])
    logger.info("wrote %d samples to %s", len(trace), args["<out>"])
    return EXIT_SUCCESS


def separate_command(args: dict) -> int:
    design, settings = load_design(args["<design>"])
    design = _calibrated(design, args)
    config = DeConfig(
        population_size=_integer(args["--pop"], "--pop"),
        generations=_integer(args["--gens"], "--gens"),
        crossover_rate=_number(args["--cr"], "--cr"),
        scale_factor=_number(args["--eta"], "--eta"),
        seed=_integer(args["--seed"], "--seed"),
        workers=_integer(args["--workers"], "--workers"),
    )
    measured = read_trace(args["<measured>"])
    result = separate(measured, design, settings, config)

    out_dir = Path(args["<out-dir>"])
    out_dir.mkdir(parents=True, exist_ok=True)
    names = ["{:02d}".format(branch_id) for branch_id in result.branch_ids]
    export_channels(result.per_channel_traces, names, out_dir)
    write_trace(result.fitted_aggregate, out_dir / "fitted.csv")
    export_overlay(
        measured,
        result.fitted_aggregate,
        result.per_channel_traces,
        out_dir / "overlay.csv",
        ["channel_" + name for name in names],
    )

    lines = [
        "branch {:02d} ({}): y0 {} dB".format(
            branch_id, design.branch(branch_id).label, format_number(y0)
        )
        for branch_id, y0 in zip(result.branch_ids, result.y0_per_channel)
    ]
    lines += [
        "pearson: {}".format(format_number(result.pearson)),
        "sse: {}".format(format_number(result.residual_sse)),
        "generations: {}".format(result.generations_used),
        "elapsed_s: {:.3f}".format(result.elapsed),
        "status: {}".format(
            "ok" if result.success else "below {}".format(PEARSON_THRESHOLD)
        ),
    ]
    for first, second in result.ambiguous:
        lines.append("ambiguous: {:02d} {:02d}".format(first, second))
    summary = "\n".join(lines) + "\n"
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    return EXIT_SUCCESS if result.success else EXIT_FAILURE


def sequence_command(args: dict) -> int:
    design, settings = load_design(args["<design>"])
    name = args["<name>"]
    if name.lower() == "all":
        spec = all_subsets(design.splitter_ratio)
    elif name.upper() in SEQUENCES:
        spec = SEQUENCES[name.upper()]
    else:
        raise ParameterError(
            "unknown sequence {!r} (choose A, B, C or all)".format(name)
        )
    if args["--measured"]:
        measured = load_measured(args["--measured"], spec, settings)
        reports = run_sequence(spec, design, settings, measured=measured)
    else:
        y0_truth = {
            branch.id: default_y0(design, branch.id)
            for branch in design.branches
        }
        reports = run_sequence(spec, design, settings, y0_truth)
    write_report(reports, args["<report>"])
    sys.stdout.write(summarize(spec.name, reports))
    if all(report.passed for report in reports):
        return EXIT_SUCCESS
    return EXIT_FAILURE


def _measured_lengths(
    args: dict, design: NetworkDesign
) -> Tuple[Dict[int, float], List[int]]:
    """Lengths from the --length, --trace and --aggregate flags, and the
    branches whose --trace shows no fiber end"""
    lengths = {}  # type: Dict[int, float]
    missing = []  # type: List[int]
    for spec in args["--length"]:
        for key, value in _pairs(spec, "--length"):
            branch = design.branch(_integer(key, "--length"))
            lengths[branch.id] = _number(value, "--length")

    for spec in args["--trace"]:
        key, separator, path = spec.partition(":")
        if not separator:
            raise ParameterError("--trace expects branch:path")
        branch = design.branch(_integer(key, "--trace"))
        ends = detect_fiber_end(read_trace(path), design.splitter_position)
        matched = match_ends(ends, design.with_connected([branch.id]))
        if branch.id not in matched:
            logger.error("no fiber end found on %s", path)
            missing.append(branch.id)
            continue
        lengths[branch.id] = matched[branch.id]

    if args["--aggregate"]:
        ends = detect_fiber_end(
            read_trace(args["--aggregate"]), design.splitter_position
        )
        matched = match_ends(ends, design)
        if not matched:
            logger.error("no fiber end found on %s", args["--aggregate"])
        for branch_id, length in matched.items():
            lengths.setdefault(branch_id, length)
    return lengths, [i for i in missing if i not in lengths]


def calibrate_command(args: dict) -> int:
    design, _ = load_design(args["<design>"])
    if args["--date"]:
        try:
            date = datetime.date.fromisoformat(args["--date"])
        except ValueError:
            raise ParameterError("--date expects YYYY-MM-DD")
    else:
        date = datetime.date.today()
    tolerance = _number(args["--tolerance"], "--tolerance")
    if not (args["--length"] or args["--trace"] or args["--aggregate"]):
        raise ParameterError("give --length, --trace or --aggregate")

    lengths, missing = _measured_lengths(args, design)
    if not lengths:
        return EXIT_FAILURE

    planned = {record.branch: record for record in design_records(design, date)}
    field = measured_records(design, lengths, date)
    rows = [CALIBRATION_REPORT_HEADER]
    all_calibrated = True
    for record in field:
        diff = compare(record, planned[record.branch])
        calibrated = diff.calibrated(tolerance)
        all_calibrated = all_calibrated and calibrated
        rows.append(
            "{},{:02d},{:.4f},{:.4f},{:.4f},{}".format(
                diff.code,
                record.branch,
                diff.measured,
                diff.design,
                diff.diff,
                "calibrated" if calibrated else "differs",
            )
        )
    for branch_id in missing:
        rows.append(
            "{},{:02d},,{:.4f},,no end found".format(
                design.branch(branch_id).label,
                branch_id,
                design.branch(branch_id).length,
            )
        )
    all_calibrated = all_calibrated and not missing
    rows.append("calibrated" if all_calibrated else "not calibrated")
    Path(args["<report>"]).write_text(
        "\n".join(rows) + "\n", encoding="utf-8", newline="\n"
    )
    store(field, args["<db>"])
    sys.stdout.write(rows[-1] + "\n")
    return EXIT_FAILURE if missing else EXIT_SUCCESS


def locate_command(args: dict) -> int:
    design, _ = load_design(args["<design>"])
    first, second = locate_event(
        design,
        _integer(args["<branch>"], "<branch>"),
        _number(args["<distance>"], "<distance>"),
    )
    sys.stdout.write(
        "{},{}\n".format(format_number(first), format_number(second))
    )
    return EXIT_SUCCESS


COMMANDS = {
    "simulate": simulate_command,
    "separate": separate_command,
    "sequence": sequence_command,
    "calibrate": calibrate_command,
    "locate": locate_command,
}


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line. Returns the exit code."""
    try:
        args = docopt(__doc__, argv=argv, version=__version__)
    except DocoptExit as usage:
        sys.stderr.write(str(usage) + "\n")
        return EXIT_INVALID
    _configure_logging(args.get("--verbose") or 0)

    command = next(name for name in COMMANDS if args[name])
    try:
        return COMMANDS[command](args)
    except (OtdrSplitError, OSError) as error:
        logger.error("%s", error)
        return EXIT_INVALID


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
