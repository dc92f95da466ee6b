"""Command-line front end: ``tmdsim <subcommand> [options]``.

Every subcommand writes CSV (stdout or ``--output``). Unless
``--no-manifest`` is given, the CSV is preceded by one ``#`` comment line
holding a JSON manifest with the resolved parameters and a SHA-256 of the
CSV body. Dimensional flags need an explicit unit suffix (``9ps``,
``100kHz``, ``10ns``, ``0.05dB``, ``0.2dB/km``).
"""
import argparse
from dataclasses import asdict
from datetime import datetime, timezone
import hashlib
import io
import json
import re
import sys

import numpy as np

from . import __version__, analysis, dispersion, kernels, oracle
from .core_math import DomainError
from .model import PhotonStatistics, TmdConfig, click_statistics, surviving_statistics, total_efficiency

# unit -> factor to the canonical unit of each kind
UNITS = {
    "time": {"fs": 1e-15, "ps": 1e-12, "ns": 1e-9, "us": 1e-6, "µs": 1e-6, "ms": 1e-3, "s": 1.0},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "wavelength": {"nm": 1.0, "um": 1e3, "µm": 1e3},
    "db": {"dB": 1.0},
    "db_per_km": {"dB/km": 1.0, "dB/m": 1e3},
    "dispersion": {"ps/nm/km": 1.0, "ps/(nm*km)": 1.0, "ps/(nm km)": 1.0, "ps/nm.km": 1.0},
    "speed": {"m/s": 1.0, "km/s": 1e3},
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S.*?)?\s*$")


def quantity(kind):
    table = UNITS[kind]

    def parse(text):
        match = _QUANTITY.match(str(text))
        if not match:
            raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a quantity")
        number, unit = match.groups()
        if unit is None:
            raise argparse.ArgumentTypeError(
                f"{text!r} needs a unit suffix, one of: {', '.join(table)}")
        if unit not in table:
            raise argparse.ArgumentTypeError(
                f"unknown unit {unit!r} in {text!r}; expected one of: {', '.join(table)}")
        return float(number) * table[unit]

    parse.__name__ = kind
    return parse


def fraction(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} is not in [0, 1]")
    return value


def non_negative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be >= 0")
    return value


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        number = float(text)  # allows 1e6
        if not number.is_integer():
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
        value = int(number)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be >= 1")
    return value


def _common(p):
    p.add_argument("--config", metavar="FILE", help="key = value file; flags override it")
    p.add_argument("-o", "--output", metavar="PATH", help="write CSV here instead of stdout")
    p.add_argument("--no-manifest", action="store_true", help="omit the manifest comment line")


def _geometry(p):
    g = p.add_argument_group("detector")
    g.add_argument("--eta-ex", type=fraction, default=1.0,
                   help="setup and detection efficiency outside the network")
    g.add_argument("--dead-time", type=quantity("time"), default="10ns",
                   help="detector dead time = bin spacing (default 10ns)")
    g.add_argument("--splitter-loss", type=quantity("db"), default="0.05dB")
    g.add_argument("--fiber-loss", type=quantity("db_per_km"), default="0.2dB/km")
    g.add_argument("--fiber-speed", type=quantity("speed"), default="2e8m/s")
    g.add_argument("--ideal-geometry", action="store_true",
                   help="zero splitter and fiber losses inside the network")


def build_parser():
    parser = argparse.ArgumentParser(prog="tmdsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    subs = {}

    p = subs["dispersion-map"] = sub.add_parser(
        "dispersion-map", help="dispersion-limited bin count over rep rate and pulse width")
    _common(p)
    p.add_argument("--tau", type=quantity("time"), action="append",
                   help="input pulse FWHM; repeatable (overrides the tau grid)")
    p.add_argument("--rep-rate", type=quantity("frequency"), action="append",
                   help="repetition rate; repeatable (overrides the rate grid)")
    p.add_argument("--tau-min", type=quantity("time"), default="0.1ps")
    p.add_argument("--tau-max", type=quantity("time"), default="10ps")
    p.add_argument("--tau-points", type=positive_int, default=100)
    p.add_argument("--rep-rate-min", type=quantity("frequency"), default="1kHz")
    p.add_argument("--rep-rate-max", type=quantity("frequency"), default="1MHz")
    p.add_argument("--rep-rate-points", type=positive_int, default=61)
    p.add_argument("--wavelength", type=quantity("wavelength"), default="1550nm")
    p.add_argument("--dispersion", type=quantity("dispersion"), default="18ps/nm/km")
    p.add_argument("--fiber-speed", type=quantity("speed"), default="2e8m/s")
    p.add_argument("--chirp-speed", type=quantity("speed"), default=None,
                   help="light speed in the GDD conversion (default: fiber speed)")

    p = subs["click-stats"] = sub.add_parser("click-stats", help="click distribution of one state")
    _common(p)
    state = p.add_mutually_exclusive_group()
    state.add_argument("--fock", type=non_negative_int, help="Fock state photon number")
    state.add_argument("--state", metavar="P0,P1,...",
                       help="photon-number distribution, comma separated")
    p.add_argument("--bins-exponent", type=non_negative_int, default=8, help="stages b, N = 2**b")
    p.add_argument("--loss-only", action="store_true",
                   help="report surviving photon numbers, skip the binning")
    _geometry(p)

    p = subs["overlap-sweep"] = sub.add_parser(
        "overlap-sweep", help="overlap of two Fock states versus bin count")
    _common(p)
    p.add_argument("--n1", type=non_negative_int, default=15)
    p.add_argument("--n2", type=non_negative_int, default=20)
    p.add_argument("--b-min", type=positive_int, default=1)
    p.add_argument("--b-max", type=positive_int, default=analysis.DEFAULT_B_MAX)
    _geometry(p)

    p = subs["optimal-bins"] = sub.add_parser(
        "optimal-bins", help="overlap-minimising bin count for Fock pairs (n, n+s)")
    _common(p)
    p.add_argument("--separation", type=int, choices=(1, 2, 4), default=1)
    p.add_argument("--n-max", type=positive_int, default=20,
                   help="largest photon number in any pair")
    p.add_argument("--b-max", type=positive_int, default=analysis.DEFAULT_B_MAX)
    _geometry(p)

    p = subs["recon-scan"] = sub.add_parser(
        "recon-scan", help="overlap of |n> with neighbouring Fock states")
    _common(p)
    p.add_argument("--fock", type=non_negative_int, default=5, help="centre photon number")
    p.add_argument("--bins-exponent", type=non_negative_int, default=8)
    p.add_argument("--delta-min", type=int, default=None,
                   help="default: -10, or -n if the centre is below 10")
    p.add_argument("--delta-max", type=int, default=10)
    p.add_argument("--level", type=float, default=0.5, help="width level, fraction of peak")
    _geometry(p)

    p = subs["mc-validate"] = sub.add_parser(
        "mc-validate", help="Monte-Carlo check of a Fock click distribution")
    _common(p)
    p.add_argument("--fock", type=non_negative_int, default=10)
    p.add_argument("--bins-exponent", type=non_negative_int, default=4)
    p.add_argument("--samples", type=positive_int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=positive_int, default=1)
    _geometry(p)

    return parser, subs


# --- config file -------------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _config_defaults(subparser, values):
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, text in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            continue
        if isinstance(action, argparse._StoreTrueAction):
            low = text.lower()
            if low not in _TRUE | _FALSE:
                raise DomainError(f"config key {key!r} needs a boolean, got {text!r}")
            defaults[key] = low in _TRUE
            continue
        convert = action.type or str
        try:
            if isinstance(action, argparse._AppendAction):
                defaults[key] = [convert(item) for item in text.split(",") if item.strip()]
            else:
                defaults[key] = convert(text)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise DomainError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and defaults[key] not in action.choices:
            raise DomainError(f"config key {key!r} must be one of {list(action.choices)}")
    return defaults


def _parse(argv):
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        values = read_config(known.config)
        every = {a.dest for sp in subs.values() for a in sp._actions}
        unknown = sorted(set(values) - every)
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(unknown)}")
        command = next((a for a in argv if a in subs), None)
        if command is not None:
            subs[command].set_defaults(**_config_defaults(subs[command], values))
    return parser.parse_args(argv)


# --- subcommands --------------------------------------------------------------

def _tmd_config(args, stages=0):
    config = TmdConfig(stages=stages, dead_time=args.dead_time, splitter_loss=args.splitter_loss,
                       fiber_loss=args.fiber_loss, fiber_speed=args.fiber_speed,
                       eta_ex=args.eta_ex)
    return config.ideal() if args.ideal_geometry else config


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _cmd_dispersion_map(args):
    if args.rep_rate:
        rates = np.array(args.rep_rate)
    else:
        rates = np.logspace(np.log10(args.rep_rate_min), np.log10(args.rep_rate_max),
                            args.rep_rate_points)
    if args.tau:
        taus = np.array(args.tau) / dispersion.PS
    else:
        taus = np.linspace(args.tau_min, args.tau_max, args.tau_points) / dispersion.PS
    params = dispersion.DispersionParams(
        tau_in=1.0, rep_rate=1.0, wavelength=args.wavelength,
        dispersion_coeff=args.dispersion, fiber_speed=args.fiber_speed,
        chirp_speed=args.chirp_speed)
    table = dispersion.dispersion_map(rates, taus, params)
    rows = table.tolist()
    summary = {"max_n_max_bins": int(table["n_max_bins"].max())}
    return ("rep_rate_hz", "tau_in_ps", "n_max_bins"), rows, summary


def _input_state(args):
    if args.state is not None:
        try:
            probs = [float(x) for x in args.state.split(",")]
        except ValueError:
            raise DomainError(f"cannot parse --state {args.state!r}") from None
        return PhotonStatistics(probs)
    if args.fock is None:
        raise DomainError("click-stats needs --fock or --state")
    return PhotonStatistics.fock(args.fock)


def _cmd_click_stats(args):
    config = _tmd_config(args, args.bins_exponent)
    rho = _input_state(args)
    if args.loss_only:
        probs = surviving_statistics(rho, total_efficiency(config))
    else:
        probs = click_statistics(rho, config).probabilities
    rows = list(enumerate(probs.tolist()))
    summary = {"n_bins": config.n_bins, "total_efficiency": total_efficiency(config)}
    return ("k", "probability"), rows, summary


def _cmd_overlap_sweep(args):
    if args.b_min > args.b_max:
        raise DomainError("--b-min exceeds --b-max")
    base = _tmd_config(args)
    stages = range(args.b_min, args.b_max + 1)
    curves = [analysis.overlap_vs_bins(args.n1, args.n2, args.eta_ex, stages, mode, base)
              for mode in ("convolution_only", "loss_only", "combined")]
    rows = [(2 ** b,) + tuple(c.values[i] for c in curves) for i, b in enumerate(stages)]
    best = int(np.argmin(curves[2].values))
    summary = {"best_bins": 2 ** stages[best], "best_overlap": float(curves[2].values[best])}
    return ("bins", "overlap_convolution", "overlap_loss", "overlap_combined"), rows, summary


def _cmd_optimal_bins(args):
    if args.b_max > 20:
        raise DomainError("--b-max must be <= 20")
    rows = analysis.optimal_bins_sweep(args.separation, args.n_max, args.eta_ex,
                                       _tmd_config(args), args.b_max)
    summary = {"max_best_bins": max(r.best_bins for r in rows)}
    return ("n", "best_bins", "best_overlap"), [tuple(r) for r in rows], summary


def _cmd_recon_scan(args):
    lo = args.delta_min if args.delta_min is not None else max(-10, -args.fock)
    if lo > args.delta_max:
        raise DomainError("--delta-min exceeds --delta-max")
    curve = analysis.reconstruction_scan(args.fock, args.bins_exponent,
                                         range(lo, args.delta_max + 1), args.eta_ex,
                                         _tmd_config(args))
    summary = {}
    try:
        width = analysis.curve_width(curve, args.level)
        summary = {"width": width.width, "width_truncated": width.truncated}
    except DomainError as exc:
        summary = {"width": None, "width_error": str(exc)}
    return ("delta_n", "overlap"), list(zip(curve.abscissa.tolist(), curve.values.tolist())), summary


def _cmd_mc_validate(args):
    config = _tmd_config(args, args.bins_exponent)
    eta = total_efficiency(config)
    mc = oracle.mc_click_distribution(oracle.McConfig(
        samples=args.samples, seed=args.seed, n_photons=args.fock,
        n_bins=config.n_bins, eta=eta, workers=args.workers))
    exact = click_statistics(PhotonStatistics.fock(args.fock), config)
    size = max(len(mc), len(exact))
    a = np.pad(exact.probabilities, (0, size - len(exact)))
    b = np.pad(mc.probabilities, (0, size - len(mc)))
    tv = oracle.total_variation(a, b)
    print(f"total variation distance: {tv:.6g} ({args.samples} samples)", file=sys.stderr)
    rows = [(k, a[k], b[k]) for k in range(size)]
    return ("k", "probability_analytic", "probability_mc"), rows, {"total_variation": tv}


COMMANDS = {
    "dispersion-map": _cmd_dispersion_map,
    "click-stats": _cmd_click_stats,
    "overlap-sweep": _cmd_overlap_sweep,
    "optimal-bins": _cmd_optimal_bins,
    "recon-scan": _cmd_recon_scan,
    "mc-validate": _cmd_mc_validate,
}


def render_csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _manifest(args, argv, body, summary):
    params = {k: v for k, v in vars(args).items() if k not in ("output", "no_manifest")}
    return {
        "tool": "tmdsim",
        "version": __version__,
        "subcommand": args.command,
        "argv": list(argv),
        "parameters": params,
        "backend": kernels.BACKEND,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "sha256": hashlib.sha256(body.encode()).hexdigest(),
        "summary": summary,
    }


def split_manifest(text):
    """Split emitted text into (manifest dict or None, CSV body)."""
    if text.startswith("# "):
        first, _, body = text.partition("\n")
        return json.loads(first[2:]), body
    return None, text


def run(argv=None):
    """Run one subcommand; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    except (DomainError, OSError) as exc:
        print(f"tmdsim: error: {exc}", file=sys.stderr)
        return 2
    try:
        header, rows, summary = COMMANDS[args.command](args)
        body = render_csv(header, rows)
        text = body
        if not args.no_manifest:
            manifest = _manifest(args, argv, body, summary)
            text = "# " + json.dumps(manifest, sort_keys=True, default=_json_default) + "\n" + body
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (DomainError, OSError) as exc:
        print(f"tmdsim: error: {exc}", file=sys.stderr)
        return 2
    return 0


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def main():
    sys.exit(run())
