"""Command line entry point: ``vanet-safety {ps,radius,sim,sweep,validate}``.

Exit codes: 0 success, 1 usage or input error, 2 a validation check failed.
"""
from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import RATE_TABLE, fading_from, read_config, resolve_beta, scenario_from_values, scenario_snapshot
from .errors import VanetError
from .mac import (CsConfig, LinkScenario, asyncize, ps_carrier_sense, ps_nakagami_laplace,
                  ps_nakagami_mc, ps_rayleigh_exact)
from .propagation import FadingKind, FadingModel, PathLoss, interference_radius
from .results import RunManifest, emit_results
from .safety import DEFAULT_P_GRID, Scheme, estimate_collision_probability, sweep_channel_access


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _values(args) -> dict:
    """Config-file values overlaid with whichever radio flags were given."""
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for flag, key in (("alpha", "alpha"), ("beta_db", "beta_db"), ("rate", "rate_mbps"),
                      ("fading", "fading"), ("m", "m"), ("scheme", "scheme"),
                      ("slot_mode", "slot_mode"), ("r_cs", "r_cs"), ("p", "access"),
                      ("p_tr", "p_tr"), ("spacing", "spacing")):
        val = getattr(args, flag, None)
        if val is not None:
            values[key] = val
    if getattr(args, "beta_db", None) is not None:
        values.pop("beta", None)
    if getattr(args, "approx_async", False):
        values["approx_async"] = True
    return values


def _radio_flags(p):
    p.add_argument("--config", help="scenario file (key = value)")
    p.add_argument("--alpha", type=float, help="path-loss exponent")
    p.add_argument("--beta-db", type=float, help="SIR threshold in dB")
    p.add_argument("--rate", type=float, choices=sorted(RATE_TABLE), help="data rate (Mbit/s); sets the threshold from the rate table")
    p.add_argument("--fading", choices=("none", "rayleigh", "nakagami"))
    p.add_argument("--m", type=int, help="Nakagami shape")


def cmd_radius(args):
    values = _values(args)
    alpha = values.get("alpha", 2.0)
    r_i = interference_radius(args.r, resolve_beta(values), PathLoss(alpha), fading_from(values))
    print(f"r_I = {r_i:.2f} m")
    return 0


def _link(args, values):
    beta = resolve_beta(values)
    pl = PathLoss(values.get("alpha", 2.0))
    fading = fading_from(values)
    p = values.get("access", 0.05)
    if args.interferer:
        pairs = []
        for item in args.interferer:
            try:
                d, q = (float(x) for x in item.split(":"))
            except ValueError:
                raise UsageError(f"--interferer expects DIST:P, got {item!r}") from None
            pairs.append((d, q))
        r = args.r if args.r is not None else values.get("spacing", 25.0)
        return LinkScenario.from_pairs(r, pairs, beta=beta, pathloss=pl, fading=fading)
    spacing = values.get("spacing", 25.0)
    n = args.vehicles if args.vehicles is not None else values.get("n", 25)
    if not 1 <= args.rx < n:
        raise UsageError("--rx must index a vehicle behind the transmitter")
    ks = [k for k in range(1, n) if k != args.rx]
    return LinkScenario.on_lane(np.array(ks) * spacing, args.rx * spacing, p,
                                beta=beta, pathloss=pl, fading=fading)


def cmd_ps(args):
    values = _values(args)
    link = _link(args, values)
    scheme = values.get("scheme", "independent")
    slot_mode = values.get("slot_mode", "async")
    approx = values.get("approx_async", False)
    if scheme == "cs":
        if link.lane is None:
            raise UsageError("carrier sensing needs a lane geometry; drop --interferer")
        p_t = values.get("p_tr")
        p_t = values.get("access", 0.05) if p_t is None else p_t
        r_cs = values.get("r_cs")
        if r_cs is None:
            r_cs = link.r + interference_radius(link.r, link.beta, link.pathloss, link.fading)
        est = ps_carrier_sense(link, CsConfig(r_cs, slot_mode, p_t, approx_async=approx))
        print(f"P_s = {est.value:.6f}")
        return 0
    if slot_mode == "async":
        link = link.with_probs(asyncize(np.asarray(link.probs), approx=approx))
    if args.samples or link.fading.kind is FadingKind.NONE:
        samples = args.samples or 100_000
        est = ps_nakagami_mc(link, samples, np.random.default_rng(args.seed))
        print(f"P_s = {est.value:.6f} +/- {est.std_error:.6f} ({samples} samples)")
    elif link.fading.is_rayleigh:
        print(f"P_s = {ps_rayleigh_exact(link):.6f}")
    else:
        print(f"P_s = {ps_nakagami_laplace(link):.6f}")
    return 0


def _scenario(args):
    values = _values(args)
    if values.get("fading") == "none":
        raise UsageError("the chain experiment needs Nakagami-m fading")
    return scenario_from_values(values)


def cmd_sim(args):
    sc = _scenario(args)
    mean, ci = estimate_collision_probability(sc, args.trials, args.seed, args.workers)
    print(f"mean_collision_prob = {mean:.6f} +/- {ci:.6f} ({args.trials} trials, p = {sc.access}, scheme = {sc.scheme.value})")
    return 0


def _grid(text):
    if text is None:
        return list(DEFAULT_P_GRID)
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        k = int(round((hi - lo) / step))
        return [round(lo + i * step, 10) for i in range(k + 1)]
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args):
    sc = _scenario(args)
    grid = _grid(args.grid)
    schemes = [Scheme(s) for s in args.schemes.split(",")]
    if args.fadings:
        fadings = [FadingModel.nakagami(int(m)) for m in args.fadings.split(",")]
    else:
        fadings = [sc.fading]
    result = sweep_channel_access(sc, grid, args.trials, args.seed, schemes, fadings, args.workers)
    manifest = RunManifest(
        config=scenario_snapshot(sc), seed=args.seed, trials=args.trials, p_grid=grid,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds") if args.stamp else None,
    )
    text = emit_results(result, manifest, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_validate(args):
    from .validation import run_all

    failed = 0
    for name, passed, detail in run_all():
        print(f"{'PASS' if passed else 'FAIL'}  {name}  ({detail})")
        failed += not passed
    return 2 if failed else 0


def build_parser():
    parser = _Parser(prog="vanet-safety", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ps", help="packet success probability of one link")
    _radio_flags(p)
    p.add_argument("--scheme", choices=("independent", "cs"))
    p.add_argument("--slot-mode", choices=("sync", "async"))
    p.add_argument("--approx-async", action="store_true", help="use 2p for unsynchronised interferers")
    p.add_argument("--r-cs", type=float, help="carrier-sensing radius (default r + r_I)")
    p.add_argument("--p", type=float, help="access probability of every vehicle")
    p.add_argument("--p-tr", type=float, help="transmitter access probability (default --p)")
    p.add_argument("--spacing", type=float)
    p.add_argument("--vehicles", type=int, help="lane length in vehicles, transmitter first")
    p.add_argument("--rx", type=int, default=1, help="receiver index on the lane")
    p.add_argument("--r", type=float, help="link length for --interferer mode")
    p.add_argument("--interferer", action="append", metavar="DIST:P",
                   help="explicit interferer (distance to receiver and access probability)")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo samples (0: exact where available)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ps)

    p = sub.add_parser("radius", help="interference radius r_I")
    _radio_flags(p)
    p.add_argument("--r", type=float, default=25.0, help="link length in m")
    p.set_defaults(func=cmd_radius)

    for name, func, help_ in (("sim", cmd_sim, "collision probability at one access probability"),
                              ("sweep", cmd_sweep, "collision probability versus access probability")):
        p = sub.add_parser(name, help=help_)
        _radio_flags(p)
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--slot-mode", choices=("sync", "async"))
        p.add_argument("--approx-async", action="store_true")
        p.add_argument("--r-cs", type=float)
        p.add_argument("--p-tr", type=float)
        if name == "sim":
            p.add_argument("--p", type=float, help="access probability of every vehicle")
            p.add_argument("--scheme", choices=("independent", "cs"))
        else:
            p.add_argument("--grid", help="LO:HI:STEP or comma list (default 0.01:0.20:0.01)")
            p.add_argument("--schemes", default="independent,cs")
            p.add_argument("--fadings", help="comma list of Nakagami m values (default: config fading)")
            p.add_argument("--format", choices=("csv", "json"), default="csv")
            p.add_argument("--out", help="output file (default stdout)")
            p.add_argument("--stamp", action="store_true", help="record a timestamp in the manifest")
        p.set_defaults(func=func)

    p = sub.add_parser("validate", help="run the oracle cross-checks")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, VanetError, ValueError, OSError) as exc:
        print(f"vanet-safety: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
