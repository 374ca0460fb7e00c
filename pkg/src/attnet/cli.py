"""Command-line pipeline: ``build``, ``metrics``, ``backbone``, ``report``, ``synth``.

Exit codes: 0 success, 2 usage or input error, 3 data-quality failure.
Every command writes a ``manifest_<command>.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys

from . import __version__
from .attention import (HashtagSource, compute_user_metrics, hashtag_profiles, jaccard_comparison,
                        read_metrics, social_attention, write_metrics)
from .backbone import Orientation, alpha_sweep, default_grid, edge_significance, extract_backbone, write_sweep
from .events import IngestError, TimeWindow, filter_window, parse_events, parse_follow_edges
from .networks import (NODE_COLUMNS, RetweetNetwork, activity_counts, build_follower_network,
                       build_retweet_network, node_table, read_follower_network, read_retweet_network,
                       write_follower_network, write_retweet_network)
from .report import ActivityBins, write_report
from .synth import SynthConfig, generate, write_dataset

log = logging.getLogger("attnet")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class UsageError(Exception):
    pass


class DataQualityError(Exception):
    pass


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _require(path: str) -> str:
    if not os.path.exists(path):
        raise UsageError(f"no such file or directory: {path}")
    return path


def _open_out(out_dir: str, name: str):
    return open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n")


def write_manifest(out_dir: str, command: str, inputs: dict[str, str], outputs: list[str],
                   window: TimeWindow | None, flags: dict, seed: int | None) -> None:
    """Record what is needed to rerun ``command``; runtime-only flags such as threads are left out.

    Input paths are stored relative to ``out_dir``.
    """
    manifest = {
        "tool": "attnet",
        "version": __version__,
        "command": command,
        "inputs": {role: {"path": os.path.relpath(p, out_dir), "sha256": _sha256(p) if os.path.isfile(p) else None}
                   for role, p in sorted(inputs.items())},
        "window": None if window is None else {"from": window.start, "to": window.end},
        "flags": flags,
        "seed": seed,
        "outputs": {name: _sha256(os.path.join(out_dir, name)) for name in sorted(outputs)},
    }
    with _open_out(out_dir, f"manifest_{command}.json") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _window(args) -> TimeWindow | None:
    try:
        return TimeWindow.from_bounds(args.start, args.end)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_events(path: str, fmt: str, threads: int, max_reject: float):
    try:
        events, report = parse_events(path, fmt, threads=threads)
    except IngestError as exc:
        raise UsageError(str(exc)) from None
    if report.rejected:
        log.warning("%s: rejected %d of %d lines; first reasons: %s",
                    path, report.rejected, report.read, "; ".join(report.reasons))
    if report.reject_fraction > max_reject:
        raise DataQualityError(
            f"{path}: {report.reject_fraction:.2%} of lines rejected (limit {max_reject:.2%})")
    return events, report


def cmd_build(args) -> None:
    _require(args.events)
    _require(args.follows)
    window = _window(args)
    events, ev_report = _load_events(args.events, args.format, args.threads, args.max_reject)
    try:
        edges, f_report = parse_follow_edges(args.follows)
    except IngestError as exc:
        raise UsageError(str(exc)) from None
    if f_report.rejected:
        log.warning("%s: rejected %d follower lines", args.follows, f_report.rejected)
    if f_report.reject_fraction > args.max_reject:
        raise DataQualityError(f"{args.follows}: {f_report.reject_fraction:.2%} of lines rejected")

    f = build_follower_network(edges)
    events = filter_window(events, window)
    rn = build_retweet_network(f, events, threads=args.threads)
    activity = activity_counts(events)

    os.makedirs(args.out, exist_ok=True)
    with _open_out(args.out, "follower.csv") as fh:
        write_follower_network(f, fh)
    with _open_out(args.out, "retweet.csv") as fh:
        write_retweet_network(rn, fh)
    with _open_out(args.out, "nodes.csv") as fh:
        fh.write(",".join(NODE_COLUMNS) + "\n")
        for row in node_table(f, rn, activity):
            fh.write(",".join(str(x) for x in row) + "\n")
    with _open_out(args.out, "parse_report.json") as fh:
        json.dump({"events": ev_report.as_dict(), "follows": f_report.as_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(args.out, "build", {"events": args.events, "follows": args.follows},
                   ["follower.csv", "retweet.csv", "nodes.csv", "parse_report.json"], window,
                   {"format": args.format, "max_reject": args.max_reject}, None)
    log.info("follower edges %d, retweet edges %d", f.n_edges, rn.n_edges)


def _network_window(network_dir: str) -> TimeWindow | None:
    path = os.path.join(network_dir, "manifest_build.json")
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        w = json.load(fh).get("window")
    return None if w is None else TimeWindow(w["from"], w["to"])


def _load_networks(network_dir: str):
    _require(network_dir)
    try:
        with open(_require(os.path.join(network_dir, "follower.csv"))) as fh:
            f = read_follower_network(fh)
        with open(_require(os.path.join(network_dir, "retweet.csv"))) as fh:
            rn = read_retweet_network(fh)
    except ValueError as exc:
        raise UsageError(f"malformed network file in {network_dir}: {exc}") from None
    return f, rn


def cmd_metrics(args) -> None:
    f, rn = _load_networks(args.network)
    _require(args.events)
    window = _window(args) or _network_window(args.network)
    events, _ = _load_events(args.events, args.format, args.threads, args.max_reject)
    events = filter_window(events, window)

    stray = [(u, v) for u, v, _ in rn.edges() if not f.has_edge(u, v)]
    if stray:
        log.warning("%d retweet links missing from the follower network; dropping them", len(stray))
        kept = {u: {v: w for v, w in t.items() if f.has_edge(u, v)} for u, t in rn.out.items()}
        rn = RetweetNetwork({u: t for u, t in kept.items() if t})
    universe = f.nodes | rn.nodes
    outside = {e.user_id for e in events} - universe
    if outside:
        log.warning("%d event users are absent from the networks; their rows are omitted", len(outside))

    source = HashtagSource.ALL_POSTS if args.hashtag_source == "all" else HashtagSource.RETWEETS_ONLY
    metrics = compute_user_metrics(f, rn, events, hashtag_source=source,
                                   kappa_s_hapaxes=not args.kappa_s_no_hapax, users=universe)
    out = args.out or args.network
    os.makedirs(out, exist_ok=True)
    outputs = ["metrics.csv"]
    with _open_out(out, "metrics.csv") as fh:
        write_metrics(metrics, fh)

    if len(rn.nodes) >= 2 and rn.n_edges:
        profiles = hashtag_profiles(events, source)
        tag_sets = {u: set(p.counts) for u, p in profiles.items()}
        comp = jaccard_comparison(rn, tag_sets, args.jaccard_samples, seed=args.seed)
        with _open_out(out, "jaccard.csv") as fh:
            fh.write("pairs,jaccard,cdf\n")
            for label, dist in (("connected", comp.connected_cdf), ("random", comp.random_cdf)):
                for v, c in dist:
                    fh.write(f"{label},{v!r},{c!r}\n")
        outputs.append("jaccard.csv")
    write_manifest(out, "metrics",
                   {"events": args.events, "follower": os.path.join(args.network, "follower.csv"),
                    "retweet": os.path.join(args.network, "retweet.csv")},
                   outputs, window,
                   {"hashtag_source": source.value, "kappa_s_hapaxes": not args.kappa_s_no_hapax,
                    "jaccard_samples": args.jaccard_samples, "format": args.format}, args.seed)


def _alpha_value(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {v}")
    return v


def _grid(text: str) -> list[float]:
    return [_alpha_value(x) for x in text.split(",") if x.strip()]


def cmd_backbone(args) -> None:
    _f, rn = _load_networks(args.network)
    if rn.n_edges == 0:
        raise UsageError("retweet network is empty")
    orientation = Orientation(args.orientation)
    attention_side = args.attention or ("in" if orientation is Orientation.INCOMING else "out")
    out = args.out or args.network
    os.makedirs(out, exist_ok=True)
    outputs = []
    flags = {"orientation": orientation.value, "attention": attention_side}

    if args.sweep is not None:
        grid = args.sweep or default_grid()
        result = alpha_sweep(rn, social_attention(rn, attention_side), grid, orientation)
        with _open_out(out, "sweep.csv") as fh:
            write_sweep(result, fh)
        outputs.append("sweep.csv")
        with _open_out(out, "best_alpha.json") as fh:
            json.dump({"best_alpha": result.best_alpha}, fh)
            fh.write("\n")
        outputs.append("best_alpha.json")
        flags["grid"] = grid
        alpha = result.best_alpha
        print(f"best_alpha={result.best_alpha}")
    else:
        alpha = args.alpha
    flags["alpha"] = alpha

    if alpha is not None:
        bb = extract_backbone(rn, alpha, orientation)
        with _open_out(out, "backbone.csv") as fh:
            write_retweet_network(bb.as_network(), fh)
        outputs.append("backbone.csv")
        with _open_out(out, "significance.csv") as fh:
            fh.write("u,v,w,p,alpha_ij\n")
            for e in edge_significance(rn, orientation):
                fh.write(f"{e.u},{e.v},{e.w},{e.p!r},{e.alpha_ij!r}\n")
        outputs.append("significance.csv")
    write_manifest(out, "backbone", {"retweet": os.path.join(args.network, "retweet.csv")},
                   outputs, None, flags, None)


def cmd_report(args) -> None:
    _require(args.metrics)
    try:
        with open(args.metrics) as fh:
            metrics = read_metrics(fh)
    except ValueError as exc:
        raise UsageError(f"malformed metrics file {args.metrics}: {exc}") from None
    os.makedirs(args.out, exist_ok=True)
    outputs = write_report(metrics, args.bins, args.out, args.bins_per_decade)
    write_manifest(args.out, "report", {"metrics": args.metrics}, outputs, None,
                   {"bins": list(args.bins.boundaries), "bins_per_decade": args.bins_per_decade}, None)


def cmd_synth(args) -> None:
    _require(args.config)
    try:
        config = SynthConfig.from_json(args.config)
        if args.seed_given:
            config.seed = args.seed
        ds = generate(config)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid synth config: {exc}") from None
    paths = write_dataset(ds, args.out)
    write_manifest(args.out, "synth", {"config": args.config}, [os.path.basename(p) for p in paths.values()],
                   None, {}, config.seed)


def _bins(text: str) -> ActivityBins:
    try:
        return ActivityBins.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"attnet {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (runtime only)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    parser.add_argument("--out", default=None, help="output directory")

    # Same global flags after the subcommand; SUPPRESS keeps values given before it.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (runtime only)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--from", dest="start", type=int, default=None, help="window start (epoch s, inclusive)")
    window.add_argument("--to", dest="end", type=int, default=None, help="window end (epoch s, exclusive)")

    events = argparse.ArgumentParser(add_help=False)
    events.add_argument("--events", required=True, help="event log (JSONL or CSV)")
    events.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    events.add_argument("--max-reject", type=float, default=0.01,
                        help="largest tolerated fraction of malformed lines (default 0.01)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common, window, events], help="build follower and retweet networks")
    p.add_argument("--follows", required=True, help="headerless follower,followee CSV")
    p.set_defaults(func=cmd_build, needs_out=True)

    p = sub.add_parser("metrics", parents=[common, window, events], help="per-user attention metrics")
    p.add_argument("--network", required=True, help="directory written by 'build'")
    p.add_argument("--hashtag-source", choices=["retweets", "all"], default="retweets")
    p.add_argument("--kappa-s-no-hapax", action="store_true", help="exclude hapaxes from kappa_s")
    p.add_argument("--jaccard-samples", type=int, default=None, help="random pairs (default: edge count)")
    p.set_defaults(func=cmd_metrics, needs_out=False)

    p = sub.add_parser("backbone", parents=[common], help="disparity-filter backbone and alpha sweep")
    p.add_argument("--network", required=True, help="directory written by 'build'")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--alpha", type=_alpha_value, help="single significance level in (0, 1)")
    mode.add_argument("--sweep", type=_grid, nargs="?", const=[],
                      help="comma-separated alpha grid (default 0.025..0.975 step 0.025)")
    p.add_argument("--orientation", choices=[o.value for o in Orientation], default="incoming",
                   help="endpoint at which link shares are evaluated")
    p.add_argument("--attention", choices=["in", "out"], default=None,
                   help="side of the attentional degree (default: matches orientation)")
    p.set_defaults(func=cmd_backbone, needs_out=False)

    p = sub.add_parser("report", parents=[common], help="distributions, quadrants, binned correlations")
    p.add_argument("--metrics", required=True, help="metrics.csv written by 'metrics'")
    p.add_argument("--bins", type=_bins, default=ActivityBins(), help="activity bin boundaries, e.g. 1,40,200,600,6107")
    p.add_argument("--bins-per-decade", type=int, default=10, help="log10 heatmap resolution")
    p.set_defaults(func=cmd_report, needs_out=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--config", required=True, help="JSON synth configuration")
    p.set_defaults(func=cmd_synth, needs_out=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    if args.threads < 1:
        print("attnet: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.needs_out and not args.out:
        print(f"attnet: error: {args.command} requires --out", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"attnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataQualityError as exc:
        print(f"attnet: data quality: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
