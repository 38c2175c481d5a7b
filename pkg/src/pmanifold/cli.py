"""Command-line pipeline.

Subcommands: generate | fit | embed | invert | metric | isomap | sweep.
Exit codes: 0 success, 2 usage error, 3 data/format error, 4
algorithmic failure; failures print a one-line diagnostic on stderr.
Identical configuration and seed always reproduce byte-identical
output files.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .datasets import GeneratorSpec, generate
from .errors import AlgorithmFailure, DataFormatError
from .geometry import PointCloud, ReferenceFrame
from .isomap import isomap
from .manifold import BuildConfig, PrincipalManifold, build_manifold
from .metrics import adjacency_distance, correlation_score, delta, fit_curve
from .slicing import SliceConfig

# Sweep protocols: noise-free roll over the smoothing weight, fixed-size
# rolls over the noise amplitude, and subsampled rolls over the density.
P_SWEEP_STEP = 0.01
NOISE_SWEEP_STEP = 0.015
NOISE_SWEEP_MAX = 1.035
DENSITY_SWEEP_RANGE = (500, 3500)
DENSITY_SWEEP_STEP = 40
P_FIT_WINDOW = 0.88


def _echo(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _parse_axis(text: str) -> np.ndarray:
    try:
        vec = np.asarray([float(v) for v in text.split(",")], dtype=float)
    except ValueError as exc:
        raise DataFormatError(f"invalid axis vector {text!r}") from exc
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise DataFormatError("axis vector must be nonzero")
    return vec / norm


def _frame_from_axes(cloud: PointCloud, axis1: str, axis2: str, spread: str) -> ReferenceFrame:
    v1 = _parse_axis(axis1)
    v2 = _parse_axis(axis2)
    if v1.size != cloud.d or v2.size != cloud.d:
        raise DataFormatError("axis vectors must match the data dimension")
    if abs(float(v1 @ v2)) > 1e-8:
        raise DataFormatError("axis vectors must be orthogonal")
    mu = cloud.points.mean(axis=0)
    centered = cloud.points - mu
    if spread == "half_extent":
        s1 = float(np.max(np.abs(centered @ v1)))
        s2 = float(np.max(np.abs(centered @ v2)))
    else:
        s1 = float(np.sqrt(np.mean((centered @ v1) ** 2)))
        s2 = float(np.sqrt(np.mean((centered @ v2) ** 2)))
    return ReferenceFrame(mu=mu, v1=v1, v2=v2, sigma1=s1, sigma2=s2)


def _cmd_generate(args) -> int:
    spec = GeneratorSpec(kind=args.kind, seed=args.seed, n=args.n, noise=args.noise,
                         agents=args.agents, steps=args.steps, rho=args.rho)
    cloud, truth = generate(spec)
    config = _echo(args)
    io.write_points_csv(args.out, cloud.points, config)
    if truth is not None:
        truth_path = args.truth_out or _default_truth_path(args.out)
        io.write_points_csv(truth_path, truth, config)
    return 0


def _default_truth_path(out: str) -> str:
    stem, dot, ext = out.rpartition(".")
    return f"{stem}_truth.{ext}" if dot else f"{out}_truth"


def _cmd_fit(args) -> int:
    cloud = io.read_points_csv(args.input)
    slice_config = SliceConfig(n_c1=args.nc[0], n_c2=args.nc[1],
                               min_subcluster_size=args.min_subcluster,
                               subcluster_radius_scale=args.radius_scale)
    build_config = BuildConfig(samples_per_spline=args.samples,
                               gap_threshold=args.gap_threshold,
                               origin_mode=args.origin,
                               origin_seed=args.seed,
                               spread=args.spread)
    frame = None
    if (args.axis1 is None) != (args.axis2 is None):
        raise DataFormatError("provide both --axis1 and --axis2 or neither")
    if args.axis1 is not None:
        frame = _frame_from_axes(cloud, args.axis1, args.axis2, args.spread)
    manifold = build_manifold(cloud, args.p, slice_config, build_config, frame=frame)
    payload = manifold.to_dict()
    payload["config"]["cli"] = _echo(args)
    io.write_json(args.out, payload)
    return 0


def _load_manifold(path: str) -> PrincipalManifold:
    return PrincipalManifold.from_dict(io.read_json(path))


def _cmd_embed(args) -> int:
    manifold = _load_manifold(args.manifold)
    cloud = io.read_points_csv(args.input)
    embedded = manifold.embed(cloud.points)
    io.write_points_csv(args.out, embedded, _echo(args))
    return 0


def _cmd_invert(args) -> int:
    manifold = _load_manifold(args.manifold)
    coords = io.read_points_csv(args.input)
    restored = manifold.invert(coords.points)
    io.write_points_csv(args.out, restored, _echo(args))
    return 0


def _cmd_metric(args) -> int:
    original = io.read_points_csv(args.original)
    embedded = io.read_points_csv(args.embedded)
    if original.n != embedded.n:
        raise DataFormatError("original and embedded files must have the same point count")
    report = {
        "config": _echo(args),
        "n": original.n,
        "k": args.k,
        "delta": delta(adjacency_distance(original, args.k), adjacency_distance(embedded, args.k)),
    }
    if args.truth is not None:
        truth = io.read_points_csv(args.truth)
        r_total, p_values = correlation_score(embedded.points, truth.points)
        report["correlation"] = {"r_total": r_total, "p_values": p_values.tolist()}
    io.write_json(args.out, report)
    return 0


def _cmd_isomap(args) -> int:
    cloud = io.read_points_csv(args.input)
    result = isomap(cloud, k=args.k, dims=args.dims)
    config = _echo(args)
    config["n_dropped"] = result.n_dropped
    io.write_points_csv(args.out, result.embedding, config)
    residual_path = args.residuals_out or _default_residuals_path(args.out)
    rows = [(e + 1, rv) for e, rv in enumerate(result.residual_variances)]
    io.write_table_csv(residual_path, ["dims", "residual_variance"], rows, config)
    return 0


def _default_residuals_path(out: str) -> str:
    stem, dot, ext = out.rpartition(".")
    return f"{stem}_residuals.{ext}" if dot else f"{out}_residuals"


def _sweep_points(kind: str, step: float | None) -> list[float]:
    if kind == "p":
        inc = step if step is not None else P_SWEEP_STEP
        count = int(round(1.0 / inc))
        return [min(i * inc, 1.0) for i in range(count + 1)]
    if kind == "noise":
        inc = step if step is not None else NOISE_SWEEP_STEP
        values = []
        v = 0.0
        i = 0
        while v <= NOISE_SWEEP_MAX + 1e-9:
            values.append(round(v, 10))
            i += 1
            v = i * inc
        return values
    inc = int(step) if step is not None else DENSITY_SWEEP_STEP
    lo, hi = DENSITY_SWEEP_RANGE
    return list(range(lo, hi + 1, inc))


def run_sweep(kind: str, seed: int, n: int = 3000, p: float = 0.9, k: int = 10,
              nc: tuple[int, int] = (15, 15), step: float | None = None):
    """Run one performance-analysis sweep.

    Returns (values, deltas, FitReport).  The smoothing sweep fits its
    linear trend on the pre-saturation window p <= 0.88; the noise and
    density sweeps fit quadratic and exponential trends over the full
    range.
    """
    from .datasets import noisy_swiss_roll

    slice_config = SliceConfig(n_c1=nc[0], n_c2=nc[1])
    values = _sweep_points(kind, step)
    deltas = []
    if kind == "p":
        cloud = noisy_swiss_roll(n=n, noise=0.0, seed=seed)
        raw = adjacency_distance(cloud, k)
        for value in values:
            manifold = build_manifold(cloud, value, slice_config)
            emb = manifold.embed(cloud.points)
            deltas.append(delta(raw, adjacency_distance(PointCloud(emb), k)))
        window = [i for i, v in enumerate(values) if v <= P_FIT_WINDOW + 1e-9]
        report = fit_curve([values[i] for i in window], [deltas[i] for i in window], "linear")
    elif kind == "noise":
        for value in values:
            cloud = noisy_swiss_roll(n=n, noise=value, seed=seed)
            raw = adjacency_distance(cloud, k)
            manifold = build_manifold(cloud, p, slice_config)
            emb = manifold.embed(cloud.points)
            deltas.append(delta(raw, adjacency_distance(PointCloud(emb), k)))
        report = fit_curve(values, deltas, "quadratic")
    elif kind == "density":
        master = noisy_swiss_roll(n=DENSITY_SWEEP_RANGE[1], noise=0.2, seed=seed)
        for value in values:
            cloud = PointCloud(master.points[: int(value)])
            raw = adjacency_distance(cloud, k)
            manifold = build_manifold(cloud, p, slice_config)
            emb = manifold.embed(cloud.points)
            deltas.append(delta(raw, adjacency_distance(PointCloud(emb), k)))
        report = fit_curve(values, deltas, "exponential")
    else:
        raise DataFormatError(f"unknown sweep kind {kind!r}")
    return values, deltas, report


def _cmd_sweep(args) -> int:
    values, deltas, report = run_sweep(args.kind, seed=args.seed, n=args.n, p=args.p,
                                       k=args.k, nc=tuple(args.nc), step=args.step)
    config = _echo(args)
    io.write_table_csv(args.out, [args.kind, "delta"], zip(values, deltas), config)
    fit_path = args.fit_out or _default_fit_path(args.out)
    io.write_json(fit_path, {"config": config, "fit": report.to_dict()})
    return 0


def _default_fit_path(out: str) -> str:
    stem, dot, _ = out.rpartition(".")
    return f"{stem}_fit.json" if dot else f"{out}_fit.json"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmanifold",
        description="Principal-manifold dimensionality reduction pipeline",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("generate", help="write a benchmark dataset CSV")
    gen.add_argument("--kind", required=True,
                     choices=["paraboloid", "swiss_roll", "predator_mobbing"])
    gen.add_argument("--n", type=int, default=2000)
    gen.add_argument("--noise", type=float, default=None,
                     help="noise amplitude (uniform half-width, or Gaussian sd for mobbing)")
    gen.add_argument("--agents", type=int, default=20)
    gen.add_argument("--steps", type=int, default=2000)
    gen.add_argument("--rho", type=float, default=14.0)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--truth-out", default=None)
    gen.set_defaults(func=_cmd_generate)

    fit = sub.add_parser("fit", help="build a principal manifold from a dataset CSV")
    fit.add_argument("--input", required=True)
    fit.add_argument("--p", type=float, required=True)
    fit.add_argument("--nc", type=int, nargs=2, required=True, metavar=("NC1", "NC2"))
    fit.add_argument("--samples", type=int, default=200)
    fit.add_argument("--gap-threshold", type=float, default=None)
    fit.add_argument("--min-subcluster", type=int, default=4)
    fit.add_argument("--radius-scale", type=float, default=1.0)
    fit.add_argument("--spread", choices=["half_extent", "std"], default="half_extent")
    fit.add_argument("--origin", choices=["centroid", "random"], default="centroid")
    fit.add_argument("--seed", type=int, default=None,
                     help="origin seed, required with --origin random")
    fit.add_argument("--axis1", default=None, help="comma-separated reference direction 1")
    fit.add_argument("--axis2", default=None, help="comma-separated reference direction 2")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=_cmd_fit)

    emb = sub.add_parser("embed", help="embed points with a fitted manifold")
    emb.add_argument("--manifold", required=True)
    emb.add_argument("--input", required=True)
    emb.add_argument("--out", required=True)
    emb.set_defaults(func=_cmd_embed)

    inv = sub.add_parser("invert", help="map embedding coordinates back to ambient space")
    inv.add_argument("--manifold", required=True)
    inv.add_argument("--input", required=True)
    inv.add_argument("--out", required=True)
    inv.set_defaults(func=_cmd_invert)

    met = sub.add_parser("metric", help="adjacency-distance error and correlation report")
    met.add_argument("--original", required=True)
    met.add_argument("--embedded", required=True)
    met.add_argument("--k", type=int, default=10)
    met.add_argument("--truth", default=None)
    met.add_argument("--out", required=True)
    met.set_defaults(func=_cmd_metric)

    iso = sub.add_parser("isomap", help="Isomap baseline embedding")
    iso.add_argument("--input", required=True)
    iso.add_argument("--k", type=int, default=10)
    iso.add_argument("--dims", type=int, default=2)
    iso.add_argument("--out", required=True)
    iso.add_argument("--residuals-out", default=None)
    iso.set_defaults(func=_cmd_isomap)

    swp = sub.add_parser("sweep", help="error-trend sweeps over p, noise, or density")
    swp.add_argument("--kind", required=True, choices=["p", "noise", "density"])
    swp.add_argument("--seed", type=int, required=True)
    swp.add_argument("--n", type=int, default=3000)
    swp.add_argument("--p", type=float, default=0.9)
    swp.add_argument("--k", type=int, default=10)
    swp.add_argument("--nc", type=int, nargs=2, default=[15, 15], metavar=("NC1", "NC2"))
    swp.add_argument("--step", type=float, default=None)
    swp.add_argument("--out", required=True)
    swp.add_argument("--fit-out", default=None)
    swp.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "generate" and args.noise is None:
        args.noise = {"paraboloid": 0.05, "swiss_roll": 0.4, "predator_mobbing": 0.01}[args.kind]
    if args.subcommand == "fit" and args.origin == "random" and args.seed is None:
        parser.error("--origin random requires --seed")
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"pmanifold: data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"pmanifold: io error: {exc}", file=sys.stderr)
        return 3
    except AlgorithmFailure as exc:
        print(f"pmanifold: algorithmic failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
