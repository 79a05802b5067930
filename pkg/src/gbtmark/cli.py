"""Command-line surface: embed, extract, attack, metrics, optimize, bench.

Exit codes: 0 success, 2 usage or bad parameters, 3 unreadable/unwritable
files, 4 watermark exceeds host capacity, 5 malformed or mismatched key.
Output files are written to a sibling temp file and renamed, so failures
leave no partial artifacts.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np

from .attacks import (
    ATTACK_KINDS,
    FITNESS_SUITE,
    REPORT_SUITE,
    AttackSpec,
    apply_attack,
    build_suite,
    fitness_suite,
    report_suite,
)
from .codec import (
    DEFAULT_BLOCK_SIZE,
    CapacityError,
    KeyFormatError,
    WatermarkBits,
    WatermarkKey,
    embed,
    extract,
)
from .imaging import BlockGrid, RasterImage, channel_by_name, load_image, save_image
from .metrics import MetricReport, ber, format_db, json_db, nc, psnr, render_table, ssim
from .optimizer import (
    AgentEncoding,
    WoaConfig,
    history_to_csv,
    optimize_watermarking,
)
from .transforms import PATH_UNIFORM, build_graph

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CAPACITY = 4
EXIT_KEY = 5

REPORT_VERSION = 1
NO_ATTACK = "no-attack"
_HOST_EXTENSIONS = (".png", ".ppm", ".pgm")


def _ensure_writable(path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"output directory does not exist: {directory}")
    if not os.access(directory, os.W_OK):
        raise PermissionError(f"output directory is not writable: {directory}")


def _write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _derive_seed(*keys: int) -> int:
    """Stable 64-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1, np.uint64)[0])


def _load_watermark(path: str) -> WatermarkBits:
    return WatermarkBits.from_image(load_image(path))


def _uniform_graph(block_size: int):
    if block_size < 2 or block_size % 2 != 0:
        raise ValueError(f"block size must be even and >= 2, got {block_size}")
    return build_graph(block_size // 2, PATH_UNIFORM)


def _grid_block_count(image: RasterImage, block_size: int) -> int:
    return BlockGrid(width=image.width, height=image.height, block_size=block_size).block_count


def cmd_embed(args: argparse.Namespace) -> int:
    _ensure_writable(args.out)
    _ensure_writable(args.key_out)
    host = load_image(args.host)
    watermark = _load_watermark(args.watermark)
    graph = _uniform_graph(args.block_size)
    if args.policy == "from-key":
        key_in = WatermarkKey.load(args.key)
        assignment = [(entry.block, entry.alpha) for entry in key_in.entries]
    else:
        count = _grid_block_count(host, args.block_size)
        if watermark.count > count:
            raise CapacityError(
                f"watermark needs {watermark.count} blocks but the host offers {count}"
            )
        if args.policy == "random":
            rng = np.random.default_rng(args.seed)
            blocks = rng.choice(count, size=watermark.count, replace=False)
        else:
            blocks = np.arange(watermark.count)
        assignment = [(int(b), args.alpha) for b in blocks]
    watermarked, key = embed(host, watermark, assignment, graph)
    save_image(watermarked, args.out)
    key.save(args.key_out)
    print(f"PSNR: {format_db(psnr(host, watermarked))} dB")
    print(f"SSIM: {ssim(host, watermarked):.6f}")
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    _ensure_writable(args.out)
    key = WatermarkKey.load(args.key)
    if key.graph != PATH_UNIFORM:
        raise KeyFormatError(
            f"only {PATH_UNIFORM!r} keys are self-describing; got {key.graph!r}"
        )
    if key.block_size < 2 or key.block_size % 2 != 0:
        raise KeyFormatError(f"key block size must be even and >= 2, got {key.block_size}")
    graph = build_graph(key.block_size // 2, PATH_UNIFORM)
    image = load_image(args.image)
    bits = extract(image, key, graph)
    save_image(bits.to_image(), args.out)
    if args.reference:
        reference = _load_watermark(args.reference)
        print(f"BER: {ber(reference, bits):.6f}")
        print(f"NC: {nc(reference, bits):.6f}")
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    _ensure_writable(args.out)
    overrides = {}
    for name in ("variance", "density", "kernel", "scale", "quality"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    spec = AttackSpec.make(args.type, seed=args.seed, **overrides)
    image = load_image(args.image)
    save_image(apply_attack(image, spec), args.out)
    print(f"applied {spec.kind} {spec.params} seed={spec.seed}")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    reference = load_image(args.reference)
    test = load_image(args.test)
    channel = None if args.channel == "all" else channel_by_name(args.channel, reference.channels)
    quality = psnr(reference, test, channel=channel)
    similarity = ssim(reference, test)
    if args.format == "json":
        print(json.dumps({"psnr": json_db(quality), "ssim": similarity}, sort_keys=True))
    else:
        print(f"PSNR: {format_db(quality)} dB")
        print(f"SSIM: {similarity:.6f}")
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    _ensure_writable(args.out)
    _ensure_writable(args.key_out)
    if args.history_out:
        _ensure_writable(args.history_out)
    host = load_image(args.host)
    watermark = _load_watermark(args.watermark)
    graph = _uniform_graph(DEFAULT_BLOCK_SIZE)
    kinds = [kind.strip() for kind in args.attacks.split(",") if kind.strip()]
    attacks = build_suite(kinds, args.attack_seed)
    encoding = AgentEncoding(
        bit_count=watermark.count,
        block_count=_grid_block_count(host, DEFAULT_BLOCK_SIZE),
        alpha_bounds=(args.alpha_min, args.alpha_max),
    )
    config = WoaConfig(population=args.agents, iterations=args.iterations, seed=args.seed)
    result = optimize_watermarking(
        host,
        watermark,
        attacks,
        config,
        encoding=encoding,
        graph=graph,
        psnr_target=args.psnr_target,
        psnr_weight=args.psnr_weight,
    )
    save_image(result.watermarked, args.out)
    result.key.save(args.key_out)
    if args.history_out:
        _write_text_atomic(args.history_out, history_to_csv(result.history))
    print(f"fitness: {result.best_fitness:.6f}")
    print(f"PSNR: {format_db(result.psnr)} dB")
    print(f"mean NC: {result.mean_nc:.6f}")
    return EXIT_OK


def _score_extraction(watermark: WatermarkBits, recovered: WatermarkBits) -> dict[str, float]:
    error = ber(watermark, recovered)
    return {"nc": 1.0 - error, "ber": error}


def _bench_host(
    name: str, path: str, watermark: WatermarkBits, args: argparse.Namespace, index: int
):
    host = load_image(path)
    graph = _uniform_graph(DEFAULT_BLOCK_SIZE)
    woa_seed = _derive_seed(args.seed, index, 0)
    fitness_seed = _derive_seed(args.seed, index, 1)
    report_seed = _derive_seed(args.seed, index, 2)
    if args.optimize:
        config = WoaConfig(population=args.agents, iterations=args.iterations, seed=woa_seed)
        encoding = AgentEncoding(
            bit_count=watermark.count,
            block_count=_grid_block_count(host, DEFAULT_BLOCK_SIZE),
            alpha_bounds=(args.alpha_min, args.alpha_max),
        )
        result = optimize_watermarking(
            host,
            watermark,
            fitness_suite(fitness_seed),
            config,
            encoding=encoding,
            graph=graph,
            psnr_target=args.psnr_target,
            psnr_weight=args.psnr_weight,
        )
        watermarked, key = result.watermarked, result.key
    else:
        assignment = [(i, args.alpha) for i in range(watermark.count)]
        watermarked, key = embed(host, watermark, assignment, graph)

    quality = psnr(host, watermarked)
    similarity = ssim(host, watermarked)
    per_attack = {NO_ATTACK: _score_extraction(watermark, extract(watermarked, key, graph))}
    attack_json: dict[str, dict] = {NO_ATTACK: dict(per_attack[NO_ATTACK])}
    for spec in report_suite(report_seed):
        recovered = extract(apply_attack(watermarked, spec), key, graph)
        scores = _score_extraction(watermark, recovered)
        per_attack[spec.kind] = scores
        attack_json[spec.kind] = {**scores, "params": dict(spec.params), "seed": spec.seed}

    if args.artifacts_dir:
        save_image(watermarked, os.path.join(args.artifacts_dir, f"{name}_watermarked.png"))
        key.save(os.path.join(args.artifacts_dir, f"{name}_key.json"))

    report = MetricReport(psnr=quality, ssim=similarity, per_attack=per_attack)
    host_json = {
        "psnr": json_db(quality),
        "ssim": similarity,
        "seeds": {"woa": woa_seed, "fitness_attacks": fitness_seed, "report_attacks": report_seed},
        "attacks": attack_json,
    }
    return report, host_json


def _bench_average(reports: dict[str, MetricReport], attack_order) -> MetricReport:
    names = sorted(reports)
    mean_psnr = sum(reports[n].psnr for n in names) / len(names)
    mean_ssim = sum(reports[n].ssim for n in names) / len(names)
    per_attack = {}
    for kind in attack_order:
        mean_ber = sum(reports[n].per_attack[kind]["ber"] for n in names) / len(names)
        per_attack[kind] = {"nc": 1.0 - mean_ber, "ber": mean_ber}
    return MetricReport(psnr=mean_psnr, ssim=mean_ssim, per_attack=per_attack)


def _bench_report_json(args, watermark, watermark_name, reports_json, average):
    payload = {
        "report_version": REPORT_VERSION,
        "config": {
            "seed": args.seed,
            "alpha": None if args.optimize else args.alpha,
            "optimize": bool(args.optimize),
            "agents": args.agents if args.optimize else None,
            "iterations": args.iterations if args.optimize else None,
            "alpha_min": args.alpha_min if args.optimize else None,
            "alpha_max": args.alpha_max if args.optimize else None,
            "psnr_target": args.psnr_target if args.optimize else None,
            "psnr_weight": args.psnr_weight if args.optimize else None,
            "block_size": DEFAULT_BLOCK_SIZE,
            "graph": PATH_UNIFORM,
            "wavelet": "haar",
            "watermark": {
                "source": watermark_name,
                "width": watermark.width,
                "height": watermark.height,
            },
        },
        "hosts": reports_json,
        "average": average,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def cmd_bench(args: argparse.Namespace) -> int:
    _ensure_writable(args.report)
    if args.artifacts_dir:
        os.makedirs(args.artifacts_dir, exist_ok=True)
    if not os.path.isdir(args.hosts_dir):
        raise FileNotFoundError(f"hosts directory does not exist: {args.hosts_dir}")
    names = sorted(
        f for f in os.listdir(args.hosts_dir) if os.path.splitext(f)[1].lower() in _HOST_EXTENSIONS
    )
    if not names:
        raise ValueError(f"no host images (png/ppm/pgm) found in {args.hosts_dir}")
    watermark = _load_watermark(args.watermark)
    watermark_name = os.path.basename(args.watermark)
    attack_order = [NO_ATTACK] + list(REPORT_SUITE)

    reports: dict[str, MetricReport] = {}
    reports_json: dict[str, dict] = {}

    def flush() -> None:
        done = sorted(reports_json)
        partial_avg = (
            _bench_average({n: reports[n] for n in done}, attack_order).to_json_dict()
            if done
            else None
        )
        text = _bench_report_json(
            args, watermark, watermark_name, {n: reports_json[n] for n in done}, partial_avg
        )
        _write_text_atomic(args.report, text)

    stems = [os.path.splitext(n)[0] for n in names]
    jobs = max(1, args.jobs)
    if jobs == 1:
        for index, (stem, fname) in enumerate(zip(stems, names)):
            report, host_json = _bench_host(
                stem, os.path.join(args.hosts_dir, fname), watermark, args, index
            )
            reports[stem] = report
            reports_json[stem] = host_json
            flush()
            print(f"[{len(reports)}/{len(names)}] {stem}: PSNR {format_db(report.psnr)} dB")
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(
                    _bench_host, stem, os.path.join(args.hosts_dir, fname), watermark, args, index
                ): stem
                for index, (stem, fname) in enumerate(zip(stems, names))
            }
            for future in as_completed(futures):
                stem = futures[future]
                report, host_json = future.result()
                reports[stem] = report
                reports_json[stem] = host_json
                flush()
                print(f"[{len(reports)}/{len(names)}] {stem}: PSNR {format_db(report.psnr)} dB")

    average = _bench_average(reports, attack_order)
    rows = [(n, reports[n]) for n in sorted(reports)] + [("Average", average)]
    print(render_table(rows, attack_order))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbtmark",
        description="Semi-blind block-transform image watermarking toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="embed a binary logo into a host image")
    p_embed.add_argument("--host", required=True, help="host image (PNG/PPM/PGM)")
    p_embed.add_argument("--watermark", required=True, help="logo image, binarized at 128")
    p_embed.add_argument("--out", required=True, help="watermarked image path")
    p_embed.add_argument("--key-out", required=True, help="extraction key path (JSON)")
    p_embed.add_argument("--alpha", type=float, default=10.0, help="embedding strength")
    p_embed.add_argument(
        "--policy",
        choices=("sequential", "random", "from-key"),
        default="sequential",
        help="block assignment policy",
    )
    p_embed.add_argument("--seed", type=int, default=0, help="seed for the random policy")
    p_embed.add_argument("--key", help="existing key providing blocks/alphas (from-key policy)")
    p_embed.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    p_embed.set_defaults(func=cmd_embed)

    p_extract = sub.add_parser("extract", help="recover the logo from a watermarked image")
    p_extract.add_argument("--image", required=True)
    p_extract.add_argument("--key", required=True)
    p_extract.add_argument("--out", required=True, help="extracted logo PNG")
    p_extract.add_argument("--reference", help="original logo for BER/NC reporting")
    p_extract.set_defaults(func=cmd_extract)

    p_attack = sub.add_parser("attack", help="apply one signal-processing attack")
    p_attack.add_argument("--image", required=True)
    p_attack.add_argument("--out", required=True)
    p_attack.add_argument("--type", required=True, choices=ATTACK_KINDS)
    p_attack.add_argument("--seed", type=int, default=0)
    p_attack.add_argument("--variance", type=float, help="gaussian-noise / speckle variance")
    p_attack.add_argument("--density", type=float, help="salt-pepper density")
    p_attack.add_argument("--kernel", type=int, help="median/average filter size")
    p_attack.add_argument("--scale", type=float, help="rescale factor")
    p_attack.add_argument("--quality", type=int, help="jpeg-compress quality")
    p_attack.set_defaults(func=cmd_attack)

    p_metrics = sub.add_parser("metrics", help="PSNR/SSIM between two images")
    p_metrics.add_argument("--reference", required=True)
    p_metrics.add_argument("--test", required=True)
    p_metrics.add_argument(
        "--channel", choices=("all", "red", "green", "blue", "gray"), default="all"
    )
    p_metrics.add_argument("--format", choices=("text", "json"), default="text")
    p_metrics.set_defaults(func=cmd_metrics)

    p_opt = sub.add_parser("optimize", help="search blocks and strengths, then embed")
    p_opt.add_argument("--host", required=True)
    p_opt.add_argument("--watermark", required=True)
    p_opt.add_argument("--out", required=True)
    p_opt.add_argument("--key-out", required=True)
    p_opt.add_argument("--agents", type=int, default=20)
    p_opt.add_argument("--iterations", type=int, default=50)
    p_opt.add_argument("--seed", type=int, default=0, help="search seed")
    p_opt.add_argument("--attack-seed", type=int, default=0, help="attack battery seed")
    p_opt.add_argument("--attacks", default=",".join(FITNESS_SUITE), help="comma-separated kinds")
    p_opt.add_argument("--alpha-min", type=float, default=2.0)
    p_opt.add_argument("--alpha-max", type=float, default=50.0)
    p_opt.add_argument("--psnr-target", type=float, default=45.0)
    p_opt.add_argument("--psnr-weight", type=float, default=10.0)
    p_opt.add_argument("--history-out", help="convergence history CSV path")
    p_opt.set_defaults(func=cmd_optimize)

    p_bench = sub.add_parser("bench", help="embed/attack/extract every host and report")
    p_bench.add_argument("--hosts-dir", required=True)
    p_bench.add_argument("--watermark", required=True)
    p_bench.add_argument("--report", required=True, help="JSON report path")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--alpha", type=float, default=10.0, help="strength without --optimize")
    p_bench.add_argument("--optimize", action="store_true", help="search per host")
    p_bench.add_argument("--agents", type=int, default=20)
    p_bench.add_argument("--iterations", type=int, default=50)
    p_bench.add_argument("--alpha-min", type=float, default=2.0)
    p_bench.add_argument("--alpha-max", type=float, default=50.0)
    p_bench.add_argument("--psnr-target", type=float, default=45.0)
    p_bench.add_argument("--psnr-weight", type=float, default=10.0)
    p_bench.add_argument("--jobs", type=int, default=1, help="hosts processed in parallel")
    p_bench.add_argument("--artifacts-dir", help="store per-host watermarked images and keys")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "policy", None) == "from-key" and not args.key:
        parser.error("--policy from-key requires --key")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except KeyFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KEY
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
