"""Acceptance gate: every shipping criterion, one printed verdict per test.

Run with output visible:

    pytest tests/test_acceptance.py -v -s

Each test exercises one numbered criterion at its stated tolerance and
prints a single PASS/FAIL line; the assertion carries the same verdict.
"""

import math
import time

import numpy as np
import pytest

from gbtmark.attacks import apply_attack, fitness_suite
from gbtmark.cli import main
from gbtmark.codec import WatermarkBits, embed, extract
from gbtmark.corpus import CLASSIC_HOSTS, classic_host, random_watermark, write_host_corpus
from gbtmark.imaging import RasterImage, save_image
from gbtmark.metrics import ber, nc, psnr, ssim
from gbtmark.optimizer import (
    AgentEncoding,
    WoaConfig,
    fitness_value,
    optimize_watermarking,
    woa_run,
)
from gbtmark.transforms import (
    build_graph,
    dwt2_haar,
    gbt2_forward,
    gbt2_inverse,
    idwt2_haar,
    svd,
    svd_reconstruct,
)


def verdict(number: int, description: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {number}: {status} - {description}{suffix}")
    assert ok, f"criterion {number} failed: {description}{suffix}"


@pytest.fixture(scope="module")
def desk_scale():
    """One bounded optimization run shared by the imperceptibility and
    robustness criteria: 20 agents, 50 iterations, six attacks, fixed seeds."""
    host = classic_host("lena")
    watermark = random_watermark(20, 20, seed=1)
    attacks = fitness_suite(0)
    encoding = AgentEncoding(bit_count=400, block_count=1024, alpha_bounds=(5.0, 50.0))
    started = time.perf_counter()
    result = optimize_watermarking(
        host,
        watermark,
        attacks,
        WoaConfig(population=20, iterations=50, seed=0),
        encoding=encoding,
        graph=build_graph(4),
    )
    elapsed = time.perf_counter() - started
    return host, watermark, attacks, result, elapsed


def test_criterion_1_lossless_round_trip(graph4):
    started = time.perf_counter()
    failures = []
    for name in CLASSIC_HOSTS:
        host = classic_host(name)
        for seed in range(10):
            watermark = random_watermark(20, 20, seed=seed)
            assignment = [(k, 10.0) for k in range(400)]
            marked, key = embed(host, watermark, assignment, graph4)
            error = ber(watermark, extract(marked, key, graph4))
            if error != 0.0:
                failures.append((name, seed, error))
    elapsed = time.perf_counter() - started
    verdict(
        1,
        "round trip with strength 10 is lossless on 5 hosts x 10 watermarks",
        not failures and elapsed < 10.0,
        f"failures={failures}, {elapsed:.2f} s",
    )


def test_criterion_2_imperceptibility(desk_scale):
    host, _, _, result, elapsed = desk_scale
    quality = psnr(host, result.watermarked)
    verdict(
        2,
        "bounded search reaches PSNR >= 45 dB within 30 minutes",
        quality >= 45.0 and elapsed < 1800.0,
        f"PSNR={quality:.6f} dB, {elapsed:.1f} s",
    )


def test_criterion_3_robustness_envelope(desk_scale, graph4):
    _, watermark, attacks, result, _ = desk_scale
    errors = {}
    for spec in attacks:
        attacked = apply_attack(result.watermarked, spec)
        recovered = extract(attacked, result.key, graph4)
        errors[spec.kind] = ber(watermark, recovered)
    worst = max(errors.values())
    average = sum(errors.values()) / len(errors)
    verdict(
        3,
        "per-attack BER <= 0.15 and average BER <= 0.10 after the bounded search",
        worst <= 0.15 and average <= 0.10,
        f"worst={worst:.4f}, average={average:.4f}, {errors}",
    )


def test_criterion_4_fitness_coherence(lena, graph4, rng):
    checks = []
    checks.append(fitness_value(45.0, 1.0) == 0.0)
    checks.append(fitness_value(45.0 + 1e-9, 1.0) > 0.0)
    checks.append(fitness_value(45.0, 1.0 - 1e-9) > 0.0)
    checks.append(abs(fitness_value(44.0, 0.9) - 10.1) <= 1e-12)
    for _ in range(500):
        quality = float(rng.uniform(30, 60))
        match = float(rng.uniform(0, 1))
        direct = 10.0 * abs(quality - 45.0) + (1.0 - match)
        checks.append(abs(fitness_value(quality, match) - direct) <= 1e-12)
    # a genuine evaluation decomposes the same way
    from gbtmark.optimizer import FitnessContext, watermark_fitness

    context = FitnessContext(
        host=lena,
        watermark=random_watermark(20, 20, seed=2),
        attacks=tuple(fitness_suite(3)[:2]),
        graph=graph4,
    )
    encoding = AgentEncoding(bit_count=400, block_count=1024)
    position = np.concatenate([np.arange(400) + 0.5, np.full(400, 10.0)])
    breakdown = watermark_fitness(position, context, encoding)
    recomposed = fitness_value(breakdown.psnr, breakdown.mean_nc)
    checks.append(abs(breakdown.value - recomposed) <= 1e-12)
    verdict(
        4,
        "objective is zero exactly at target quality with perfect recovery, "
        "and matches direct substitution to 1e-12",
        all(checks),
    )


def test_criterion_5_transform_suite(rng):
    started = time.perf_counter()
    blocks = rng.uniform(0.0, 255.0, (1000, 8, 8))
    norms = np.linalg.norm(blocks, axis=(1, 2))
    tol = 1e-9

    sub = dwt2_haar(blocks)
    recon = idwt2_haar(sub)
    dwt_err = float((np.linalg.norm(recon - blocks, axis=(1, 2)) / norms).max())

    energy_in = norms**2
    energy_sub = sum(np.sum(band**2, axis=(1, 2)) for band in (sub.ll, sub.lh, sub.hl, sub.hh))
    dwt_energy_err = float((np.abs(energy_sub - energy_in) / energy_in).max())

    graph8 = build_graph(8)
    coeffs = gbt2_forward(blocks, graph8)
    gbt_err = float(
        (np.linalg.norm(gbt2_inverse(coeffs, graph8) - blocks, axis=(1, 2)) / norms).max()
    )
    energy_coeffs = np.sum(coeffs**2, axis=(1, 2))
    gbt_energy_err = float((np.abs(energy_coeffs - energy_in) / energy_in).max())

    trip = svd(blocks)
    svd_err = float(
        (np.linalg.norm(svd_reconstruct(trip) - blocks, axis=(1, 2)) / norms).max()
    )

    def dct2(n):
        k = np.arange(n)[:, None]
        j = np.arange(n)[None, :]
        mat = np.cos(np.pi * (2 * j + 1) * k / (2 * n))
        mat[0] *= np.sqrt(1.0 / n)
        mat[1:] *= np.sqrt(2.0 / n)
        return mat

    basis_err = 0.0
    eig_err = 0.0
    for n in (2, 4, 8, 16):
        graph = build_graph(n)
        oracle = dct2(n)
        for k in range(n):
            col = graph.basis[:, k]
            basis_err = max(
                basis_err,
                min(float(np.abs(col - oracle[k]).max()), float(np.abs(col + oracle[k]).max())),
            )
        closed_form = np.sort(2.0 - 2.0 * np.cos(np.arange(n) * np.pi / n))
        eig_err = max(eig_err, float(np.abs(graph.eigenvalues - closed_form).max()))

    elapsed = time.perf_counter() - started
    ok = all(
        err <= tol
        for err in (dwt_err, dwt_energy_err, gbt_err, gbt_energy_err, svd_err, basis_err, eig_err)
    )
    verdict(
        5,
        "transform suite holds to 1e-9 on 1000 random blocks in under 10 s",
        ok and elapsed < 10.0,
        f"dwt={dwt_err:.2e} dwtE={dwt_energy_err:.2e} gbt={gbt_err:.2e} "
        f"gbtE={gbt_energy_err:.2e} svd={svd_err:.2e} basis={basis_err:.2e} "
        f"eig={eig_err:.2e}, {elapsed:.2f} s",
    )


def test_criterion_6_spectral_perturbation(graph4, rng):
    alpha = 7.5
    worst = 0.0
    for _ in range(100):
        block = rng.uniform(0.0, 255.0, (8, 8))
        ll = dwt2_haar(block).ll
        coeffs = gbt2_forward(ll, graph4)
        trip = svd(coeffs)
        bumped = trip.s.copy()
        bumped[0] += alpha
        modified = svd_reconstruct(type(trip)(u=trip.u, s=bumped, v=trip.v))
        delta = np.linalg.norm(modified - coeffs, 2)
        worst = max(worst, abs(delta - alpha))
    verdict(
        6,
        "raising the leading singular value by alpha moves the matrix "
        "by exactly alpha in spectral norm",
        worst <= 1e-9,
        f"max |deviation|={worst:.2e} over 100 blocks",
    )


def test_criterion_7_search_engine_sanity():
    started = time.perf_counter()

    def sphere(x):
        return float(np.sum(x * x))

    config_base = dict(population=30, iterations=500, bounds=((-10.0, 10.0),) * 10)
    hits = 0
    monotone = 0
    for seed in range(20):
        result = woa_run(sphere, WoaConfig(seed=seed, **config_base))
        if result.best_fitness < 1e-3:
            hits += 1
        history = np.array(result.history)
        if np.all(np.diff(history) <= 0):
            monotone += 1
    elapsed = time.perf_counter() - started
    verdict(
        7,
        "sphere benchmark converges below 1e-3 in >= 19/20 seeds with "
        "non-increasing history in all runs, under 30 s",
        hits >= 19 and monotone == 20 and elapsed < 30.0,
        f"hits={hits}/20, monotone={monotone}/20, {elapsed:.2f} s",
    )


def test_criterion_8_metric_identities(rng):
    complement_exact = True
    for _ in range(1000):
        h = int(rng.integers(1, 30))
        w = int(rng.integers(1, 30))
        a = WatermarkBits(rng.integers(0, 2, (h, w)).astype(np.uint8))
        b = WatermarkBits(rng.integers(0, 2, (h, w)).astype(np.uint8))
        if nc(a, b) + ber(a, b) != 1.0:
            complement_exact = False
            break

    base = RasterImage(np.full((64, 64, 3), 100, dtype=np.uint8))
    bumped = RasterImage(np.full((64, 64, 3), 101, dtype=np.uint8))
    plus_one = psnr(base, bumped)
    psnr_ok = abs(plus_one - 48.1308) <= 1e-3

    noise = RasterImage(rng.integers(0, 256, (64, 64, 3), dtype=np.uint8))
    ssim_ok = ssim(noise, noise) == 1.0 and ssim(base, base) == 1.0

    verdict(
        8,
        "bit metrics complement exactly, +1 PSNR hits 48.1308 dB, "
        "self-SSIM is exactly one",
        complement_exact and psnr_ok and ssim_ok,
        f"psnr(+1)={plus_one:.6f}",
    )


def test_criterion_9_bench_determinism(tmp_path, capsys):
    hosts_dir = tmp_path / "hosts"
    write_host_corpus(str(hosts_dir))
    wm_path = tmp_path / "logo.png"
    save_image(random_watermark(20, 20, seed=4).to_image(), wm_path)

    def run(name, *extra):
        report = tmp_path / name
        code = main(
            [
                "bench",
                "--hosts-dir", str(hosts_dir),
                "--watermark", str(wm_path),
                "--report", str(report),
                "--seed", "11",
                *extra,
            ]
        )
        assert code == 0
        return report.read_bytes()

    first = run("r1.json")
    second = run("r2.json")
    threaded = run("r3.json", "--jobs", "4")
    capsys.readouterr()
    verdict(
        9,
        "benchmark reports are byte-identical across runs and thread counts",
        first == second == threaded,
        f"{len(first)} bytes",
    )
