"""Whale-search engine plus the watermark placement/strength objective.

The engine is a population metaheuristic: each agent either spirals toward
the best solution found so far, circles it, or strikes out toward a random
peer, with the exploration radius shrinking linearly over the run. The
watermarking objective scores an agent by embedding at its decoded blocks
and strengths, then mixing an imperceptibility penalty with the mean
bit-match rate under a fixed battery of attacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .attacks import AttackSpec, apply_attack
from .codec import CapacityError, WatermarkBits, WatermarkKey, embed, extract
from .imaging import BlockGrid, RasterImage
from .metrics import nc as bit_match_rate
from .metrics import psnr
from .transforms import GraphSpec, build_graph

DEFAULT_ALPHA_BOUNDS = (2.0, 50.0)
DEFAULT_PSNR_TARGET = 45.0
DEFAULT_PSNR_WEIGHT = 10.0


@dataclass(frozen=True)
class WoaConfig:
    """Engine knobs: population size, iteration budget, box bounds, seed."""

    population: int = 100
    iterations: int = 1000
    bounds: tuple[tuple[float, float], ...] | None = None
    spiral_b: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValueError(f"population must be at least 2, got {self.population}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be at least 1, got {self.iterations}")
        if self.bounds is not None:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if not bounds:
                raise ValueError("bounds must cover at least one dimension")
            for lo, hi in bounds:
                if not lo < hi:
                    raise ValueError(f"each bound needs lower < upper, got ({lo}, {hi})")
            object.__setattr__(self, "bounds", bounds)


@dataclass(frozen=True)
class WoaResult:
    best_position: np.ndarray
    best_fitness: float
    history: tuple[float, ...]


def shrink_schedule(t: int, max_iter: int) -> float:
    """Exploration radius coefficient: 2 at t=0, linearly down to 0 at t=max_iter."""
    return 2.0 * (1.0 - t / max_iter)


def encircle_step(position: np.ndarray, leader: np.ndarray, a_coef: float, c_coef: float) -> np.ndarray:
    """Move toward a target point: leader - A * |C * leader - position|."""
    return leader - a_coef * np.abs(c_coef * leader - position)


def spiral_step(position: np.ndarray, leader: np.ndarray, b: float, l: float) -> np.ndarray:
    """Logarithmic spiral around the leader at phase l in [-1, 1]."""
    distance = np.abs(leader - position)
    return distance * math.exp(b * l) * math.cos(2.0 * math.pi * l) + leader


def _evaluate(objective: Callable[[np.ndarray], float], position: np.ndarray) -> float:
    value = float(objective(position))
    if not math.isfinite(value):
        raise ValueError(
            f"objective returned non-finite value {value!r} at position {position.tolist()}"
        )
    return value


def woa_run(
    objective: Callable[[np.ndarray], float],
    config: WoaConfig,
    progress: Callable[[int, float], None] | None = None,
) -> WoaResult:
    """Minimize the objective over the configured box.

    Per agent and iteration one coin p picks the move: p < 0.5 circles the
    leader when |A| < 1 and explores toward a random agent otherwise
    (A = 2*a*r1 - a, C = 2*r2); p >= 0.5 spirals around the leader with
    phase l drawn uniformly from [-1, 1]. Position updates run in sequence,
    so exploration sees peers as they stand mid-iteration; evaluations then
    happen as a batch and the leader advances only on strict improvement,
    ties resolved toward the lowest agent index. history[t] is the best
    fitness known after t iterations (entry 0 covers initialization).
    """
    if config.bounds is None:
        raise ValueError("config.bounds must be set before running the engine")
    lower = np.array([lo for lo, _ in config.bounds], dtype=np.float64)
    upper = np.array([hi for _, hi in config.bounds], dtype=np.float64)
    n = config.population
    rng = np.random.default_rng(config.seed)

    positions = lower + rng.random((n, lower.size)) * (upper - lower)
    fitness = np.array([_evaluate(objective, positions[i]) for i in range(n)])
    best_index = int(np.argmin(fitness))
    leader_pos = positions[best_index].copy()
    leader_fit = float(fitness[best_index])
    history = [leader_fit]
    if progress is not None:
        progress(0, leader_fit)

    for t in range(config.iterations):
        a = shrink_schedule(t, config.iterations)
        for i in range(n):
            r1 = rng.random()
            r2 = rng.random()
            a_coef = 2.0 * a * r1 - a
            c_coef = 2.0 * r2
            p = rng.random()
            if p < 0.5:
                if abs(a_coef) < 1.0:
                    positions[i] = encircle_step(positions[i], leader_pos, a_coef, c_coef)
                else:
                    peer = positions[int(rng.integers(n))]
                    positions[i] = encircle_step(positions[i], peer, a_coef, c_coef)
            else:
                l = rng.uniform(-1.0, 1.0)
                positions[i] = spiral_step(positions[i], leader_pos, config.spiral_b, l)
            np.clip(positions[i], lower, upper, out=positions[i])
        fitness = np.array([_evaluate(objective, positions[i]) for i in range(n)])
        best_index = int(np.argmin(fitness))
        if fitness[best_index] < leader_fit:
            leader_fit = float(fitness[best_index])
            leader_pos = positions[best_index].copy()
        history.append(leader_fit)
        if progress is not None:
            progress(t + 1, leader_fit)

    return WoaResult(best_position=leader_pos, best_fitness=leader_fit, history=tuple(history))


@dataclass(frozen=True)
class AgentEncoding:
    """Genome layout: M block-selector genes in [0, B) then M strength genes."""

    bit_count: int
    block_count: int
    alpha_bounds: tuple[float, float] = DEFAULT_ALPHA_BOUNDS

    def __post_init__(self) -> None:
        if self.bit_count < 1:
            raise ValueError(f"bit_count must be positive, got {self.bit_count}")
        if self.bit_count > self.block_count:
            raise CapacityError(
                f"{self.bit_count} bits cannot occupy {self.block_count} distinct blocks"
            )
        lo, hi = self.alpha_bounds
        if not 0 < lo < hi:
            raise ValueError(f"alpha bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "alpha_bounds", (float(lo), float(hi)))

    @property
    def dimension(self) -> int:
        return 2 * self.bit_count

    def bounds(self) -> tuple[tuple[float, float], ...]:
        block = (0.0, float(self.block_count))
        return (block,) * self.bit_count + (self.alpha_bounds,) * self.bit_count


def decode_agent(position: np.ndarray, encoding: AgentEncoding) -> tuple[np.ndarray, np.ndarray]:
    """Genome -> (M distinct block indices, M strengths within bounds).

    Block genes floor to integers and clamp into range; each duplicate, in
    gene order, is replaced by the smallest block index not yet used.
    Strength genes clamp to the alpha bounds.
    """
    position = np.asarray(position, dtype=np.float64)
    m = encoding.bit_count
    if position.shape != (2 * m,):
        raise ValueError(f"position must have length {2 * m}, got shape {position.shape}")
    raw = np.clip(np.floor(position[:m]).astype(np.int64), 0, encoding.block_count - 1)
    used = np.zeros(encoding.block_count, dtype=bool)
    blocks = np.empty(m, dtype=np.int64)
    next_free = 0
    for j, gene in enumerate(raw):
        if not used[gene]:
            blocks[j] = gene
            used[gene] = True
        else:
            while used[next_free]:
                next_free += 1
            blocks[j] = next_free
            used[next_free] = True
    lo, hi = encoding.alpha_bounds
    alphas = np.clip(position[m:], lo, hi)
    return blocks, alphas


def fitness_value(
    psnr_db: float,
    mean_nc: float,
    psnr_target: float = DEFAULT_PSNR_TARGET,
    psnr_weight: float = DEFAULT_PSNR_WEIGHT,
) -> float:
    """Objective: psnr_weight * |PSNR - target| + (1 - mean bit-match rate)."""
    return psnr_weight * abs(psnr_db - psnr_target) + (1.0 - mean_nc)


@dataclass(frozen=True)
class FitnessContext:
    """Everything an objective evaluation needs besides the genome."""

    host: RasterImage
    watermark: WatermarkBits
    attacks: tuple[AttackSpec, ...]
    graph: GraphSpec
    psnr_target: float = DEFAULT_PSNR_TARGET
    psnr_weight: float = DEFAULT_PSNR_WEIGHT

    def block_count(self) -> int:
        grid = BlockGrid(
            width=self.host.width, height=self.host.height, block_size=2 * self.graph.size
        )
        return grid.block_count


@dataclass(frozen=True)
class FitnessBreakdown:
    """One evaluation: combined value plus the quantities behind it."""

    value: float
    psnr: float
    mean_nc: float
    per_attack_nc: tuple[float, ...]


def watermark_fitness(
    position: np.ndarray, context: FitnessContext, encoding: AgentEncoding
) -> FitnessBreakdown:
    """Embed at the decoded blocks/strengths and score the result.

    The imperceptibility term compares host and watermarked images; each
    attack in the context is applied to the watermarked image and the
    watermark re-extracted with the fresh key. No attacks means the
    robustness term vanishes (mean bit-match rate 1).
    """
    blocks, alphas = decode_agent(position, encoding)
    watermarked, key = embed(context.host, context.watermark, zip(blocks, alphas), context.graph)
    quality = psnr(context.host, watermarked)
    if math.isinf(quality):
        raise ValueError(
            "embedding left the image bit-identical to the host; the objective is undefined"
        )
    scores = []
    for spec in context.attacks:
        attacked = apply_attack(watermarked, spec)
        recovered = extract(attacked, key, context.graph)
        scores.append(bit_match_rate(context.watermark, recovered))
    mean_nc = sum(scores) / len(scores) if scores else 1.0
    value = fitness_value(quality, mean_nc, context.psnr_target, context.psnr_weight)
    if not math.isfinite(value):
        raise ValueError(f"non-finite fitness {value!r} (psnr={quality}, mean_nc={mean_nc})")
    return FitnessBreakdown(value=value, psnr=quality, mean_nc=mean_nc, per_attack_nc=tuple(scores))


class _TrackedObjective:
    """Adapter feeding the engine scalars while remembering the best breakdown."""

    def __init__(self, context: FitnessContext, encoding: AgentEncoding) -> None:
        self.context = context
        self.encoding = encoding
        self.best: FitnessBreakdown | None = None

    def __call__(self, position: np.ndarray) -> float:
        breakdown = watermark_fitness(position, self.context, self.encoding)
        if self.best is None or breakdown.value < self.best.value:
            self.best = breakdown
        return breakdown.value


@dataclass(frozen=True)
class HistoryRow:
    iteration: int
    best_fitness: float
    best_psnr: float
    best_mean_nc: float


def history_to_csv(rows: Iterable[HistoryRow]) -> str:
    lines = ["iteration,best_fitness,best_psnr,mean_nc"]
    for row in rows:
        lines.append(
            f"{row.iteration},{row.best_fitness!r},{row.best_psnr!r},{row.best_mean_nc!r}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class OptimizeResult:
    key: WatermarkKey
    watermarked: RasterImage
    history: tuple[HistoryRow, ...]
    best_position: np.ndarray
    best_fitness: float
    psnr: float
    mean_nc: float


def optimize_watermarking(
    host: RasterImage,
    watermark: WatermarkBits,
    attacks: Sequence[AttackSpec],
    config: WoaConfig,
    encoding: AgentEncoding | None = None,
    graph: GraphSpec | None = None,
    psnr_target: float = DEFAULT_PSNR_TARGET,
    psnr_weight: float = DEFAULT_PSNR_WEIGHT,
) -> OptimizeResult:
    """Search for the block assignment and strengths minimizing the objective,
    then embed once more with the winner and return the finished artifacts."""
    if graph is None:
        graph = build_graph(4)
    context = FitnessContext(
        host=host,
        watermark=watermark,
        attacks=tuple(attacks),
        graph=graph,
        psnr_target=psnr_target,
        psnr_weight=psnr_weight,
    )
    if encoding is None:
        encoding = AgentEncoding(bit_count=watermark.count, block_count=context.block_count())
    if config.bounds is None:
        config = replace(config, bounds=encoding.bounds())
    tracked = _TrackedObjective(context, encoding)
    rows: list[HistoryRow] = []

    def observe(iteration: int, best_fitness: float) -> None:
        assert tracked.best is not None
        rows.append(
            HistoryRow(
                iteration=iteration,
                best_fitness=best_fitness,
                best_psnr=tracked.best.psnr,
                best_mean_nc=tracked.best.mean_nc,
            )
        )

    result = woa_run(tracked, config, progress=observe)
    blocks, alphas = decode_agent(result.best_position, encoding)
    watermarked, key = embed(host, watermark, zip(blocks, alphas), graph)
    assert tracked.best is not None
    return OptimizeResult(
        key=key,
        watermarked=watermarked,
        history=tuple(rows),
        best_position=result.best_position,
        best_fitness=result.best_fitness,
        psnr=tracked.best.psnr,
        mean_nc=tracked.best.mean_nc,
    )
