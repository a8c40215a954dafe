"""Monte-Carlo estimation of local volume growth vol(K ∩ B_delta(x)) ~ eta delta^N vol(B^n).

Regions are finite intersections of constraints g(x) >= 0 inside a bounding box.
Constraints are polynomials, optionally plus multiples of the single non-polynomial
atom exp(-1/x_i) (zero for x_i <= 0).
"""

import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gamma

from .errors import AnchorOutsideClosure, InvalidParameters, UnknownName
from .polyring import MPoly
from .utils import fit_line, load_json_ordered

logger = logging.getLogger(__name__)

RELIABLE_REL_STDERR = 0.2
PREDICTED_HITS_THRESHOLD = 10
DEFAULT_BATCH = 100_000

__all__ = [
    "ExpAtom",
    "Constraint",
    "RegionSpec",
    "VolumeEstimate",
    "GrowthFit",
    "named_region",
    "load_region",
    "region_from_dict",
    "ball_volume",
    "local_volume",
    "growth_exponent",
]


class ExpAtom(NamedTuple):
    """coefficient * exp(-1 / x_var), taken as 0 where x_var <= 0."""

    coefficient: Fraction
    var: int

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        x = points[:, self.var]
        out = np.zeros_like(x)
        positive = x > 0
        out[positive] = np.exp(-1.0 / x[positive])
        return float(self.coefficient) * out


class Constraint(NamedTuple):
    """g(x) = poly(x) + sum of exponential atoms, meaning g(x) >= 0."""

    poly: MPoly
    atoms: Tuple[ExpAtom, ...] = ()

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        values = self.poly.evaluate_array(points)
        for atom in self.atoms:
            values = values + atom.evaluate(points)
        return values


class RegionSpec(NamedTuple):
    nvars: int
    constraints: Tuple[Constraint, ...]
    box: Tuple[Tuple[float, float], ...]
    name: str = ""

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        inside = np.all((points >= lo) & (points <= hi), axis=1)
        for c in self.constraints:
            inside &= c.evaluate(points) >= 0
        return inside


class VolumeEstimate(NamedTuple):
    delta: float
    fraction: float
    stderr: float
    hits: int
    samples: int

    @property
    def rel_stderr(self) -> float:
        return self.stderr / self.fraction if self.fraction > 0 else math.inf


class GrowthFit(NamedTuple):
    anchor: Tuple[float, ...]
    ladder: Tuple[float, ...]
    estimates: Tuple[VolumeEstimate, ...]
    volumes: Tuple[float, ...]
    reliable: Tuple[bool, ...]
    exponent: float
    eta: float
    epsilon: float
    residual: float
    local_slopes: Tuple[float, ...]
    divergent: bool

    def satisfies_fat_condition(self, eta: float = 0.1) -> bool:
        """Every reliable rung keeps at least ``eta`` of the ball (the growth condition with N = n)."""
        return all(e.fraction >= eta for e, ok in zip(self.estimates, self.reliable) if ok)

    def rows(self) -> List[Tuple]:
        return [
            (e.delta, e.fraction, e.stderr, v, int(ok))
            for e, v, ok in zip(self.estimates, self.volumes, self.reliable)
        ]


def _poly(nvars: int, terms: Dict[Tuple[int, ...], int]) -> MPoly:
    return MPoly(nvars, terms)


def _example1() -> RegionSpec:
    # 0 <= x1 <= 1, 0 <= x2 <= x1^2
    constraints = (
        Constraint(_poly(2, {(1, 0): 1})),
        Constraint(_poly(2, {(0, 0): 1, (1, 0): -1})),
        Constraint(_poly(2, {(0, 1): 1})),
        Constraint(_poly(2, {(2, 0): 1, (0, 1): -1})),
    )
    return RegionSpec(2, constraints, ((0.0, 1.0), (0.0, 1.0)), "example1")


def _example2() -> RegionSpec:
    # 0 <= x1 <= 1, 0 <= x2 <= exp(-1/x1)
    constraints = (
        Constraint(_poly(2, {(1, 0): 1})),
        Constraint(_poly(2, {(0, 0): 1, (1, 0): -1})),
        Constraint(_poly(2, {(0, 1): 1})),
        Constraint(_poly(2, {(0, 1): -1}), (ExpAtom(Fraction(1), 0),)),
    )
    return RegionSpec(2, constraints, ((0.0, 1.0), (0.0, 1.0)), "example2")


def _box(nvars: int) -> RegionSpec:
    constraints = []
    for i in range(nvars):
        alpha = [0] * nvars
        alpha[i] = 2
        constraints.append(Constraint(_poly(nvars, {(0,) * nvars: 1, tuple(alpha): -1})))
    return RegionSpec(nvars, tuple(constraints), ((-1.0, 1.0),) * nvars, f"box{nvars}")


def named_region(name: str, nvars: int = 2) -> RegionSpec:
    """``example1`` (polynomial cusp), ``example2`` (exponential cusp) or ``box`` ([-1,1]^n)."""
    if name == "example1":
        return _example1()
    if name == "example2":
        return _example2()
    if name == "box":
        return _box(nvars)
    raise UnknownName(f"unknown region {name!r}")


def region_from_dict(data: Dict) -> RegionSpec:
    """Builds a region from its JSON form.

    ``{"nvars": n, "box": [[lo, hi], ...], "constraints": [{"terms": [["c", [e1, ...]], ...],
    "exp": [["c", var], ...]}, ...]}``; coefficients are rational strings or numbers.
    """
    try:
        nvars = int(data["nvars"])
        box = tuple((float(lo), float(hi)) for lo, hi in data["box"])
        constraints = []
        for item in data["constraints"]:
            terms = {tuple(int(e) for e in alpha): Fraction(c) for c, alpha in item.get("terms", [])}
            atoms = tuple(ExpAtom(Fraction(c), int(var)) for c, var in item.get("exp", []))
            constraints.append(Constraint(MPoly(nvars, terms), atoms))
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidParameters(f"malformed region description: {e}") from e
    if len(box) != nvars:
        raise InvalidParameters(f"bounding box has {len(box)} axes, expected {nvars}")
    return RegionSpec(nvars, tuple(constraints), box, str(data.get("name", "")))


def load_region(source: str, nvars: int = 2) -> RegionSpec:
    """A named region, or a region JSON file."""
    try:
        return named_region(source, nvars)
    except UnknownName:
        pass
    try:
        return region_from_dict(load_json_ordered(source))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidParameters(f"cannot read region {source!r}: {e}") from e


def ball_volume(nvars: int, radius: float = 1.0) -> float:
    return math.pi ** (nvars / 2) / gamma(nvars / 2 + 1) * radius**nvars


def _count_hits(region: RegionSpec, x: np.ndarray, delta: float, count: int, seed: int, batch: int) -> int:
    rng = np.random.default_rng([seed, batch])
    n = region.nvars
    direction = rng.standard_normal(size=(count, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = delta * rng.uniform(size=(count, 1)) ** (1.0 / n)
    return int(np.count_nonzero(region.contains(x + direction * radius)))


def local_volume(
    region: RegionSpec,
    x: Sequence[float],
    delta: float,
    samples: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH,
    workers: Optional[int] = None,
) -> VolumeEstimate:
    """Monte-Carlo estimate of vol(K ∩ B_delta(x)) / vol(B_delta).

    Samples are uniform in the ball; batch b draws from the stream seeded by
    (seed, b), so the estimate depends only on the seed and the batch size.

    Args:
        region: Region K.
        x: Anchor point inside the bounding box.
        delta: Ball radius.
        samples: Number of samples.
        seed: Seed of the sample streams.
        batch_size: Samples per batch.
        workers: Threads for batch evaluation (sequential when None).

    Returns:
        VolumeEstimate: estimate
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (region.nvars,):
        raise InvalidParameters(f"anchor has shape {x.shape}, expected ({region.nvars},)")
    if delta <= 0:
        raise InvalidParameters(f"radius must be positive, got {delta}")
    if samples < 1:
        raise InvalidParameters(f"need at least one sample, got {samples}")
    if any(not lo <= xi <= hi for xi, (lo, hi) in zip(x, region.box)):
        raise InvalidParameters(f"anchor {tuple(x)} lies outside the bounding box")
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)
    jobs = [(region, x, delta, size, seed, b) for b, size in enumerate(sizes)]
    if workers:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda job: _count_hits(*job), jobs))
    else:
        hits = sum(_count_hits(*job) for job in jobs)
    p = hits / samples
    stderr = math.sqrt(p * (1 - p) / samples)
    logger.debug("delta=%g: %d hits in %d samples (%d batches)", delta, hits, samples, len(sizes))
    return VolumeEstimate(float(delta), p, stderr, hits, samples)


def _is_divergent(slopes: Sequence[float]) -> bool:
    if len(slopes) < 2:
        return False
    increasing = all(b > a for a, b in zip(slopes, slopes[1:]))
    return increasing and slopes[-1] - slopes[0] > max(1.0, 0.25 * abs(slopes[0]))


def growth_exponent(
    region: RegionSpec,
    x: Sequence[float],
    ladder: Sequence[float],
    samples: int,
    seed: int,
    workers: Optional[int] = None,
) -> GrowthFit:
    """Fits log vol(K ∩ B_delta(x)) = log(eta vol(B^n)) + N log delta over a radius ladder.

    Only rungs with relative standard error below 20% enter the fit. The result is
    flagged divergent when the local exponents between consecutive reliable rungs keep
    increasing as delta shrinks, or when a rung has no hits although the fitted power
    law predicts at least 10.

    Args:
        region: Region K.
        x: Anchor point.
        ladder: Strictly decreasing radii, at least three.
        samples: Samples per rung.
        seed: Base seed; rung i uses the stream derived from (seed, i).
        workers: Threads per rung.

    Returns:
        GrowthFit: fit
    """
    ladder = [float(d) for d in ladder]
    if len(ladder) < 3:
        raise InvalidParameters(f"ladder needs at least 3 radii, got {len(ladder)}")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise InvalidParameters(f"ladder must be strictly decreasing: {ladder}")
    n = region.nvars
    estimates = []
    for i, delta in enumerate(ladder):
        rung_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        estimates.append(local_volume(region, x, delta, samples, rung_seed, workers=workers))
    if all(e.hits == 0 for e in estimates):
        raise AnchorOutsideClosure(
            f"no samples near {tuple(x)} fell in the region at any radius"
        )
    volumes = [e.fraction * ball_volume(n, e.delta) for e in estimates]
    reliable = [e.hits > 0 and e.rel_stderr < RELIABLE_REL_STDERR for e in estimates]
    idx = [i for i, ok in enumerate(reliable) if ok]
    exponent = eta = residual = math.nan
    slopes: List[float] = []
    divergent = False
    if len(idx) >= 2:
        logd = np.log([ladder[i] for i in idx])
        logv = np.log([volumes[i] for i in idx])
        exponent, offset, res = fit_line(logd, logv)
        eta = math.exp(offset) / ball_volume(n)
        residual = float(np.sqrt(np.mean(res**2)))
        slopes = [float((logv[j + 1] - logv[j]) / (logd[j + 1] - logd[j])) for j in range(len(idx) - 1)]
        divergent = _is_divergent(slopes)
        last = idx[-1]
        for i in range(last + 1, len(ladder)):
            if estimates[i].hits == 0:
                predicted = math.exp(offset) * ladder[i] ** exponent / ball_volume(n, ladder[i])
                if predicted * samples >= PREDICTED_HITS_THRESHOLD:
                    divergent = True
    else:
        warnings.warn(f"only {len(idx)} reliable rung(s); no exponent fitted")
    if len(idx) < len(ladder):
        logger.info("%d of %d rungs reliable", len(idx), len(ladder))
    return GrowthFit(
        tuple(float(v) for v in x),
        tuple(ladder),
        tuple(estimates),
        tuple(volumes),
        tuple(reliable),
        float(exponent),
        float(eta),
        ladder[0],
        residual,
        tuple(slopes),
        divergent,
    )
