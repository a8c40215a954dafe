"""Random MAXCUT instances f(x) = 1/4 sum_{i<j} w_ij (x_i - x_j)^2 on [-1, 1]^n.

Bounds are reported in the maximization sense: the minimization bounds of -f are
computed and negated, so every bound is a lower bound on OPT.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import comb
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..config import resolve_precision
from ..errors import BudgetExceeded, InvalidParameters
from ..hierarchy import Method, upper_bound_full, upper_bound_pfm
from ..measures import Domain, pushforward_moments
from ..polyring import MPoly

logger = logging.getLogger(__name__)

GENERATOR = "PCG64"
MAX_BRUTE_FORCE_N = 24
FULL_BASIS_BUDGET = 500
ENUMERATION_CHUNK = 1 << 16


class MaxCutInstance(NamedTuple):
    n: int
    weights: Tuple[Tuple[Fraction, ...], ...]
    p: Fraction
    seed: int
    index: int = 0

    @property
    def edges(self) -> List[Tuple[int, int, Fraction]]:
        return [
            (i, j, self.weights[i][j])
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.weights[i][j]
        ]

    def poly(self) -> MPoly:
        """1/4 sum_{i<j} w_ij (x_i - x_j)^2."""
        terms = {}
        for i, j, w in self.edges:
            ei = tuple(2 if k == i else 0 for k in range(self.n))
            ej = tuple(2 if k == j else 0 for k in range(self.n))
            eij = tuple(1 if k in (i, j) else 0 for k in range(self.n))
            terms[ei] = terms.get(ei, 0) + w / 4
            terms[ej] = terms.get(ej, 0) + w / 4
            terms[eij] = terms.get(eij, 0) - w / 2
        return MPoly(self.n, terms)

    def weight_array(self) -> np.ndarray:
        return np.array([[float(w) for w in row] for row in self.weights], dtype=float)


class MaxCutBoundRow(NamedTuple):
    r: int
    full: Optional[float]
    pfm: float


class Table3Row(NamedTuple):
    p: Fraction
    r: int
    ratio: Optional[float]
    ratio_pfm: Optional[float]
    instances: int
    skipped: int


def maxcut_gen(n: int, p: Fraction, seed: int, index: int = 0) -> MaxCutInstance:
    """Deterministic random instance: w_ij = 0 with probability p, else uniform in (0, 1].

    The stream is PCG64 seeded by SeedSequence([seed, index]); nonzero weights are
    1 - u for a generator double u, hence dyadic rationals with denominator 2^53.

    Args:
        n: Number of vertices, at least 2.
        p: Probability of a zero weight.
        seed: Base seed.
        index: Instance index within a batch.

    Returns:
        MaxCutInstance: instance
    """
    p = Fraction(p)
    if n < 2:
        raise InvalidParameters(f"need at least 2 vertices, got {n}")
    if not 0 <= p <= 1:
        raise InvalidParameters(f"p must lie in [0, 1], got {p}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                continue
            w[i][j] = w[j][i] = 1 - Fraction(rng.random())
    return MaxCutInstance(n, tuple(tuple(row) for row in w), p, seed, index)


def _exact_cut(inst: MaxCutInstance, side: Sequence[int]) -> Fraction:
    return sum((w for i, j, w in inst.edges if side[i] != side[j]), Fraction(0))


def maxcut_opt(inst: MaxCutInstance) -> Fraction:
    """Exact maximum of f over {-1, 1}^n, which equals its maximum over the box.

    Enumerates the 2^(n-1) cuts with vertex 0 fixed in float64 and re-evaluates the
    near-optimal ones exactly.
    """
    n = inst.n
    if n > MAX_BRUTE_FORCE_N:
        raise BudgetExceeded(f"brute force limited to n <= {MAX_BRUTE_FORCE_N}, got {n}")
    if not inst.edges:
        return Fraction(0)
    W = inst.weight_array()
    degree = W.sum(axis=1)
    total = 1 << (n - 1)
    best_value = -np.inf
    candidates: List[int] = []
    shifts = np.arange(n - 1)
    for start in range(0, total, ENUMERATION_CHUNK):
        codes = np.arange(start, min(total, start + ENUMERATION_CHUNK))
        S = np.zeros((codes.size, n))
        S[:, 1:] = (codes[:, None] >> shifts) & 1
        cuts = S @ degree - np.sum((S @ W) * S, axis=1)
        chunk_best = cuts.max()
        tol = 1e-9 * max(1.0, abs(chunk_best))
        if chunk_best > best_value + tol:
            candidates = []
            best_value = chunk_best
        if chunk_best >= best_value - tol:
            candidates.extend(int(c) for c in codes[cuts >= best_value - tol])
    best = Fraction(0)
    for code in candidates:
        side = [0] + [(code >> k) & 1 for k in range(n - 1)]
        best = max(best, _exact_cut(inst, side))
    return best


def maxcut_bounds(
    inst: MaxCutInstance,
    r_max: int,
    prec: Optional[int] = None,
    with_large_full: bool = False,
    full_backend: str = "lapack",
) -> List[MaxCutBoundRow]:
    """Lower bounds on OPT from both hierarchies, r = 0..r_max.

    Full bounds whose basis exceeds 500 monomials are left out unless ``with_large_full``.
    """
    prec = resolve_precision(prec)
    domain = Domain.box(inst.n)
    neg = -inst.poly()
    moments = pushforward_moments(domain, neg, 2 * r_max + 1)
    rows = []
    for r in range(r_max + 1):
        full = None
        if with_large_full or comb(inst.n + r, r) <= FULL_BASIS_BUDGET:
            full = -float(upper_bound_full(neg, domain, r, prec=prec, backend=full_backend).value)
        pfm = -float(
            upper_bound_pfm(neg, domain, r, Method.PFM_HANKEL, prec=prec, moments=moments).value
        )
        logger.debug("instance %d r=%d: full=%s pfm=%s", inst.index, r, full, pfm)
        rows.append(MaxCutBoundRow(r, full, pfm))
    return rows


def _instance_ratios(job) -> Optional[Tuple[float, List[Tuple[Optional[float], float]]]]:
    n, p, seed, index, r_max, prec = job
    inst = maxcut_gen(n, p, seed, index)
    opt = maxcut_opt(inst)
    if opt == 0:
        return None
    opt_f = float(opt)
    rows = maxcut_bounds(inst, r_max, prec)
    ratios = [
        (None if row.full is None else (opt_f - row.full) / opt_f, (opt_f - row.pfm) / opt_f)
        for row in rows
    ]
    return opt_f, ratios


def table3_ratios(
    p: Fraction,
    count: int = 50,
    r_max: int = 4,
    seed: int = 0,
    n: int = 8,
    prec: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[Table3Row]:
    """Average (OPT - f^(r)) / OPT and (OPT - f_pfm^(r)) / OPT over ``count`` fresh instances.

    Instances with OPT = 0 are skipped. Results are merged in instance order.
    """
    prec = resolve_precision(prec)
    p = Fraction(p)
    jobs = [(n, p, seed, i, r_max, prec) for i in range(count)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_instance_ratios, jobs))
    else:
        results = []
        for i, job in enumerate(jobs):
            logger.info("p=%s instance %d of %d", p, i + 1, count)
            results.append(_instance_ratios(job))
    done = [res for res in results if res is not None]
    skipped = len(results) - len(done)
    rows = []
    for r in range(r_max + 1):
        full = [ratios[r][0] for _, ratios in done if ratios[r][0] is not None]
        pfm = [ratios[r][1] for _, ratios in done]
        rows.append(
            Table3Row(
                p,
                r,
                float(np.mean(full)) if full else None,
                float(np.mean(pfm)) if pfm else None,
                len(done),
                skipped,
            )
        )
    return rows
