"""Numerical minimization of the conditional rate under distortion and
perception constraints.

Two independent routes are provided on purpose:

- ``oracle_min_rate``: exhaustive grid search over every stochastic
  decoding rule p(Shat | X, Y), scoring each candidate by its exact
  conditional mutual information I(X; Shat | Y), exact expected Hamming
  distortion against the hidden bit, and exact total variation between
  the source and reconstruction marginals. This is the ground truth the
  closed forms are checked against; it is free to exploit decoders whose
  per-branch marginal deviations cancel, which the branch-decomposed
  program below cannot.

- ``solve_min2``: the branch-decomposed program. Per side-information
  branch y it charges the Bernoulli rate-distortion-perception value of
  an (observation-domain distortion d_y, branch perception p_y)
  allocation and minimizes

      p_a * R(a*)(d_0, p_0) + p_b * R(b*)(d_1, p_1)

  subject to the semantic-distortion budget
  p_a ((1-2q) d_0 + q) + p_b ((1-2q) d_1 + q) <= D and the aligned
  perception budget p_a p_0 + p_b p_1 <= P. The aligned sum upper-bounds
  the true total variation, so every allocation is realizable and
  solve_min2 can never undercut the oracle by more than grid slack; the
  converse does not hold near the zero-rate plateau, where cancellation
  makes the oracle strictly better.

Both searches run a deterministic coarse grid followed by one local
refinement pass at a tenth of the resolution around the incumbent, and
break ties toward the lexicographically smallest candidate by scanning in
lexicographic order and keeping strict improvements only.

One caveat of the single-incumbent refinement: coarse-pass minima are
exactly monotone in the distortion and perception budgets (feasible sets
nest), but the refinement box follows the incumbent, so final rates across
neighbouring budgets can wobble by roughly a thousandth of a bit at coarse
resolutions when adjacent targets settle in different basins.
"""

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisError, InfeasibleError
from .probability_core import (
    FiniteDistribution,
    JointDistribution,
    _as_probability,
    binary_entropy_array,
    conditional_mutual_information,
    tv_distance,
)
from .rdpf_closed_form import rdpf_piecewise
from .semantic_model import SemanticModel

_TOL = 1e-12
_RES_MIN, _RES_MAX = 1e-4, 0.1


@dataclass(frozen=True)
class DecoderLaw:
    """Stochastic binary decoding rule, one Bernoulli per (X, Y) cell.

    s_y = P(Shat = 0 | X = 0, Y = y) and t_y = P(Shat = 0 | X = 1, Y = y).
    """

    s0: float
    t0: float
    s1: float
    t1: float

    def __post_init__(self):
        for name in ("s0", "t0", "s1", "t1"):
            object.__setattr__(self, name, _as_probability(getattr(self, name), name))

    @classmethod
    def copy_observation(cls) -> "DecoderLaw":
        """Shat = X."""
        return cls(1.0, 0.0, 1.0, 0.0)

    @classmethod
    def from_side_information(cls) -> "DecoderLaw":
        """Shat = Y, ignoring the observation entirely."""
        return cls(1.0, 1.0, 0.0, 0.0)

    @classmethod
    def uniform(cls) -> "DecoderLaw":
        """Shat is an independent fair coin."""
        return cls(0.5, 0.5, 0.5, 0.5)

    def prob_zero_table(self) -> np.ndarray:
        """P(Shat = 0) indexed [x, y]."""
        return np.array([[self.s0, self.s1], [self.t0, self.t1]])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.s0, self.t0, self.s1, self.t1)


@dataclass(frozen=True)
class DecoderMetrics:
    """Exact per-symbol performance of a decoding rule on a model."""

    rate: float
    distortion: float
    perception: float


@dataclass(frozen=True)
class SolverResult:
    rate: float
    achieved_D: float
    achieved_P: float
    argmin: DecoderLaw | None
    grid_resolution: float
    branch_allocation: tuple[float, float, float, float] | None = None


def evaluate_decoder(model: SemanticModel, law: DecoderLaw) -> DecoderMetrics:
    """Exact (rate, distortion, perception) of a decoding rule.

    The rate is I(X; Shat | Y) computed by probability_core on the
    assembled four-variable joint; no shortcut formula is trusted here.
    """
    p3 = model.joint.masses
    p_zero = law.prob_zero_table()[None, :, :]
    m4 = np.empty(p3.shape + (2,))
    m4[..., 0] = p3 * p_zero
    m4[..., 1] = p3 * (1.0 - p_zero)
    joint4 = JointDistribution(m4, ("S", "X", "Y", "Shat"))
    rate = conditional_mutual_information(joint4, "X", "Shat", "Y")
    distortion = float(m4[0, :, :, 1].sum() + m4[1, :, :, 0].sum())
    perception = tv_distance(
        joint4.marginal("S").distribution(), joint4.marginal("Shat").distribution()
    )
    return DecoderMetrics(rate=rate, distortion=distortion, perception=perception)


def shat_marginal(model: SemanticModel, law: DecoderLaw) -> FiniteDistribution:
    """Reconstruction marginal p(Shat) induced by a decoding rule."""
    p_xy = model.joint.masses.sum(axis=0)
    p0 = float((p_xy * law.prob_zero_table()).sum())
    return FiniteDistribution(np.array([p0, 1.0 - p0]))


def compose_branch_perception(p_a: float, p0_signed: float,
                              p_b: float, p1_signed: float) -> float:
    """Total variation of the pooled reconstruction marginal from signed
    per-branch deviations p(X = 0 | y) - p(Shat = 0 | y).

    Returns |p_a * p0_signed + p_b * p1_signed|; deviations of opposite
    sign cancel, which is exactly the mechanism the aligned-budget
    program cannot use.
    """
    p_a = _as_probability(p_a, "p_a")
    p_b = _as_probability(p_b, "p_b")
    for name, val in (("p0_signed", p0_signed), ("p1_signed", p1_signed)):
        if abs(val) > 1.0 + _TOL:
            raise DomainError(f"{name} must lie in [-1, 1], got {val}")
    return abs(p_a * p0_signed + p_b * p1_signed)


# ---------------------------------------------------------------------------
# exhaustive oracle
# ---------------------------------------------------------------------------

def _axis_grid(resolution: float) -> np.ndarray:
    steps = int(math.floor(1.0 / resolution + 1e-9))
    pts = np.round(np.arange(steps + 1) * resolution, 12)
    if pts[-1] < 1.0 - 1e-12:
        pts = np.append(pts, 1.0)
    return pts


def _refine_axis(center: float, resolution: float, upper: float = 1.0) -> np.ndarray:
    pts = center + np.arange(-10, 11) * (resolution / 10.0)
    return np.unique(np.clip(np.round(pts, 12), 0.0, upper))


class _BranchTables:
    """Per-branch candidate tables over an (s, t) product grid, flattened in
    lexicographic (s-major) order."""

    def __init__(self, model: SemanticModel, y: int,
                 s_vals: np.ndarray, t_vals: np.ndarray):
        p_y = model.p_a if y == 0 else model.p_b
        cells = model.joint.masses[:, :, y] / p_y  # p(S, X | Y = y)
        px0 = float(cells[0, 0] + cells[1, 0])
        px1 = float(cells[0, 1] + cells[1, 1])
        s = s_vals[:, None]
        t = t_vals[None, :]
        marg0 = px0 * s + px1 * t
        info = (
            binary_entropy_array(marg0)
            - px0 * binary_entropy_array(s)
            - px1 * binary_entropy_array(t)
        )
        dist = (
            cells[0, 0] * (1.0 - s)
            + cells[0, 1] * (1.0 - t)
            + cells[1, 0] * s
            + cells[1, 1] * t
        )
        self.info = np.maximum(info, 0.0).ravel()
        self.dist = dist.ravel()
        self.marg0 = marg0.ravel()
        self.s_vals = s_vals
        self.t_vals = t_vals

    def law_params(self, flat_index: int) -> tuple[float, float]:
        i, j = divmod(flat_index, self.t_vals.size)
        return float(self.s_vals[i]), float(self.t_vals[j])


_TABLE_CACHE: dict[tuple, tuple[_BranchTables, _BranchTables]] = {}
_TABLE_LOCK = threading.Lock()


def _coarse_tables(model: SemanticModel, resolution: float):
    key = (model.params, resolution)
    with _TABLE_LOCK:
        cached = _TABLE_CACHE.get(key)
    if cached is not None:
        return cached
    grid = _axis_grid(resolution)
    tables = (
        _BranchTables(model, 0, grid, grid),
        _BranchTables(model, 1, grid, grid),
    )
    with _TABLE_LOCK:
        if len(_TABLE_CACHE) > 8:
            _TABLE_CACHE.pop(next(iter(_TABLE_CACHE)))
        _TABLE_CACHE.setdefault(key, tables)
        return _TABLE_CACHE[key]


def _scan_products(tab0: _BranchTables, tab1: _BranchTables, model: SemanticModel,
                   d_targets, p_target: float, chunk_rows: int = 512):
    """Minimum rate over the product of two branch tables for each distortion
    target, under one shared perception target. Returns per-target
    (rate, flat_index_branch0, flat_index_branch1) with rate = inf when no
    candidate is feasible. Scan order is lexicographic, strict improvements
    only, so ties resolve to the smallest law."""
    p_a, p_b = model.p_a, model.p_b
    p_s0 = 1.0 - model.pi
    rate1 = p_b * tab1.info
    dist1 = p_b * tab1.dist
    marg1 = p_b * tab1.marg0
    best = [(math.inf, -1, -1) for _ in d_targets]
    n0 = tab0.info.size
    for start in range(0, n0, chunk_rows):
        stop = min(start + chunk_rows, n0)
        rate = p_a * tab0.info[start:stop, None] + rate1[None, :]
        dtot = p_a * tab0.dist[start:stop, None] + dist1[None, :]
        ptot = np.abs(p_a * tab0.marg0[start:stop, None] + marg1[None, :] - p_s0)
        feas_p = ptot <= p_target + _TOL
        for k, d_target in enumerate(d_targets):
            feasible = feas_p & (dtot <= d_target + _TOL)
            if not feasible.any():
                continue
            masked = np.where(feasible, rate, np.inf)
            flat = int(masked.argmin())
            val = float(masked.flat[flat])
            if val < best[k][0]:
                i_local, j = divmod(flat, masked.shape[1])
                best[k] = (val, start + i_local, j)
    return best


def _diagnose_infeasible(tab0, tab1, model, d_target, p_target):
    best_gap, best_d, best_p = math.inf, math.inf, math.inf
    p_a, p_b = model.p_a, model.p_b
    p_s0 = 1.0 - model.pi
    for i in range(0, tab0.dist.size, 2048):
        sl = slice(i, i + 2048)
        dtot = p_a * tab0.dist[sl, None] + p_b * tab1.dist[None, :]
        ptot = np.abs(p_a * tab0.marg0[sl, None] + p_b * tab1.marg0[None, :] - p_s0)
        gap = np.maximum(dtot - d_target, 0.0) + np.maximum(ptot - p_target, 0.0)
        flat = int(gap.argmin())
        if float(gap.flat[flat]) < best_gap:
            best_gap = float(gap.flat[flat])
            best_d = float(dtot.flat[flat])
            best_p = float(ptot.flat[flat])
    return best_d, best_p


def _law_from_indices(tab0: _BranchTables, tab1: _BranchTables,
                      i: int, j: int) -> DecoderLaw:
    s0, t0 = tab0.law_params(i)
    s1, t1 = tab1.law_params(j)
    return DecoderLaw(s0, t0, s1, t1)


def _validate_oracle_args(P: float, resolution: float) -> tuple[float, float]:
    resolution = float(resolution)
    if not _RES_MIN <= resolution <= _RES_MAX:
        raise DomainError(
            f"resolution must lie in [{_RES_MIN}, {_RES_MAX}], got {resolution}"
        )
    P = float(P)
    if math.isnan(P) or P < -_TOL:
        raise DomainError(f"perception budget must be non-negative, got {P}")
    return P, resolution


def oracle_min_rates(model: SemanticModel, d_targets, P: float,
                     resolution: float) -> list[SolverResult | None]:
    """Batched exhaustive search sharing one coarse pass across distortion
    targets. Entries are None where no candidate is feasible. Results are
    identical to calling ``oracle_min_rate`` per target."""
    P, resolution = _validate_oracle_args(P, resolution)
    d_targets = [float(d) for d in d_targets]
    tab0, tab1 = _coarse_tables(model, resolution)
    coarse = _scan_products(tab0, tab1, model, d_targets, P)
    results: list[SolverResult | None] = []
    for d_target, (rate, i, j) in zip(d_targets, coarse):
        if not math.isfinite(rate):
            results.append(None)
            continue
        law = _law_from_indices(tab0, tab1, i, j)
        fine0 = _BranchTables(
            model, 0,
            _refine_axis(law.s0, resolution), _refine_axis(law.t0, resolution),
        )
        fine1 = _BranchTables(
            model, 1,
            _refine_axis(law.s1, resolution), _refine_axis(law.t1, resolution),
        )
        (f_rate, fi, fj), = _scan_products(fine0, fine1, model, [d_target], P)
        if f_rate < rate:
            law = _law_from_indices(fine0, fine1, fi, fj)
        exact = evaluate_decoder(model, law)
        results.append(
            SolverResult(
                rate=exact.rate,
                achieved_D=exact.distortion,
                achieved_P=exact.perception,
                argmin=law,
                grid_resolution=resolution,
            )
        )
    return results


def oracle_min_rate(model: SemanticModel, D: float, P: float,
                    resolution: float) -> SolverResult:
    """Exhaustive minimum of I(X; Shat | Y) over all decoding rules meeting
    the distortion and perception targets; deterministic for fixed inputs.

    Raises InfeasibleError (with nearest-feasible diagnostics) when no grid
    candidate satisfies both constraints.
    """
    result, = oracle_min_rates(model, [D], P, resolution)
    if result is None:
        tab0, tab1 = _coarse_tables(model, float(resolution))
        near_d, near_p = _diagnose_infeasible(tab0, tab1, model, float(D), float(P))
        raise InfeasibleError(
            f"no decoder meets D <= {D}, P <= {P}; nearest candidate achieves "
            f"(D = {near_d:.6f}, P = {near_p:.6f})"
        )
    return result


# ---------------------------------------------------------------------------
# branch-decomposed program
# ---------------------------------------------------------------------------

def _half_grid(resolution: float) -> np.ndarray:
    steps = int(math.floor(0.5 / resolution + 1e-9))
    pts = np.round(np.arange(steps + 1) * resolution, 12)
    if pts[-1] < 0.5 - 1e-12:
        pts = np.append(pts, 0.5)
    return pts


def _branch_rate_table(star: float, d_vals: np.ndarray, p_vals: np.ndarray) -> np.ndarray:
    table = np.empty((d_vals.size, p_vals.size))
    for di, d in enumerate(d_vals):
        for pi_, p in enumerate(p_vals):
            table[di, pi_] = rdpf_piecewise(star, float(d), float(p))
    return table


def _min2_hypotheses(model: SemanticModel) -> float:
    if abs(model.pi - 0.5) > _TOL or model.q1 != model.q2:
        raise HypothesisError(
            "the branch decomposition needs a uniform (S, X) pair with a "
            "common observation crossover; the distortion conversion and the "
            "source/observation marginal identity both rely on it"
        )
    if model.a_star > 0.5 + _TOL or model.b_star > 0.5 + _TOL:
        raise HypothesisError(
            f"branch posteriors must not exceed 1/2, got a*={model.a_star}, "
            f"b*={model.b_star}"
        )
    return model.q1


def _min2_scan(model: SemanticModel, q: float, D: float, P: float,
               d0_vals, p0_vals, d1_vals, p1_vals):
    p_a, p_b = model.p_a, model.p_b
    r0 = _branch_rate_table(min(model.a_star, 0.5), d0_vals, p0_vals)
    r1 = _branch_rate_table(min(model.b_star, 0.5), d1_vals, p1_vals)
    sem0 = (1.0 - 2.0 * q) * d0_vals + q
    sem1 = (1.0 - 2.0 * q) * d1_vals + q
    obj0 = (p_a * r0).ravel()
    obj1 = (p_b * r1).ravel()
    dsem0 = (p_a * np.broadcast_to(sem0[:, None], r0.shape)).ravel()
    dsem1 = (p_b * np.broadcast_to(sem1[:, None], r1.shape)).ravel()
    per0 = (p_a * np.broadcast_to(p0_vals[None, :], r0.shape)).ravel()
    per1 = (p_b * np.broadcast_to(p1_vals[None, :], r1.shape)).ravel()
    best = (math.inf, -1, -1)
    for start in range(0, obj0.size, 512):
        sl = slice(start, min(start + 512, obj0.size))
        total = obj0[sl, None] + obj1[None, :]
        feas = (dsem0[sl, None] + dsem1[None, :] <= D + _TOL) & (
            per0[sl, None] + per1[None, :] <= P + _TOL
        )
        if not feas.any():
            continue
        masked = np.where(feas, total, np.inf)
        flat = int(masked.argmin())
        val = float(masked.flat[flat])
        if val < best[0]:
            i_local, j = divmod(flat, masked.shape[1])
            best = (val, start + i_local, j)
    return best


def solve_min2(model: SemanticModel, D: float, P: float,
               resolution: float) -> SolverResult:
    """Minimize the branch-decomposed rate over per-branch (distortion,
    perception) allocations on [0, 1/2]^4 with one refinement pass.

    achieved_P reports the aligned budget p_a p_0 + p_b p_1, an upper bound
    on the true total variation of any decoder realizing the allocation.
    The result can exceed the exhaustive oracle near the zero-rate plateau,
    where only sign cancellation across branches reaches lower rates.
    """
    P, resolution = _validate_oracle_args(P, resolution)
    q = _min2_hypotheses(model)
    D = float(D)
    grid = _half_grid(resolution)

    def pick(vals0, pvals0, vals1, pvals1):
        return _min2_scan(model, q, D, P, vals0, pvals0, vals1, pvals1)

    rate, i, j = pick(grid, grid, grid, grid)
    if not math.isfinite(rate):
        raise InfeasibleError(
            f"no branch allocation meets D <= {D}, P <= {P}; the semantic "
            f"distortion floor of this model is {q}"
        )
    n = grid.size
    d0, p0 = float(grid[i // n]), float(grid[i % n])
    d1, p1 = float(grid[j // n]), float(grid[j % n])

    f_d0 = _refine_axis(d0, resolution, upper=0.5)
    f_p0 = _refine_axis(p0, resolution, upper=0.5)
    f_d1 = _refine_axis(d1, resolution, upper=0.5)
    f_p1 = _refine_axis(p1, resolution, upper=0.5)
    f_rate, fi, fj = pick(f_d0, f_p0, f_d1, f_p1)
    if f_rate < rate:
        rate = f_rate
        d0, p0 = float(f_d0[fi // f_p0.size]), float(f_p0[fi % f_p0.size])
        d1, p1 = float(f_d1[fj // f_p1.size]), float(f_p1[fj % f_p1.size])

    achieved_d = model.p_a * ((1 - 2 * q) * d0 + q) + model.p_b * ((1 - 2 * q) * d1 + q)
    achieved_p = model.p_a * p0 + model.p_b * p1
    return SolverResult(
        rate=float(rate),
        achieved_D=float(achieved_d),
        achieved_P=float(achieved_p),
        argmin=None,
        grid_resolution=resolution,
        branch_allocation=(d0, d1, p0, p1),
    )
