"""Monte Carlo validation: i.i.d. block sampling, stochastic per-symbol
decoding under shared randomness, empirical distortion/perception
measurement, and a desk-scale random-codebook-with-binning experiment.

All randomness flows from explicit integer seeds expanded through the
counter-based Philox generator, so encoder and decoder can share one seed
as their common randomness and every trial is bit-reproducible. Derived
streams are keyed as (seed, trial, role) tuples through SeedSequence; no
global random state is touched anywhere.

The binning experiment replaces typical-set machinery, which is vacuous at
block lengths this small, with minimum-Hamming-distance selection: the
encoder picks the codeword closest to its observation block, transmits the
codeword's bin index, and the decoder picks within that bin the codeword
closest to its side-information block. Codewords are dealt into bins
round-robin after a uniform shuffle, so equal codebook and bin rates give
singleton bins and the bin decoding step can never fail.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .probability_core import FiniteDistribution, tv_distance
from .rdpf_solver import DecoderLaw, shat_marginal
from .semantic_model import SemanticModel

_CODEBOOK_LOG2_CAP = 24.0


def derive_seed(base: int, *parts: int) -> int:
    """A 64-bit stream seed deterministically derived from a base seed and
    integer role parts."""
    ss = np.random.SeedSequence((int(base),) + tuple(int(p) for p in parts))
    return int(ss.generate_state(1, np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed & (2**64 - 1))))


@dataclass(frozen=True)
class TrialConfig:
    """Parameters of a Monte Carlo run.

    ``seed`` is the common randomness shared by encoder and decoder;
    ``rate_R1``/``rate_R2`` are the codebook and bin rates in bits per
    source symbol; k and m are kept only for source/channel feasibility
    bookkeeping and play no role in the simulation itself.
    """

    n: int
    trials: int
    seed: int
    rate_R1: float = 0.0
    rate_R2: float = 0.0
    k: int = 1
    m: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"block length must be positive, got {self.n}")
        if self.trials < 1:
            raise DomainError(f"trial count must be positive, got {self.trials}")
        if not (self.rate_R1 >= self.rate_R2 >= 0.0):
            raise DomainError(
                f"need rate_R1 >= rate_R2 >= 0, got {self.rate_R1}, {self.rate_R2}"
            )
        if self.k < 1 or self.m < 1:
            raise DomainError("k and m must be positive counts")


@dataclass(frozen=True)
class TrialReport:
    """Aggregated empirical statistics of a Monte Carlo run.

    empirical_P_marginal pools all trials before taking the total
    variation; empirical_P_blockwise averages the per-block total
    variation, which is the empirical-perception reading. The standard
    error is reported when at least two trials were run.
    """

    empirical_D: float
    empirical_D_se: float | None
    empirical_P_marginal: float
    empirical_P_blockwise: float
    bin_decode_failures: int
    seeds_used: tuple[int, ...]
    trials: int
    n: int


@dataclass(frozen=True)
class BlockMetrics:
    """Single-block fragment of a TrialReport."""

    empirical_D: float
    empirical_P_marginal: float
    empirical_P_blockwise: float


def sample_block(model: SemanticModel, n: int, seed: int):
    """n i.i.d. draws of (S, X, Y) from the model joint, deterministic in seed."""
    if n < 1:
        raise DomainError(f"block length must be positive, got {n}")
    flat = model.joint.masses.ravel()
    cum = np.cumsum(flat)
    u = _rng(seed).random(n)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), flat.size - 1)
    s = (idx >> 2).astype(np.uint8)
    x = ((idx >> 1) & 1).astype(np.uint8)
    y = (idx & 1).astype(np.uint8)
    return s, x, y


def apply_decoder(law: DecoderLaw, x_block: np.ndarray, y_block: np.ndarray,
                  seed: int) -> np.ndarray:
    """Per-symbol stochastic decoding of (X, Y) blocks under a shared seed."""
    x_block = np.asarray(x_block)
    y_block = np.asarray(y_block)
    if x_block.shape != y_block.shape:
        raise DomainError(
            f"block length mismatch: {x_block.shape} vs {y_block.shape}"
        )
    p_zero = law.prob_zero_table()[x_block, y_block]
    u = _rng(seed).random(x_block.size)
    return (u >= p_zero).astype(np.uint8)


def _freq_zero(block: np.ndarray) -> float:
    return float(np.count_nonzero(block == 0) / block.size)


def empirical_metrics(s_block: np.ndarray, shat_block: np.ndarray,
                      block_length: int) -> BlockMetrics:
    """Empirical distortion and perception of one reconstructed block.

    ``block_length`` is the sub-block size for the empirical perception
    statistic and must divide the block length; the marginal statistic
    pools the whole block.
    """
    s_block = np.asarray(s_block)
    shat_block = np.asarray(shat_block)
    if s_block.shape != shat_block.shape:
        raise DomainError(
            f"block length mismatch: {s_block.shape} vs {shat_block.shape}"
        )
    n = s_block.size
    if block_length < 1 or n % block_length != 0:
        raise DomainError(
            f"sub-block length {block_length} does not divide block length {n}"
        )
    empirical_d = float(np.count_nonzero(s_block != shat_block) / n)
    p_marginal = tv_distance(
        FiniteDistribution(np.array([_freq_zero(s_block), 1.0 - _freq_zero(s_block)])),
        FiniteDistribution(
            np.array([_freq_zero(shat_block), 1.0 - _freq_zero(shat_block)])
        ),
    )
    s_parts = s_block.reshape(-1, block_length)
    shat_parts = shat_block.reshape(-1, block_length)
    fs = (s_parts == 0).mean(axis=1)
    fh = (shat_parts == 0).mean(axis=1)
    p_blockwise = float(np.abs(fs - fh).mean())
    return BlockMetrics(
        empirical_D=empirical_d,
        empirical_P_marginal=p_marginal,
        empirical_P_blockwise=p_blockwise,
    )


def _aggregate_report(per_trial_d, pooled_s, pooled_shat, blockwise_values,
                      failures, seeds, cfg: TrialConfig) -> TrialReport:
    per_trial_d = np.asarray(per_trial_d, dtype=float)
    mean_d = float(per_trial_d.mean())
    se = None
    if per_trial_d.size >= 2:
        se = float(per_trial_d.std(ddof=1) / math.sqrt(per_trial_d.size))
    p_marginal = abs(_freq_zero(pooled_s) - _freq_zero(pooled_shat))
    return TrialReport(
        empirical_D=mean_d,
        empirical_D_se=se,
        empirical_P_marginal=float(p_marginal),
        empirical_P_blockwise=float(np.mean(blockwise_values)),
        bin_decode_failures=int(failures),
        seeds_used=tuple(seeds),
        trials=cfg.trials,
        n=cfg.n,
    )


def run_decoder_trials(model: SemanticModel, law: DecoderLaw, cfg: TrialConfig,
                       block_length: int = 100) -> TrialReport:
    """Repeated sample-and-decode trials of a fixed per-symbol decoding rule."""
    if cfg.n % block_length != 0:
        block_length = cfg.n
    per_trial_d, blockwise, seeds = [], [], []
    pooled_s, pooled_shat = [], []
    for t in range(cfg.trials):
        block_seed = derive_seed(cfg.seed, t, 0)
        decode_seed = derive_seed(cfg.seed, t, 1)
        s, x, y = sample_block(model, cfg.n, block_seed)
        shat = apply_decoder(law, x, y, decode_seed)
        m = empirical_metrics(s, shat, block_length)
        per_trial_d.append(m.empirical_D)
        blockwise.append(m.empirical_P_blockwise)
        seeds.append(block_seed)
        pooled_s.append(s)
        pooled_shat.append(shat)
    return _aggregate_report(
        per_trial_d, np.concatenate(pooled_s), np.concatenate(pooled_shat),
        blockwise, 0, seeds, cfg,
    )


def _codebook_sizes(cfg: TrialConfig) -> tuple[int, int]:
    log2_words = cfg.n * cfg.rate_R1
    if log2_words > _CODEBOOK_LOG2_CAP:
        raise ResourceLimitError(
            f"codebook of 2^{log2_words:.2f} words exceeds the desk-scale cap "
            f"of 2^{_CODEBOOK_LOG2_CAP:.0f}"
        )
    words = max(1, round(2.0 ** log2_words))
    bins = max(1, round(2.0 ** (cfg.n * cfg.rate_R2)))
    return words, min(bins, words)


def random_binning_trial(model: SemanticModel, cfg: TrialConfig,
                         target_law: DecoderLaw) -> TrialReport:
    """Random-codebook-with-binning experiment at desk scale.

    Per trial: draw a fresh codebook of n-blocks i.i.d. from the
    reconstruction marginal induced by ``target_law``, deal the codewords
    into bins round-robin after a uniform shuffle, let the encoder send the
    bin index of the codeword nearest its observation block, and let the
    decoder resolve the bin with its side-information block. A bin decode
    failure means the decoder picked a different codeword than the encoder.
    """
    words, bins = _codebook_sizes(cfg)
    p_one = float(shat_marginal(model, target_law).masses[1])
    per_trial_d, blockwise, seeds = [], [], []
    pooled_s, pooled_shat = [], []
    failures = 0
    for t in range(cfg.trials):
        block_seed = derive_seed(cfg.seed, t, 0)
        code_seed = derive_seed(cfg.seed, t, 1)
        s, x, y = sample_block(model, cfg.n, block_seed)
        rng = _rng(code_seed)
        codebook = (rng.random((words, cfg.n)) < p_one).astype(np.uint8)
        bin_of = np.empty(words, dtype=np.int64)
        bin_of[rng.permutation(words)] = np.arange(words) % bins
        encoder_pick = int((codebook != x[None, :]).sum(axis=1).argmin())
        members = np.flatnonzero(bin_of == bin_of[encoder_pick])
        decoder_pick = int(
            members[(codebook[members] != y[None, :]).sum(axis=1).argmin()]
        )
        failures += int(decoder_pick != encoder_pick)
        shat = codebook[decoder_pick]
        m = empirical_metrics(s, shat, cfg.n)
        per_trial_d.append(m.empirical_D)
        blockwise.append(m.empirical_P_blockwise)
        seeds.append(block_seed)
        pooled_s.append(s)
        pooled_shat.append(shat)
    return _aggregate_report(
        per_trial_d, np.concatenate(pooled_s), np.concatenate(pooled_shat),
        blockwise, failures, seeds, cfg,
    )
