"""The binary semantic source triple (S, X, Y) and its derived conditionals.

The hidden semantic bit S is observed indirectly as X through a binary
channel with crossovers (q1, q2); side information Y available to both
encoder and decoder is generated from X through a second binary channel
with crossovers (a, b). The joint law is assembled along the Markov chain
S -> X -> Y, so P(Y | S, X) = P(Y | X) holds by construction and the
channel p(Y|S) with crossovers (u, v) is derived by composition rather
than taken as an independent input.

Every posterior the closed forms need is exposed as a plain attribute:

    p_a = P(Y = 0), p_b = P(Y = 1)
    a_star = P(X = 1 | Y = 0), b_star = P(X = 0 | Y = 1)
    u_star = P(S = 1 | Y = 0), v_star = P(S = 0 | Y = 1)

For the doubly symmetric construction (uniform S, q1 = q2 = q,
a = b = pi_x) these collapse to a_star = b_star = pi_x and
u_star = v_star = pi_x_prime = (1 - 2q) * pi_x + q, which is the distortion
of decoding straight from the side information.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannelError, DomainError, InfeasibleError
from .probability_core import FiniteDistribution, JointDistribution, _as_probability

_SYMMETRY_TOL = 1e-12


def _bernoulli_pair(p1: float) -> FiniteDistribution:
    return FiniteDistribution(np.array([1.0 - p1, p1]))


@dataclass(frozen=True)
class ChannelMatrix:
    """Row-stochastic 2x2 conditional law; rows index the input symbol."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.rows, dtype=float)
        if arr.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {arr.shape}")
        for r in range(2):
            FiniteDistribution(arr[r])  # validates range and normalization
        arr = np.clip(arr, 0.0, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "rows", arr)

    @classmethod
    def from_crossovers(cls, c0: float, c1: float) -> "ChannelMatrix":
        """Channel [[1-c0, c0], [c1, 1-c1]] flipping input 0 w.p. c0 and input 1 w.p. c1."""
        c0 = _as_probability(c0, "c0")
        c1 = _as_probability(c1, "c1")
        return cls(np.array([[1.0 - c0, c0], [c1, 1.0 - c1]]))

    @property
    def crossovers(self) -> tuple[float, float]:
        return float(self.rows[0, 1]), float(self.rows[1, 0])


@dataclass(frozen=True, eq=False)
class SemanticModel:
    """Immutable container for the source triple and its derived quantities."""

    pi: float
    q1: float
    q2: float
    a: float
    b: float
    u: float
    v: float
    p_a: float
    p_b: float
    a_star: float
    b_star: float
    u_star: float
    v_star: float
    pi_x: float | None
    pi_x_prime: float | None
    joint: JointDistribution

    @property
    def params(self) -> tuple[float, float, float, float, float]:
        """The five construction parameters; keys caches and reprs."""
        return (self.pi, self.q1, self.q2, self.a, self.b)

    @property
    def is_doubly_symmetric(self) -> bool:
        """True when the closed forms apply: a uniform (S, X) pair with a
        common observation crossover and a symmetric side channel."""
        return (
            abs(self.pi - 0.5) <= _SYMMETRY_TOL
            and self.q1 == self.q2
            and self.pi_x is not None
            and abs(self.u_star - self.v_star) <= 1e-9
        )

    def source_distribution(self) -> FiniteDistribution:
        return _bernoulli_pair(self.pi)

    def observation_distribution(self) -> FiniteDistribution:
        # a uniform input through a common crossover stays uniform; stating
        # the identity keeps the marginal exact where joint-cell summation
        # would lose the last bit
        if self.pi == 0.5 and self.q1 == self.q2:
            return _bernoulli_pair(0.5)
        return _bernoulli_pair(self.pi * (1.0 - self.q2) + (1.0 - self.pi) * self.q1)

    def side_distribution(self) -> FiniteDistribution:
        return FiniteDistribution(np.array([self.p_a, self.p_b]))

    def channel_x_given_s(self) -> ChannelMatrix:
        return ChannelMatrix.from_crossovers(self.q1, self.q2)

    def channel_y_given_x(self) -> ChannelMatrix:
        return ChannelMatrix.from_crossovers(self.a, self.b)

    def channel_y_given_s(self) -> ChannelMatrix:
        return ChannelMatrix.from_crossovers(self.u, self.v)

    def channel_x_given_y(self) -> ChannelMatrix:
        return ChannelMatrix.from_crossovers(self.a_star, self.b_star)

    def channel_s_given_y(self) -> ChannelMatrix:
        return ChannelMatrix.from_crossovers(self.u_star, self.v_star)

    def conditional_x_given_y(self, y: int) -> float:
        """P(X = 1 | Y = y)."""
        return self.a_star if y == 0 else 1.0 - self.b_star

    def __repr__(self):
        return (
            f"SemanticModel(pi={self.pi}, q1={self.q1}, q2={self.q2}, "
            f"a={self.a}, b={self.b})"
        )


def build_model(pi: float, q1: float, q2: float, a: float, b: float) -> SemanticModel:
    """Assemble the joint over (S, X, Y) and derive all conditionals.

    Raises DegenerateChannelError when the side channel gives one Y value
    zero probability, since the posteriors given that value are undefined.
    """
    pi = _as_probability(pi, "pi")
    q1 = _as_probability(q1, "q1")
    q2 = _as_probability(q2, "q2")
    a = _as_probability(a, "a")
    b = _as_probability(b, "b")
    if pi > 0.5 + _SYMMETRY_TOL:
        raise DomainError(f"pi must not exceed 1/2, got {pi}")

    p_s = np.array([1.0 - pi, pi])
    p_x_given_s = np.array([[1.0 - q1, q1], [q2, 1.0 - q2]])
    p_y_given_x = np.array([[1.0 - a, a], [b, 1.0 - b]])
    masses = p_s[:, None, None] * p_x_given_s[:, :, None] * p_y_given_x[None, :, :]
    joint = JointDistribution(masses, ("S", "X", "Y"))

    p_y = masses.sum(axis=(0, 1))
    p_a, p_b = float(p_y[0]), float(p_y[1])
    if p_a <= _SYMMETRY_TOL or p_b <= _SYMMETRY_TOL:
        raise DegenerateChannelError(
            f"side information takes value {'0' if p_b <= _SYMMETRY_TOL else '1'} "
            f"with probability ~1; posteriors for the other branch are undefined"
        )

    p_xy = masses.sum(axis=0)
    a_star = float(p_xy[1, 0] / p_a)
    b_star = float(p_xy[0, 1] / p_b)
    p_sy = masses.sum(axis=1)
    u_star = float(p_sy[1, 0] / p_a)
    v_star = float(p_sy[0, 1] / p_b)

    # p(Y|S) by composition along the chain; no Bayes division, so it is
    # defined even when pi is 0 or 1.
    u = float((1.0 - q1) * a + q1 * (1.0 - b))
    v = float(q2 * (1.0 - a) + (1.0 - q2) * b)

    pi_x = a_star if abs(a_star - b_star) <= 1e-9 else None
    pi_x_prime = None
    if pi_x is not None and q1 == q2:
        pi_x_prime = (1.0 - 2.0 * q1) * pi_x + q1

    return SemanticModel(
        pi=pi, q1=q1, q2=q2, a=a, b=b, u=u, v=v,
        p_a=p_a, p_b=p_b, a_star=a_star, b_star=b_star,
        u_star=u_star, v_star=v_star, pi_x=pi_x, pi_x_prime=pi_x_prime,
        joint=joint,
    )


def dsbs_model(q: float, pi_x: float) -> SemanticModel:
    """Doubly symmetric construction: uniform S, q1 = q2 = q, a = b = pi_x.

    The resulting pair (S, X) is a DSBS with crossover q, the posterior
    crossovers collapse to a_star = b_star = pi_x, and
    u_star = v_star = (1 - 2q) * pi_x + q.
    """
    q = _as_probability(q, "q")
    pi_x = _as_probability(pi_x, "pi_x")
    if q >= 0.5:
        raise DomainError(
            f"q must be below 1/2 (the distortion transform divides by 1 - 2q), got {q}"
        )
    if not 0.0 < pi_x <= 0.5:
        raise DomainError(f"pi_x must lie in (0, 1/2], got {pi_x}")
    return build_model(0.5, q, q, pi_x, pi_x)


SEMANTIC_TO_OBSERVED = "semantic_to_observed"
OBSERVED_TO_SEMANTIC = "observed_to_semantic"


def distortion_transform(d: float, q: float, direction: str) -> float:
    """Convert Hamming distortion between the semantic and observed domains.

    semantic_to_observed: (d - q) / (1 - 2q); requires d >= q because a
    semantic distortion below the observation noise floor is unattainable.
    observed_to_semantic: (1 - 2q) * d + q. The two are mutual inverses.
    """
    q = _as_probability(q, "q")
    if q >= 0.5:
        raise DomainError(f"q must be below 1/2, got {q}")
    d = float(d)
    if not math.isfinite(d) or d < -_SYMMETRY_TOL:
        raise DomainError(f"distortion must be non-negative, got {d}")
    if direction == SEMANTIC_TO_OBSERVED:
        if d > 1.0 + _SYMMETRY_TOL:
            raise DomainError(f"semantic distortion must lie in [0, 1], got {d}")
        if d < q - _SYMMETRY_TOL:
            raise InfeasibleError(
                f"semantic distortion {d} is below the observation noise floor q={q}"
            )
        return (max(d, q) - q) / (1.0 - 2.0 * q)
    if direction == OBSERVED_TO_SEMANTIC:
        # the inverse image of semantic distortions in [q, 1] reaches
        # (1 - q) / (1 - 2q), which exceeds 1 for q > 0
        if d > (1.0 - q) / (1.0 - 2.0 * q) + _SYMMETRY_TOL:
            raise DomainError(
                f"observed distortion {d} maps outside [q, 1] in the semantic domain"
            )
        return (1.0 - 2.0 * q) * d + q
    raise DomainError(
        f"direction must be {SEMANTIC_TO_OBSERVED!r} or {OBSERVED_TO_SEMANTIC!r}, "
        f"got {direction!r}"
    )


def source_channel_feasible(rate_bits: float, channel_capacity_bits: float,
                            k: int, m: int) -> bool:
    """Whether a source rate fits through k channel uses per m source symbols.

    True iff rate_bits <= (k / m) * channel_capacity_bits within 1e-12.
    """
    if not isinstance(k, int) or not isinstance(m, int):
        raise DomainError("k and m must be integers")
    if k < 1 or m < 1:
        raise DomainError(f"k and m must be positive, got k={k}, m={m}")
    rate_bits = float(rate_bits)
    channel_capacity_bits = float(channel_capacity_bits)
    if rate_bits < 0.0 or channel_capacity_bits < 0.0:
        raise DomainError("rate and capacity must be non-negative")
    return rate_bits <= (k / m) * channel_capacity_bits + 1e-12
