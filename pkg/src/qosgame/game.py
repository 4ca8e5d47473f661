"""QoS satisfaction games in interference-threshold form.

Players are indexed ``0..N-1``.  Strategies follow the usual convention of
the model: ``0`` is the dormant state and ``1..C`` are channels, so a
profile is a length-N tuple of ints in ``{0, ..., C}``.  The threshold
matrix has shape ``(N, C)``; column ``c - 1`` holds the thresholds for
channel ``c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import numpy as np

Profile = tuple[int, ...]

TDMA = "tdma"
CONSTANT = "constant"


class GameError(ValueError):
    """Invalid game, profile or rate model."""


def shannon_capacity(W: float, zeta: float, z: float, omega: float) -> float:
    """Shannon rate ``W * log2(1 + zeta * z / omega)``."""
    if W <= 0 or omega <= 0:
        raise GameError(f"bandwidth and noise power must be positive (W={W}, omega={omega})")
    if zeta < 0 or z < 0:
        raise GameError("transmit power and channel gain must be non-negative")
    return W * math.log2(1.0 + zeta * z / omega)


ContentionKind = Union[str, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class RateSpec:
    """Physical rate model ``Q(I) = theta * B * g(I)`` per (user, channel).

    ``g`` is ``"tdma"`` (``1/I``), ``"constant"`` (always 1) or a tabulated
    non-increasing vector whose entry ``I - 1`` is ``g(I)``.
    """

    theta: np.ndarray
    B: np.ndarray
    g: ContentionKind = TDMA

    def __post_init__(self):
        theta = np.array(self.theta, dtype=int)
        B = np.array(self.B, dtype=float)
        if theta.ndim != 2 or theta.shape != B.shape:
            raise GameError(f"theta and B must be matching 2-D arrays, got {theta.shape} and {B.shape}")
        if not np.isin(theta, (0, 1)).all():
            raise GameError("theta entries must be 0 or 1")
        if (B[theta == 1] <= 0).any():
            raise GameError("B must be positive where theta = 1")
        g = self.g
        if isinstance(g, str):
            if g not in (TDMA, CONSTANT):
                raise GameError(f"unknown contention kind {g!r}")
        else:
            g = np.array(g, dtype=float)
            if g.ndim != 1 or len(g) == 0:
                raise GameError("tabulated contention function must be a non-empty vector")
            if (np.diff(g) > 0).any() or (g < 0).any():
                raise GameError("tabulated contention function must be non-negative and non-increasing")
            g.setflags(write=False)
        theta.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "g", g)

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta.shape

    @classmethod
    def uniform(cls, n_users: int, channel_rates: Sequence[float], g: ContentionKind = TDMA,
                theta=None) -> "RateSpec":
        """Every user sees the same mean rate on a channel."""
        B = np.tile(np.asarray(channel_rates, dtype=float), (n_users, 1))
        if theta is None:
            theta = np.ones_like(B, dtype=int)
        return cls(theta=theta, B=B, g=g)

    def contention(self, I: int) -> float:
        if isinstance(self.g, str):
            return 1.0 / I if self.g == TDMA else 1.0
        if I > len(self.g):
            raise GameError(f"tabulated contention function has no entry for I={I}")
        return float(self.g[I - 1])


def rate(spec: RateSpec, n: int, c: int, I: int) -> float:
    """Data rate of user ``n`` on channel ``c`` (1-based) at congestion ``I``."""
    if I < 1:
        raise GameError("rate is only defined for an occupied channel (I >= 1)")
    if not 1 <= c <= spec.shape[1]:
        raise GameError(f"channel {c} out of range 1..{spec.shape[1]}")
    if spec.theta[n, c - 1] == 0:
        return 0.0
    return float(spec.B[n, c - 1]) * spec.contention(I)


def derive_threshold(spec: RateSpec, n: int, c: int, demand: float, n_players: int) -> int:
    """Largest congestion level at which ``rate >= demand``, clamped to ``[0, N+1]``.

    Returns ``N+1`` when the rate strictly exceeds the demand at every level
    ``1..N`` and ``0`` when it never reaches it.
    """
    if demand < 0:
        raise GameError("demand must be non-negative")
    if n_players < 1:
        raise GameError("need at least one player")
    N = n_players
    tabulated = not isinstance(spec.g, str)
    if spec.theta[n, c - 1] == 0 or (not tabulated and spec.g == CONSTANT):
        q = 0.0 if spec.theta[n, c - 1] == 0 else float(spec.B[n, c - 1])
        if q > demand:
            return N + 1
        return N if q == demand else 0
    if not tabulated:  # TDMA: B/I >= D  <=>  I <= B/D, done in exact rationals
        B = Fraction(float(spec.B[n, c - 1]))
        if demand == 0:
            return N + 1
        k = math.floor(B / Fraction(demand))
        if k > N or (k == N and B > N * Fraction(demand)):
            return N + 1
        return k
    rates = [rate(spec, n, c, I) for I in range(1, N + 1)]
    if all(q > demand for q in rates):
        return N + 1
    ok = [I for I, q in enumerate(rates, start=1) if q >= demand]
    return max(ok) if ok else 0


@dataclass(frozen=True)
class Game:
    """N players, C channels, and an integer threshold matrix of shape (N, C).

    Thresholds are clamped into ``[0, N+1]`` on construction; values outside
    that range behave identically.
    """

    thresholds: tuple[tuple[int, ...], ...]
    n_players: int = field(init=False)
    n_channels: int = field(init=False)

    def __post_init__(self):
        rows = [list(r) for r in self.thresholds]
        if not rows or not rows[0]:
            raise GameError("a game needs at least one player and one channel")
        C = len(rows[0])
        if any(len(r) != C for r in rows):
            raise GameError("threshold matrix is ragged")
        N = len(rows)
        clamped = tuple(tuple(min(max(int(t), 0), N + 1) for t in r) for r in rows)
        object.__setattr__(self, "thresholds", clamped)
        object.__setattr__(self, "n_players", N)
        object.__setattr__(self, "n_channels", C)

    @classmethod
    def from_matrix(cls, T) -> "Game":
        return cls(tuple(tuple(int(t) for t in row) for row in np.asarray(T)))

    @classmethod
    def homogeneous_channels(cls, thresholds: Sequence[int], n_channels: int) -> "Game":
        """Player ``n`` has threshold ``thresholds[n]`` on every channel."""
        return cls(tuple((int(t),) * n_channels for t in thresholds))

    @classmethod
    def homogeneous_users(cls, channel_thresholds: Sequence[int], n_players: int) -> "Game":
        """Every player has threshold ``channel_thresholds[c-1]`` on channel ``c``."""
        return cls(tuple(tuple(int(t) for t in channel_thresholds) for _ in range(n_players)))

    @cached_property
    def matrix(self) -> np.ndarray:
        T = np.array(self.thresholds, dtype=np.int64)
        T.setflags(write=False)
        return T

    def threshold(self, n: int, c: int) -> int:
        return self.thresholds[n][c - 1]

    @property
    def has_homogeneous_channels(self) -> bool:
        return all(len(set(row)) == 1 for row in self.thresholds)

    @property
    def has_homogeneous_users(self) -> bool:
        return len(set(self.thresholds)) == 1

    def to_dict(self) -> dict:
        return {
            "n_players": self.n_players,
            "n_channels": self.n_channels,
            "thresholds": [list(r) for r in self.thresholds],
        }


def build_game(spec: RateSpec, demands: Sequence[float]) -> Game:
    """Threshold form of the game defined by a rate model and per-user demands."""
    N, C = spec.shape
    if len(demands) != N:
        raise GameError(f"{len(demands)} demands for {N} users")
    return Game(tuple(
        tuple(derive_threshold(spec, n, c, demands[n], N) for c in range(1, C + 1))
        for n in range(N)
    ))


def check_profile(game: Game, profile: Sequence[int]) -> Profile:
    x = tuple(int(s) for s in profile)
    if len(x) != game.n_players:
        raise GameError(f"profile has {len(x)} entries, game has {game.n_players} players")
    if any(s < 0 or s > game.n_channels for s in x):
        raise GameError(f"profile entries must lie in 0..{game.n_channels}")
    return x


def congestion(profile: Sequence[int], c: int) -> int:
    return sum(1 for s in profile if s == c)


def utility(game: Game, profile: Sequence[int], n: int) -> int:
    c = profile[n]
    if c == 0:
        return 0
    return 1 if congestion(profile, c) <= game.thresholds[n][c - 1] else -1


def utilities(game: Game, profile: Sequence[int]) -> list[int]:
    counts = [0] * (game.n_channels + 1)
    for s in profile:
        counts[s] += 1
    out = []
    for n, c in enumerate(profile):
        if c == 0:
            out.append(0)
        else:
            out.append(1 if counts[c] <= game.thresholds[n][c - 1] else -1)
    return out


def welfare(game: Game, profile: Sequence[int]) -> int:
    return sum(utilities(game, profile))


def satisfied_count(game: Game, profile: Sequence[int]) -> int:
    return sum(1 for u in utilities(game, profile) if u == 1)


def is_natural(game: Game, profile: Sequence[int]) -> bool:
    return all(u != -1 for u in utilities(game, profile))
