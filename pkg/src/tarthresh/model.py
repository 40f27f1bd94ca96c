"""TAR model parameters, trajectories and the trajectory simulator.

Two-sided model (regime picked by ``|X_j|``)::

    X_{j+1} = rho1 * X_j * 1{|X_j| < theta} + rho2 * X_j * 1{|X_j| >= theta} + eps_{j+1}

One-sided model: the same recursion with ``X_j`` in place of ``|X_j|``.
Innovations are i.i.d. N(0, sigma^2).
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigError, DegenerateModelError, EmptyInputError, NumericFailure


class Sidedness(str, enum.Enum):
    TWO_SIDED = "two-sided"
    ONE_SIDED = "one-sided"


@dataclass(frozen=True)
class TarParams:
    """Known model coefficients plus the true threshold and its window.

    Parameters
    ----------
    rho1, rho2 : float
        Inner-regime and outer-regime AR coefficients.
    sigma : float
        Innovation standard deviation.
    theta : float
        True threshold.
    alpha, beta : float
        Open parameter window ``(alpha, beta)`` containing ``theta``.
    sidedness : Sidedness
    """

    rho1: float
    rho2: float
    sigma: float
    theta: float
    alpha: float = 0.5
    beta: float = 3.5
    sidedness: Sidedness = Sidedness.TWO_SIDED

    def __post_init__(self):
        object.__setattr__(self, "sidedness", Sidedness(self.sidedness))
        for name in ("rho1", "rho2", "sigma", "theta", "alpha", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if not abs(self.rho2) < 1:
            raise ConfigError(f"|rho2| must be < 1, got {self.rho2}")
        if self.one_sided:
            if not abs(self.rho1) < 1:
                raise ConfigError(f"one-sided model needs |rho1| < 1, got {self.rho1}")
        elif not self.alpha > 0:
            raise ConfigError(f"two-sided model needs alpha > 0, got {self.alpha}")
        if not self.alpha < self.theta < self.beta:
            raise ConfigError(
                f"theta={self.theta} must lie inside the window ({self.alpha}, {self.beta})"
            )

    @property
    def one_sided(self) -> bool:
        return self.sidedness is Sidedness.ONE_SIDED

    @property
    def rho(self) -> float:
        """Coefficient jump ``rho2 - rho1``."""
        return self.rho2 - self.rho1

    @property
    def gamma(self) -> float:
        """Single shape parameter of the limit process, ``rho * theta / sigma``."""
        return self.rho * self.theta / self.sigma

    @property
    def window(self) -> tuple[float, float]:
        return (self.alpha, self.beta)

    def require_identifiable(self) -> None:
        if self.rho1 == self.rho2:
            raise DegenerateModelError(
                f"rho1 == rho2 == {self.rho1}: threshold is not identifiable"
            )

    def to_dict(self) -> dict:
        return {
            "rho1": self.rho1,
            "rho2": self.rho2,
            "sigma": self.sigma,
            "theta": self.theta,
            "alpha": self.alpha,
            "beta": self.beta,
            "sidedness": self.sidedness.value,
        }

    def with_(self, **changes) -> "TarParams":
        return replace(self, **changes)


#: Reference parameter sets. Both have |rho| = 0.8 and theta = 2; they differ
#: in which regime carries the persistent coefficient 0.95.
PRESETS = {
    "persistent-outer": dict(rho1=0.15, rho2=0.95, sigma=1.0, theta=2.0, alpha=0.5, beta=3.5),
    "persistent-inner": dict(rho1=0.95, rho2=0.15, sigma=1.0, theta=2.0, alpha=0.5, beta=3.5),
}


def preset_params(name: str = "persistent-outer", **overrides) -> TarParams:
    try:
        base = dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    base.update(overrides)
    return TarParams(**base)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Observed path ``X_0..X_n``."""

    values: np.ndarray
    seed: int | None = None
    burn_in: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ConfigError("trajectory must be a non-empty 1-d sequence")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NumericFailure(f"non-finite trajectory value at index {bad[0]}", index=int(bad[0]))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        """Number of transitions (``len(values) - 1``)."""
        return self.values.size - 1

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


def innovations(sigma: float, size: int, seed) -> np.ndarray:
    """Noise stream consumed by :func:`simulate_tar` for a given seed."""
    rng = np.random.default_rng(seed)
    return sigma * rng.standard_normal(size)


def simulate_tar(params: TarParams, n: int, seed=None, burn_in: int = 1000) -> Trajectory:
    """Simulate ``n`` transitions of the TAR model.

    The chain starts at ``X = 0``; the first ``burn_in`` steps are discarded
    and the following ``n + 1`` states are returned. Output is a deterministic
    function of ``(params, n, seed, burn_in)``.
    """
    n = int(n)
    burn_in = int(burn_in)
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise ConfigError(f"burn_in must be >= 0, got {burn_in}")
    noise = innovations(params.sigma, burn_in + n, seed)
    path = kernels.tar_path(
        noise, 0.0, params.rho1, params.rho2, params.theta, params.one_sided
    )
    bad = np.flatnonzero(~np.isfinite(path))
    if bad.size:
        step = int(bad[0])
        raise NumericFailure(
            f"simulation produced a non-finite value at step {step} (explosive parameters?)",
            step=step,
        )
    return Trajectory(path[burn_in:], seed=seed, burn_in=burn_in)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["j", "x"])
        for j, x in enumerate(traj.values.tolist()):
            writer.writerow([j, format(x, ".17g")])


def read_trajectory_csv(path) -> Trajectory:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path}: empty file")
        if [h.strip() for h in header] != ["j", "x"]:
            raise ConfigError(f"{path}: expected header 'j,x', got {header!r}")
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                j, x = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise ConfigError(f"{path}:{lineno}: malformed row {row!r}") from None
            if j != len(values):
                raise ConfigError(f"{path}:{lineno}: expected index {len(values)}, got {j}")
            values.append(x)
    if not values:
        raise EmptyInputError(f"{path}: no observations")
    return Trajectory(np.array(values))
