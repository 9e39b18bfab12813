"""
Empirical quantile transformation to uniform or standard-normal targets.

A QuantileMap stores sorted reference values from a fit sample. Reference r of
m sits at cumulative level r / (m - 1); values between references are
interpolated linearly, and a run of tied references maps to the midpoint of
its level range. Outputs are clipped to [eps, 1 - eps] so the normal target
stays finite for out-of-sample extremes.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Union

import numpy as np
from scipy.special import erfc

from .errors import DomainError, FitError

logger = logging.getLogger(__name__)

DEFAULT_MAX_REFERENCES = 1000
DEFAULT_EPSILON = 1e-7

ArrayLike = Union[float, Sequence[float], np.ndarray]

# Rational approximation coefficients for the normal quantile (Acklam)
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def _lower_quantile(p: np.ndarray) -> np.ndarray:
    """Normal quantile for 0 < p <= 0.5, refined by one Halley step."""
    x = np.empty_like(p)

    tail = p < _P_LOW
    if np.any(tail):
        q = np.sqrt(-2.0 * np.log(p[tail]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[tail] = num / den

    central = ~tail
    if np.any(central):
        q = p[central] - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[central] = num / den

    e = 0.5 * erfc(-x / math.sqrt(2.0)) - p
    u = e * math.sqrt(2.0 * math.pi) * np.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def inv_normal_cdf_array(u: ArrayLike) -> np.ndarray:
    """Vectorized inv_normal_cdf."""
    u = np.asarray(u, dtype=np.float64)
    if not np.all((u > 0.0) & (u < 1.0)):
        raise DomainError("inverse normal CDF is defined on the open interval (0, 1)")
    upper = u > 0.5
    # 1 - u is exact for u >= 0.5, so the upper half is computed in its own tail
    x = _lower_quantile(np.where(upper, 1.0 - u, u))
    return np.where(upper, -x, x)


def inv_normal_cdf(u: float) -> float:
    """
    Standard normal quantile function.

    Raises:
        DomainError: If u is not strictly between 0 and 1
    """
    return float(inv_normal_cdf_array(np.array([u]))[0])


@dataclass(frozen=True, eq=False)
class QuantileMap:
    """Fitted empirical quantile table."""

    references: np.ndarray
    n: int
    epsilon: float = DEFAULT_EPSILON
    _levels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        refs = np.asarray(self.references, dtype=np.float64)
        if refs.ndim != 1 or refs.size < 2:
            raise ValueError("a quantile map needs at least 2 references")
        if np.any(np.diff(refs) < 0):
            raise ValueError("references must be sorted ascending")
        if self.n < 2:
            raise ValueError("fit size must be at least 2")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        levels = np.linspace(0.0, 1.0, refs.size)
        refs.setflags(write=False)
        levels.setflags(write=False)
        object.__setattr__(self, "references", refs)
        object.__setattr__(self, "_levels", levels)

    def uniform(self, x: ArrayLike) -> np.ndarray:
        """Vectorized to_uniform."""
        x = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise DomainError("cannot transform non-finite values")
        refs, levels = self.references, self._levels
        # interpolating from both ends and averaging puts ties at the plateau midpoint
        forward = np.interp(x, refs, levels)
        backward = -np.interp(-x, -refs[::-1], -levels[::-1])
        u = 0.5 * (forward + backward)
        u = np.where(x < refs[0], 0.0, np.where(x > refs[-1], 1.0, u))
        return np.clip(u, self.epsilon, 1.0 - self.epsilon)

    def normal(self, x: ArrayLike) -> np.ndarray:
        """Vectorized to_normal."""
        return inv_normal_cdf_array(self.uniform(x))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "references": [float(r) for r in self.references],
            "n": int(self.n),
            "epsilon": float(self.epsilon),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QuantileMap":
        return cls(
            references=np.asarray(data["references"], dtype=np.float64),
            n=int(data["n"]),
            epsilon=float(data["epsilon"]),
        )


def fit_quantile_map(
    values: ArrayLike,
    max_references: int = DEFAULT_MAX_REFERENCES,
    epsilon: float = DEFAULT_EPSILON,
) -> QuantileMap:
    """
    Fit a quantile map on a sample.

    Keeps every sorted value when the sample has at most ``max_references``
    entries, otherwise ``max_references`` evenly spaced quantiles (linear
    interpolation between order statistics).

    Raises:
        FitError: On fewer than 2 values or any non-finite value
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size < 2:
        raise FitError(f"a quantile map needs at least 2 values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise FitError("cannot fit a quantile map on non-finite values")
    if max_references < 2:
        raise FitError("max_references must be at least 2")

    if values.size <= max_references:
        refs = np.sort(values)
    else:
        refs = np.quantile(values, np.linspace(0.0, 1.0, max_references))
    return QuantileMap(references=refs, n=int(values.size), epsilon=epsilon)


def to_uniform(q: QuantileMap, x: float) -> float:
    """Empirical CDF of x under q, clipped to [eps, 1 - eps]."""
    return float(q.uniform(np.array([x]))[0])


def to_normal(q: QuantileMap, x: float) -> float:
    """Standard-normal score of x under q."""
    return float(q.normal(np.array([x]))[0])
