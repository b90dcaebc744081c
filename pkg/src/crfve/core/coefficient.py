"""
CRFVE Edge Schwarz - Coefficients
=================================

Scalar isotropic coefficient A(x) = alpha_k * base(x) with one positive
multiplier alpha_k per subdomain. Jumps therefore only occur across
subdomain boundaries; inside a subdomain A is as smooth as ``base``.

Test fields:
    - base(x, y) = 2 + sin(freq*pi*x) * sin(freq*pi*y), with values in [1, 3]
    - red subdomains get multiplier alpha1, all others 1
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError

BaseFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoefficientField:
    """
    A(x) restricted to subdomain k equals multipliers[k] * base(x).

    Attributes:
        multipliers: (N,) positive per-subdomain scalars
        freq: Frequency of the sinusoidal base, 0 for a constant base
        base: Vectorized base function of (x, y); None means the sinusoid
    """
    multipliers: np.ndarray
    freq: int = 0
    base: Optional[BaseFunction] = field(default=None, compare=False)

    def base_values(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.base is not None:
            return np.broadcast_to(np.asarray(self.base(x, y), dtype=float), np.shape(x))
        if self.freq == 0:
            return np.ones(np.shape(x))
        w = self.freq * np.pi
        return 2.0 + np.sin(w * np.asarray(x)) * np.sin(w * np.asarray(y))

    def evaluate(self, subdomains: np.ndarray, points: np.ndarray) -> np.ndarray:
        """
        Vectorized evaluation at points owned by the given subdomains.

        Args:
            subdomains: (...,) subdomain index of each point's owning triangle
            points: (..., 2) coordinates

        Returns:
            (...,) coefficient values
        """
        points = np.asarray(points, dtype=float)
        return self.multipliers[np.asarray(subdomains)] * self.base_values(points[..., 0], points[..., 1])

    def eval(self, subdomain: int, point: Sequence[float]) -> float:
        """
        A at one point of the closure of a subdomain.

        Example:
            >>> field = make_oscillatory_coefficient(10, 1.0, set(), n_subdomains=16)
            >>> field.eval(0, (0.05, 0.05))
            3.0
        """
        x, y = float(point[0]), float(point[1])
        return float(self.multipliers[subdomain] * self.base_values(np.array(x), np.array(y)))

    def bounds(self) -> Dict[str, float]:
        """
        Lower/upper bounds of A over the domain.

        Only known for the built-in bases: the constant one and the sinusoid
        with values in [1, 3].

        Raises:
            InvalidParameterError: For a custom base function
        """
        if self.base is not None:
            raise InvalidParameterError("bounds are unknown for a custom base function")
        lo, hi = (1.0, 1.0) if self.freq == 0 else (1.0, 3.0)
        return {'min': lo * float(self.multipliers.min()), 'max': hi * float(self.multipliers.max())}


def make_oscillatory_coefficient(freq: int, alpha1: float, red_mask: Iterable[int],
                                 n_subdomains: int) -> CoefficientField:
    """
    A = alpha1 * (2 + sin(freq*pi*x) sin(freq*pi*y)) on red subdomains, the
    bare base elsewhere.

    Args:
        freq: Positive integer frequency (10 and 100 in the reference runs)
        alpha1: Positive jump parameter
        red_mask: Subdomain indices (row-major) carrying alpha1
        n_subdomains: Total number of subdomains m^2

    Returns:
        CoefficientField
    """
    if int(freq) != freq or freq < 1:
        raise InvalidParameterError(f"freq must be a positive integer, got {freq}")
    return CoefficientField(multipliers=red_multipliers(alpha1, red_mask, n_subdomains), freq=int(freq))


def red_multipliers(alpha1: float, red_mask: Iterable[int], n_subdomains: int) -> np.ndarray:
    """
    Per-subdomain multipliers: alpha1 on the red subdomains, 1 elsewhere.

    Raises:
        InvalidParameterError: alpha1 <= 0 or a red index outside [0, n_subdomains)
    """
    if alpha1 <= 0:
        raise InvalidParameterError(f"alpha1 must be positive, got {alpha1}")
    mult = np.ones(n_subdomains)
    red = np.asarray(sorted(set(int(k) for k in red_mask)), dtype=np.int64)
    if red.size and (red.min() < 0 or red.max() >= n_subdomains):
        raise InvalidParameterError(f"red_mask entries must lie in [0, {n_subdomains})")
    mult[red] = alpha1
    return mult


def make_piecewise_constant(multipliers: Sequence[float]) -> CoefficientField:
    """
    Subdomain-wise constant coefficient (constant on every element, so the
    finite volume and finite element matrices coincide).
    """
    mult = np.asarray(multipliers, dtype=float)
    if np.any(mult <= 0):
        raise InvalidParameterError("multipliers must be positive")
    return CoefficientField(multipliers=mult, freq=0)


# =============================================================================
# Red-region presets
# =============================================================================
# The published red layouts are only shown as pictures; these masks are
# reconstructions that keep the character of each test problem.

def _problem1_mask() -> list:
    # 4x4 checkerboard
    return [ky * 4 + kx for ky in range(4) for kx in range(4) if (kx + ky) % 2 == 0]


def _problem2_mask() -> list:
    # 4x4: central 2x2 block plus the four corners
    return [5, 6, 9, 10, 0, 3, 12, 15]


def _problem3_mask() -> list:
    # 32x32: scattered islands, every subdomain with (3*kx + 5*ky) % 7 == 0
    return [ky * 32 + kx for ky in range(32) for kx in range(32) if (3 * kx + 5 * ky) % 7 == 0]


PRESETS: Dict[str, Dict] = {
    'problem1': {'n': 32, 'm': 4, 'freq': 100, 'red_mask': _problem1_mask()},
    'problem2': {'n': 32, 'm': 4, 'freq': 100, 'red_mask': _problem2_mask()},
    'problem3': {'n': 128, 'm': 32, 'freq': 100, 'red_mask': _problem3_mask()},
}


def preset_mask(name: str) -> list:
    """Red mask of a named preset."""
    try:
        return list(PRESETS[name]['red_mask'])
    except KeyError:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
