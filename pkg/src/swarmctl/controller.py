"""Linear scalar-vector control law.

A controller holds an m x n parameter matrix. Multiplying it by the n measured
scalars gives m coefficients, one per measured vector; the weighted sum of the
vectors is the commanded velocity, clamped radially to ``vmax``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .measurements import MeasurementFrame, ScalarExpr, VectorExpr


class ControllerSpecError(ValueError):
    pass


class EvaluationError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class ControllerSpec:
    params: np.ndarray
    scalar_exprs: tuple[ScalarExpr, ...]
    vector_exprs: tuple[VectorExpr, ...]
    vmax: float
    name: str = ""
    note: str = ""

    def __post_init__(self):
        params = np.array(self.params, dtype=float)
        if params.size == 0:
            params = params.reshape(len(self.vector_exprs), len(self.scalar_exprs))
        if params.ndim != 2:
            raise ControllerSpecError(f"params must be a 2-D matrix, got shape {params.shape}")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "scalar_exprs", tuple(self.scalar_exprs))
        object.__setattr__(self, "vector_exprs", tuple(self.vector_exprs))
        object.__setattr__(self, "vmax", float(self.vmax))
        m, n = params.shape
        if m != len(self.vector_exprs) or n != len(self.scalar_exprs):
            raise ControllerSpecError(
                f"params shape {params.shape} does not match "
                f"{len(self.vector_exprs)} vectors x {len(self.scalar_exprs)} scalars")
        if not np.all(np.isfinite(params)):
            raise ControllerSpecError("params must be finite")
        if not (np.isfinite(self.vmax) and self.vmax > 0):
            raise ControllerSpecError(f"vmax must be positive, got {self.vmax}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.params.shape

    def __eq__(self, other):
        if not isinstance(other, ControllerSpec):
            return NotImplemented
        return (np.array_equal(self.params, other.params)
                and self.scalar_exprs == other.scalar_exprs
                and self.vector_exprs == other.vector_exprs
                and self.vmax == other.vmax
                and self.name == other.name
                and self.note == other.note)

    __hash__ = None


@dataclass
class ControlOutput:
    velocity: np.ndarray
    coefficients: np.ndarray = field(default_factory=lambda: np.zeros(0))


def clamp_speed(raw: np.ndarray, vmax: float) -> np.ndarray:
    """Scale rows longer than vmax back onto the vmax circle."""
    raw = np.asarray(raw, dtype=float)
    speed = np.hypot(raw[..., 0], raw[..., 1])
    over = speed > vmax
    factor = np.ones_like(speed)
    factor[over] = vmax / speed[over]
    return raw * factor[..., None]


def evaluate_batch(spec: ControllerSpec, scalars: np.ndarray,
                   vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Velocities (N, 2) and pre-clamp coefficients (N, m) for N agents at once."""
    scalars = np.asarray(scalars, dtype=float)
    vectors = np.asarray(vectors, dtype=float)
    m, n = spec.shape
    if scalars.shape[1:] != (n,) or vectors.shape[1:] != (m, 2) or len(scalars) != len(vectors):
        raise ControllerSpecError(
            f"frame shapes {scalars.shape}/{vectors.shape} do not match controller {m}x{n}")
    with np.errstate(over="ignore", invalid="ignore"):
        coeffs = scalars @ spec.params.T
        raw = np.einsum("am,amk->ak", coeffs, vectors)
    return clamp_speed(raw, spec.vmax), coeffs


def evaluate(spec: ControllerSpec, frame: MeasurementFrame) -> ControlOutput:
    m, n = spec.shape
    if frame.scalars.shape != (n,) or frame.vectors.shape != (m, 2):
        raise ControllerSpecError(
            f"frame with {frame.scalars.shape[0]} scalars / {frame.vectors.shape[0]} vectors "
            f"does not match controller {m}x{n}")
    with np.errstate(over="ignore", invalid="ignore"):
        coeffs = spec.params @ frame.scalars
        raw = coeffs @ frame.vectors if m else np.zeros(2)
    if not (np.all(np.isfinite(raw)) and np.all(np.isfinite(coeffs))):
        raise EvaluationError(f"non-finite control output from coefficients {coeffs}")
    return ControlOutput(clamp_speed(raw, spec.vmax), coeffs)


def flatten_params(spec: ControllerSpec) -> list[float]:
    """Row-major parameter vector; the optimizer's coordinate order."""
    return [float(v) for v in spec.params.reshape(-1)]


def with_params(spec: ControllerSpec, flat: Sequence[float]) -> ControllerSpec:
    flat = np.asarray(flat, dtype=float).reshape(-1)
    m, n = spec.shape
    if flat.size != m * n:
        raise ControllerSpecError(f"expected {m * n} parameters, got {flat.size}")
    return replace(spec, params=flat.reshape(m, n))
