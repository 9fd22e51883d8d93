"""Bayesian optimization of controller parameters, plus a random-search baseline."""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from . import simworld, tasks
from .controller import ControllerSpec, ControllerSpecError, EvaluationError, flatten_params, with_params
from .gp import GaussianProcessModel, Kernel, ModelError, fit_length_scale, gp_fit
from .measurements import MeasurementError
from .tasks import ScenarioSpec

PENALTY_COST = 1e9
N_SOBOL_CANDIDATES = 2048
N_LOCAL_CANDIDATES = 512
HILL_CLIMB_STEPS = 50
DEFAULT_LENGTH_SCALE_FRACTION = 0.2
DEFAULT_NOISE_VARIANCE = 1e-6
REFIT_EVERY = 10
LENGTH_SCALE_BOUNDS = (0.1, 2.0)  # as fractions of the unit-cube diagonal

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class SearchSpace:
    bounds: np.ndarray  # (dims, 2)

    def __post_init__(self):
        b = np.array(self.bounds, dtype=float).reshape(-1, 2)
        if not np.all(b[:, 0] < b[:, 1]):
            raise ValueError("every dimension needs lo < hi")
        b.setflags(write=False)
        object.__setattr__(self, "bounds", b)

    @classmethod
    def uniform(cls, dims: int, lo: float, hi: float) -> SearchSpace:
        return cls(np.tile([lo, hi], (dims, 1)))

    @classmethod
    def for_controller(cls, spec: ControllerSpec, scenario: ScenarioSpec) -> SearchSpace:
        lo, hi = scenario.param_bounds
        return cls.uniform(spec.params.size, lo, hi)

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @property
    def lo(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def hi(self) -> np.ndarray:
        return self.bounds[:, 1]

    def to_unit(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo)

    def from_unit(self, u) -> np.ndarray:
        return self.lo + np.clip(np.asarray(u, dtype=float), 0.0, 1.0) * (self.hi - self.lo)


@dataclass
class BOCampaign:
    space: SearchSpace
    budget: int
    n_init: int
    history: list[tuple[np.ndarray, float]] = field(default_factory=list)
    eval_seed: Optional[int] = None
    length_scale: Optional[float] = None

    @property
    def incumbent(self) -> tuple[np.ndarray, float]:
        if not self.history:
            raise ValueError("empty campaign")
        k = int(np.argmin([c for _, c in self.history]))
        return self.history[k]

    def incumbent_trace(self) -> list[float]:
        return list(np.minimum.accumulate([c for _, c in self.history]))

    def log_csv(self) -> str:
        buf = io.StringIO()
        header = ["eval_index", "cost", "incumbent_cost"] + [f"param_{k}" for k in range(self.space.dims)]
        buf.write(",".join(header) + "\n")
        for k, ((x, c), inc) in enumerate(zip(self.history, self.incumbent_trace())):
            buf.write(",".join([str(k), repr(float(c)), repr(float(inc))]
                               + [repr(float(v)) for v in x]) + "\n")
        return buf.getvalue()


# -- acquisition ----------------------------------------------------------------

def ei_from_moments(mu, sd, incumbent_cost):
    """Expected improvement below incumbent_cost for a Gaussian N(mu, sd^2)."""
    mu = np.asarray(mu, dtype=float)
    sd = np.asarray(sd, dtype=float)
    imp = incumbent_cost - mu
    safe_sd = np.where(sd > 1e-12, sd, 1.0)
    z = imp / safe_sd
    ei = imp * ndtr(z) + safe_sd * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    ei = np.where(sd > 1e-12, ei, np.maximum(imp, 0.0))
    return np.maximum(ei, 0.0)


def expected_improvement(model: GaussianProcessModel, x, incumbent_cost: float):
    """EI at one point (1-D x, returns float) or at each row of a 2-D x."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    mu, sd = model.predict(x.reshape(1, -1) if single else x)
    ei = ei_from_moments(mu, sd, incumbent_cost)
    return float(ei[0]) if single else ei


def propose_next(campaign: BOCampaign, model, rng: np.random.Generator,
                 incumbent_value: Optional[float] = None) -> np.ndarray:
    """Maximize EI over the space; ``model`` is fitted in unit-cube coordinates.

    ``incumbent_value`` is the best target in the model's own units (defaults
    to the smallest training target, i.e. the warped incumbent).
    """
    d = campaign.space.dims
    if incumbent_value is None:
        incumbent_value = float(np.min(model.y))

    def acq(U):
        return expected_improvement(model, np.atleast_2d(U), incumbent_value)

    sobol = qmc.Sobol(d, scramble=True, seed=rng).random(N_SOBOL_CANDIDATES)
    best_u = campaign.space.to_unit(campaign.incumbent[0])
    half = N_LOCAL_CANDIDATES // 2
    local = np.concatenate([best_u + 0.02 * rng.standard_normal((half, d)),
                            best_u + 0.1 * rng.standard_normal((N_LOCAL_CANDIDATES - half, d))])
    cand = np.clip(np.vstack([best_u[None, :], sobol, local]), 0.0, 1.0)
    scores = acq(cand)
    k = int(np.argmax(scores))
    u, score = hill_climb(acq, cand[k], float(scores[k]))
    return campaign.space.from_unit(u)


def hill_climb(acq, u0: np.ndarray, score0: float, steps: int = HILL_CLIMB_STEPS,
               step_size: float = 0.05) -> tuple[np.ndarray, float]:
    """Coordinate-wise ascent in the unit cube; step halves after a full pass without gain."""
    u, score = np.array(u0, dtype=float), score0
    d = len(u)
    stale = 0
    for s in range(steps):
        k = s % d
        trial = np.repeat(u[None, :], 2, axis=0)
        trial[0, k] = min(u[k] + step_size, 1.0)
        trial[1, k] = max(u[k] - step_size, 0.0)
        vals = acq(trial)
        j = int(np.argmax(vals))
        if vals[j] > score:
            u, score = trial[j], float(vals[j])
            stale = 0
        else:
            stale += 1
            if stale >= d:
                step_size *= 0.5
                stale = 0
    return u, score


# -- campaign loop --------------------------------------------------------------

def latin_hypercube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    return qmc.LatinHypercube(d, seed=rng).random(n)


def _fit_targets(costs: Sequence[float]) -> np.ndarray:
    """GP targets: log(1 + cost - best), failures modelled at the worst successful cost.

    The log warp keeps large plateaus (e.g. every-pair-collides runs) from
    flattening the model near the incumbent. It is monotone, so the argmin
    and the improvement ordering are unchanged.
    """
    c = np.asarray(costs, dtype=float)
    ok = c < PENALTY_COST
    if not ok.any():
        return np.zeros_like(c)
    c = np.where(ok, c, c[ok].max())
    return np.log1p(c - c.min())


def minimize(objective: Objective, space: SearchSpace, budget: int, n_init: int, seed: int,
             kernel_type: str = "matern52", noise_variance: float = DEFAULT_NOISE_VARIANCE,
             refit_every: int = REFIT_EVERY,
             callback: Optional[Callable[[int, np.ndarray, float], None]] = None) -> BOCampaign:
    """Gaussian-process BO with expected improvement, minimizing ``objective``."""
    if n_init < 2 or budget <= n_init:
        raise ValueError(f"need budget > n_init >= 2 (got budget={budget}, n_init={n_init})")
    rng = np.random.default_rng(seed)
    campaign = BOCampaign(space, budget, n_init)

    def record(x):
        cost = float(objective(x))
        campaign.history.append((np.asarray(x, dtype=float), cost))
        if callback is not None:
            callback(len(campaign.history) - 1, x, cost)

    for u in latin_hypercube(n_init, space.dims, rng):
        record(space.from_unit(u))

    diag = math.sqrt(space.dims)
    kernel = Kernel(kernel_type, (DEFAULT_LENGTH_SCALE_FRACTION * diag,), 1.0)
    while len(campaign.history) < budget:
        U = np.array([space.to_unit(x) for x, _ in campaign.history])
        y = _fit_targets([c for _, c in campaign.history])
        if len(y) % refit_every == 0:
            lo, hi = LENGTH_SCALE_BOUNDS
            kernel = fit_length_scale(U, y, kernel, noise_variance, lo * diag, hi * diag)
        try:
            model = gp_fit(U, y, kernel, noise_variance)
            x = propose_next(campaign, model, rng)
        except ModelError:
            x = space.from_unit(rng.uniform(size=space.dims))
        record(x)
    campaign.length_scale = kernel.length_scales[0]
    return campaign


def simulation_objective(scenario: ScenarioSpec, spec_template: ControllerSpec,
                         eval_seed: int) -> Objective:
    """Total scenario cost of the controller with the given flat parameters."""
    def f(flat) -> float:
        try:
            spec = with_params(spec_template, flat)
            traj = simworld.run(scenario, spec, eval_seed)
            total = tasks.accumulate_cost(traj, scenario).total
        except (simworld.SimulationError, MeasurementError, EvaluationError, ControllerSpecError):
            return PENALTY_COST
        return total if math.isfinite(total) else PENALTY_COST
    return f


def run_bo(scenario: ScenarioSpec, spec_template: ControllerSpec, space: Optional[SearchSpace] = None,
           budget: int = 150, n_init: int = 20, seed: int = 0, **kw) -> BOCampaign:
    space = space or SearchSpace.for_controller(spec_template, scenario)
    if space.dims != len(flatten_params(spec_template)):
        raise ValueError(f"search space has {space.dims} dims, controller has {spec_template.params.size}")
    campaign = minimize(simulation_objective(scenario, spec_template, seed), space, budget, n_init,
                        seed, **kw)
    campaign.eval_seed = seed
    return campaign


# -- random search baseline -----------------------------------------------------

def worker_threads() -> int:
    try:
        return max(1, int(os.environ.get("SWARMCTL_THREADS", "1")))
    except ValueError:
        return 1


def histogram(costs: Sequence[float], n_bins: int = 40) -> list[tuple[float, float, int]]:
    counts, edges = np.histogram(np.asarray(costs, dtype=float), bins=n_bins)
    return [(float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(n_bins)]


def histogram_csv(hist) -> str:
    lines = ["bin_lo,bin_hi,count"]
    lines += [f"{lo!r},{hi!r},{c}" for lo, hi, c in hist]
    return "\n".join(lines) + "\n"


def costs_csv(history) -> str:
    if not history:
        return "trial,cost\n"
    dims = len(history[0][0])
    lines = [",".join(["trial", "cost"] + [f"param_{k}" for k in range(dims)])]
    for k, (x, c) in enumerate(history):
        lines.append(",".join([str(k), repr(float(c))] + [repr(float(v)) for v in x]))
    return "\n".join(lines) + "\n"


def run_random_search(scenario: ScenarioSpec, spec_template: ControllerSpec,
                      space: Optional[SearchSpace] = None, trials: int = 1000, seed: int = 0,
                      n_bins: int = 40, threads: Optional[int] = None):
    """Uniform-random parameters, one simulation each; returns (history, histogram)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    space = space or SearchSpace.for_controller(spec_template, scenario)
    rng = np.random.default_rng(seed)
    points = space.lo + rng.uniform(size=(trials, space.dims)) * (space.hi - space.lo)
    f = simulation_objective(scenario, spec_template, seed)
    threads = threads or worker_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            costs = list(pool.map(f, points))
    else:
        costs = [f(x) for x in points]
    history = list(zip(points, costs))
    return history, histogram(costs, n_bins)
