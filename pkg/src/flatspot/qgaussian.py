"""Tsallis Q-exponential, Q-Gaussian densities and the tail comparison with nu."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from .density import StepFunction, assemble, error_bound, evaluate

__all__ = [
    "QGaussianParams",
    "FitResult",
    "FitError",
    "q_exp",
    "q_log",
    "density",
    "tail_leading",
    "tail_exponent",
    "tail_ratio_series",
    "plateau_samples",
    "fit",
]


class FitError(RuntimeError):
    pass


def q_exp(Q: float, x, cutoff: bool = True):
    """e_Q(x) = (1 + (1-Q) x)^{1/(1-Q)}; the ordinary exp at Q == 1.

    For Q < 1 a non-positive base is mapped to 0 (Tsallis cutoff) unless
    ``cutoff`` is False, in which case it raises.
    """
    x = np.asarray(x, dtype=float)
    if Q == 1:
        out = np.exp(x)
    else:
        base = 1.0 + (1.0 - Q) * x
        bad = base <= 0
        if np.any(bad):
            if Q > 1:
                raise ValueError("q_exp diverges: 1 + (1-Q) x <= 0 with Q > 1")
            if not cutoff:
                raise ValueError("argument outside the Q-exponential support")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(bad, 0.0, np.abs(base) ** (1.0 / (1.0 - Q)))
    return out[()] if out.ndim == 0 else out


def q_log(Q: float, y):
    """ln_Q(y) = (y^{1-Q} - 1)/(1 - Q), the inverse of :func:`q_exp`."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("q_log needs y > 0")
    out = np.log(y) if Q == 1 else (y ** (1.0 - Q) - 1.0) / (1.0 - Q)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class QGaussianParams:
    Q: float
    beta: float
    y0: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        if self.Q == 1:
            raise ValueError("Q must differ from 1")
        if self.beta <= 0 or self.C <= 0:
            raise ValueError("beta and C must be positive")

    @property
    def halfwidth(self) -> float:
        """Support half-width ((1-Q) beta)^{-1/2}; infinite for Q > 1."""
        if self.Q > 1:
            return math.inf
        return ((1.0 - self.Q) * self.beta) ** -0.5


def density(params: QGaussianParams, y):
    y = np.asarray(y, dtype=float)
    return params.C * q_exp(params.Q, -params.beta * (y - params.y0) ** 2)


def tail_exponent(Q: float) -> float:
    return 1.0 / (1.0 - Q)


def tail_leading(params: QGaussianParams, z):
    """Leading term K z^{1/(1-Q)} of density(y0 - l + z) as z -> 0+."""
    if params.Q >= 1:
        raise ValueError("tail expansion needs Q < 1")
    a = tail_exponent(params.Q)
    K = params.C * (2.0 / params.halfwidth) ** a
    return K * np.asarray(z, dtype=float) ** a


def tail_ratio_series(
    params: QGaussianParams,
    q_range,
    N: int = 50,
    nu: StepFunction | None = None,
    rel_tol: float = 1e-6,
) -> list[tuple[Fraction, float]]:
    """(z, density(-l + z) / nu_N(-1/2 + z)) for z = 1/q.

    Refuses to run when the truncation error of nu_N is not below
    ``rel_tol`` times the smallest nu value probed.
    """
    if params.Q >= 1:
        raise ValueError("tail comparison needs Q < 1")
    nu = assemble(N) if nu is None else nu
    ell = params.halfwidth
    out = []
    for q in q_range:
        z = Fraction(1, q)
        nu_val = evaluate(nu, Fraction(-1, 2) + z)
        if nu_val <= 0 or error_bound(N) > rel_tol * nu_val:
            raise ValueError(
                f"nu_{N} truncation error {float(error_bound(N)):.3g} not negligible "
                f"against nu(-1/2+1/{q}) = {float(nu_val):.3g}"
            )
        g = float(density(params, params.y0 - ell + float(z)))
        out.append((z, g / float(nu_val)))
    return out


def plateau_samples(nu: StepFunction) -> tuple[np.ndarray, np.ndarray]:
    """Midpoints and values of every plateau of ``nu`` inside [-1/2, 1/2]."""
    xs, ys = [], []
    for a, b, v in nu.gaps:
        if a >= Fraction(-1, 2) and b <= Fraction(1, 2):
            xs.append(float((a + b) / 2))
            ys.append(float(v))
    return np.array(xs), np.array(ys)


@dataclass
class FitResult:
    params: QGaussianParams
    discrepancy: float
    samples: int
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self.params)
        d.update(discrepancy=self.discrepancy, samples=self.samples)
        return json.dumps(d, indent=1) + "\n"


def _sse(theta, x, y):
    Q, beta, C = theta
    if not (0 < Q < 1) or beta <= 0 or C <= 0:
        return math.inf
    g = C * q_exp(Q, -beta * x * x)
    r = g - y
    return float(r @ r)


def _best_scale(Q, beta, x, y):
    g = q_exp(Q, -beta * x * x)
    gg = float(g @ g)
    return float(g @ y) / gg if gg > 0 else 0.0


def fit(
    nu: StepFunction,
    Q_grid=None,
    beta_grid=None,
    y0: float = 0.0,
) -> FitResult:
    """Least-squares Q-Gaussian (0 < Q < 1, centre fixed) through plateau midpoints.

    A coarse grid over (Q, beta) with the optimal scale C solved linearly
    picks the start; Nelder-Mead then polishes (Q, beta, C) jointly.
    """
    x, y = plateau_samples(nu)
    x = x - y0
    if len(x) < 4:
        raise FitError("too few plateaus to fit")
    Q_grid = np.linspace(0.05, 0.95, 19) if Q_grid is None else Q_grid
    beta_grid = np.geomspace(1.0, 200.0, 41) if beta_grid is None else beta_grid

    best = None
    for Q in Q_grid:
        for beta in beta_grid:
            C = _best_scale(Q, beta, x, y)
            if C <= 0:
                continue
            s = _sse((Q, beta, C), x, y)
            if best is None or s < best[0]:
                best = (s, (Q, beta, C))
    if best is None:
        raise FitError("grid search found no admissible start")

    res = optimize.minimize(
        _sse,
        np.array(best[1]),
        args=(x, y),
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 20000, "maxfev": 40000},
    )
    diagnostics = {
        "grid_start": [float(v) for v in best[1]],
        "grid_sse": best[0],
        "nit": int(res.nit),
        "message": str(res.message),
    }
    if not res.success:
        raise FitError(f"Nelder-Mead did not converge: {res.message} {diagnostics}")
    Q, beta, C = (float(v) for v in res.x)
    return FitResult(QGaussianParams(Q, beta, y0, C), float(res.fun), len(x), diagnostics)
