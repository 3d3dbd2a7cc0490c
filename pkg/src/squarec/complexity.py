"""Per-scale complexity: uniformity of the solved field over distance level sets."""

import math
from dataclasses import dataclass

import numpy as np

from .grid import BinaryShape, ShapeError
from .solver import SolverConfig, solve_field
from .transform import chebyshev_dt, level_sets, normalize_dt
from .ioutil import atomic_write_text


@dataclass(frozen=True)
class ComplexityProfile:
    """Complexity per discrete scale t = k/rho_max, ascending in t."""

    shape_id: str
    bins: int
    t_values: np.ndarray
    entropy: np.ndarray
    std: np.ndarray

    def values(self, estimator: str) -> np.ndarray:
        if estimator == "entropy":
            return self.entropy
        if estimator == "std":
            return self.std
        raise ShapeError(f"unknown estimator {estimator!r}")


@dataclass(frozen=True)
class Indicator:
    """Mean complexity over the discrete levels with t in (t_lo, t_hi]."""

    shape_id: str
    t_lo: float
    t_hi: float
    estimator: str
    value: float


def uniformity_entropy(values, bins: int = 1024, base: float = math.e) -> float:
    """Entropy of `values` histogrammed into equal-width bins over [0, 1].

    Values exactly at 1.0 fall into the last bin.  All values identical (one
    occupied bin) gives exactly 0.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ShapeError("uniformity_entropy needs at least one value")
    if bins < 2:
        raise ShapeError("bins must be >= 2")
    if v.min() < 0.0 or v.max() > 1.0:
        raise ShapeError("values must lie in [0, 1]")
    counts, _ = np.histogram(v, bins=bins, range=(0.0, 1.0))
    p = counts[counts > 0] / v.size
    return float(-(p * (np.log(p) / math.log(base))).sum() + 0.0)  # +0.0 avoids -0.0


def uniformity_std(values) -> float:
    """Population standard deviation."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ShapeError("uniformity_std needs at least one value")
    return float(v.std())


def complexity_profile(shape: BinaryShape, config: SolverConfig = None, bins: int = 1024,
                       shape_id: str = "shape", base: float = math.e,
                       return_report: bool = False):
    """Solve the field and score every level set of the normalized distance transform."""
    t, _ = normalize_dt(chebyshev_dt(shape))
    f, report = solve_field(shape, config)
    levels = level_sets(t)
    tv = np.empty(len(levels))
    ent = np.empty(len(levels))
    std = np.empty(len(levels))
    for i, ls in enumerate(levels):
        vals = f.values[tuple(ls.cells.T)]
        tv[i] = ls.t_value
        ent[i] = uniformity_entropy(vals, bins=bins, base=base)
        std[i] = uniformity_std(vals)
    prof = ComplexityProfile(shape_id, bins, tv, ent, std)
    return (prof, report) if return_report else prof


def indicator(profile: ComplexityProfile, t_lo: float, t_hi: float,
              estimator: str = "entropy") -> Indicator:
    """Mean of the estimator over levels with t_lo < t <= t_hi."""
    if not t_lo < t_hi:
        raise ShapeError("indicator interval must satisfy t_lo < t_hi")
    sel = (profile.t_values > t_lo) & (profile.t_values <= t_hi)
    if not sel.any():
        raise ShapeError(f"interval ({t_lo}, {t_hi}] contains no discrete level")
    return Indicator(profile.shape_id, t_lo, t_hi, estimator,
                     float(profile.values(estimator)[sel].mean()))


def predict_cutoff(contact_width: int, body_width: int) -> float:
    """Scale above which a flush rectangular appendage stops affecting the field."""
    if not 0 < contact_width <= body_width:
        raise ShapeError("need 0 < contact_width <= body_width")
    return contact_width / body_width


def profile_to_csv(profile: ComplexityProfile, path) -> None:
    lines = ["t,entropy,std"]
    for t, e, s in zip(profile.t_values, profile.entropy, profile.std):
        lines.append(f"{t:.12g},{e:.12g},{s:.12g}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def indicators_to_csv(indicators, path) -> None:
    lines = ["shape_id,t_lo,t_hi,estimator,value"]
    for ind in indicators:
        lines.append(f"{ind.shape_id},{ind.t_lo:.12g},{ind.t_hi:.12g},"
                     f"{ind.estimator},{ind.value:.12g}")
    atomic_write_text(path, "\n".join(lines) + "\n")
