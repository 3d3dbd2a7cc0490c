"""Screened infinity-Laplacian field solver on binary shapes.

Solves, on the occupied cells with zero Dirichlet data on the exterior,

    max_{y in N(x)} f(y) + min_{y in N(x)} f(y) - (2 + 1/rho^2) f(x) + 1 = 0

where N(x) is the 3x3 (3x3x3) neighbourhood without the center and exterior
neighbours contribute 0.  Two schemes are provided:

* an explicit damped fixed-point iteration (`solve_explicit`), and
* a frozen-coefficient sparse scheme (`solve_system`): the argmax/argmin
  neighbour of every cell is frozen from the current guess (first from the
  Chebyshev distance transform), one sparse linear solve jumps to that
  policy's fixed point, and the true nonlinear residual drives re-freezing.

`solve_field` runs the system scheme first, falls back to the explicit one
if it stalls, and returns the field normalized to [0, 1].
"""

import itertools
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import BinaryShape, ShapeError
from .transform import ScalarField, chebyshev_dt


class SolverError(ShapeError):
    """Invalid solver configuration."""


@dataclass
class SolverConfig:
    """Numerical parameters; unset values are resolved per shape.

    Defaults: rho = max Chebyshev distance, eps1 = N*1e-6, eps2 = N*1e-10,
    eps3 = N*1e-6 (N = occupied-cell count), dk = 1/(2 + 1/rho^2).
    `explicit_stop` selects whether the explicit scheme's two conditions are
    combined conjunctively ("both") or as alternatives ("either").
    `guess_sweeps` explicit sweeps smooth each fed-back system guess; they
    only shape the next argmax/argmin freeze, never the reported solution.
    """

    rho: float = None
    eps1: float = None
    eps2: float = None
    eps3: float = None
    dk: float = None
    max_iters: int = 200_000
    mode: str = "hybrid"              # explicit | system | hybrid
    max_outer: int = 64
    guess_sweeps: int = 20
    explicit_stop: str = "both"       # both | either
    zero_rel: float = 1e-12
    zero_abs: float = 1e-13

    def resolved(self, shape: BinaryShape) -> "SolverConfig":
        n = shape.count
        rho = self.rho if self.rho is not None else estimate_rho(shape)
        cfg = replace(
            self,
            rho=float(rho),
            eps1=self.eps1 if self.eps1 is not None else n * 1e-6,
            eps2=self.eps2 if self.eps2 is not None else n * 1e-10,
            eps3=self.eps3 if self.eps3 is not None else n * 1e-6,
            dk=self.dk if self.dk is not None else 1.0 / (2.0 + 1.0 / float(rho) ** 2),
        )
        if cfg.rho <= 0:
            raise SolverError("rho must be positive")
        cmax = 1.0 / (2.0 + 1.0 / cfg.rho ** 2)
        if not 0.0 < cfg.dk <= cmax + 1e-15:
            raise SolverError(f"dk must lie in (0, {cmax}]")
        if not cfg.eps1 > cfg.eps2 > 0.0:
            raise SolverError("thresholds must satisfy eps1 > eps2 > 0")
        if cfg.eps3 <= 0.0:
            raise SolverError("eps3 must be positive")
        if cfg.mode not in ("explicit", "system", "hybrid"):
            raise SolverError(f"unknown mode {cfg.mode!r}")
        if cfg.explicit_stop not in ("both", "either"):
            raise SolverError(f"unknown explicit_stop {cfg.explicit_stop!r}")
        return cfg


@dataclass
class SolveReport:
    iterations: int = 0               # explicit updates applied
    outer_solves: int = 0             # sparse solves performed
    final_residual: float = float("inf")
    mode_trace: list = field(default_factory=list)
    converged_by: str = "none"
    converged: bool = False
    field_max: float = 0.0            # pre-normalization maximum (set by solve_field)

    def text(self) -> str:
        lines = [
            f"converged={str(self.converged).lower()}",
            f"converged_by={self.converged_by}",
            f"iterations={self.iterations}",
            f"outer_solves={self.outer_solves}",
            f"final_residual={self.final_residual:.12g}",
            f"field_max={self.field_max:.12g}",
            f"mode_trace={','.join(self.mode_trace)}",
        ]
        return "\n".join(lines) + "\n"


def estimate_rho(shape: BinaryShape) -> float:
    """Shape radius under the L-infinity metric: the distance-transform maximum."""
    return float(chebyshev_dt(shape).values.max())


# neighbour offsets in fixed lexicographic order (tie-break order everywhere)
def _offsets(nd):
    return [o for o in itertools.product((-1, 0, 1), repeat=nd) if any(o)]


def _core(a):
    return a[tuple(slice(1, -1) for _ in range(a.ndim))]


def _shifted(a, off):
    return a[tuple(slice(1 + o, a.shape[i] - 1 + o) for i, o in enumerate(off))]


def _neighbor_max_min(values):
    mx = mn = None
    for off in _offsets(values.ndim):
        v = _shifted(values, off)
        if mx is None:
            mx, mn = v.copy(), v.copy()
        else:
            np.maximum(mx, v, out=mx)
            np.minimum(mn, v, out=mn)
    return mx, mn


def _residual_array(f: np.ndarray, mask: np.ndarray, c: float) -> np.ndarray:
    mx, mn = _neighbor_max_min(f)
    r = np.zeros_like(f)
    core = tuple(slice(1, -1) for _ in range(f.ndim))
    r[core] = np.where(mask[core], mx + mn - c * _core(f) + 1.0, 0.0)
    return r


def residual(f, shape: BinaryShape, config: SolverConfig = None) -> ScalarField:
    """Pointwise defect of the discrete equation; zero outside the shape."""
    if f is None:
        raise SolverError("residual needs a field")
    cfg = (config or SolverConfig()).resolved(shape)
    values = _as_values(shape, f)
    c = 2.0 + 1.0 / cfg.rho ** 2
    return ScalarField(_residual_array(values, shape.mask, c), shape)


def _as_values(shape, warm):
    if warm is None:
        return np.zeros(shape.mask.shape)
    values = warm.values if isinstance(warm, ScalarField) else np.asarray(warm, dtype=np.float64)
    if values.shape != shape.mask.shape:
        raise SolverError("warm start canvas mismatch")
    values = values.astype(np.float64).copy()
    values[~shape.mask] = 0.0        # Dirichlet data lives on the exterior
    return values


def solve_explicit(shape: BinaryShape, config: SolverConfig = None, warm=None):
    """Damped fixed-point iteration f <- f + dk * r(f); stops on the eps1/eps2 thresholds."""
    cfg = (config or SolverConfig()).resolved(shape)
    c = 2.0 + 1.0 / cfg.rho ** 2
    f = _as_values(shape, warm)
    rep = SolveReport(mode_trace=["explicit"])
    r_prev = None
    while True:
        r = _residual_array(f, shape.mask, c)
        m = float(np.abs(r).max())
        rep.final_residual = m
        if r_prev is not None:
            dr = float(np.abs(r - r_prev).max())
            small = m <= cfg.eps1
            stalled = dr <= cfg.eps2
            if (small and stalled) if cfg.explicit_stop == "both" else (small or stalled):
                rep.converged = True
                rep.converged_by = "explicit_thresholds"
                return ScalarField(f, shape), rep
        if rep.iterations >= cfg.max_iters:
            rep.converged_by = "max_iters"
            return ScalarField(f, shape), rep
        f = f + cfg.dk * r
        rep.iterations += 1
        r_prev = r


def _freeze_policy(guess: np.ndarray, mask: np.ndarray):
    """Argmax/argmin neighbour (flat canvas index) per cell; exterior cells count as 0.

    Ties resolve to the first offset in lexicographic order, which keeps runs
    deterministic across platforms.
    """
    nd = guess.ndim
    flat = np.arange(guess.size, dtype=np.int64).reshape(guess.shape)
    bmax = bmin = amax = amin = None
    for off in _offsets(nd):
        v = _shifted(guess, off)
        fi = _shifted(flat, off)
        if bmax is None:
            bmax, bmin = v.copy(), v.copy()
            amax, amin = fi.copy(), fi.copy()
        else:
            upd = v > bmax
            bmax[upd] = v[upd]
            amax[upd] = fi[upd]
            upd = v < bmin
            bmin[upd] = v[upd]
            amin[upd] = fi[upd]
    return amax, amin


def solve_system(shape: BinaryShape, config: SolverConfig = None, guess=None):
    """Frozen-coefficient sparse scheme with residual feedback.

    Repeats: freeze argmax/argmin from the current guess (first iteration:
    from the distance transform unless a guess is supplied), assemble the
    sparse linear system, solve, evaluate the true nonlinear residual, and
    feed the solution back.  Stops when the residual reaches the zero floor
    (machine-level, scaled by the field magnitude) or the residual change
    drops below eps3 (stall).
    """
    cfg = (config or SolverConfig()).resolved(shape)
    mask = shape.mask
    nd = mask.ndim
    c = 2.0 + 1.0 / cfg.rho ** 2
    n = shape.count
    idx = np.flatnonzero(mask.ravel())
    cell_id = -np.ones(mask.size, dtype=np.int64)
    cell_id[idx] = np.arange(n)
    core_mask = _core(mask)

    g = _as_values(shape, guess) if guess is not None else chebyshev_dt(shape).values

    rep = SolveReport(mode_trace=["system"])
    f = np.zeros(mask.shape)
    r_prev = None
    prev_policy = None
    rows = np.arange(n)
    while rep.outer_solves < cfg.max_outer:
        amax, amin = _freeze_policy(g, mask)
        policy = (amax[core_mask], amin[core_mask])
        data = [np.full(n, c)]
        rix = [rows]
        cix = [rows]
        for arg in policy:
            sel = cell_id[arg]
            ok = sel >= 0                     # exterior selections contribute the Dirichlet 0
            rix.append(rows[ok])
            cix.append(sel[ok])
            data.append(np.full(int(ok.sum()), -1.0))
        A = sp.csc_matrix((np.concatenate(data), (np.concatenate(rix), np.concatenate(cix))),
                          shape=(n, n))
        try:
            x = spla.spsolve(A, np.ones(n))
        except Exception:
            # strictly diagonally dominant systems should never get here; be safe anyway
            out, erep = solve_explicit(shape, cfg, warm=ScalarField(f, shape))
            erep.mode_trace = rep.mode_trace + ["explicit_fallback"]
            erep.outer_solves = rep.outer_solves
            return out, erep
        rep.outer_solves += 1
        if not np.isfinite(x).all():
            x = np.nan_to_num(x)
        f = np.zeros(mask.size)
        f[idx] = x
        f = f.reshape(mask.shape)
        r = _residual_array(f, mask, c)
        m = float(np.abs(r).max())
        rep.final_residual = m
        floor = max(cfg.zero_abs, cfg.zero_rel * c * max(1.0, float(np.abs(f).max())))
        if m <= floor:
            rep.converged = True
            rep.converged_by = "system_zero_residual"
            return ScalarField(f, shape), rep
        same_policy = prev_policy is not None and \
            np.array_equal(policy[0], prev_policy[0]) and np.array_equal(policy[1], prev_policy[1])
        if same_policy or (r_prev is not None and float(np.abs(r - r_prev).max()) <= cfg.eps3):
            rep.converged = True
            rep.converged_by = "system_stall"
            return ScalarField(f, shape), rep
        r_prev = r
        prev_policy = policy
        g = f
        for _ in range(cfg.guess_sweeps):
            g = g + cfg.dk * _residual_array(g, mask, c)
    rep.converged_by = "max_outer"
    return ScalarField(f, shape), rep


def solve_field(shape: BinaryShape, config: SolverConfig = None):
    """Solve and normalize to [0, 1]; hybrid mode finishes a stalled system solve explicitly."""
    cfg = (config or SolverConfig()).resolved(shape)
    if cfg.mode == "explicit":
        out, rep = solve_explicit(shape, cfg)
    elif cfg.mode == "system":
        out, rep = solve_system(shape, cfg)
    else:
        out, rep = solve_system(shape, cfg)
        if rep.converged_by not in ("system_zero_residual",):
            out2, rep2 = solve_explicit(shape, cfg, warm=out)
            rep2.mode_trace = rep.mode_trace + rep2.mode_trace
            rep2.outer_solves = rep.outer_solves
            out, rep = out2, rep2
    fmax = float(out.values.max())
    if fmax <= 0.0:
        raise SolverError("field maximum is not positive; solve did not progress")
    rep.field_max = fmax
    return ScalarField(out.values / fmax, shape), rep
