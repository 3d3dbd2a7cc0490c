import numpy as np
import pytest

import squarec as sq
from oracles import dense_fixed_point, random_blob


def single_cell():
    return sq.make_square(1)


def test_estimate_rho():
    assert sq.estimate_rho(sq.make_square(128)) == 64
    assert sq.estimate_rho(single_cell()) == 1
    assert sq.estimate_rho(sq.make_rect(128, 32)) == 16


def test_residual_zero_field_is_one_on_shape():
    s = sq.make_square(6)
    r = sq.residual(np.zeros(s.mask.shape), s)
    assert np.array_equal(r.values[s.mask], np.ones(s.count))
    assert not r.values[~s.mask].any()


def test_residual_single_cell_fixed_point():
    s = single_cell()
    cfg = sq.SolverConfig(rho=1.0)
    f = np.zeros(s.mask.shape)
    f[s.mask] = 1.0 / 3.0          # closed form: neighbors exterior, c = 3
    r = sq.residual(f, s, cfg)
    assert abs(r.values[s.mask][0]) < 1e-15


def test_residual_after_converged_solve_below_eps1():
    s = sq.make_square(16)
    cfg = sq.SolverConfig(mode="explicit")
    f, rep = sq.solve_explicit(s, cfg)
    assert rep.converged
    r = sq.residual(f, s, cfg)
    assert np.abs(r.values).max() <= s.count * 1e-6


def test_explicit_single_cell_closed_form():
    f, rep = sq.solve_explicit(single_cell(), sq.SolverConfig(rho=1.0))
    assert rep.converged
    assert abs(f.values[f.support.mask][0] - 1.0 / 3.0) < 1e-9


def test_explicit_square16_matches_dense_oracle():
    s = sq.make_square(16)
    f, rep = sq.solve_explicit(s)
    oracle = dense_fixed_point(s.mask, rho=8.0)
    scale = np.abs(oracle).max()
    assert np.abs(f.values - oracle).max() <= 1e-6 * scale
    # ring-constant level sets
    dt = sq.chebyshev_dt(s).values
    for k in range(1, 9):
        vals = f.values[dt == k]
        assert vals.max() - vals.min() <= 1e-8 * scale


def test_explicit_warm_start_at_fixed_point_stops_immediately():
    s = sq.make_square(8)
    f, _ = sq.solve_system(s)
    f2, rep = sq.solve_explicit(s, warm=f)
    assert rep.iterations <= 1
    assert np.abs(f2.values - f.values).max() <= 1e-12


def test_system_square_zero_residual_fast():
    for side in (8, 32, 128):
        s = sq.make_square(side)
        f, rep = sq.solve_system(s)
        assert rep.converged_by == "system_zero_residual"
        assert rep.outer_solves <= 3


def test_system_single_cell_exact():
    s = single_cell()
    f, rep = sq.solve_system(s, sq.SolverConfig(rho=1.0))
    assert abs(f.values[s.mask][0] - 1.0 / 3.0) < 1e-12


def test_system_guess_at_solution_reproduces_it():
    s = sq.make_square(12)
    f, _ = sq.solve_system(s)
    f2, rep = sq.solve_system(s, guess=f)
    assert rep.outer_solves == 1
    assert rep.converged_by == "system_zero_residual"
    assert np.abs(f2.values - f.values).max() <= 1e-10


def test_solve_field_normalized_and_max_on_deepest_level():
    s = sq.append_rect(sq.make_square(48), "top", 24, 12)
    f, rep = sq.solve_field(s)
    assert rep.converged
    vals = f.values[s.mask]
    assert vals.min() > 0.0 and abs(vals.max() - 1.0) < 1e-15
    dt = sq.chebyshev_dt(s).values
    am = np.unravel_index(np.argmax(f.values), f.values.shape)
    assert dt[am] == dt.max()


def test_solve_field_positivity_3d():
    f, rep = sq.solve_field(sq.make_cube(8))
    assert rep.converged
    assert f.values[f.support.mask].min() > 0.0


def test_hybrid_vs_explicit_on_random_blobs():
    # spec bound: max pointwise difference of the normalized fields <= 10*eps1/N = 1e-5
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        s = sq.BinaryShape.from_mask(random_blob(rng, 32))
        fh, _ = sq.solve_field(s, sq.SolverConfig(mode="hybrid"))
        fe, _ = sq.solve_field(s, sq.SolverConfig(mode="explicit"))
        worst = max(worst, float(np.abs(fh.values - fe.values).max()))
    assert worst <= 1e-5, worst


def test_equivariance_sample():
    rng = np.random.default_rng(7)
    s = sq.BinaryShape.from_mask(random_blob(rng, 24))
    f, _ = sq.solve_field(s)
    rot = sq.BinaryShape.from_mask(np.rot90(s.mask).copy())
    fr, _ = sq.solve_field(rot)
    assert np.abs(np.rot90(f.values) - fr.values).max() <= 1e-9


def test_nonconvergence_reported_not_raised():
    s = sq.make_square(16)
    f, rep = sq.solve_explicit(s, sq.SolverConfig(max_iters=3))
    assert not rep.converged
    assert rep.converged_by == "max_iters"
    assert rep.iterations == 3


def test_config_validation():
    s = sq.make_square(4)
    with pytest.raises(sq.SolverError):
        sq.SolverConfig(rho=-1.0).resolved(s)
    with pytest.raises(sq.SolverError):
        sq.SolverConfig(dk=0.9).resolved(s)           # above the stable step bound
    with pytest.raises(sq.SolverError):
        sq.SolverConfig(eps1=1e-10, eps2=1e-6).resolved(s)
    with pytest.raises(sq.SolverError):
        sq.SolverConfig(mode="nope").resolved(s)


def test_explicit_stop_either_switch():
    s = sq.make_square(8)
    f1, r1 = sq.solve_explicit(s, sq.SolverConfig(explicit_stop="either"))
    f2, r2 = sq.solve_explicit(s, sq.SolverConfig(explicit_stop="both"))
    assert r1.converged and r2.converged
    assert r1.iterations <= r2.iterations


def test_report_text_format():
    s = sq.make_square(8)
    _, rep = sq.solve_field(s)
    text = rep.text()
    assert "converged=true" in text
    assert "mode_trace=system" in text


def test_size_robustness_of_normalized_square_fields():
    # Scale robustness: ring values at shared t levels agree up to the
    # first-order half-cell offset (~0.5/rho), and halving the grid spacing
    # halves the disagreement.  The residual offset makes agreement tighter
    # than ~1e-2 unattainable at side 32.
    vals = {}
    for side in (32, 64, 128):
        s = sq.make_square(side)
        f, _ = sq.solve_field(s)
        dt = sq.chebyshev_dt(s).values
        rho = int(dt.max())
        vals[side] = {k / rho: float(f.values[dt == k].mean()) for k in range(1, rho + 1)}
    shared = sorted(set(vals[32]) & set(vals[64]) & set(vals[128]))
    assert len(shared) == 16
    spread = [max(vals[s][t] for s in vals) - min(vals[s][t] for s in vals) for t in shared]
    assert max(spread) <= 0.02
    d_coarse = max(abs(vals[32][t] - vals[64][t]) for t in shared)
    d_fine = max(abs(vals[64][t] - vals[128][t]) for t in shared)
    assert d_fine < d_coarse


def test_fixed_point_consistency_of_solve_field():
    # residual of the pre-normalization field stays below eps1 everywhere
    for shape in (sq.make_square(24), sq.append_rect(sq.make_square(32), "top", 16, 8)):
        cfg = sq.SolverConfig()
        f, rep = sq.solve_field(shape, cfg)
        pre = f.values * rep.field_max
        r = sq.residual(pre, shape, cfg)
        assert np.abs(r.values).max() <= shape.count * 1e-6


def test_hybrid_continues_explicitly_after_system_stall():
    shape = sq.append_rect(sq.make_square(24), "top", 12, 6)
    # a huge eps3 makes the residual-change stall fire on the second outer pass
    f, rep = sq.solve_system(shape, sq.SolverConfig(eps3=1e12, max_outer=10))
    assert rep.converged_by == "system_stall"
    assert rep.outer_solves == 2
    f2, rep2 = sq.solve_field(shape, sq.SolverConfig(eps3=1e12, max_outer=10))
    assert rep2.mode_trace == ["system", "explicit"]
    assert rep2.converged and rep2.converged_by == "explicit_thresholds"
    ref, _ = sq.solve_field(shape)
    assert np.abs(f2.values - ref.values).max() <= 1e-4


def test_hybrid_outer_cap_falls_back_to_explicit():
    shape = sq.appendage_family(64, [48, 32], heights=[16, 16])[-1]
    f, rep = sq.solve_field(shape, sq.SolverConfig(max_outer=1, guess_sweeps=0))
    assert rep.mode_trace == ["system", "explicit"]
    assert rep.converged
