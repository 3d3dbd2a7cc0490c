import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

import squarec as sq
from oracles import brute_chebyshev, erosion_count_dt


def test_square4_row_profile():
    s = sq.make_square(4)
    dt = sq.chebyshev_dt(s)
    # middle canvas row: margin, then ring/interior values
    assert dt.values[2].tolist() == [0, 1, 2, 2, 1, 0]
    assert dt.values.max() == 2


def test_square128_max():
    assert sq.estimate_rho(sq.make_square(128)) == 64


def test_single_pixel():
    s = sq.make_square(1)
    dt = sq.chebyshev_dt(s)
    assert dt.values.max() == 1
    t, rho = sq.normalize_dt(dt)
    assert rho == 1
    assert t.values[s.mask].tolist() == [1.0]


@pytest.mark.parametrize("side", [4, 7, 12, 16])
def test_dt_matches_brute_force_squares(side):
    s = sq.make_square(side)
    assert np.array_equal(sq.chebyshev_dt(s).values, brute_chebyshev(s.mask))


@given(hnp.arrays(bool, (9, 11)))
def test_dt_matches_brute_force_random(mask):
    if not mask.any():
        return
    s = sq.BinaryShape.from_mask(mask)
    assert np.array_equal(sq.chebyshev_dt(s).values, brute_chebyshev(s.mask))


def test_dt_matches_erosion_count():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = rng.random((20, 24)) < 0.6
        if not m.any():
            continue
        s = sq.BinaryShape.from_mask(m)
        assert np.array_equal(sq.chebyshev_dt(s).values, erosion_count_dt(s.mask))
    c = sq.make_cube(9)
    assert np.array_equal(sq.chebyshev_dt(c).values, erosion_count_dt(c.mask))


def test_dt_equivariance():
    rng = np.random.default_rng(5)
    m = rng.random((15, 18)) < 0.55
    m[0] = m[-1] = False
    m[:, 0] = m[:, -1] = False
    if not m.any():
        m[7, 7] = True
    s = sq.BinaryShape.from_mask(m)
    base = sq.chebyshev_dt(s).values
    for k in range(4):
        rot = sq.BinaryShape.from_mask(np.rot90(m, k))
        assert np.array_equal(sq.chebyshev_dt(rot).values, np.rot90(base, k))
    flip = sq.BinaryShape.from_mask(np.flipud(m))
    assert np.array_equal(sq.chebyshev_dt(flip).values, np.flipud(base))


def test_normalize_square128():
    t, rho = sq.normalize_dt(sq.chebyshev_dt(sq.make_square(128)))
    assert rho == 64
    vals = np.unique(t.values[t.support.mask])
    assert np.allclose(vals, np.arange(1, 65) / 64)


def test_normalize_square4_levels():
    t, rho = sq.normalize_dt(sq.chebyshev_dt(sq.make_square(4)))
    assert rho == 2
    assert set(np.unique(t.values[t.support.mask])) == {0.5, 1.0}


def test_level_sets_square128_ring_counts():
    t, rho = sq.normalize_dt(sq.chebyshev_dt(sq.make_square(128)))
    levels = sq.level_sets(t)
    assert len(levels) == 64
    total = 0
    for ls in levels:
        k = ls.level_index
        expected = 4 * (128 - 2 * k) + 4
        assert len(ls.cells) == expected
        total += len(ls.cells)
    assert total == 16384
    assert [ls.t_value for ls in levels] == [k / 64 for k in range(1, 65)]


def test_level_sets_small():
    t, _ = sq.normalize_dt(sq.chebyshev_dt(sq.make_square(4)))
    sizes = [len(ls.cells) for ls in sq.level_sets(t)]
    assert sizes == [12, 4]
    t1, _ = sq.normalize_dt(sq.chebyshev_dt(sq.make_square(1)))
    assert [len(ls.cells) for ls in sq.level_sets(t1)] == [1]


def test_nearest_level():
    t, _ = sq.normalize_dt(sq.chebyshev_dt(sq.make_square(128)))
    assert sq.nearest_level(t, 0.5).level_index == 32
    assert sq.nearest_level(t, 0.505).level_index == 32
    assert sq.nearest_level(t, 1.0).level_index == 64
    # exact midpoint 32.5/64 ties toward the smaller level
    assert sq.nearest_level(t, 32.5 / 64).level_index == 32
    with pytest.raises(sq.ShapeError):
        sq.nearest_level(t, 0.0)


def test_fld_roundtrip(tmp_path):
    s = sq.make_square(8)
    f, _ = sq.solve_field(s)
    p = tmp_path / "f.fld"
    sq.save_field(f, p)
    assert p.read_bytes().startswith(b"FLD 2 10 10\n")
    back = sq.load_field(p, support=s)
    assert np.array_equal(back.values, f.values)


def test_field_csv(tmp_path):
    s = sq.make_square(2)
    f, _ = sq.solve_field(s)
    p = tmp_path / "f.csv"
    sq.field_to_csv(f, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + 4
