import json

import numpy as np
import pytest

import paraprec


def test_sketch_shapes_and_orthogonality():
    s = paraprec.make_sketch("hadamard", 64, 64)
    V = s.matrix
    assert V.shape == (64, 64)
    np.testing.assert_allclose(V @ V.T, np.eye(64), atol=1e-12)
    assert paraprec.make_sketch("psrht", 100, 16, seed=3).matrix.shape == (100, 16)


def test_bounds_are_monotone_in_m():
    ks = [paraprec.min_sketch_columns("rademacher", 1e4, m) for m in (2, 5, 10)]
    assert ks == sorted(ks)
    assert paraprec.concentration_columns("rademacher", 50, 0.5, 0.05) > 0


def test_adr_greedy_reduces_the_residual():
    p = paraprec.assemble_adr(mesh_side=8, grid_size=41)
    assert p.n == 64
    V = paraprec.make_sketch("rademacher", p.n, 16, seed=1).matrix
    P = paraprec.greedy_frob(p, V, M_max=3, constraint="nonneg")
    assert P.size == 3
    h = P.history
    assert all(b <= a * (1 + 1e-8) for a, b in zip(h, h[1:]))
    for xi in P.points:
        assert P.residual(xi) < 1e-6
        lam = P.coefficients(xi)
        assert (lam >= 0).all()


def test_preconditioner_apply_matches_dense_inverse():
    p = paraprec.synthetic_multiparam(2, 40, 3, seed=4, grid_size=20)
    xi = p.grid[5]
    P = paraprec.make_preconditioner(p, [xi], np.eye(p.n))
    A = p.operator(xi).toarray()
    x = np.arange(p.n, dtype=float)
    np.testing.assert_allclose(A @ P.apply(xi, x), x, rtol=1e-9, atol=1e-9)


def test_eim_recovers_polynomial_span():
    grid = [[x] for x in np.linspace(0, 1, 21)]
    xs = np.linspace(0, 1, 21)
    table = np.vstack([np.ones_like(xs), xs, 3 * xs - 1])
    magic, points, Q = paraprec.eim(table, grid)
    assert len(magic) == 2


def test_config_errors_raise(tmp_path):
    with pytest.raises(RuntimeError, match="M_maks"):
        paraprec.run_config(json.dumps({"M_maks": 3}))
    cfg = {"command": "sketch-bounds", "output_dir": str(tmp_path), "bounds": {"n": [1e4], "m": [2]}}
    _, files = paraprec.run_config(json.dumps(cfg))
    assert any(f.endswith("bounds.csv") for f in files)
