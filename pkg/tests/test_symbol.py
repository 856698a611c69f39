import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from saddlemg.experiments import elasticity_symbols, projector
from saddlemg.saddle import hatC_symbol
from saddlemg.symbol import (
    SymbolZero,
    TrigPoly,
    Unbounded,
    enforce_zero,
    galerkin_coarse_symbol,
    limit_estimate,
    locate_zero,
    psi_coarsen,
    ratio_sup,
    sup_norm,
    zero_order,
)

from conftest import dense_circulant

f_A, f_B, f_C = elasticity_symbols(0.5)
p_full = projector("full")

coeff = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def polys(draw, max_degree=8, real=False):
    z = draw(st.integers(0, max_degree))
    re = draw(st.lists(coeff, min_size=2 * z + 1, max_size=2 * z + 1))
    if real:
        half = re[: z + 1]
        d = {0: half[0]}
        for j in range(1, z + 1):
            d[j] = d[-j] = half[j]
        return TrigPoly.from_dict(d)
    im = draw(st.lists(coeff, min_size=2 * z + 1, max_size=2 * z + 1))
    return TrigPoly(np.array(re) + 1j * np.array(im))


# evaluation -------------------------------------------------------------

def test_eval_fA_zero_at_origin():
    assert f_A(0.0) == pytest.approx(0.0, abs=1e-15)


def test_eval_fA_at_pi():
    # ‖f_A‖ = 4 for the elasticity problem
    assert f_A(np.pi) == pytest.approx(4.0, abs=1e-14)


def test_eval_fB_quarter_turn():
    direct = 1 - np.exp(1j * np.pi / 2)
    assert f_B(np.pi / 2) == pytest.approx(direct, abs=1e-15)
    assert f_B(np.pi / 2) == pytest.approx(1 - 1j, abs=1e-15)


@given(polys(), st.floats(-10, 10))
def test_eval_matches_coefficient_sum(p, theta):
    direct = sum(p.coefficient(j) * np.exp(1j * j * theta) for j in range(-p.degree, p.degree + 1))
    assert abs(complex(p(theta)) - direct) <= 1e-11 * (1 + np.sum(np.abs(p.coeffs)))


# arithmetic -------------------------------------------------------------

def test_modulus_squared_fB_is_fA():
    assert f_B.modulus_squared().allclose(f_A, atol=1e-15)


def test_mul_by_one():
    assert (p_full * TrigPoly.constant(1.0)).allclose(p_full, atol=0)


def test_modulus_squared_full_projector():
    # 2(1 + cos)^2 = 3 + 4cos + cos2
    expected = TrigPoly.cos_series(3.0, 4.0, 1.0)
    assert p_full.modulus_squared().allclose(expected, atol=1e-14)


@given(polys(4), polys(4), st.floats(0, 2 * np.pi))
def test_product_is_pointwise(p, q, theta):
    lhs = complex((p * q)(theta))
    rhs = complex(p(theta)) * complex(q(theta))
    scale = (1 + np.sum(np.abs(p.coeffs))) * (1 + np.sum(np.abs(q.coeffs)))
    assert abs(lhs - rhs) <= 1e-11 * scale


@given(polys(6))
def test_modulus_squared_real_nonnegative(p):
    g = p.modulus_squared()
    theta = np.linspace(0, 2 * np.pi, 257)
    scale = np.sum(np.abs(p.coeffs)) ** 2 + 1
    assert np.all(np.asarray(g(theta)).real >= -1e-11 * scale)
    assert g.real_symmetric or g.is_zero


@given(polys(5))
def test_shift_pi(p):
    theta = np.linspace(0, 2 * np.pi, 33)
    assert np.allclose(p.shift_pi()(theta), p(theta + np.pi), atol=1e-11 * (1 + np.sum(np.abs(p.coeffs))))


@given(polys(5))
def test_text_roundtrip(p):
    assert TrigPoly.from_text(p.to_text()).allclose(p, atol=0)


# ψ coarsening --------------------------------------------------------------

def test_psi_cos_vanishes():
    assert psi_coarsen(TrigPoly.cos_series(0.0, 1.0)).is_zero


def test_psi_elasticity_fixed_point():
    g = p_full.modulus_squared() * f_A
    assert psi_coarsen(g).allclose(f_A, atol=1e-14)


def test_psi_constant():
    assert psi_coarsen(TrigPoly.constant(2.5)).allclose(TrigPoly.constant(2.5), atol=0)


@given(polys(8))
def test_psi_coefficient_rule_matches_pointwise(g):
    theta = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
    pointwise = 0.5 * (g(theta / 2) + g(theta / 2 + np.pi))
    got = psi_coarsen(g)(theta)
    scale = 1 + np.sum(np.abs(g.coeffs))
    assert np.max(np.abs(got - pointwise)) <= 1e-12 * scale


@given(polys(8))
def test_psi_degree_bound(g):
    # deg ψ(g) ≤ ⌊deg g / 2⌋
    assert psi_coarsen(g).degree <= g.degree // 2


def test_galerkin_trivial_projector_is_psi():
    g = galerkin_coarse_symbol(TrigPoly.constant(1.0), f_C, TrigPoly.constant(1.0))
    assert g.allclose(psi_coarsen(f_C), atol=0)


def test_galerkin_elasticity_A():
    assert galerkin_coarse_symbol(p_full, f_A, p_full).allclose(f_A, atol=1e-14)


def _dense_galerkin(p: TrigPoly, f: TrigPoly, q: TrigPoly, n: int) -> np.ndarray:
    Cp = dense_circulant(p.as_dict(), n)
    Cq = dense_circulant(q.as_dict(), n)
    Cf = dense_circulant(f.as_dict(), n)
    K = np.zeros((n // 2, n))
    K[np.arange(n // 2), 2 * np.arange(n // 2)] = 1.0
    return (Cp @ K.T).conj().T @ Cf @ (Cq @ K.T)


def test_galerkin_hatC_dense_oracle_n16():
    f_hatC = hatC_symbol(f_A, f_B, f_C, 0.5)
    coarse = galerkin_coarse_symbol(p_full, f_hatC, p_full)
    dense = _dense_galerkin(p_full, f_hatC, p_full, 16)
    assert np.max(np.abs(dense - dense_circulant(coarse.as_dict(), 8))) <= 1e-10


@pytest.mark.parametrize("n", [8, 16, 32])
@given(p=polys(2), f=polys(3), q=polys(2))
def test_galerkin_dense_oracle(n, p, f, q):
    coarse = galerkin_coarse_symbol(p, f, q)
    dense = _dense_galerkin(p, f, q, n)
    scale = np.sum(np.abs(p.coeffs)) * np.sum(np.abs(f.coeffs)) * np.sum(np.abs(q.coeffs)) + 1
    assert np.max(np.abs(dense - dense_circulant(coarse.as_dict(), n // 2))) <= 1e-10 * scale


# zeros ---------------------------------------------------------------------

def test_locate_zero_elasticity():
    z = locate_zero(f_A)
    assert z is not None
    assert abs(z.location) < 1e-12
    assert z.is_grid_point(512)


def test_locate_zero_positive_symbol():
    assert locate_zero(TrigPoly.cos_series(3.0, 1.0)) is None


def test_zero_order_is_two_on_coarse_levels():
    g = f_A
    for _ in range(4):
        g = galerkin_coarse_symbol(p_full, g, p_full)
        assert zero_order(g, 0.0) == pytest.approx(2.0, abs=0.05)
        assert abs(g(0.0)) <= 1e-12 * sup_norm(g)


def test_zero_order_generic_coarse_level():
    # a non-fixed-point symbol with a double zero keeps it
    f = TrigPoly.cos_series(3.0, -4.0, 1.0)  # 2(1-cos)^2, order 4
    g = galerkin_coarse_symbol(p_full, f, p_full)
    assert zero_order(f) == pytest.approx(4.0, abs=0.05)
    assert zero_order(g) == pytest.approx(4.0, abs=0.05)


def test_enforce_zero_removes_residue():
    noisy = f_A + TrigPoly.constant(3e-14)
    clean = enforce_zero(noisy, 0.0)
    assert abs(clean(0.0)) <= 1e-16
    assert clean.allclose(f_A, atol=1e-13)


def test_enforce_zero_leaves_genuine_values():
    f = TrigPoly.cos_series(3.0, 1.0)
    assert enforce_zero(f, 0.0) is f


# sup norms and ratios -------------------------------------------------------

def test_sup_norm_fA():
    assert sup_norm(f_A) == pytest.approx(4.0, abs=1e-14)


def test_sup_norm_constant():
    assert sup_norm(TrigPoly.constant(-2.5)) == pytest.approx(2.5, abs=0)


def test_ratio_sup_schur_symbol():
    # f_C + |f_B|²/f_A at ρ = 1/2 has sup 2
    num = f_C * f_A + f_B.modulus_squared()
    assert ratio_sup(num, f_A, [SymbolZero(0.0)]) == pytest.approx(2.0, abs=1e-12)


def test_ratio_sup_projector_over_fA():
    num = p_full.modulus_squared().shift_pi()
    assert ratio_sup(num, f_A, [SymbolZero(0.0)]) == pytest.approx(2.0, abs=1e-12)


def test_ratio_sup_identity():
    f = TrigPoly.cos_series(3.0, 1.0)
    assert ratio_sup(f, f) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("rho", [0.5, 0.05, 0.005])
def test_limit_one_over_hatC(rho):
    a, b, c = elasticity_symbols(rho)
    f_hatC = hatC_symbol(a, b, c, 0.5)
    est = limit_estimate(TrigPoly.constant(1.0), f_hatC, 0.0)
    assert est.value == pytest.approx(1 / (2 * rho), rel=1e-12)
    assert est.stabilized and not est.diverging


def test_ratio_sup_unbounded():
    with pytest.raises(Unbounded) as info:
        ratio_sup(TrigPoly.constant(1.0), f_A, [SymbolZero(0.0)])
    assert info.value.witness == pytest.approx(0.0)


def test_ratio_sup_undeclared_zero():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with pytest.raises(Unbounded):
            ratio_sup(TrigPoly.constant(1.0), f_A)


def test_ratio_refine_finds_off_grid_max():
    # 2 + cos(θ + φ) has its minimum off the sampling grid
    f = TrigPoly.from_dict({0: 2.0, 1: 0.5 * np.exp(1j * 0.0123), -1: 0.5 * np.exp(-1j * 0.0123)})
    exact = 1.0  # min of 2 + cos(θ+φ) is 1
    coarse = ratio_sup(TrigPoly.constant(1.0), f, step=0.1)
    fine = ratio_sup(TrigPoly.constant(1.0), f, step=0.1, refine=True)
    assert fine == pytest.approx(exact, abs=1e-10)
    assert coarse <= fine


def test_cos_series_constructor():
    p = TrigPoly.cos_series(2.0, -2.0)
    assert p.allclose(TrigPoly.from_dict({0: 2, 1: -1, -1: -1}), atol=0)
    assert p.real_symmetric and p.is_even
    assert math.isclose(p.a0.real, 2.0)
