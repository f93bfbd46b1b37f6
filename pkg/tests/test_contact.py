from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import toy
from elastobem.contact import (FrictionLaw, MultiplierField, UzawaConfig, coulomb_thresholds, kkt_check,
                               project_pr_C, uzawa, write_trace_csv)
from elastobem.errors import ConfigError, NonConvergenceError

NL = 3
JP, JT = np.arange(NL), np.arange(NL, 2 * NL)
vec = arrays(float, 2 * NL, elements=st.floats(-5, 5))
thr = arrays(float, NL, elements=st.floats(0, 3))


@given(vec, thr)
def test_projection_is_feasible_and_idempotent(w, f):
    p = project_pr_C(w, f, JP, JT)
    assert (p[JP] >= 0).all() and (np.abs(p[JT]) <= f).all()
    assert np.array_equal(project_pr_C(p, f, JP, JT), p)


@given(vec, vec, thr)
def test_projection_is_nonexpansive(a, b, f):
    pa, pb = project_pr_C(a, f, JP, JT), project_pr_C(b, f, JP, JT)
    assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


@given(vec, thr, vec)
def test_projection_variational_inequality(w, f, z):
    # (w - P w) . (z - P w) <= 0 for every feasible z
    p = project_pr_C(w, f, JP, JT)
    z = project_pr_C(z, f, JP, JT)
    assert np.dot(w - p, z - p) <= 1e-10


def test_projection_limits():
    w = np.array([-1.0, 2.0, 0.0, 4.0, -4.0, 0.5])
    assert np.array_equal(project_pr_C(w, 0.0, JP, JT), [0, 2, 0, 0, 0, 0])
    assert np.array_equal(project_pr_C(w, 1e6, JP, JT), [0, 2, 0, 4, -4, 0.5])
    with pytest.raises(ConfigError):
        project_pr_C(w, -1.0, JP, JT)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 5), st.integers(1, 9), st.integers(0, 2**31 - 1))
def test_history_convolution_skips_only_zero_multipliers(N, q, L, seed):
    from elastobem.contact import _toeplitz_apply
    rng = np.random.default_rng(seed)
    AT = rng.normal(size=(L, q, q))
    Lam = rng.normal(size=(N, q)) * (rng.random((N, q)) < 0.4)
    ref = np.zeros((N, q))
    for n in range(N):
        for j in range(min(n + 1, L)):
            ref[n] += Lam[n - j] @ AT[j]
    assert np.allclose(_toeplitz_apply(AT, Lam), ref, rtol=0, atol=1e-12)


def test_coulomb_thresholds_follow_normal_multiplier():
    L = np.array([[2.0, -1.0, 0.3, 0.4]])
    assert np.allclose(coulomb_thresholds(L, 0.5), [[1.0, 0.0]])
    assert np.allclose(coulomb_thresholds(MultiplierField(L, 2), 0.5), [[1.0, 0.0]])


def test_friction_law_validation():
    assert FrictionLaw("frictionless").variant == "none"
    for bad in (dict(variant="glue"), dict(variant="tresca", value=-1.0),
                dict(variant="coulomb", value=[0.1, 0.2]), dict(variant="coulomb", value=0.1,
                                                                 coulomb_timing="later")):
        with pytest.raises(ConfigError):
            FrictionLaw(**bad)
    for bad in ((0.0, 1e-4), (1.0, 0.0), (1.0, 1e-4, 0)):
        with pytest.raises(ConfigError):
            UzawaConfig(*bad)


@pytest.fixture(scope="module")
def toys():
    out = {}
    for form in ("symmetric", "nonsymmetric"):
        p = toy.toy_problem(form)
        w0, A = toy.affine_map(p)
        out[form] = (p, w0, A)
    return out


@pytest.mark.parametrize("form", ["symmetric", "nonsymmetric"])
@pytest.mark.parametrize("F", [1e-4, 1e-3, 3e-3])
def test_uzawa_matches_active_set_enumeration(toys, form, F):
    p, w0, A = toys[form]
    sols = toy.enumerate_tresca(w0, A, p.n_lam, F)
    assert len(sols) == 1
    res = uzawa(p, FrictionLaw.tresca(F), UzawaConfig(1.0 / np.linalg.norm(A, 2), 1e-13, 100000))
    assert np.abs(res.multipliers.Lambda.ravel() - sols[0][0]).max() <= 1e-8
    assert kkt_check(p, res, FrictionLaw.tresca(F), UzawaConfig(1.0, 1e-8)).ok


def test_toy_patterns_mix_contact_states(toys):
    p, w0, A = toys["symmetric"]
    (_, pn, pt), = toy.enumerate_tresca(w0, A, p.n_lam, 1e-3)
    assert set(pn) == {0, 1} and {0, 1, -1} <= set(pt)


def test_compliance_matches_full_solves(toys):
    p, w0, A = toys["nonsymmetric"]
    rng = np.random.default_rng(0)
    lam = rng.normal(size=(p.N, 2 * p.n_lam))
    w = p.residual_map(p.solve(lam))
    assert np.allclose(w.ravel(), w0 + A @ lam.ravel(), atol=1e-14)


def test_bilateral_uzawa_reaches_the_oracle_residual():
    p = toy.toy_problem("symmetric", kind="bilateral")
    w0, A = toy.affine_map(p)
    F = 1e-3
    sols = toy.enumerate_tresca(w0, A, p.n_lam, F)
    ws = [w0 + A @ s[0] for s in sols]
    assert max(np.abs(w - ws[0]).max() for w in ws) <= 1e-12
    res = uzawa(p, FrictionLaw.tresca(F), UzawaConfig(1.0 / np.linalg.norm(A, 2), 1e-13, 100000))
    lam = res.multipliers.Lambda.ravel()
    assert np.abs(w0 + A @ lam - ws[0]).max() <= 1e-8 * max(np.abs(ws[0]).max(), 1e-300) + 1e-14
    assert kkt_check(p, res, FrictionLaw.tresca(F), UzawaConfig(1.0, 1e-8)).ok


def test_frictionless_and_coulomb_on_toy(toys, tmp_path):
    p, w0, A = toys["symmetric"]
    cfg = UzawaConfig(1.0 / np.linalg.norm(A, 2), 1e-12, 100000)
    none = uzawa(p, FrictionLaw.frictionless(), cfg)
    assert not none.multipliers.tangential.any()
    assert kkt_check(p, none, FrictionLaw.frictionless(), cfg).ok
    for timing in ("same_sweep", "previous"):
        law = FrictionLaw.coulomb(0.3, timing)
        res = uzawa(p, law, cfg)
        assert kkt_check(p, res, law, cfg).ok
        assert (np.abs(res.multipliers.tangential) <= 0.3 * res.multipliers.normal + 1e-15).all()
    write_trace_csv(res.trace, tmp_path / "trace.csv")
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "iter,residual,penetration,min_normal,norm" and len(lines) == res.iterations + 1


def test_nonconvergence_is_reported(toys):
    p, _, _ = toys["symmetric"]
    with pytest.raises(NonConvergenceError) as err:
        uzawa(p, FrictionLaw.tresca(1e-3), UzawaConfig(1.0, 1e-14, 3))
    assert len(err.value.trace) == 3
    res = uzawa(p, FrictionLaw.tresca(1e-3), UzawaConfig(1.0, 1e-14, 3), raise_on_failure=False)
    assert res.iterations == 3
