import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gpgw import core
from gpgw.core import GpgwParams
from gpgw.family import CATALOG, PARAM_NAMES, Distribution, FamilyError, Kind, make, param_count, spec_for
from gpgw.inference import log_likelihood
from gpgw.numerics import gradient_fd, integrate

# pinned parameter values of each sub-model
PINNED = {
    "GPGW": {},
    "PGW": {"b": 1.0},
    "NH": {"alpha": 1.0, "b": 1.0},
    "GNH": {"alpha": 1.0},
    "W": {"theta": 1.0, "b": 1.0},
    "R": {"alpha": 2.0, "theta": 1.0, "b": 1.0},
    "E": {"alpha": 1.0, "theta": 1.0, "b": 1.0},
}
EXPONENTIATED = {"EPGW": "PGW", "EW": "W", "ENH": "NH", "EE": "E"}


def random_member(kind, rng):
    spec = spec_for(kind)
    values = np.exp(rng.uniform(np.log(0.3), np.log(3.0), spec.n_free))
    return make(kind, dict(zip(spec.free_params, values)))


class TestCatalog:

    def test_every_kind_present(self):
        assert set(CATALOG) == set(Kind)

    @pytest.mark.parametrize("kind", list(PINNED))
    def test_fixed_values_match_table(self, kind):
        assert dict(spec_for(kind).fixed_params) == PINNED[kind]

    @pytest.mark.parametrize("kind, base", list(EXPONENTIATED.items()))
    def test_exponentiated_wraps_base(self, kind, base):
        spec = spec_for(kind)
        assert spec.exponentiated
        assert dict(spec.fixed_params) == PINNED[base]
        assert spec.free_params[-1] == "beta"

    def test_free_parameters_follow_canonical_order(self):
        for spec in CATALOG.values():
            order = [PARAM_NAMES.index(n) for n in spec.free_params]
            assert order == sorted(order)

    @pytest.mark.parametrize("kind, k", [("GPGW", 4), ("EPGW", 4), ("PGW", 3), ("EW", 3), ("ENH", 3),
                                         ("GNH", 3), ("W", 2), ("NH", 2), ("EE", 2), ("E", 1), ("R", 1)])
    def test_param_count(self, kind, k):
        assert param_count(kind) == k
        assert param_count(spec_for(kind)) == k

    def test_lookup_is_case_insensitive(self):
        assert spec_for("gpgw") is CATALOG[Kind.GPGW]
        assert spec_for(Kind.EW) is CATALOG[Kind.EW]

    def test_unknown_name_lists_valid(self):
        with pytest.raises(FamilyError, match="GPGW.*EE"):
            spec_for("BOGUS")


class TestMake:

    def test_weibull_is_pinned_gpgw(self):
        w = make("W", {"lambda": 1.0, "alpha": 2.0})
        assert w.base == GpgwParams(2.0, 1.0, 1.0, 1.0)
        x = np.linspace(0.1, 3.0, 20)
        np.testing.assert_array_equal(w.pdf(x), core.pdf(GpgwParams(2, 1, 1, 1), x))

    def test_exponential_cdf(self):
        e = make("E", {"lambda": 0.0219})
        x = np.array([0.5, 10.0, 86.0])
        np.testing.assert_allclose(e.cdf(x), 1.0 - np.exp(-0.0219 * x), rtol=1e-13)

    def test_lam_alias(self):
        assert make("E", {"lam": 2.0}).values["lambda"] == 2.0

    def test_missing_parameter_named(self):
        with pytest.raises(FamilyError, match="theta"):
            make("PGW", {"alpha": 1.0, "lambda": 1.0})

    def test_extra_parameter_named(self):
        with pytest.raises(FamilyError, match="beta"):
            make("W", {"alpha": 1.0, "lambda": 1.0, "beta": 2.0})

    @pytest.mark.parametrize("bad", [0.0, -2.0, math.inf, math.nan, "abc"])
    def test_invalid_value_named(self, bad):
        with pytest.raises(FamilyError, match="lambda"):
            make("E", {"lambda": bad})

    def test_immutable(self):
        d = make("E", {"lambda": 1.0})
        with pytest.raises(TypeError):
            d.values["lambda"] = 3.0

    def test_str(self):
        assert str(make("EE", {"lambda": 0.5, "beta": 2.0})) == "EE(lambda=0.5, beta=2)"


class TestExponentiated:

    def test_unit_beta_collapses_exponential(self, rng):
        x = rng.uniform(0.01, 20.0, 50)
        ee = make("EE", {"lambda": 0.3, "beta": 1.0})
        e = make("E", {"lambda": 0.3})
        np.testing.assert_allclose(ee.pdf(x), e.pdf(x), rtol=1e-13)

    def test_unit_beta_collapses_nh(self, rng):
        x = rng.uniform(0.01, 20.0, 50)
        enh = make("ENH", {"lambda": 0.4, "theta": 2.5, "beta": 1.0})
        nh = make("NH", {"lambda": 0.4, "theta": 2.5})
        np.testing.assert_allclose(enh.pdf(x), nh.pdf(x), rtol=1e-13)
        np.testing.assert_allclose(enh.cdf(x), nh.cdf(x), rtol=1e-13)

    def test_ew_at_published_device_estimates(self, devices):
        ew = make("EW", {"lambda": 0.0029, "alpha": 1.3965, "beta": 0.5356})
        assert -log_likelihood(ew, devices) == pytest.approx(237.311, abs=0.5)

    def test_cdf_is_power_of_base(self, rng):
        d = make("EPGW", {"alpha": 1.3, "lambda": 0.7, "theta": 2.0, "beta": 0.4})
        x = rng.uniform(0.01, 4.0, 30)
        base = core.cdf(d.base, x)
        np.testing.assert_allclose(d.cdf(x), base ** 0.4, rtol=1e-13)
        # the reference 1 - F^beta itself cancels near F = 1, hence an absolute tolerance
        np.testing.assert_allclose(d.sf(x), 1.0 - base ** 0.4, rtol=0.0, atol=1e-15)

    def test_quantile_roundtrip(self):
        d = make("EPGW", {"alpha": 0.6, "lambda": 2.0, "theta": 3.0, "beta": 2.7})
        q = np.linspace(0.01, 0.99, 99)
        assert np.max(np.abs(d.cdf(d.quantile(q)) - q)) <= 1e-10

    @pytest.mark.parametrize("kind", list(EXPONENTIATED))
    def test_pdf_is_derivative_of_cdf(self, kind, rng):
        d = random_member(kind, rng)
        for x in d.quantile(np.array([0.1, 0.4, 0.8])):
            h = 1e-5 * x
            fd = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h)
            np.testing.assert_allclose(d.pdf(x), fd, rtol=1e-8)

    def test_hazard_is_pdf_over_survival(self, rng):
        d = random_member("EW", rng)
        x = d.quantile(np.linspace(0.05, 0.95, 10))
        np.testing.assert_allclose(d.hazard(x), d.pdf(x) / d.sf(x), rtol=1e-11)

    def test_sampling_matches_quantile(self):
        d = make("EE", {"lambda": 0.5, "beta": 3.0})
        u = np.random.default_rng(5).random(10)
        np.testing.assert_array_equal(d.sample(10, np.random.default_rng(5)), d.quantile(u))


class TestConsistency:

    @pytest.mark.parametrize("kind", [k.value for k in Kind])
    def test_density_normalizes(self, kind, rng):
        for _ in range(3):
            d = random_member(kind, rng)
            res = integrate(lambda x: d.pdf(x), 0.0, rel_tol=1e-11)
            assert abs(res.value - 1.0) <= 1e-8, str(d)

    @pytest.mark.parametrize("kind", [k for k in PINNED if k != "GPGW"])
    def test_submodel_equals_pinned_gpgw(self, kind, rng):
        d = random_member(kind, rng)
        full = {**PINNED[kind], **d.values}
        g = make("GPGW", full)
        x = rng.uniform(0.01, 5.0, 100)
        q = rng.uniform(0.0, 0.99, 100)
        np.testing.assert_allclose(d.pdf(x), g.pdf(x), rtol=1e-12)
        np.testing.assert_allclose(d.cdf(x), g.cdf(x), rtol=1e-12)
        np.testing.assert_allclose(d.quantile(q), g.quantile(q), rtol=1e-12)

    def test_gnh_leaves_b_free(self):
        assert spec_for("GNH").free_params == ("lambda", "theta", "b")

    @given(lam=st.floats(0.1, 5.0), beta=st.floats(0.1, 5.0), x=st.floats(0.01, 10.0))
    def test_log_density_consistent(self, lam, beta, x):
        d = make("EE", {"lambda": lam, "beta": beta})
        np.testing.assert_allclose(d.logpdf(x), math.log(beta * lam) - lam * x
                                   + (beta - 1.0) * math.log(-math.expm1(-lam * x)), rtol=1e-11, atol=1e-12)

    def test_gradient_of_cdf_in_beta(self):
        # d/d beta F^beta = F^beta log F
        x = 1.7
        f = lambda v: make("EW", {"alpha": 1.2, "lambda": 0.8, "beta": v[0]}).cdf(x)
        base = core.cdf(GpgwParams(1.2, 0.8, 1.0, 1.0), x)
        np.testing.assert_allclose(gradient_fd(f, [2.0])[0], base ** 2 * math.log(base), rtol=1e-7)


def test_distribution_is_a_value_object():
    a = make("W", {"alpha": 2.0, "lambda": 1.0})
    b = make("W", {"lambda": 1.0, "alpha": 2.0})
    assert isinstance(a, Distribution)
    assert a.base == b.base
    assert a.beta is None
