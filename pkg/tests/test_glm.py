import math

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError
from scipy.optimize import minimize

from svyrsq.glm import (
    FAMILY_REGISTRY, Formula, SolverOptions, SplineSpec, fit, fit_null, fit_logistic, fit_logistic_null,
    fit_gaussian_mle, gaussian_loglik, logistic_loglik, logistic_score, spline_basis,
)
from svyrsq.utils import (
    Dataset, Family, PreconditionError, SchemaError, SeparationError, SingularSystemError,
    DegenerateResponseError,
)


def _random_logistic(rng, n, p):
    while True:
        X = rng.standard_normal((n, p))
        coef = rng.normal(scale=0.5, size=p + 1)
        y = (rng.random(n) < 1 / (1 + np.exp(-(coef[0] + X @ coef[1:])))).astype(float)
        if 5 <= y.sum() <= n - 5:
            return X, y


@pytest.fixture(scope="module")
def two_by_two():
    # x = 0: 3 cases, 7 controls; x = 1: 6 cases, 4 controls
    x = np.array([0] * 10 + [1] * 10, dtype=float)
    y = np.array([1] * 3 + [0] * 7 + [1] * 6 + [0] * 4, dtype=float)
    return Dataset(y=y, X=x)


@pytest.fixture(scope="module")
def weighted_logistic():
    rng = np.random.default_rng(7)
    X, y = _random_logistic(rng, 150, 2)
    return Dataset(y=y, X=X, weights=rng.uniform(0.5, 20.0, size=150))


def test_dataset_validation():
    data = Dataset(y=[0, 1, 1], X=[[1.0], [2.0], [3.0]])
    assert data.n == 3 and data.p == 1, "Dataset: shape should be n=3, p=1"
    assert data.weight_sum == 3.0, "Dataset: absent weights should be unit weights"
    assert data.coef_names == ("(Intercept)", "x1"), "Dataset: default predictor names should be x1..xp"
    with pytest.raises(PreconditionError):
        Dataset(y=[0, 1], weights=[1.0, -1.0])
    with pytest.raises(PreconditionError):
        Dataset(y=[0, 1], weights=[1.0, 0.0])
    with pytest.raises(PreconditionError):
        Dataset(y=[0, 1, 1], X=[[1.0], [2.0]])
    with pytest.raises(PreconditionError):
        Dataset(y=[0, np.nan])
    with pytest.raises(ValueError):
        data.y[0] = 5.0


def test_logistic_two_by_two_closed_form(two_by_two):
    result = fit_logistic(two_by_two)
    expected = [np.log(3 / 7), np.log(6 / 4) - np.log(3 / 7)]
    assert result.converged, "fit_logistic: 2x2 table should converge"
    assert np.allclose(result.coef, expected, atol=1e-8), "fit_logistic: 2x2 coefficients are log odds"
    assert result.names == ("(Intercept)", "x1"), "fit_logistic: coefficient names"
    assert result.null_loglik == pytest.approx(9 * np.log(9 / 20) + 11 * np.log(11 / 20), abs=1e-10), \
        "fit_logistic: null loglik is the Bernoulli loglik at the overall mean"


def test_logistic_weighted_two_by_two(two_by_two):
    # weight 3 on the x = 1 controls: weighted odds 6 / 12
    w = np.ones(20)
    w[16:] = 3.0
    result = fit_logistic(two_by_two.with_weights(w))
    assert np.allclose(result.coef, [np.log(3 / 7), np.log(6 / 12) - np.log(3 / 7)], atol=1e-8), \
        "fit_logistic: weights act as frequency weights"


def test_logistic_score_vanishes(weighted_logistic):
    result = fit_logistic(weighted_logistic)
    score = logistic_score(weighted_logistic, result.coef)
    assert result.converged, "fit_logistic: random weighted data should converge"
    assert np.max(np.abs(score)) / weighted_logistic.weight_sum < 1e-9, "fit_logistic: score is zero at the MLE"
    assert result.loglik == pytest.approx(logistic_loglik(weighted_logistic, result.coef), rel=1e-14)
    assert result.loglik >= result.null_loglik, "fit_logistic: fitted loglik dominates the null"


def test_logistic_weight_rescaling(weighted_logistic):
    base = fit_logistic(weighted_logistic)
    for c in (1e-3, 0.25, 7.3, 1e4):
        scaled = fit_logistic(weighted_logistic.scaled(c))
        assert np.allclose(scaled.coef, base.coef, atol=1e-8), f"fit_logistic: coefficients invariant to weights x {c}"
        assert scaled.loglik == pytest.approx(c * base.loglik, rel=1e-9), "fit_logistic: loglik scales with weights"


def _neg_loglik(b, x, y, w):
    eta = b[0] + b[1] * x
    return float(np.sum(w * (np.logaddexp(0.0, eta) - y * eta)))


def test_logistic_matches_grid_search_oracle():
    # rows that prevent separation whatever else is added
    pad_x, pad_y = np.array([-1.0, 0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0, 1.0])
    grid = np.linspace(-5, 5, 41)
    for k in range(50):
        rng = np.random.default_rng(1000 + k)
        extra = rng.integers(0, 5)
        x = np.concatenate([pad_x, rng.normal(size=extra)])
        y = np.concatenate([pad_y, rng.integers(0, 2, size=extra).astype(float)])
        w = rng.uniform(0.5, 2.0, size=x.shape[0])

        start = min(((b0, b1) for b0 in grid for b1 in grid), key=lambda b: _neg_loglik(b, x, y, w))
        oracle = minimize(_neg_loglik, np.array(start), args=(x, y, w), method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000})
        result = fit_logistic(Dataset(y=y, X=x, weights=w))
        assert result.converged, f"fit_logistic: tiny instance {k} should converge"
        assert np.allclose(result.coef, oracle.x, atol=1e-3), f"fit_logistic: coefficients match oracle ({k})"
        assert result.loglik == pytest.approx(-oracle.fun, abs=1e-6), f"fit_logistic: loglik matches oracle ({k})"
        assert result.loglik >= -oracle.fun - 1e-12, f"fit_logistic: Newton is never worse than the oracle ({k})"


def test_logistic_separation():
    data = Dataset(y=[0, 0, 1, 1], X=[0.0, 1.0, 2.0, 3.0])
    with pytest.raises(SeparationError):
        fit_logistic(data)


def test_logistic_quasi_separation():
    # x = 1 holds cases only; x = 0 holds both outcomes
    data = Dataset(y=[0, 0, 0, 0, 1, 1, 1] + [1] * 5, X=[0.0] * 7 + [1.0] * 5)
    with pytest.raises(SeparationError):
        fit_logistic(data)
    with pytest.raises(SeparationError):
        fit_logistic(data.scaled(440.0))


def test_logistic_loglik_values():
    assert logistic_loglik(Dataset(y=[1]), [0.0]) == pytest.approx(np.log(0.5), rel=1e-15), \
        "logistic_loglik: eta = 0 gives log 0.5"
    data = Dataset(y=[0, 1, 0, 1, 1, 0], X=[-2.0, -1.0, 0.0, 1.0, 2.0, 3.0], weights=[1, 2.5, 0.5, 3, 1, 4])
    hand = 0.0
    for x, y, w in zip(data.X[:, 0], data.y, data.weights):
        eta = -1.0 + 0.5 * x
        hand += w * (-math.log1p(math.exp(-eta)) if y == 1 else -math.log1p(math.exp(eta)))
    assert logistic_loglik(data, [-1.0, 0.5]) == pytest.approx(hand, rel=1e-13), "logistic_loglik: scalar hand sum"
    assert hand == pytest.approx(-12.048778119579655, rel=1e-12)


def test_logistic_score_matches_finite_differences():
    h = 1e-6
    for k in range(20):
        rng = np.random.default_rng(500 + k)
        n, p = rng.integers(5, 21), rng.integers(1, 4)
        X, y = rng.standard_normal((n, p)), rng.integers(0, 2, size=n).astype(float)
        data = Dataset(y=y, X=X, weights=rng.uniform(0.1, 100.0, size=n))
        coef = rng.normal(scale=0.7, size=p + 1)
        numeric = np.array([
            (logistic_loglik(data, coef + h * e) - logistic_loglik(data, coef - h * e)) / (2 * h)
            for e in np.eye(p + 1)
        ])
        assert np.max(np.abs(logistic_score(data, coef) - numeric)) < 1e-5, \
            f"logistic_score: gradient of logistic_loglik ({k})"


def test_weights_act_as_replication(weighted_logistic):
    rng = np.random.default_rng(19)
    counts = rng.integers(1, 5, size=weighted_logistic.n)
    weighted = weighted_logistic.with_weights(counts.astype(float))
    copies = weighted_logistic.take(np.repeat(np.arange(weighted_logistic.n), counts)).unweighted()
    coef = np.array([0.3, -0.2, 0.4])
    assert logistic_loglik(weighted, coef) == pytest.approx(logistic_loglik(copies, coef), abs=1e-10), \
        "logistic_loglik: integer weight equals repeated rows"
    assert np.allclose(logistic_score(weighted, coef), logistic_score(copies, coef), atol=1e-10, rtol=0)
    a, b = fit_logistic(weighted), fit_logistic(copies)
    assert np.allclose(a.coef, b.coef, atol=1e-10, rtol=0), "fit_logistic: integer weight equals repeated rows"
    assert a.loglik == pytest.approx(b.loglik, abs=1e-10)


def test_fit_null_values():
    logistic = fit_null(Dataset(y=[0, 1, 1], weights=[2.0, 1.0, 1.0]))
    assert logistic.coef[0] == pytest.approx(0.0, abs=1e-15), "fit_null: weighted mean 0.5 gives intercept 0"
    assert logistic.loglik == logistic.null_loglik == pytest.approx(4 * np.log(0.5))
    gaussian = fit_null(Dataset(y=[1.0, 2.0, 3.0], X=[1.0, 2.0, 3.0]), Family.gaussian_mle)
    assert gaussian.coef[0] == pytest.approx(2.0) and gaussian.scale == pytest.approx(2 / 3), \
        "fit_null: Gaussian mean and MLE variance"
    assert gaussian.coef.shape == (1,), "fit_null: intercept only"


def test_logistic_degenerate_and_invalid_response():
    with pytest.raises(DegenerateResponseError):
        fit_logistic(Dataset(y=[0, 0, 0], X=[1.0, 2.0, 3.0]))
    with pytest.raises(DegenerateResponseError):
        fit_logistic_null(Dataset(y=[1, 1]))
    with pytest.raises(PreconditionError):
        fit_logistic(Dataset(y=[0, 1, 2], X=[1.0, 2.0, 3.0]))


def test_logistic_rank_deficient():
    rng = np.random.default_rng(3)
    x = rng.normal(size=30)
    y = np.array([0, 1] * 15, dtype=float)
    with pytest.raises(SingularSystemError):
        fit_logistic(Dataset(y=y, X=np.column_stack([x, 2 * x])))


def test_logistic_unconverged_is_flagged(weighted_logistic):
    result = fit_logistic(weighted_logistic, SolverOptions(max_iter=1))
    assert not result.converged, "fit_logistic: one iteration is not enough to converge"
    assert result.iterations == 1, "fit_logistic: iteration budget respected"
    assert "NOT converged" in str(result), "FitResult: text shows the convergence status"


def test_gaussian_matches_least_squares():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((60, 2))
    y = 1.0 + X @ [2.0, -0.5] + rng.normal(size=60)
    w = rng.uniform(1.0, 5.0, size=60)
    result = fit_gaussian_mle(Dataset(y=y, X=X, weights=w))

    A = np.column_stack([np.ones(60), X])
    sw = np.sqrt(w)
    expected = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)[0]
    rss = float(np.sum(w * (y - A @ expected) ** 2))
    assert np.allclose(result.coef, expected, atol=1e-10), "fit_gaussian_mle: coefficients are weighted least squares"
    assert result.scale == pytest.approx(rss / w.sum(), rel=1e-10), "fit_gaussian_mle: variance divisor is sum of weights"
    assert result.loglik == pytest.approx(gaussian_loglik(Dataset(y=y, X=X, weights=w), expected, rss / w.sum()),
                                          rel=1e-12)


def test_gaussian_failures():
    x = np.arange(6, dtype=float)
    with pytest.raises(SingularSystemError):
        fit_gaussian_mle(Dataset(y=1.0 + 2.0 * x, X=x))
    with pytest.raises(SingularSystemError):
        fit_gaussian_mle(Dataset(y=[1.0, 2.0], X=[0.0, 1.0]))
    with pytest.raises(DegenerateResponseError):
        fit_gaussian_mle(Dataset(y=np.full(6, 3.0), X=x))


def test_family_registry_dispatch(two_by_two):
    assert set(FAMILY_REGISTRY) == {Family.logistic, Family.gaussian_mle}, "FAMILY_REGISTRY: both families registered"
    assert fit(two_by_two).family == Family.logistic, "fit: defaults to logistic"
    assert fit(two_by_two, "gaussian_mle").family == Family.gaussian_mle, "fit: dispatches by family name"
    null = fit_null(two_by_two)
    assert null.coef.shape == (1,) and null.coef[0] == pytest.approx(np.log(9 / 11)), "fit_null: logit of the mean"


def test_spline_basis():
    basis = spline_basis([40.0, 55.0, 70.0], SplineSpec(knots=[50, 65]))
    assert np.array_equal(basis, [[40, 0, 0], [55, 5, 0], [70, 20, 5]]), "spline_basis: hinge columns"
    assert SplineSpec(knots=[50, 65]).column_names("age") == ["age", "age>50", "age>65"]
    with pytest.raises(ValidationError):
        SplineSpec(knots=[65, 50])
    with pytest.raises(ValidationError):
        SplineSpec(knots=[1.0, float("inf")])


@pytest.fixture(scope="module")
def formula_frame():
    return pd.DataFrame({
        "y": [0, 1, 0, 1, 1],
        "a": [1.0, 2.0, 3.0, 4.0, 5.0],
        "g": ["b", "a", "c", "b", "a"],
        "z": [0.5, 1.5, 2.5, 3.0, 0.0],
        "u": [2.0, 0.0, 1.0, 1.0, 3.0],
    })


def test_formula_design(formula_frame):
    formula = Formula.parse("y ~ a + C(g) + spline(z; 1,2) + a:u")
    data = formula.build(formula_frame)
    column = {name: data.X[:, j] for j, name in enumerate(data.names)}
    assert set(data.names) == {"a", "C(g)[T.b]", "C(g)[T.c]", "z", "z>1", "z>2", "a:u"}, \
        "Formula: expanded column names"
    assert data.names.index("z") + 1 == data.names.index("z>1"), "Formula: spline columns stay together"
    assert np.array_equal(column["C(g)[T.b]"], [1, 0, 0, 1, 0]), "Formula: first sorted level is the reference"
    assert np.array_equal(column["C(g)[T.c]"], [0, 0, 1, 0, 0]), "Formula: treatment dummy for level c"
    assert np.allclose(column["z>1"], [0, 0.5, 1.5, 2.0, 0]), "Formula: spline hinge at knot 1"
    assert np.array_equal(column["a:u"], [2, 0, 3, 4, 15]), "Formula: product term"
    assert np.array_equal(data.y, [0, 1, 0, 1, 1])
    assert formula.columns == ["y", "a", "g", "z", "u"], "Formula: referenced columns in order"
    assert str(formula) == "y ~ a + C(g) + spline(z; 1,2) + a:u"
    assert Formula.parse("y ~ 1").build(formula_frame).p == 0, "Formula: intercept-only model"


def test_formula_spline_call_form(formula_frame):
    a = Formula.parse("y ~ spline(z; 1,2)").build(formula_frame)
    b = Formula.parse("y ~ spline(z, (1, 2))").build(formula_frame)
    assert a.names == b.names == ("z", "z>1", "z>2"), "Formula: both spline spellings"
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.X, spline_basis(formula_frame["z"], SplineSpec(knots=[1, 2])))


@pytest.mark.parametrize("text", ["y x", "y ~ a +", "y ~ spline(z; 2,1)", "y ~ (a", "~ a", "y ~ a - 1", "y ~ 0 + a"])
def test_formula_parse_errors(text):
    with pytest.raises(SchemaError):
        Formula.parse(text)


@pytest.mark.parametrize("text", ["y ~ missing", "y ~ f(a)", "g ~ a"])
def test_formula_build_errors(formula_frame, text):
    with pytest.raises(SchemaError):
        Formula.parse(text).build(formula_frame)


def test_formula_missing_values_are_rejected(formula_frame):
    frame = formula_frame.assign(a=[1.0, np.nan, 3.0, 4.0, 5.0])
    with pytest.raises(SchemaError):
        Formula.parse("y ~ a").build(frame)
