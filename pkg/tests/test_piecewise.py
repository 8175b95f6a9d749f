"""Piecewise-constant exponential model checks."""

import math

import numpy as np
import pytest
from scipy.optimize import minimize

from commitgate.errors import DataError
from commitgate.survival.piecewise import fit_piecewise_exponential, split_episodes


def simulate(seed, n, a_levels, cuts, beta):
    """Draw event times from the piecewise hazard by unit-exponential inversion."""
    rng = np.random.default_rng(seed)
    bounds = [0.0] + list(cuts)
    start, stop, y, x = [], [], [], []
    for _ in range(n):
        xv = float(rng.normal())
        target = float(rng.exponential())
        acc, t_event = 0.0, None
        for k in range(len(cuts)):
            lam = math.exp(a_levels[k] + beta * xv)
            segment = (bounds[k + 1] - bounds[k]) * lam
            if acc + segment >= target:
                t_event = bounds[k] + (target - acc) / lam
                break
            acc += segment
        start.append(0.0)
        x.append(xv)
        if t_event is None:
            stop.append(cuts[-1])
            y.append(0.0)
        else:
            stop.append(t_event)
            y.append(1.0)
    return np.array(start), np.array(stop), np.array(y), np.array(x)


class TestSplitEpisodes:
    def test_row_splits_at_cut_boundaries(self):
        # (0, 2.5] against cuts [1, 2, 3]: full first two intervals plus a
        # half interval carrying the event; (1.5, 3] starts mid-interval
        exposure, event, interval, x = split_episodes(
            [0.0, 1.5], [2.5, 3.0], [1.0, 0.0], [[2.0], [7.0]], [1.0, 2.0, 3.0]
        )

        assert exposure.tolist() == [1.0, 1.0, 0.5, 0.5, 1.0]
        assert event.tolist() == [0.0, 0.0, 1.0, 0.0, 0.0]
        assert interval.tolist() == [0, 1, 2, 1, 2]
        assert x.tolist() == [[2.0], [2.0], [2.0], [7.0], [7.0]]

    def test_event_attaches_only_to_the_final_episode(self):
        _, event, _, _ = split_episodes([0.0], [3.0], [1.0], [[1.0]], [1.0, 2.0, 3.0])
        assert event.tolist() == [0.0, 0.0, 1.0]

    def test_cut_validation(self):
        args = ([0.0], [1.0], [1.0], [[1.0]])
        with pytest.raises(DataError, match="positive and strictly increasing"):
            split_episodes(*args, [0.0, 1.0])
        with pytest.raises(DataError, match="positive and strictly increasing"):
            split_episodes(*args, [2.0, 1.0])
        with pytest.raises(DataError, match="positive and strictly increasing"):
            split_episodes(*args, [])

    def test_cuts_must_cover_the_data(self):
        with pytest.raises(DataError, match="cover"):
            split_episodes([0.0], [5.0], [1.0], [[1.0]], [1.0, 2.0])


class TestFitNoCovariates:
    def test_single_interval_closed_form(self):
        # 2 events over 40 subject-intervals: a = log(2/40), se = 1/sqrt(2)
        fit = fit_piecewise_exponential(
            [0.0] * 4, [10.0] * 4, [1.0, 1.0, 0.0, 0.0], cuts=[10.0]
        )

        assert fit.converged
        assert fit.iterations <= 2
        assert fit.interval_log_hazards[0] == pytest.approx(math.log(0.05), abs=1e-12)
        assert fit.se_log_hazards[0] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
        assert fit.beta == ()
        assert fit.n_episodes == 4
        assert fit.n_events == 2
        assert fit.cuts == (10.0,)

    def test_two_intervals_are_independent_rates(self):
        # interval k: a_k = log(events_k / exposure_k)
        start = [0.0] * 6
        stop = [1.0, 2.0, 2.0, 2.0, 0.5, 1.5]
        y = [1.0, 1.0, 0.0, 0.0, 1.0, 1.0]
        fit = fit_piecewise_exponential(start, stop, y, cuts=[1.0, 2.0])

        exposure, event, interval, _ = split_episodes(
            start, stop, y, np.empty((6, 0)), [1.0, 2.0]
        )
        for k in range(2):
            rate = event[interval == k].sum() / exposure[interval == k].sum()
            assert fit.interval_log_hazards[k] == pytest.approx(math.log(rate), abs=1e-9)

    def test_zero_exposure_interval_rejected(self):
        with pytest.raises(DataError, match=r"interval 2 \(1\.0, 2\.0\] has zero exposure"):
            fit_piecewise_exponential([0.0, 0.0], [1.0, 0.5], [1.0, 0.0], cuts=[1.0, 2.0])

    def test_no_events_rejected(self):
        with pytest.raises(DataError, match="no events"):
            fit_piecewise_exponential([0.0], [1.0], [0.0], cuts=[1.0])


class TestFitWithCovariates:
    def test_matches_bfgs_on_episode_loglik(self):
        rng = np.random.default_rng(30)
        n = 80
        x = rng.normal(size=n)
        stop = np.round(rng.uniform(0.5, 8.0, size=n), 2)
        y = (rng.random(n) < 0.5).astype(float)
        start = np.zeros(n)
        cuts = [4.0, 8.0]

        fit = fit_piecewise_exponential(start, stop, y, x, ["x"], cuts=cuts)

        exposure, event, interval, xs = split_episodes(start, stop, y, x[:, None], cuts)

        def neg_loglik(theta):
            eta = theta[:2][interval] + xs @ theta[2:]
            return -float(np.sum(event * eta - exposure * np.exp(eta)))

        oracle = minimize(neg_loglik, np.zeros(3), method="BFGS")
        got = list(fit.interval_log_hazards) + list(fit.beta)

        assert fit.converged
        for a, b in zip(got, oracle.x):
            assert a == pytest.approx(float(b), abs=1e-4)
        assert fit.loglik == pytest.approx(-float(oracle.fun), abs=1e-6)

    def test_covariate_scaling_equivariance(self):
        rng = np.random.default_rng(30)
        n = 80
        x = rng.normal(size=n)
        stop = np.round(rng.uniform(0.5, 8.0, size=n), 2)
        y = (rng.random(n) < 0.5).astype(float)
        start = np.zeros(n)

        f1 = fit_piecewise_exponential(start, stop, y, x, cuts=[4.0, 8.0])
        f2 = fit_piecewise_exponential(start, stop, y, x * 10.0, cuts=[4.0, 8.0])

        assert f2.beta[0] == pytest.approx(f1.beta[0] / 10.0, rel=1e-8)
        for a, b in zip(f1.interval_log_hazards, f2.interval_log_hazards):
            assert b == pytest.approx(a, abs=1e-8)
        assert f2.loglik == pytest.approx(f1.loglik, abs=1e-8)

    def test_recovers_simulation_parameters(self):
        a_true = [math.log(0.08), math.log(0.15)]
        cuts = [5.0, 12.0]
        start, stop, y, x = simulate(12, 500, a_true, cuts, beta=0.7)

        fit = fit_piecewise_exponential(start, stop, y, x, ["x"], cuts=cuts)

        assert fit.converged
        assert abs(fit.beta[0] - 0.7) < 3.0 * fit.se_beta[0]
        for a_hat, a_want, se in zip(
            fit.interval_log_hazards, a_true, fit.se_log_hazards
        ):
            assert abs(a_hat - a_want) < 3.0 * se

    def test_name_count_mismatch_rejected(self):
        with pytest.raises(DataError, match="name count"):
            fit_piecewise_exponential(
                [0.0], [1.0], [1.0], [[1.0]], ["a", "b"], cuts=[1.0]
            )
