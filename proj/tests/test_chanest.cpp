// SPDX-License-Identifier: Apache-2.0
//
// mumimo: link-level MU-MIMO OFDM simulation toolkit
// Copyright (C) 2026 The mumimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "mumimo/chanest.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace mumimo;

namespace
{

GridConfig slot(int n, int k, int l)
{
    GridConfig g;
    g.subcarriers = n;
    g.users = k;
    g.antennas = l;
    return g;
}

} // namespace

TEST_CASE("pilot LMMSE estimate")
{
    Rng rng(1);
    const CVectord y = complex_normal_vector(rng, 6);
    const CMatrixd id = CMatrixd::Identity(6, 6);
    CHECK((lmmse_pilot_estimate(y, id, 1.0) - 0.5 * y).norm() < 1e-15);
    CHECK((lmmse_pilot_estimate(y, id, 1e-14) - y).norm() < 1e-12);

    const CMatrixd s = test::random_psd(rng, 6, 0.1);
    const double sigma2 = 0.3;
    // direct dense solve of (Sigma + s I) z = y
    CMatrixd reg = s + sigma2 * id;
    const CVectord direct = s * reg.fullPivLu().solve(y);
    const CVectord est = lmmse_pilot_estimate(y, s, sigma2);
    CHECK((est - direct).norm() / direct.norm() < 1e-10);

    const PilotEstimator pe(s, sigma2);
    CHECK((pe.estimate(CMatrixd(y)) - est).norm() < 1e-12);
    CHECK_THROWS_AS(lmmse_pilot_estimate(y, CMatrixd::Identity(5, 5), 1.0), dimension_error);
}

TEST_CASE("pilot estimator keeps the symbol-major pilot order")
{
    Rng rng(2);
    const CMatrixd s = test::random_psd(rng, 6, 0.2);
    const PilotEstimator pe(s, 0.5);
    const CMatrixd y = complex_normal_matrix(rng, 3, 2); // 3 pilots x 2 antennas
    CVectord flat(6);
    for (int p = 0; p < 3; ++p)
        for (int l = 0; l < 2; ++l)
            flat[p * 2 + l] = y(p, l);
    const CVectord want = lmmse_pilot_estimate(flat, s, 0.5);
    const CMatrixd got = pe.estimate(y);
    for (int p = 0; p < 3; ++p)
        for (int l = 0; l < 2; ++l)
            CHECK(std::abs(got(p, l) - want[p * 2 + l]) < 1e-12);
}

TEST_CASE("pilot error covariance")
{
    const CMatrixd id = CMatrixd::Identity(4, 4);
    CHECK((pilot_error_covariance(id, 1.0) - 0.5 * id).norm() < 1e-15);
    CHECK(pilot_error_covariance(id, 1e-12).norm() < 1e-11);

    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep)
    {
        const CMatrixd s = test::random_psd(rng, 6);
        const CMatrixd e = pilot_error_covariance(s, 0.2);
        CHECK(is_hermitian(e));
        CHECK(min_eigenvalue(e) >= -psd_tolerance);
        CHECK(min_eigenvalue(CMatrixd(s - e)) >= -psd_tolerance);
    }
}

TEST_CASE("Monte Carlo estimation error matches the error covariance")
{
    Rng rng(4);
    const CMatrixd s = test::random_psd(rng, 6, 0.05);
    const double sigma2 = 0.4;
    const SpatialSampler sampler(s);
    CovarianceAccumulator acc(6);
    for (int t = 0; t < 10000; ++t)
    {
        const CVectord h = sampler.sample(rng);
        const CVectord y = h + complex_normal_vector(rng, 6, sigma2);
        acc.add(h - lmmse_pilot_estimate(y, s, sigma2));
    }
    CHECK(test::rel_frobenius(acc.covariance(), pilot_error_covariance(s, sigma2)) < 0.05);
}

TEST_CASE("pilot MSE with the true covariance of the synthetic channel")
{
    Rng rng(5);
    GridConfig g = slot(12, 2, 2);
    const auto pattern = build_pilot_pattern(g, PilotLayout::two_pilot);
    std::vector<ScatteringModel> users;
    for (int k = 0; k < 2; ++k)
        users.push_back({-0.6 + 0.4 * k, 0.17, 0.5, 2});
    const TemporalSpectralModel tsm{0.01, 0.05};
    ChannelSynthesizer synth(g, users, tsm, false);
    const CMatrixd sigma = model_pilot_covariance(pattern, 0, users[0].covariance(), tsm);
    const double sigma2 = 0.2;
    const PilotEstimator pe(sigma, sigma2);
    const auto& pos = pattern.positions(0);
    double mse = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t)
    {
        const ChannelTensor h = synth.draw(rng);
        CMatrixd y(Index(pos.size()), 2);
        CMatrixd truth(Index(pos.size()), 2);
        for (std::size_t p = 0; p < pos.size(); ++p)
            for (int l = 0; l < 2; ++l)
            {
                truth(Index(p), l) = h(pos[p].symbol, pos[p].subcarrier, l, 0);
                y(Index(p), l) = truth(Index(p), l) + complex_normal(rng, sigma2);
            }
        mse += (pe.estimate(y) - truth).squaredNorm();
    }
    mse /= double(trials) * double(sigma.rows());
    const double predicted = pe.error_covariance().trace().real() / double(sigma.rows());
    CHECK(mse == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("grid interpolation")
{
    SUBCASE("constant pilots give a constant grid")
    {
        const auto p = build_pilot_pattern(slot(12, 2, 2), PilotLayout::two_pilot);
        const CMatrixd v = CMatrixd::Constant(Index(p.positions(0).size()), 2, cdouble(0.3, -0.7));
        for (auto mode : {InterpolationMode::spectral, InterpolationMode::spectral_temporal})
            for (const auto& h : interpolate_grid(v, p, 0, mode))
                CHECK((h - v.row(0).transpose()).norm() < 1e-15);
    }
    SUBCASE("linear midpoint between subcarriers")
    {
        // 1-based pilots on subcarriers 1 and 3 of symbol 3
        const auto p = pilot_pattern_from_triples(slot(12, 1, 1), {{1, 3, 1}, {1, 3, 3}});
        CMatrixd v(2, 1);
        v << 0.0, 1.0;
        const auto h = interpolate_grid(v, p, 0, InterpolationMode::spectral);
        CHECK(std::abs(h[2 * 12 + 1][0] - 0.5) < 1e-15);
        // beyond the span: nearest interpolated value, no extrapolation
        for (int m = 0; m < 14; ++m)
            for (int n = 2; n < 12; ++n)
                CHECK(h[std::size_t(m) * 12 + n][0] == cdouble(1.0));
    }
    SUBCASE("temporal interpolation between pilot symbols")
    {
        const auto p = pilot_pattern_from_triples(slot(12, 1, 1), {{1, 3, 1}, {1, 10, 1}});
        CMatrixd v(2, 1);
        const cdouble a(1.0, 2.0);
        const cdouble b(-3.0, 0.5);
        v << a, b;
        const auto st = interpolate_grid(v, p, 0, InterpolationMode::spectral_temporal);
        CHECK(std::abs(st[6 * 12][0] - (a + 4.0 / 7.0 * (b - a))) < 1e-14);
        CHECK(st[0][0] == a);
        CHECK(st[13 * 12][0] == b);
        const auto sp = interpolate_grid(v, p, 0, InterpolationMode::spectral);
        CHECK(sp[5 * 12][0] == a);
        CHECK(sp[6 * 12][0] == b);
    }
    SUBCASE("pilot count mismatch")
    {
        const auto p = build_pilot_pattern(slot(12, 1, 1), PilotLayout::one_pilot);
        CHECK_THROWS_AS(interpolate_grid(CMatrixd(3, 1), p, 0, InterpolationMode::spectral), dimension_error);
    }
}

TEST_CASE("nearest pilot assignment")
{
    const auto p = pilot_pattern_from_triples(slot(12, 1, 1), {{1, 3, 1}, {1, 3, 11}});
    CHECK(nearest_pilot(p, 0, 2, 4) == 0);
    CHECK(nearest_pilot(p, 0, 2, 6) == 1);
    // tie at subcarrier 6 (1-based) goes to the lower subcarrier
    CHECK(nearest_pilot(p, 0, 2, 5) == 0);
}

TEST_CASE("assembled error covariances")
{
    Rng rng(6);
    SUBCASE("single pilot RE")
    {
        const auto p = pilot_pattern_from_triples(slot(12, 1, 3), {{1, 5, 5}});
        const CMatrixd e = test::random_psd(rng, 3);
        for (const auto& b : assemble_error_covariances({e}, p, 3))
            CHECK((b - e).norm() == 0.0);
    }
    SUBCASE("identical user blocks add up")
    {
        const auto p = build_pilot_pattern(slot(12, 4, 4), PilotLayout::one_pilot);
        const CMatrixd blk = test::random_psd(rng, 2);
        std::vector<CMatrixd> errs;
        for (int k = 0; k < 4; ++k)
        {
            const Index n = Index(p.positions(k).size());
            CMatrixd e = CMatrixd::Zero(2 * n, 2 * n);
            for (Index i = 0; i < n; ++i)
                e.block(2 * i, 2 * i, 2, 2) = blk;
            errs.push_back(e);
        }
        for (const auto& b : assemble_error_covariances(errs, p, 2))
            CHECK((b - 4.0 * blk).norm() < 1e-12);
    }
    SUBCASE("assembled blocks are Hermitian PSD")
    {
        GridConfig g = slot(12, 2, 4);
        const auto p = build_pilot_pattern(g, PilotLayout::two_pilot);
        std::vector<CMatrixd> errs;
        for (int k = 0; k < 2; ++k)
        {
            const CMatrixd spatial = local_scattering_covariance(0.3 * k, 0.17, 0.5, Index(4));
            const CMatrixd s = model_pilot_covariance(p, k, spatial, TemporalSpectralModel{0.02, 0.05});
            errs.push_back(pilot_error_covariance(s, 0.1));
        }
        for (const auto& b : assemble_error_covariances(errs, p, 4))
        {
            CHECK(is_hermitian(b));
            CHECK(min_eigenvalue(b) >= -psd_tolerance);
        }
    }
}

TEST_CASE("power decay covariance")
{
    CHECK((power_decay_covariance(1.0, 1.0, 0.0, Index(4)) - CMatrixd::Ones(4, 4)).norm() < 1e-15);
    const CMatrixd e = power_decay_covariance(2.0, 0.5, pi, Index(3));
    CHECK(std::abs(e(0, 1) - cdouble(-1.0, 0.0)) < 1e-15);
    const CMatrixd big = power_decay_covariance(1.0, 0.7, 1.1, Index(8));
    CHECK(is_hermitian(big));
    CHECK(min_eigenvalue(big) >= -psd_tolerance);
    CHECK_THROWS(power_decay_covariance(1.0, 1.5, 0.0, Index(2)));

    const auto fit = fit_power_decay(power_decay_covariance(0.3, 0.6, -0.4, Index(5)));
    CHECK(fit.alpha == doctest::Approx(0.3));
    CHECK(fit.beta == doctest::Approx(0.6));
    CHECK(fit.gamma == doctest::Approx(-0.4));
}

TEST_CASE("empirical covariance")
{
    CMatrixd e1 = CMatrixd::Zero(3, 4);
    e1.row(0).setOnes();
    CMatrixd want = CMatrixd::Zero(3, 3);
    want(0, 0) = 1.0;
    CHECK((empirical_covariance(e1) - want).norm() == 0.0);

    CMatrixd two = CMatrixd::Zero(2, 2);
    two(0, 0) = 1.0;
    two(1, 1) = 1.0;
    CHECK((empirical_covariance(two) - 0.5 * CMatrixd::Identity(2, 2)).norm() == 0.0);
    CHECK_THROWS(empirical_covariance(CMatrixd::Zero(2, 1)));

    Rng rng(8);
    const CMatrixd c = test::random_psd(rng, 4, 0.1);
    const SpatialSampler sampler(c);
    CMatrixd samples(4, 100000);
    for (Index i = 0; i < samples.cols(); ++i)
        samples.col(i) = sampler.sample(rng);
    CHECK(test::rel_frobenius(empirical_covariance(samples), c) < 0.02);
}
