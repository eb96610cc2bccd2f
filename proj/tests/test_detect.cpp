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
#include "mumimo/detect.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mumimo;

namespace
{

// Minimizer of ||y - H x||^2 + sigma2 ||x||^2 from a finite-difference model of the quadratic.
CVectord ridge_minimizer(const CMatrixd& h, const CVectord& y, double sigma2)
{
    const Index k = h.cols();
    const Index n = 2 * k;
    auto unpack = [&](const RVectord& v) {
        CVectord x(k);
        for (Index i = 0; i < k; ++i)
            x[i] = cdouble(v[2 * i], v[2 * i + 1]);
        return x;
    };
    auto f = [&](const RVectord& v) {
        const CVectord x = unpack(v);
        return (y - h * x).squaredNorm() + sigma2 * x.squaredNorm();
    };
    const RVectord z = RVectord::Zero(n);
    const double f0 = f(z);
    RVectord grad(n);
    RMatrixd hess(n, n);
    for (Index i = 0; i < n; ++i)
    {
        RVectord p = z;
        p[i] = 1.0;
        RVectord m = z;
        m[i] = -1.0;
        grad[i] = (f(p) - f(m)) / 2.0;
        hess(i, i) = f(p) - 2.0 * f0 + f(m);
        for (Index j = 0; j < i; ++j)
        {
            RVectord pj = z;
            pj[j] = 1.0;
            RVectord pp = p;
            pp[j] = 1.0;
            hess(i, j) = hess(j, i) = f(pp) - f(p) - f(pj) + f0;
        }
    }
    return unpack(hess.ldlt().solve(-grad));
}

CVectord random_symbols(Rng& rng, const Constellation& c, Index k, std::vector<int>* labels = nullptr)
{
    std::uniform_int_distribution<int> label(0, c.size() - 1);
    CVectord x(k);
    for (Index i = 0; i < k; ++i)
    {
        const int v = label(rng);
        if (labels)
            labels->push_back(v);
        x[i] = c.point(v);
    }
    return x;
}

} // namespace

TEST_CASE("QR reduction")
{
    Rng rng(1);
    const CVectord y3 = complex_normal_vector(rng, 3);
    const auto id = qr_reduce(CMatrixd::Identity(3, 3), y3);
    CHECK((id.r - CMatrixd::Identity(3, 3)).norm() < 1e-15);
    CHECK((id.y_bar - y3).norm() < 1e-15);

    const CMatrixd h = complex_normal_matrix(rng, 4, 2);
    const CVectord y = complex_normal_vector(rng, 4);
    const auto red = qr_reduce(h, y);
    CHECK((red.q * red.r - h).norm() < 1e-10);
    CHECK((red.q.adjoint() * red.q - CMatrixd::Identity(2, 2)).norm() < 1e-10);
    CHECK(std::abs(red.r(1, 0)) == 0.0);
    for (int i = 0; i < 10; ++i)
    {
        const CVectord x = complex_normal_vector(rng, 2);
        CHECK((red.y_bar - red.r * x).norm() <= (y - h * x).norm() + 1e-12);
    }

    CMatrixd rank1(4, 2);
    rank1.col(0) = complex_normal_vector(rng, 4);
    rank1.col(1) = 2.0 * rank1.col(0);
    CHECK_THROWS_AS(qr_reduce(rank1, y), std::invalid_argument);
    CHECK_THROWS_AS(qr_reduce(complex_normal_matrix(rng, 2, 3), CVectord::Zero(2)), dimension_error);
}

TEST_CASE("LMMSE detection")
{
    CVectord y(1);
    y[0] = 2.0;
    CHECK(std::abs(lmmse_detect(CMatrixd::Ones(1, 1), y, 1.0)[0] - 1.0) < 1e-15);

    Rng rng(2);
    const CMatrixd sq = complex_normal_matrix(rng, 3, 3);
    const CVectord ys = complex_normal_vector(rng, 3);
    CHECK((lmmse_detect(sq, ys, 1e-14) - sq.fullPivLu().solve(ys)).norm() < 1e-8);

    for (int i = 0; i < 20; ++i)
    {
        const CMatrixd h = complex_normal_matrix(rng, 4, 2);
        const CVectord yy = complex_normal_vector(rng, 4);
        const double sigma2 = 0.3;
        const CVectord x = lmmse_detect(h, yy, sigma2);
        const CVectord oracle = ridge_minimizer(h, yy, sigma2);
        auto obj = [&](const CVectord& v) { return (yy - h * v).squaredNorm() + sigma2 * v.squaredNorm(); };
        CHECK(std::abs(obj(x) - obj(oracle)) < 1e-8);

        const auto red = qr_reduce(h, yy);
        CHECK((lmmse_detect(red.r, red.y_bar, sigma2) - x).norm() < 1e-10 * std::max(1.0, x.norm()));
    }
}

TEST_CASE("ML detection")
{
    Rng rng(3);
    const auto qpsk = gray_constellation(2);
    const auto qam16 = gray_constellation(4);
    SUBCASE("noiseless observation")
    {
        for (int i = 0; i < 50; ++i)
        {
            const CMatrixd h = complex_normal_matrix(rng, 4, 2);
            std::vector<int> labels;
            const CVectord x = random_symbols(rng, qam16, 2, &labels);
            CHECK(ml_detect(h, h * x, qam16).labels == labels);
        }
    }
    SUBCASE("single user reduces to nearest point after matched filtering")
    {
        for (int i = 0; i < 200; ++i)
        {
            const CMatrixd h = complex_normal_matrix(rng, 3, 1);
            const CVectord y = h * random_symbols(rng, qam16, 1) + complex_normal_vector(rng, 3, 0.5);
            const cdouble mf = h.col(0).dot(y) / h.squaredNorm();
            int best = 0;
            for (int v = 1; v < qam16.size(); ++v)
                if (std::norm(mf - qam16.point(v)) < std::norm(mf - qam16.point(best)))
                    best = v;
            CHECK(ml_detect(h, y, qam16).labels.front() == best);
        }
    }
    SUBCASE("ML symbol error rate does not exceed LMMSE")
    {
        int err_ml = 0;
        int err_lmmse = 0;
        const double sigma2 = 0.5;
        for (int t = 0; t < 10000; ++t)
        {
            const CMatrixd h = complex_normal_matrix(rng, 4, 2);
            std::vector<int> labels;
            const CVectord x = random_symbols(rng, qpsk, 2, &labels);
            const CVectord y = h * x + complex_normal_vector(rng, 4, sigma2);
            const auto ml = ml_detect(h, y, qpsk);
            const auto lin = hard_decision(lmmse_detect(h, y, sigma2), qpsk);
            for (int k = 0; k < 2; ++k)
            {
                err_ml += ml.labels[k] != labels[k];
                err_lmmse += lin.labels[k] != labels[k];
            }
        }
        CHECK(err_ml <= err_lmmse);
    }
    SUBCASE("search space guard")
    {
        const auto qam64 = gray_constellation(6);
        CHECK_THROWS_AS(ml_detect(complex_normal_matrix(rng, 4, 4), CVectord::Zero(4), qam64), std::invalid_argument);
    }
}

TEST_CASE("shared parameter expansion")
{
    Rng rng(4);
    const CMatrixd theta = complex_normal_matrix(rng, 2, 2);
    CHECK((expand_shared_params(theta, RVectord::Zero(2)) - theta).norm() == 0.0);
    RVectord s(2);
    s << 1.0, -1.0;
    const CMatrixd e = expand_shared_params(theta, s);
    CHECK((e.col(0) - 2.0 * theta.col(0)).norm() == 0.0);
    CHECK(e.col(1).norm() == 0.0);
    const RVectord r = RVectord::Random(3);
    const CMatrixd t3 = complex_normal_matrix(rng, 3, 3);
    const CMatrixd e3 = expand_shared_params(t3, r);
    for (Index j = 0; j < 3; ++j)
        for (Index i = 0; i < 3; ++i)
            CHECK(std::abs(e3(i, j) / t3(i, j) - (1.0 + r[j])) < 1e-12);
}

TEST_CASE("Gaussian denoiser")
{
    const auto qpsk = gray_constellation(2);
    const auto qam16 = gray_constellation(4);
    for (double tau : {1e-3, 0.1, 1.0, 10.0})
        CHECK(std::abs(gaussian_denoiser(0.0, tau, qpsk)) < 1e-15);
    const cdouble corner = cdouble(1.0, 1.0) / std::sqrt(2.0);
    CHECK(gaussian_denoiser(corner * 0.9, 0.0, qpsk) == corner);
    CHECK(std::abs(gaussian_denoiser(corner * 0.9, 1e-6, qpsk) - corner) < 1e-12);
    CHECK(std::abs(gaussian_denoiser(cdouble(0.4, -0.2), 1e6, qam16)) < 1e-5);

    cdouble num = 0.0;
    double den = 0.0;
    for (const auto& p : qpsk.points())
    {
        const double w = std::exp(-std::norm(cdouble(0.3, 0.0) - p) / 0.5);
        num += w * p;
        den += w;
    }
    CHECK(std::abs(gaussian_denoiser(cdouble(0.3, 0.0), 0.5, qpsk) - num / den) < 1e-12);

    Rng rng(5);
    const double edge = 3.0 / std::sqrt(10.0);
    for (int i = 0; i < 1000; ++i)
    {
        const cdouble k = complex_normal(rng, 4.0);
        const cdouble d = gaussian_denoiser(k, 0.01 + std::abs(complex_normal(rng)), qam16);
        CHECK(std::abs(d.real()) <= edge + 1e-12);
        CHECK(std::abs(d.imag()) <= edge + 1e-12);
        CHECK(std::isfinite(std::abs(gaussian_denoiser(k * 1e3, 1e-9, qam16))));
    }
}

TEST_CASE("hard decision")
{
    const auto qpsk = gray_constellation(2);
    const auto qam16 = gray_constellation(4);
    CVectord pts(4);
    for (int v = 0; v < 4; ++v)
        pts[v] = qpsk.point(v);
    CHECK(hard_decision(pts, qpsk).labels == std::vector<int>{0, 1, 2, 3});
    CHECK(hard_decision(CVectord::Zero(1), qpsk).labels.front() == 0);

    CVectord x(1);
    x[0] = cdouble(0.9, 0.1);
    int best = 0;
    for (int v = 1; v < 16; ++v)
        if (std::abs(x[0] - qam16.point(v)) < std::abs(x[0] - qam16.point(best)))
            best = v;
    CHECK(hard_decision(x, qam16).labels.front() == best);
}

TEST_CASE("MMNet iteration")
{
    Rng rng(6);
    const auto qpsk = gray_constellation(2);
    const CMatrixd h = complex_normal_matrix(rng, 4, 2);
    const CVectord x = random_symbols(rng, qpsk, 2);
    const auto red = qr_reduce(h, CVectord(h * x));
    const RVectord psi = RVectord::Ones(2);

    DetectorState at_truth{x, CVectord(), RVectord()};
    const CMatrixd theta = lmmse_matrix(red.r, 0.1);
    const auto s1 = mmnet_iterate(at_truth, red.r, red.y_bar, theta, psi, 0.0, 4, qpsk);
    CHECK((s1.kappa - x).norm() < 1e-12);

    DetectorState start{complex_normal_vector(rng, 2), CVectord(), RVectord()};
    const auto s2 = mmnet_iterate(start, red.r, red.y_bar, CMatrixd::Zero(2, 2), psi, 0.1, 4, qpsk);
    CHECK((s2.kappa - start.x_hat).norm() == 0.0);

    const CVectord y = h * x + complex_normal_vector(rng, 4, 0.3);
    const auto red2 = qr_reduce(h, y);
    const auto a = mmnet_iterate(start, red2.r, red2.y_bar, theta, psi, 0.01, 4, qpsk);
    const auto b = mmnet_iterate(start, red2.r, red2.y_bar, theta, RVectord(2.0 * psi), 0.01, 4, qpsk);
    CHECK(a.tau.minCoeff() >= 0.0);
    CHECK((b.tau - 2.0 * a.tau).norm() < 1e-15 * a.tau.norm() + 1e-300);

    DetectorOptions k_form;
    k_form.residual_uses_antenna_count = false;
    const auto c = mmnet_iterate(start, red2.r, red2.y_bar, theta, psi, 0.01, 4, qpsk, k_form);
    CHECK(c.tau[0] >= a.tau[0]);
}

TEST_CASE("one LMMSE-initialized iteration with floored variance equals hard LMMSE")
{
    Rng rng(7);
    const auto qam16 = gray_constellation(4);
    for (int i = 0; i < 100; ++i)
    {
        const CMatrixd h = complex_normal_matrix(rng, 4, 2);
        const double sigma2 = 0.05;
        const CVectord y = h * random_symbols(rng, qam16, 2) + complex_normal_vector(rng, 4, sigma2);
        const auto red = qr_reduce(h, y);
        const auto params = DetectorParams::lmmse_initialized(red.r, sigma2, 1, 1e-30);
        const auto mm = mmnet_detect(h, y, sigma2, params, qam16);
        CHECK(mm.decision.labels == hard_decision(lmmse_detect(h, y, sigma2), qam16).labels);
    }
}

TEST_CASE("detector parameter validation")
{
    DetectorParams p = DetectorParams::lmmse_initialized(CMatrixd::Identity(2, 2), 0.1, 2);
    CHECK_NOTHROW(p.validate());
    p.psi[1][0] = 0.0;
    CHECK_THROWS(p.validate());
    p = DetectorParams::lmmse_initialized(CMatrixd::Identity(2, 2), 0.1, 1);
    p.scalings.clear();
    CHECK_THROWS(p.validate());
}
