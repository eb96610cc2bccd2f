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
#include "mumimo/channel.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace mumimo;

namespace
{

// Power series of the Bessel function J0.
double bessel_j0_series(double x)
{
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 80; ++k)
    {
        term *= -(x / 2.0) * (x / 2.0) / (double(k) * double(k));
        sum += term;
    }
    return sum;
}

GridConfig small_grid(int m, int n, int l, int k = 1)
{
    GridConfig g;
    g.symbols = m;
    g.subcarriers = n;
    g.antennas = l;
    g.users = k;
    return g;
}

} // namespace

TEST_CASE("local scattering covariance")
{
    const CMatrixd c = local_scattering_covariance(0.4, 0.2, 0.5, Index(6));
    for (Index a = 0; a < 6; ++a)
        CHECK(std::abs(c(a, a) - 1.0) < 1e-15);
    CHECK(is_hermitian(c));

    const CMatrixd flat = local_scattering_covariance(0.0, 0.0, 0.5, Index(4));
    CHECK((flat - CMatrixd::Ones(4, 4)).norm() < 1e-15);

    const CMatrixd ref = local_scattering_covariance(0.0, 10.0 * pi / 180.0, 0.5, Index(4));
    CHECK(min_eigenvalue(ref) >= 0.0);
    CHECK(std::abs(ref.trace() - 4.0) < 1e-12);
}

TEST_CASE("local scattering covariance is PSD over random parameters")
{
    Rng rng(11);
    std::uniform_real_distribution<double> angle(-pi / 2, pi / 2);
    std::uniform_real_distribution<double> spread(0.0, 0.6);
    std::uniform_real_distribution<double> spacing(0.1, 2.0);
    std::uniform_int_distribution<int> antennas(1, 16);
    double worst = 1.0;
    for (int i = 0; i < 1000; ++i)
    {
        const CMatrixd c = local_scattering_covariance(angle(rng), spread(rng), spacing(rng), Index(antennas(rng)));
        worst = std::min(worst, min_eigenvalue(c));
    }
    CHECK(worst >= -psd_tolerance);
}

TEST_CASE("spatial sampling")
{
    Rng rng(5);
    SUBCASE("uncorrelated draws have unit variance per entry")
    {
        SpatialSampler s(CMatrixd::Identity(3, 3));
        double acc = 0.0;
        const int draws = 20000;
        for (int i = 0; i < draws; ++i)
            acc += s.sample(rng).squaredNorm();
        CHECK(std::abs(acc / (3.0 * draws) - 1.0) < 0.02);
    }
    SUBCASE("rank-one covariance gives samples along the steering vector")
    {
        const double phi = 0.3;
        ScatteringModel m{phi, 0.0, 0.5, 6};
        SpatialSampler s(m);
        CVectord a(6);
        for (int l = 0; l < 6; ++l)
            a[l] = std::polar(1.0, 2.0 * pi * 0.5 * l * std::sin(phi));
        for (int i = 0; i < 100; ++i)
        {
            const CVectord h = s.sample(rng);
            CHECK(std::norm(a.dot(h)) == doctest::Approx(a.squaredNorm() * h.squaredNorm()).epsilon(1e-9));
        }
    }
    SUBCASE("empirical covariance over 1e5 draws")
    {
        ScatteringModel m{0.2, 10.0 * pi / 180.0, 0.5, 4};
        SpatialSampler s(m);
        CMatrixd acc = CMatrixd::Zero(4, 4);
        const int draws = 100000;
        for (int i = 0; i < draws; ++i)
        {
            const CVectord h = s.sample(rng);
            acc += h * h.adjoint();
        }
        acc /= double(draws);
        CHECK(test::rel_frobenius(acc, m.covariance()) < 0.02);
    }
}

TEST_CASE("non-PSD covariance is a model error")
{
    CMatrixd c = CMatrixd::Identity(2, 2);
    c(0, 1) = c(1, 0) = 2.0;
    CHECK_THROWS_AS(SpatialSampler{c}, model_error);
}

TEST_CASE("temporal and spectral correlation")
{
    TemporalSpectralModel t{0.05, 0.1};
    CHECK(t.time_correlation(0) == 1.0);
    CHECK(std::abs(t.frequency_correlation(0) - 1.0) < 1e-15);
    for (int lag = -20; lag <= 20; ++lag)
    {
        CHECK(std::abs(t.time_correlation(lag)) <= 1.0);
        CHECK(std::abs(t.frequency_correlation(lag)) <= 1.0);
        CHECK(t.time_correlation(lag) == doctest::Approx(bessel_j0_series(2.0 * pi * 0.05 * std::abs(lag))));
    }
}

TEST_CASE("static channel is constant across the grid")
{
    Rng rng(3);
    const auto g = small_grid(14, 12, 4, 2);
    std::vector<ScatteringModel> users{{0.1, 0.1, 0.5, 4}, {-0.5, 0.1, 0.5, 4}};
    const auto h = synthesize_grid_channel(g, users, TemporalSpectralModel{}, rng);
    for (int m = 0; m < 14; ++m)
        for (int n = 0; n < 12; ++n)
            CHECK((h.at(m, n) - h.at(0, 0)).norm() < 1e-10);
}

TEST_CASE("slot energy normalization")
{
    Rng rng(9);
    auto g = small_grid(14, 12, 4, 2);
    g.duplex = Duplex::uplink_downlink;
    std::vector<ScatteringModel> users{{0.1, 0.1, 0.5, 4}, {-0.5, 0.1, 0.5, 4}};
    const auto h = synthesize_grid_channel(g, users, TemporalSpectralModel{0.02, 0.05}, rng);
    CHECK(h.symbols() == 28);
    for (int k = 0; k < 2; ++k)
        CHECK(h.user_energy(k) == doctest::Approx(28.0 * 12 * 4).epsilon(1e-12));
}

TEST_CASE("time correlation of synthesized channels follows the Jakes model")
{
    Rng rng(21);
    const auto g = small_grid(14, 1, 1);
    std::vector<ScatteringModel> users{{0.0, 0.0, 0.5, 1}};
    const double nu = 0.05;
    ChannelSynthesizer synth(g, users, TemporalSpectralModel{nu, 0.0}, false);
    const int draws = 20000;
    cdouble first_last = 0.0;
    cdouble early = 0.0;
    cdouble late = 0.0;
    for (int i = 0; i < draws; ++i)
    {
        const auto h = synth.draw(rng);
        first_last += h(0, 0, 0, 0) * std::conj(h(13, 0, 0, 0));
        early += h(0, 0, 0, 0) * std::conj(h(3, 0, 0, 0));
        late += h(8, 0, 0, 0) * std::conj(h(11, 0, 0, 0));
    }
    const double tol = 4.0 / std::sqrt(double(draws));
    CHECK(std::abs(first_last / double(draws) - bessel_j0_series(2.0 * pi * nu * 13)) < tol);
    // stationarity: equal lags give equal correlation
    CHECK(std::abs(early - late) / double(draws) < 2.0 * tol);
}

TEST_CASE("noise power from SNR")
{
    CHECK(snr_to_sigma2(0.0) == 1.0);
    CHECK(snr_to_sigma2(10.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(snr_to_sigma2(5.0) == doctest::Approx(0.3162277660).epsilon(1e-10));
}

TEST_CASE("unit channel")
{
    const auto h = unit_channel(small_grid(2, 3, 2, 2));
    CHECK(h(1, 2, 1, 1) == cdouble(1.0));
    CHECK(h.user_energy(0) == doctest::Approx(12.0));
}
