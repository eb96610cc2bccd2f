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

#include <cmath>

namespace mumimo
{

CMatrixd hermitian_sqrt(const CMatrixd& c)
{
    if (c.rows() != c.cols())
        throw dimension_error("hermitian_sqrt: matrix is not square");
    Eigen::SelfAdjointEigenSolver<CMatrixd> es(c);
    if (es.info() != Eigen::Success)
        throw model_error("hermitian_sqrt: eigendecomposition failed");
    RVectord lambda = es.eigenvalues();
    if (lambda.size() > 0 && lambda.minCoeff() < -psd_tolerance)
        throw model_error("covariance is not positive semidefinite (min eigenvalue " +
                          std::to_string(lambda.minCoeff()) + ")");
    // eigenvalues at round-off level are treated as zero (numerical rank)
    const double floor = lambda.size() > 0 ? 1e-12 * std::max(lambda.maxCoeff(), 0.0) : 0.0;
    for (Index i = 0; i < lambda.size(); ++i)
        lambda[i] = lambda[i] > floor ? std::sqrt(lambda[i]) : 0.0;
    return es.eigenvectors() * lambda.cast<cdouble>().asDiagonal() * es.eigenvectors().adjoint();
}

SpatialSampler::SpatialSampler(const CMatrixd& covariance) : covariance_(covariance), root_(hermitian_sqrt(covariance)) {}

CVectord SpatialSampler::sample(Rng& rng) const
{
    return root_ * complex_normal_vector(rng, root_.cols());
}

double TemporalSpectralModel::time_correlation(int lag) const
{
    return std::cyl_bessel_j(0.0, 2.0 * pi * doppler * std::abs(lag));
}

cdouble TemporalSpectralModel::frequency_correlation(int lag) const
{
    return 1.0 / cdouble(1.0, 2.0 * pi * lag * delay_spread);
}

RMatrixd TemporalSpectralModel::time_covariance(int symbols) const
{
    RMatrixd r(symbols, symbols);
    for (int a = 0; a < symbols; ++a)
        for (int b = 0; b < symbols; ++b)
            r(a, b) = time_correlation(a - b);
    return r;
}

CMatrixd TemporalSpectralModel::frequency_covariance(int subcarriers) const
{
    CMatrixd r(subcarriers, subcarriers);
    for (int a = 0; a < subcarriers; ++a)
        for (int b = 0; b < subcarriers; ++b)
            r(a, b) = frequency_correlation(a - b);
    return r;
}

ChannelTensor::ChannelTensor(int symbols, int subcarriers, int antennas, int users)
    : symbols_(symbols), subcarriers_(subcarriers), antennas_(antennas), users_(users),
      slices_(static_cast<std::size_t>(symbols) * subcarriers, CMatrixd::Zero(antennas, users))
{
}

double ChannelTensor::user_energy(int k) const
{
    double e = 0.0;
    for (const auto& s : slices_)
        e += s.col(k).squaredNorm();
    return e;
}

ChannelSynthesizer::ChannelSynthesizer(const GridConfig& cfg, std::span<const ScatteringModel> users,
                                       const TemporalSpectralModel& tsm, bool normalize_slot_energy)
    : symbols_(cfg.total_symbols()), subcarriers_(cfg.subcarriers), antennas_(cfg.antennas), tsm_(tsm),
      normalize_(normalize_slot_energy)
{
    cfg.validate();
    if (static_cast<int>(users.size()) != cfg.users)
        throw dimension_error("channel: expected " + std::to_string(cfg.users) + " scattering models");
    for (const auto& u : users)
    {
        if (u.antennas != cfg.antennas)
            throw dimension_error("channel: scattering model antenna count mismatch");
        if (u.angular_std < 0.0)
            throw std::invalid_argument("channel: angular std must be >= 0");
        spatial_.emplace_back(u);
    }
    if (tsm.doppler < 0.0 || tsm.delay_spread < 0.0)
        throw std::invalid_argument("channel: doppler and delay spread must be >= 0");
    time_root_ = hermitian_sqrt(tsm.time_covariance(symbols_).cast<cdouble>());
    freq_root_ = hermitian_sqrt(tsm.frequency_covariance(subcarriers_));
}

ChannelTensor ChannelSynthesizer::draw(Rng& rng) const
{
    using RowMajor = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const int users = static_cast<int>(spatial_.size());
    ChannelTensor h(symbols_, subcarriers_, antennas_, users);
    const Index width = Index(subcarriers_) * antennas_;
    for (int k = 0; k < users; ++k)
    {
        // rows: symbols; each row holds an N x L block (row-major, subcarrier-major)
        RowMajor z(symbols_, width);
        for (Index m = 0; m < symbols_; ++m)
            for (Index c = 0; c < width; ++c)
                z(m, c) = complex_normal(rng);
        const CMatrixd spatial_t = spatial_[k].root().transpose();
        for (Index m = 0; m < symbols_; ++m)
        {
            Eigen::Map<RowMajor> block(z.row(m).data(), subcarriers_, antennas_);
            RowMajor mixed = freq_root_ * block * spatial_t;
            block = mixed;
        }
        RowMajor timed = time_root_ * z;

        double scale = 1.0;
        if (normalize_)
        {
            const double energy = timed.squaredNorm();
            if (energy > 0.0)
                scale = std::sqrt(double(symbols_) * subcarriers_ * antennas_ / energy);
        }
        for (int m = 0; m < symbols_; ++m)
            for (int n = 0; n < subcarriers_; ++n)
                for (int l = 0; l < antennas_; ++l)
                    h(m, n, l, k) = scale * timed(m, Index(n) * antennas_ + l);
    }
    return h;
}

ChannelTensor synthesize_grid_channel(const GridConfig& cfg, std::span<const ScatteringModel> users,
                                      const TemporalSpectralModel& tsm, Rng& rng)
{
    return ChannelSynthesizer(cfg, users, tsm).draw(rng);
}

ChannelTensor unit_channel(const GridConfig& cfg)
{
    ChannelTensor h(cfg.total_symbols(), cfg.subcarriers, cfg.antennas, cfg.users);
    for (int m = 0; m < h.symbols(); ++m)
        for (int n = 0; n < h.subcarriers(); ++n)
            h.at(m, n).setOnes();
    return h;
}

} // namespace mumimo
