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

#ifndef MUMIMO_CHANNEL_HPP
#define MUMIMO_CHANNEL_HPP

#include "mumimo/grid.hpp"
#include "mumimo/types.hpp"

#include <span>
#include <vector>

namespace mumimo
{

// Local scattering covariance of a uniform linear array:
// [C]_{a,b} = exp(j 2 pi d (a-b) sin(phi)) * exp(-(sigma^2/2) (2 pi d (a-b) cos(phi))^2).
template <typename Real>
CMatrix<Real> local_scattering_covariance(Real angle, Real angular_std, Real spacing, Index antennas)
{
    const Real two_pi = Real(2) * std::numbers::pi_v<Real>;
    CMatrix<Real> c(antennas, antennas);
    for (Index a = 0; a < antennas; ++a)
        for (Index b = 0; b < antennas; ++b)
        {
            const Real delta = Real(a - b);
            const Real spread = two_pi * spacing * delta * std::cos(angle);
            const Real magnitude = std::exp(-angular_std * angular_std / Real(2) * spread * spread);
            c(a, b) = std::polar(magnitude, two_pi * spacing * delta * std::sin(angle));
        }
    return c;
}

// Hermitian square root L diag(sqrt(lambda)) L^H of a PSD matrix.
// Throws model_error when an eigenvalue is below -psd_tolerance.
CMatrixd hermitian_sqrt(const CMatrixd& c);

struct ScatteringModel
{
    double angle = 0.0;        // nominal angle phi_k, radians
    double angular_std = 0.0;  // sigma_phi, radians
    double spacing = 0.5;      // antenna spacing, wavelengths
    int antennas = 1;

    CMatrixd covariance() const
    {
        return local_scattering_covariance<double>(angle, angular_std, spacing, antennas);
    }
};

// Draws h = L Lambda^{1/2} L^H e with e ~ CN(0, I), so that E[h h^H] = C.
class SpatialSampler
{
public:
    explicit SpatialSampler(const CMatrixd& covariance);
    explicit SpatialSampler(const ScatteringModel& model) : SpatialSampler(model.covariance()) {}

    CVectord sample(Rng& rng) const;
    const CMatrixd& covariance() const { return covariance_; }
    const CMatrixd& root() const { return root_; }

private:
    CMatrixd covariance_;
    CMatrixd root_;
};

inline CVectord sample_spatial_channel(const SpatialSampler& sampler, Rng& rng) { return sampler.sample(rng); }

// Time/frequency correlation substituting a geometric channel generator:
// Jakes autocorrelation J0(2 pi nu dm) over symbols and an exponential power-delay
// profile 1 / (1 + j 2 pi dn tau) over subcarriers.
struct TemporalSpectralModel
{
    double doppler = 0.0;      // nu = f_D * T_symbol
    double delay_spread = 0.0; // rms delay spread / useful symbol duration

    double time_correlation(int lag) const;
    cdouble frequency_correlation(int lag) const;
    RMatrixd time_covariance(int symbols) const;
    CMatrixd frequency_covariance(int subcarriers) const;
};

// Channel coefficients over the grid; slice (m, n) is the L x K matrix H_{m,n}.
class ChannelTensor
{
public:
    ChannelTensor() = default;
    ChannelTensor(int symbols, int subcarriers, int antennas, int users);

    int symbols() const { return symbols_; }
    int subcarriers() const { return subcarriers_; }
    int antennas() const { return antennas_; }
    int users() const { return users_; }

    CMatrixd& at(int m, int n) { return slices_[index(m, n)]; }
    const CMatrixd& at(int m, int n) const { return slices_[index(m, n)]; }
    cdouble& operator()(int m, int n, int l, int k) { return at(m, n)(l, k); }
    cdouble operator()(int m, int n, int l, int k) const { return at(m, n)(l, k); }
    auto column(int m, int n, int k) const { return at(m, n).col(k); }

    // Sum over the grid of ||h_{m,n,k}||^2.
    double user_energy(int k) const;

private:
    std::size_t index(int m, int n) const { return static_cast<std::size_t>(m) * subcarriers_ + n; }

    int symbols_ = 0;
    int subcarriers_ = 0;
    int antennas_ = 0;
    int users_ = 0;
    std::vector<CMatrixd> slices_;
};

// Separable (Kronecker) space x time x frequency channel generator. Square roots of the
// correlation matrices are computed once; draws are independent across users.
class ChannelSynthesizer
{
public:
    ChannelSynthesizer(const GridConfig& cfg, std::span<const ScatteringModel> users,
                       const TemporalSpectralModel& tsm, bool normalize_slot_energy = true);

    ChannelTensor draw(Rng& rng) const;

    const CMatrixd& spatial_covariance(int k) const { return spatial_.at(k).covariance(); }
    const TemporalSpectralModel& temporal_spectral() const { return tsm_; }

private:
    int symbols_;
    int subcarriers_;
    int antennas_;
    TemporalSpectralModel tsm_;
    bool normalize_;
    std::vector<SpatialSampler> spatial_;
    CMatrixd time_root_;
    CMatrixd freq_root_;
};

// Single draw; post-condition sum_{m,n} ||h_{m,n,k}||^2 = M_total N L for every user.
ChannelTensor synthesize_grid_channel(const GridConfig& cfg, std::span<const ScatteringModel> users,
                                      const TemporalSpectralModel& tsm, Rng& rng);

// h = 1 on every RE, antenna and user (AWGN reference channel).
ChannelTensor unit_channel(const GridConfig& cfg);

// Unit average channel gain, so sigma^2 = 10^(-SNR/10).
inline double snr_to_sigma2(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

} // namespace mumimo

#endif // MUMIMO_CHANNEL_HPP
