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

#ifndef MUMIMO_CHANEST_HPP
#define MUMIMO_CHANEST_HPP

#include "mumimo/channel.hpp"
#include "mumimo/grid.hpp"
#include "mumimo/types.hpp"

#include <vector>

namespace mumimo
{

// Pilot vectors follow a fixed vectorization order: symbol-major, then subcarrier, then
// antenna, i.e. entry (i_m, i_n, l) of a |P_M| x |P_N| x L pilot tensor sits at
// (i_m * |P_N| + i_n) * L + l. Covariance files must use the same order.

// vec(H_P) = Sigma (Sigma + sigma2 I)^{-1} vec(Y_P)
template <typename DerivedY, typename DerivedS>
CVector<typename DerivedY::RealScalar> lmmse_pilot_estimate(const Eigen::MatrixBase<DerivedY>& y_pilots,
                                                            const Eigen::MatrixBase<DerivedS>& sigma,
                                                            typename DerivedY::RealScalar sigma2)
{
    using Real = typename DerivedY::RealScalar;
    if (y_pilots.cols() != 1 || sigma.rows() != sigma.cols() || sigma.rows() != y_pilots.size())
        throw dimension_error("lmmse_pilot_estimate: covariance is " + std::to_string(sigma.rows()) + "x" +
                              std::to_string(sigma.cols()) + " but " + std::to_string(y_pilots.size()) +
                              " pilot observations were given");
    if (!(sigma2 > Real(0)))
        throw std::invalid_argument("lmmse_pilot_estimate: sigma2 must be > 0");
    CMatrix<Real> reg = sigma;
    reg.diagonal().array() += sigma2;
    const CVector<Real> z = reg.llt().solve(y_pilots.derived());
    return sigma * z;
}

// E_P = Sigma - Sigma (Sigma + sigma2 I)^{-1} Sigma
template <typename DerivedS>
CMatrix<typename DerivedS::RealScalar> pilot_error_covariance(const Eigen::MatrixBase<DerivedS>& sigma,
                                                              typename DerivedS::RealScalar sigma2)
{
    using Real = typename DerivedS::RealScalar;
    if (sigma.rows() != sigma.cols())
        throw dimension_error("pilot_error_covariance: covariance is not square");
    if (!(sigma2 > Real(0)))
        throw std::invalid_argument("pilot_error_covariance: sigma2 must be > 0");
    CMatrix<Real> reg = sigma;
    reg.diagonal().array() += sigma2;
    CMatrix<Real> e = sigma - sigma * reg.llt().solve(sigma.derived());
    return (e + e.adjoint()) / Real(2);
}

// Linear pilot estimator with the LMMSE matrix factored once per noise level.
class PilotEstimator
{
public:
    PilotEstimator() = default;
    PilotEstimator(const CMatrixd& sigma, double sigma2);

    // y holds one pilot observation per row (rows in symbol-major pilot order, L columns).
    CMatrixd estimate(const CMatrixd& y) const;
    const CMatrixd& gain() const { return gain_; }
    const CMatrixd& error_covariance() const { return error_; }

private:
    CMatrixd gain_;
    CMatrixd error_;
};

enum class InterpolationMode
{
    spectral,         // linear in frequency, nearest interpolated RE across time
    spectral_temporal // additionally linear in time between pilot-bearing symbols
};

// Full-slot estimates from the pilot estimates of one user. `pilot_values` has one row per
// pilot RE (symbol-major order) and one column per antenna. Result is indexed m * N + n
// over the pattern's slot. Positions outside the pilot span copy the nearest interpolated RE.
std::vector<CVectord> interpolate_grid(const CMatrixd& pilot_values, const PilotPattern& pattern, int user,
                                       InterpolationMode mode);

// Index (into pattern.positions(user)) of the pilot nearest to (m, n) in Euclidean distance;
// ties go to the lower symbol, then the lower subcarrier.
int nearest_pilot(const PilotPattern& pattern, int user, int symbol, int subcarrier);

// Spatial L x L error blocks per RE (indexed m * N + n) assembled by nearest-pilot fill from the
// per-user pilot error covariances and summed over users. `pilot_errors[k]` is user k's
// (|P_M| |P_N| L)^2 covariance; pilots carry their own exact block.
std::vector<CMatrixd> assemble_error_covariances(const std::vector<CMatrixd>& pilot_errors,
                                                 const PilotPattern& pattern, int antennas);

// Per-user variant: spatial blocks of one user only.
std::vector<CMatrixd> user_error_covariances(const CMatrixd& pilot_error, const PilotPattern& pattern, int user,
                                             int antennas);

// e_{a,b} = alpha beta^{|b-a|} exp(j gamma (b - a))
template <typename Real>
CMatrix<Real> power_decay_covariance(Real alpha, Real beta, Real gamma, Index antennas)
{
    if (alpha < Real(0) || beta < Real(0) || beta > Real(1))
        throw std::invalid_argument("power_decay_covariance: need alpha >= 0 and 0 <= beta <= 1");
    CMatrix<Real> e(antennas, antennas);
    for (Index a = 0; a < antennas; ++a)
        for (Index b = 0; b < antennas; ++b)
        {
            const Index d = b - a;
            const Real magnitude = alpha * std::pow(beta, Real(d < 0 ? -d : d));
            e(a, b) = std::polar(magnitude, gamma * Real(d));
        }
    return e;
}

// Per-RE scale/decay maps with one global phase slope.
struct PowerDecayParams
{
    RMatrixd alpha; // M x N, >= 0
    RMatrixd beta;  // M x N, in [0, 1]
    double gamma = 0.0;

    void validate() const;
    CMatrixd covariance(int m, int n, int antennas) const
    {
        return power_decay_covariance<double>(alpha(m, n), beta(m, n), gamma, antennas);
    }
};

struct PowerDecayFit
{
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

// Moment fit of the decay model to a Hermitian block: alpha from the mean diagonal,
// beta and gamma from the mean first super-diagonal.
PowerDecayFit fit_power_decay(const CMatrixd& block);

// (1/S) sum_s v_s v_s^H over the columns of `samples`.
template <typename Derived>
CMatrix<typename Derived::RealScalar> empirical_covariance(const Eigen::MatrixBase<Derived>& samples)
{
    using Real = typename Derived::RealScalar;
    if (samples.cols() < 2 || samples.rows() < 1)
        throw std::invalid_argument("empirical_covariance: need at least two non-empty samples");
    CMatrix<Real> c = samples * samples.adjoint() / Real(samples.cols());
    return (c + c.adjoint()) / Real(2);
}

// Streaming form of empirical_covariance for large datasets.
class CovarianceAccumulator
{
public:
    explicit CovarianceAccumulator(Index dim) : sum_(CMatrixd::Zero(dim, dim)) {}
    void add(const CVectord& v);
    long count() const { return count_; }
    Index dim() const { return sum_.rows(); }
    CMatrixd covariance() const;

private:
    CMatrixd sum_;
    long count_ = 0;
};

// Pilot covariance implied by the separable channel model for one user:
// Sigma[(i,j,l),(i',j',l')] = r_t(m_i - m_i') r_f(n_j - n_j') C[l, l'].
CMatrixd model_pilot_covariance(const PilotPattern& pattern, int user, const CMatrixd& spatial,
                                const TemporalSpectralModel& tsm);

} // namespace mumimo

#endif // MUMIMO_CHANEST_HPP
