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

#include <algorithm>
#include <cmath>

namespace mumimo
{

PilotEstimator::PilotEstimator(const CMatrixd& sigma, double sigma2)
{
    if (sigma.rows() != sigma.cols())
        throw dimension_error("PilotEstimator: covariance is not square");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("PilotEstimator: sigma2 must be > 0");
    CMatrixd reg = sigma;
    reg.diagonal().array() += sigma2;
    // (Sigma + s I)^{-1} Sigma = Sigma (Sigma + s I)^{-1}: both are functions of Sigma
    gain_ = reg.llt().solve(sigma);
    error_ = pilot_error_covariance(sigma, sigma2);
}

CMatrixd PilotEstimator::estimate(const CMatrixd& y) const
{
    if (y.size() != gain_.cols())
        throw dimension_error("PilotEstimator: observation size mismatch");
    using RowMajor = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor yr = y;
    const CVectord est = gain_ * Eigen::Map<const CVectord>(yr.data(), yr.size());
    const RowMajor out = Eigen::Map<const RowMajor>(est.data(), y.rows(), y.cols());
    return out;
}

namespace
{

// Linear interpolation weights of x against sorted knots; clamps outside the span.
struct Bracket
{
    int lo = 0;
    int hi = 0;
    double t = 0.0; // weight of hi
};

Bracket bracket(const std::vector<int>& knots, int x)
{
    if (x <= knots.front())
        return {0, 0, 0.0};
    if (x >= knots.back())
    {
        const int last = static_cast<int>(knots.size()) - 1;
        return {last, last, 0.0};
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const int hi = static_cast<int>(it - knots.begin());
    const int lo = hi - 1;
    return {lo, hi, double(x - knots[lo]) / double(knots[hi] - knots[lo])};
}

// Nearest knot; ties go to the lower one.
int nearest_knot(const std::vector<int>& knots, int x)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(knots.size()); ++i)
        if (std::abs(knots[i] - x) < std::abs(knots[best] - x))
            best = i;
    return best;
}

} // namespace

std::vector<CVectord> interpolate_grid(const CMatrixd& pilot_values, const PilotPattern& pattern, int user,
                                       InterpolationMode mode)
{
    const auto& syms = pattern.pilot_symbols(user);
    const auto& subs = pattern.pilot_subcarriers(user);
    const int pm = static_cast<int>(syms.size());
    const int pn = static_cast<int>(subs.size());
    if (pm == 0 || pn == 0)
        throw std::invalid_argument("interpolate_grid: empty pilot set");
    if (pilot_values.rows() != Index(pm) * pn)
        throw dimension_error("interpolate_grid: expected " + std::to_string(pm * pn) + " pilot rows");
    const int n_sub = pattern.subcarriers();
    const int n_sym = pattern.symbols();
    const Index width = pilot_values.cols();

    // frequency interpolation on each pilot-bearing symbol
    std::vector<CMatrixd> rows(pm, CMatrixd(n_sub, width));
    for (int i = 0; i < pm; ++i)
        for (int n = 0; n < n_sub; ++n)
        {
            const Bracket b = bracket(subs, n);
            rows[i].row(n) = (1.0 - b.t) * pilot_values.row(Index(i) * pn + b.lo) +
                             b.t * pilot_values.row(Index(i) * pn + b.hi);
        }

    std::vector<CVectord> out(static_cast<std::size_t>(n_sym) * n_sub);
    for (int m = 0; m < n_sym; ++m)
    {
        const bool inside = m >= syms.front() && m <= syms.back();
        if (mode == InterpolationMode::spectral_temporal && inside && pm > 1)
        {
            const Bracket b = bracket(syms, m);
            for (int n = 0; n < n_sub; ++n)
                out[std::size_t(m) * n_sub + n] =
                    ((1.0 - b.t) * rows[b.lo].row(n) + b.t * rows[b.hi].row(n)).transpose();
        }
        else
        {
            const int i = nearest_knot(syms, m);
            for (int n = 0; n < n_sub; ++n)
                out[std::size_t(m) * n_sub + n] = rows[i].row(n).transpose();
        }
    }
    return out;
}

int nearest_pilot(const PilotPattern& pattern, int user, int symbol, int subcarrier)
{
    // distance is separable over the rectangular lattice
    const int i = nearest_knot(pattern.pilot_symbols(user), symbol);
    const int j = nearest_knot(pattern.pilot_subcarriers(user), subcarrier);
    return i * pattern.size_n(user) + j;
}

std::vector<CMatrixd> user_error_covariances(const CMatrixd& pilot_error, const PilotPattern& pattern, int user,
                                             int antennas)
{
    const int pilots = static_cast<int>(pattern.positions(user).size());
    if (pilot_error.rows() != Index(pilots) * antennas || pilot_error.cols() != pilot_error.rows())
        throw dimension_error("user_error_covariances: error covariance of user " + std::to_string(user + 1) +
                              " has wrong dimension");
    std::vector<CMatrixd> blocks(pilots);
    for (int p = 0; p < pilots; ++p)
        blocks[p] = pilot_error.block(Index(p) * antennas, Index(p) * antennas, antennas, antennas);

    const int n_sub = pattern.subcarriers();
    std::vector<CMatrixd> out(static_cast<std::size_t>(pattern.symbols()) * n_sub);
    for (int m = 0; m < pattern.symbols(); ++m)
        for (int n = 0; n < n_sub; ++n)
            out[std::size_t(m) * n_sub + n] = blocks[nearest_pilot(pattern, user, m, n)];
    return out;
}

std::vector<CMatrixd> assemble_error_covariances(const std::vector<CMatrixd>& pilot_errors,
                                                 const PilotPattern& pattern, int antennas)
{
    if (static_cast<int>(pilot_errors.size()) != pattern.users())
        throw dimension_error("assemble_error_covariances: one pilot error covariance per user expected");
    std::vector<CMatrixd> total(static_cast<std::size_t>(pattern.symbols()) * pattern.subcarriers(),
                                CMatrixd::Zero(antennas, antennas));
    for (int k = 0; k < pattern.users(); ++k)
    {
        const auto blocks = user_error_covariances(pilot_errors[k], pattern, k, antennas);
        for (std::size_t i = 0; i < total.size(); ++i)
            total[i] += blocks[i];
    }
    return total;
}

void PowerDecayParams::validate() const
{
    if (alpha.rows() != beta.rows() || alpha.cols() != beta.cols())
        throw dimension_error("PowerDecayParams: alpha and beta maps differ in shape");
    if (alpha.size() > 0 && alpha.minCoeff() < 0.0)
        throw std::invalid_argument("PowerDecayParams: alpha must be >= 0");
    if (beta.size() > 0 && (beta.minCoeff() < 0.0 || beta.maxCoeff() > 1.0))
        throw std::invalid_argument("PowerDecayParams: beta must lie in [0, 1]");
}

PowerDecayFit fit_power_decay(const CMatrixd& block)
{
    const Index l = block.rows();
    PowerDecayFit fit;
    fit.alpha = std::max(0.0, block.diagonal().real().mean());
    if (l < 2 || fit.alpha <= 0.0)
        return fit;
    cdouble off = 0.0;
    for (Index a = 0; a + 1 < l; ++a)
        off += block(a, a + 1);
    off /= double(l - 1);
    fit.beta = std::clamp(std::abs(off) / fit.alpha, 0.0, 1.0);
    fit.gamma = std::arg(off);
    return fit;
}

void CovarianceAccumulator::add(const CVectord& v)
{
    if (v.size() != sum_.rows())
        throw dimension_error("CovarianceAccumulator: sample length mismatch");
    sum_.selfadjointView<Eigen::Lower>().rankUpdate(v);
    ++count_;
}

CMatrixd CovarianceAccumulator::covariance() const
{
    if (count_ == 0)
        throw std::invalid_argument("CovarianceAccumulator: no samples");
    CMatrixd full = sum_.selfadjointView<Eigen::Lower>();
    return full / double(count_);
}

CMatrixd model_pilot_covariance(const PilotPattern& pattern, int user, const CMatrixd& spatial,
                                const TemporalSpectralModel& tsm)
{
    const auto& syms = pattern.pilot_symbols(user);
    const auto& subs = pattern.pilot_subcarriers(user);
    const Index l = spatial.rows();
    const Index pm = Index(syms.size());
    const Index pn = Index(subs.size());
    CMatrixd sigma(pm * pn * l, pm * pn * l);
    for (Index i = 0; i < pm; ++i)
        for (Index j = 0; j < pn; ++j)
            for (Index i2 = 0; i2 < pm; ++i2)
                for (Index j2 = 0; j2 < pn; ++j2)
                {
                    const cdouble r = tsm.time_correlation(syms[i] - syms[i2]) *
                                      tsm.frequency_correlation(subs[j] - subs[j2]);
                    sigma.block((i * pn + j) * l, (i2 * pn + j2) * l, l, l) = r * spatial;
                }
    return sigma;
}

} // namespace mumimo
