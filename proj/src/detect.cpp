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

#include <algorithm>
#include <limits>

namespace mumimo
{

HardDecision hard_decision(const CVectord& soft, const Constellation& c)
{
    HardDecision out;
    out.labels.resize(soft.size());
    out.symbols.resize(soft.size());
    for (Index i = 0; i < soft.size(); ++i)
    {
        out.labels[i] = c.nearest(soft[i]);
        out.symbols[i] = c.point(out.labels[i]);
    }
    return out;
}

HardDecision ml_detect(const CMatrixd& h, const CVectord& y, const Constellation& c)
{
    const Index k = h.cols();
    if (y.size() != h.rows())
        throw dimension_error("ml_detect: observation length mismatch");
    if (c.bits_per_symbol() * k > 20)
        throw std::invalid_argument("ml_detect: search space 2^" + std::to_string(c.bits_per_symbol() * k) +
                                    " is too large (Q K must be <= 20)");
    const int order = c.size();
    std::vector<int> digits(k, 0);
    CVectord x(k);
    for (Index i = 0; i < k; ++i)
        x[i] = c.point(0);

    HardDecision best;
    double best_metric = std::numeric_limits<double>::infinity();
    while (true)
    {
        const double metric = (y - h * x).squaredNorm();
        if (metric < best_metric)
        {
            best_metric = metric;
            best.labels = digits;
            best.symbols = x;
        }
        // lexicographic increment, last stream fastest
        Index pos = k - 1;
        while (pos >= 0 && ++digits[pos] == order)
        {
            digits[pos] = 0;
            x[pos] = c.point(0);
            --pos;
        }
        if (pos < 0)
            break;
        x[pos] = c.point(digits[pos]);
    }
    return best;
}

cdouble gaussian_denoiser(cdouble kappa, double tau, const Constellation& c)
{
    const auto& pts = c.points();
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& p : pts)
        dmin = std::min(dmin, std::norm(kappa - p));
    if (!(tau > 0.0))
        return c.point(c.nearest(kappa));
    cdouble num = 0.0;
    double den = 0.0;
    for (const auto& p : pts)
    {
        const double w = std::exp(-(std::norm(kappa - p) - dmin) / tau);
        num += w * p;
        den += w;
    }
    return num / den;
}

void DetectorParams::validate() const
{
    const Index k = theta.rows();
    if (theta.cols() != k || k < 1)
        throw dimension_error("DetectorParams: Theta must be square and non-empty");
    if (scalings.empty())
        throw std::invalid_argument("DetectorParams: at least one iteration is required");
    if (psi.size() != scalings.size())
        throw dimension_error("DetectorParams: psi and theta scalings differ in iteration count");
    for (std::size_t i = 0; i < scalings.size(); ++i)
    {
        if (scalings[i].size() != k || psi[i].size() != k)
            throw dimension_error("DetectorParams: iteration " + std::to_string(i + 1) + " has wrong length");
        if (!(psi[i].minCoeff() > 0.0))
            throw std::invalid_argument("DetectorParams: psi must be > 0 elementwise");
    }
}

DetectorParams DetectorParams::lmmse_initialized(const CMatrixd& r, double sigma2, int iterations, double psi)
{
    DetectorParams p;
    p.theta = lmmse_matrix(r, sigma2);
    p.scalings.assign(iterations, RVectord::Zero(r.cols()));
    p.psi.assign(iterations, RVectord::Constant(r.cols(), psi));
    return p;
}

DetectorState mmnet_iterate(const DetectorState& state, const CMatrixd& r, const CVectord& y_bar,
                            const CMatrixd& theta_i, const RVectord& psi_i, double sigma2, int antennas,
                            const Constellation& c, const DetectorOptions& opts)
{
    const Index k = r.cols();
    if (r.rows() != k || y_bar.size() != k || theta_i.rows() != k || theta_i.cols() != k || psi_i.size() != k ||
        state.x_hat.size() != k)
        throw dimension_error("mmnet_iterate: inconsistent dimensions");

    const CVectord residual = y_bar - r * state.x_hat;
    DetectorState next;
    next.kappa = state.x_hat + theta_i * residual;

    const double noise_dims = opts.residual_uses_antenna_count ? double(antennas) : double(k);
    const double excess = std::max(0.0, residual.squaredNorm() - noise_dims * sigma2);
    const double leak = (CMatrixd::Identity(k, k) - theta_i * r).squaredNorm() / r.squaredNorm();
    const double common = (leak * excess + theta_i.squaredNorm() * sigma2) / double(k);
    next.tau = (psi_i * common).cwiseMax(opts.tau_floor);

    next.x_hat.resize(k);
    for (Index i = 0; i < k; ++i)
        next.x_hat[i] = gaussian_denoiser(next.kappa[i], next.tau[i], c);
    return next;
}

MmnetResult mmnet_detect(const CMatrixd& h, const CVectord& y, double sigma2, const DetectorParams& params,
                         const Constellation& c, const DetectorOptions& opts)
{
    params.validate();
    if (params.users() != h.cols())
        throw dimension_error("mmnet_detect: parameters are for " + std::to_string(params.users()) +
                              " users, channel has " + std::to_string(h.cols()));
    const auto red = qr_reduce(h, y);
    MmnetResult out;
    out.state.x_hat = CVectord::Zero(h.cols());
    for (int i = 0; i < params.iterations(); ++i)
    {
        const CMatrixd theta_i = expand_shared_params(params.theta, params.scalings[i]);
        out.state = mmnet_iterate(out.state, red.r, red.y_bar, theta_i, params.psi[i], sigma2,
                                  static_cast<int>(h.rows()), c, opts);
    }
    out.decision = hard_decision(out.state.x_hat, c);
    return out;
}

} // namespace mumimo
