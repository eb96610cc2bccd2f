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

#include "mumimo/downlink.hpp"

namespace mumimo
{

DownlinkReceiver::DownlinkReceiver(const CMatrixd& omega, const CMatrixd& psi, double sigma2, PilotPattern pattern,
                                   InterpolationMode mode)
    : main_(omega, sigma2), interference_(psi, sigma2), sigma2_(sigma2), pattern_(std::move(pattern)), mode_(mode)
{
    const int streams = pattern_.users();
    for (int i = 0; i < streams; ++i)
        if (static_cast<Index>(pattern_.positions(i).size()) != omega.rows() || omega.rows() != psi.rows())
            throw dimension_error("DownlinkReceiver: Omega/Psi must match the pilot count of every stream (" +
                                  std::to_string(pattern_.positions(i).size()) + ")");
    const std::size_t res = std::size_t(pattern_.symbols()) * pattern_.subcarriers();
    main_var_.assign(streams, std::vector<double>(res));
    inter_var_.assign(streams, std::vector<double>(res));
    for (int i = 0; i < streams; ++i)
        for (int m = 0; m < pattern_.symbols(); ++m)
            for (int n = 0; n < pattern_.subcarriers(); ++n)
            {
                const int p = nearest_pilot(pattern_, i, m, n);
                const std::size_t re = std::size_t(m) * pattern_.subcarriers() + n;
                main_var_[i][re] = std::max(0.0, main_.error_covariance()(p, p).real());
                inter_var_[i][re] = std::max(0.0, interference_.error_covariance()(p, p).real());
            }
}

DownlinkUserEstimate DownlinkReceiver::estimate_equalize(int user, const std::vector<cdouble>& received) const
{
    const int streams = pattern_.users();
    const int n_sub = pattern_.subcarriers();
    const std::size_t res = std::size_t(pattern_.symbols()) * n_sub;
    if (user < 0 || user >= streams)
        throw std::invalid_argument("DownlinkReceiver: user index out of range");
    if (received.size() != res)
        throw dimension_error("DownlinkReceiver: received grid has " + std::to_string(received.size()) +
                              " REs, expected " + std::to_string(res));

    DownlinkUserEstimate out;
    out.g_hat.assign(res, CVectord::Zero(streams));
    out.v.assign(res, RVectord::Zero(streams));
    out.s_hat.assign(res, cdouble(0.0));
    for (int i = 0; i < streams; ++i)
    {
        const auto& pos = pattern_.positions(i);
        CMatrixd y(Index(pos.size()), 1);
        for (std::size_t p = 0; p < pos.size(); ++p)
            y(Index(p), 0) = received[std::size_t(pos[p].symbol) * n_sub + pos[p].subcarrier];
        const CMatrixd est = (i == user ? main_ : interference_).estimate(y);
        const auto grid = interpolate_grid(est, pattern_, i, mode_);
        const auto& var = (i == user ? main_var_ : inter_var_)[i];
        for (std::size_t re = 0; re < res; ++re)
        {
            out.g_hat[re][i] = grid[re][0];
            out.v[re][i] = var[re];
        }
    }
    for (std::size_t re = 0; re < res; ++re)
    {
        const cdouble g = out.g_hat[re][user];
        if (g == cdouble(0.0))
            throw unobservable_stream_error("DownlinkReceiver: zero main channel estimate at RE " +
                                                std::to_string(re),
                                            {user});
        out.s_hat[re] = received[re] / g;
    }
    return out;
}

} // namespace mumimo
