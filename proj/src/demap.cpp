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

#include "mumimo/demap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mumimo
{

namespace
{

double log_sum_exp(const std::vector<double>& v)
{
    const double peak = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v)
        s += std::exp(x - peak);
    return peak + std::log(s);
}

} // namespace

RVectord awgn_llr(cdouble x_hat, double variance, const Constellation& c, double llr_max)
{
    if (!(variance > 0.0))
        throw std::invalid_argument("awgn_llr: noise variance must be > 0");
    const int q_bits = c.bits_per_symbol();
    std::vector<double> metric(c.size());
    for (int i = 0; i < c.size(); ++i)
        metric[i] = -std::norm(x_hat - c.point(i)) / variance;

    RVectord llr(q_bits);
    std::vector<double> ones, zeros;
    for (int q = 0; q < q_bits; ++q)
    {
        ones.clear();
        zeros.clear();
        for (int label : c.subset(q, 1))
            ones.push_back(metric[label]);
        for (int label : c.subset(q, 0))
            zeros.push_back(metric[label]);
        llr[q] = std::clamp(log_sum_exp(ones) - log_sum_exp(zeros), -llr_max, llr_max);
    }
    return llr;
}

std::vector<std::uint8_t> llr_to_bits(const RVectord& llr)
{
    std::vector<std::uint8_t> bits(llr.size());
    for (Index i = 0; i < llr.size(); ++i)
        bits[i] = llr[i] > 0.0 ? 1 : 0;
    return bits;
}

double bit_cross_entropy(double llr, int bit)
{
    // -log2 sigmoid(s) with s = +llr for bit 1, -llr for bit 0, i.e. log2(1 + e^{-s})
    const double s = bit ? llr : -llr;
    if (s >= 0.0)
        return std::log1p(std::exp(-s)) / std::numbers::ln2;
    return -s / std::numbers::ln2 + std::log2(1.0 + std::exp(s));
}

RateReport bce_rate_metric(const std::vector<RVectord>& llrs, const std::vector<std::vector<std::uint8_t>>& bits,
                           int bits_per_symbol)
{
    if (llrs.size() != bits.size() || llrs.empty())
        throw dimension_error("bce_rate_metric: one LLR and one bit vector per user expected");
    if (bits_per_symbol < 1)
        throw std::invalid_argument("bce_rate_metric: bits_per_symbol must be >= 1");
    const Index n = llrs.front().size();
    if (n % bits_per_symbol != 0)
        throw dimension_error("bce_rate_metric: LLR count is not a multiple of Q");

    RateReport out;
    out.bits_per_user = double(n);
    double total = 0.0;
    for (std::size_t k = 0; k < llrs.size(); ++k)
    {
        if (llrs[k].size() != n || static_cast<Index>(bits[k].size()) != n)
            throw dimension_error("bce_rate_metric: shape mismatch for user " + std::to_string(k + 1));
        double loss = 0.0;
        for (Index re = 0; re < n; re += bits_per_symbol)
        {
            double per_re = 0.0;
            for (int q = 0; q < bits_per_symbol; ++q)
                per_re += bit_cross_entropy(llrs[k][re + q], bits[k][re + q]);
            loss += std::min(per_re, double(bits_per_symbol));
        }
        out.loss_per_user.push_back(loss);
        out.rate_per_user.push_back(out.bits_per_user - loss);
        total += loss;
    }
    out.bce = total / (out.bits_per_user * double(llrs.size()));
    return out;
}

} // namespace mumimo
