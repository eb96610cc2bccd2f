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

#ifndef MUMIMO_DEMAP_HPP
#define MUMIMO_DEMAP_HPP

#include "mumimo/grid.hpp"
#include "mumimo/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mumimo
{

// LLRs are ln(P(b=1) / P(b=0)): positive favours bit 1.
inline constexpr double default_llr_max = 40.0;

// Exact (log-sum-exp) AWGN demapper for x_hat = x + CN(0, variance), clamped to +-llr_max.
RVectord awgn_llr(cdouble x_hat, double variance, const Constellation& c, double llr_max = default_llr_max);

// bit = 1 iff llr > 0; llr == 0 maps to 0.
std::vector<std::uint8_t> llr_to_bits(const RVectord& llr);

// -log2 of the probability the LLR assigns to `bit` (sigmoid link), computed stably.
double bit_cross_entropy(double llr, int bit);

struct RateReport
{
    double bce = 0.0;                 // mean cross-entropy per bit (bits)
    std::vector<double> loss_per_user; // L_k (bits)
    std::vector<double> rate_per_user; // C_k = Card(D) Q - L_k
    double bits_per_user = 0.0;        // Card(D) Q
};

// `llrs[k]` and `bits[k]` hold the Card(D) Q LLRs / bits of user k in the same RE-major,
// bit-minor order. The per-RE loss is clamped to Q bits.
RateReport bce_rate_metric(const std::vector<RVectord>& llrs, const std::vector<std::vector<std::uint8_t>>& bits,
                           int bits_per_symbol);

} // namespace mumimo

#endif // MUMIMO_DEMAP_HPP
