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

#include "mumimo/grid.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mumimo
{

void GridConfig::validate() const
{
    std::vector<std::string> errors;
    if (symbols < 1)
        errors.emplace_back("symbols (M) must be >= 1");
    if (subcarriers < 1)
        errors.emplace_back("subcarriers (N) must be >= 1");
    if (users < 1)
        errors.emplace_back("users (K) must be >= 1");
    if (users > antennas)
        errors.emplace_back("users (K) must not exceed antennas (L)");
    if (bits_per_symbol != 1 && bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6 &&
        bits_per_symbol != 8)
        errors.emplace_back("bits_per_symbol (Q) must be one of 1, 2, 4, 6, 8");
    if (!(sigma2 > 0.0))
        errors.emplace_back("sigma2 must be > 0");
    if (!(subcarrier_spacing > 0.0))
        errors.emplace_back("subcarrier_spacing must be > 0");
    if (errors.empty())
        return;
    std::ostringstream os;
    os << "invalid grid configuration:";
    for (const auto& e : errors)
        os << "\n  " << e;
    throw std::invalid_argument(os.str());
}

PilotPattern::PilotPattern(int symbols, int subcarriers, std::vector<std::vector<ResourceElement>> positions)
    : symbols_(symbols), subcarriers_(subcarriers), positions_(std::move(positions))
{
    if (symbols_ < 1 || subcarriers_ < 1)
        throw std::invalid_argument("pilot pattern: empty grid");
    owner_.assign(static_cast<std::size_t>(symbols_) * subcarriers_, -1);
    for (std::size_t k = 0; k < positions_.size(); ++k)
    {
        auto& pos = positions_[k];
        if (pos.empty())
            throw std::invalid_argument("pilot pattern: user " + std::to_string(k + 1) + " has no pilots");
        std::sort(pos.begin(), pos.end());
        std::set<int> syms, subs;
        for (const auto& re : pos)
        {
            if (re.symbol < 0 || re.symbol >= symbols_ || re.subcarrier < 0 || re.subcarrier >= subcarriers_)
                throw std::invalid_argument("pilot pattern: position outside the slot for user " +
                                            std::to_string(k + 1));
            auto& o = owner_[index(re.symbol, re.subcarrier)];
            if (o >= 0)
                throw std::invalid_argument("pilot pattern: RE (" + std::to_string(re.symbol + 1) + ", " +
                                            std::to_string(re.subcarrier + 1) + ") assigned twice");
            o = static_cast<int>(k);
            syms.insert(re.symbol);
            subs.insert(re.subcarrier);
        }
        if (syms.size() * subs.size() != pos.size())
            throw std::invalid_argument("pilot pattern: pilots of user " + std::to_string(k + 1) +
                                        " do not form a rectangular lattice");
        lattice_symbols_.emplace_back(syms.begin(), syms.end());
        lattice_subcarriers_.emplace_back(subs.begin(), subs.end());
    }
}

int PilotPattern::data_re_count() const
{
    return static_cast<int>(std::count(owner_.begin(), owner_.end(), -1));
}

PilotPattern PilotPattern::shifted(int offset, int total_symbols) const
{
    auto pos = positions_;
    for (auto& user : pos)
        for (auto& re : user)
            re.symbol += offset;
    return PilotPattern(total_symbols, subcarriers_, std::move(pos));
}

PilotPattern build_pilot_pattern(const GridConfig& cfg, PilotLayout layout, int comb)
{
    cfg.validate();
    if (comb < 1)
        throw std::invalid_argument("pilot pattern: comb must be >= 1");
    std::vector<std::array<int, 2>> pairs{{2, 3}};
    if (layout == PilotLayout::two_pilot)
        pairs.push_back({9, 10});
    const int last = pairs.back()[1];
    if (cfg.symbols <= last)
        throw std::invalid_argument("pilot pattern: layout needs at least " + std::to_string(last + 1) +
                                    " symbols per slot");
    const int capacity = 2 * comb;
    if (capacity % cfg.users != 0)
        throw std::invalid_argument("pilot pattern: " + std::to_string(cfg.users) +
                                    " users cannot share " + std::to_string(capacity) +
                                    " disjoint pilot combs per symbol pair");
    if (cfg.subcarriers < comb)
        throw std::invalid_argument("pilot pattern: fewer subcarriers than comb offsets");

    const int per_user = capacity / cfg.users;
    std::vector<std::vector<ResourceElement>> positions(cfg.users);
    for (int k = 0; k < cfg.users; ++k)
        for (int s = k * per_user; s < (k + 1) * per_user; ++s)
        {
            const int sym_in_pair = s / comb;
            const int offset = s % comb;
            for (const auto& pair : pairs)
                for (int n = offset; n < cfg.subcarriers; n += comb)
                    positions[k].push_back({pair[sym_in_pair], n});
        }
    return PilotPattern(cfg.symbols, cfg.subcarriers, std::move(positions));
}

PilotPattern pilot_pattern_from_triples(const GridConfig& cfg, const std::vector<std::array<int, 3>>& triples)
{
    cfg.validate();
    std::vector<std::vector<ResourceElement>> positions(cfg.users);
    for (const auto& t : triples)
    {
        if (t[0] < 1 || t[0] > cfg.users)
            throw std::invalid_argument("pilot layout: user index " + std::to_string(t[0]) + " out of range");
        positions[t[0] - 1].push_back({t[1] - 1, t[2] - 1});
    }
    return PilotPattern(cfg.symbols, cfg.subcarriers, std::move(positions));
}

Constellation::Constellation(int bits_per_symbol) : bits_(bits_per_symbol)
{
    if (bits_ < 2 || bits_ > 8 || bits_ % 2 != 0)
        throw std::invalid_argument("unsupported bits per symbol " + std::to_string(bits_) +
                                    " (square QAM needs Q in {2, 4, 6, 8})");
    const int axis_bits = bits_ / 2;
    const int levels = 1 << axis_bits;

    // amplitude of each per-axis Gray label; level index 0 is the most positive
    std::vector<double> amplitude(levels);
    for (int i = 0; i < levels; ++i)
        amplitude[i ^ (i >> 1)] = double(levels - 1 - 2 * i);

    points_.resize(std::size_t(1) << bits_);
    for (int label = 0; label < size(); ++label)
        points_[label] = {amplitude[label >> axis_bits], amplitude[label & (levels - 1)]};

    double energy = 0.0;
    for (const auto& p : points_)
        energy += std::norm(p);
    const double scale = 1.0 / std::sqrt(energy / size());
    for (auto& p : points_)
        p *= scale;

    subsets_.resize(2 * bits_);
    for (int q = 0; q < bits_; ++q)
        for (int label = 0; label < size(); ++label)
            subsets_[2 * q + bit(label, q)].push_back(label);
}

int Constellation::label_of(std::span<const std::uint8_t> bits) const
{
    if (static_cast<int>(bits.size()) != bits_)
        throw dimension_error("bit vector length " + std::to_string(bits.size()) + " does not match Q = " +
                              std::to_string(bits_));
    int label = 0;
    for (auto b : bits)
    {
        if (b > 1)
            throw std::invalid_argument("bit values must be 0 or 1");
        label = (label << 1) | b;
    }
    return label;
}

int Constellation::nearest(cdouble x) const
{
    int best = 0;
    double best_d = std::norm(x - points_[0]);
    for (int i = 1; i < size(); ++i)
    {
        const double d = std::norm(x - points_[i]);
        if (d < best_d)
        {
            best_d = d;
            best = i;
        }
    }
    return best;
}

Constellation gray_constellation(int bits_per_symbol) { return Constellation(bits_per_symbol); }

cdouble map_bits(std::span<const std::uint8_t> bits, const Constellation& c)
{
    return c.point(c.label_of(bits));
}

} // namespace mumimo
