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

#ifndef MUMIMO_GRID_HPP
#define MUMIMO_GRID_HPP

#include "mumimo/types.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace mumimo
{

enum class Duplex
{
    uplink_only,
    uplink_downlink
};

// Slot geometry and link parameters shared by every module.
struct GridConfig
{
    int symbols = 14;     // M, OFDM symbols per slot
    int subcarriers = 12; // N
    int users = 1;        // K
    int antennas = 1;     // L
    int bits_per_symbol = 2; // Q
    double sigma2 = 1.0;
    double subcarrier_spacing = 30e3;
    Duplex duplex = Duplex::uplink_only;

    // 2M when the downlink slot is simulated.
    int total_symbols() const { return duplex == Duplex::uplink_downlink ? 2 * symbols : symbols; }

    // Throws std::invalid_argument listing every violated invariant.
    void validate() const;
};

// Resource element position, 0-based (symbol, subcarrier).
struct ResourceElement
{
    int symbol = 0;
    int subcarrier = 0;
    auto operator<=>(const ResourceElement&) const = default;
};

enum class PilotLayout
{
    one_pilot, // "1P": pilots on two symbols per slot
    two_pilot  // "2P": pilots on four symbols per slot
};

// Per-user pilot RE sets. Each user's set is a rectangular lattice
// (pilot symbols x pilot subcarriers) and sets of distinct users are disjoint.
class PilotPattern
{
public:
    PilotPattern() = default;

    // Builds from explicit per-user position lists and validates the invariants.
    PilotPattern(int symbols, int subcarriers, std::vector<std::vector<ResourceElement>> positions);

    int users() const { return static_cast<int>(positions_.size()); }
    int symbols() const { return symbols_; }
    int subcarriers() const { return subcarriers_; }

    // Sorted symbol-major, then subcarrier.
    const std::vector<ResourceElement>& positions(int user) const { return positions_.at(user); }
    const std::vector<int>& pilot_symbols(int user) const { return lattice_symbols_.at(user); }
    const std::vector<int>& pilot_subcarriers(int user) const { return lattice_subcarriers_.at(user); }
    int size_m(int user) const { return static_cast<int>(lattice_symbols_.at(user).size()); }
    int size_n(int user) const { return static_cast<int>(lattice_subcarriers_.at(user).size()); }

    // User owning the pilot at (m, n) within the slot, or -1 for a data RE.
    int owner(int symbol, int subcarrier) const { return owner_[index(symbol, subcarrier)]; }
    bool is_pilot(int symbol, int subcarrier) const { return owner(symbol, subcarrier) >= 0; }

    // Number of REs in the slot carrying no pilot of any user.
    int data_re_count() const;

    // The same pattern shifted by `offset` symbols inside a grid of `total_symbols` symbols.
    PilotPattern shifted(int offset, int total_symbols) const;

private:
    std::size_t index(int m, int n) const { return static_cast<std::size_t>(m) * subcarriers_ + n; }

    int symbols_ = 0;
    int subcarriers_ = 0;
    std::vector<std::vector<ResourceElement>> positions_;
    std::vector<std::vector<int>> lattice_symbols_;
    std::vector<std::vector<int>> lattice_subcarriers_;
    std::vector<int> owner_;
};

// Default 1P/2P layouts. Pilot symbols are 3,4 (1P) and 3,4,10,11 (2P), 1-based.
// Each pair of adjacent pilot symbols offers 2*comb user slots (symbol, comb offset);
// K must divide that capacity. With comb = 2 and K = 4 user 1 gets the odd subcarriers
// (1-based) of symbol 3.
PilotPattern build_pilot_pattern(const GridConfig& cfg, PilotLayout layout, int comb = 2);

// Custom layout from 1-based (user, symbol, subcarrier) triples.
PilotPattern pilot_pattern_from_triples(const GridConfig& cfg,
                                        const std::vector<std::array<int, 3>>& triples);

// Square QAM with per-axis Gray labels and unit average energy.
// Point index equals the integer label; bit q of a label is its q-th most significant bit.
// The first Q/2 bits label the real axis, the rest the imaginary axis; bit value 0 in the
// leading position of an axis selects the positive half.
class Constellation
{
public:
    Constellation() = default;
    explicit Constellation(int bits_per_symbol);

    int bits_per_symbol() const { return bits_; }
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<cdouble>& points() const { return points_; }
    cdouble point(int label) const { return points_.at(label); }

    int bit(int label, int q) const { return (label >> (bits_ - 1 - q)) & 1; }

    // Labels of all points whose q-th bit equals `value`.
    const std::vector<int>& subset(int q, int value) const { return subsets_.at(2 * q + value); }

    int label_of(std::span<const std::uint8_t> bits) const;

    // Index of the nearest point; ties go to the lowest label.
    int nearest(cdouble x) const;

private:
    int bits_ = 0;
    std::vector<cdouble> points_;
    std::vector<std::vector<int>> subsets_;
};

// Supports Q in {2, 4, 6, 8}.
Constellation gray_constellation(int bits_per_symbol);

cdouble map_bits(std::span<const std::uint8_t> bits, const Constellation& c);

} // namespace mumimo

#endif // MUMIMO_GRID_HPP
