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

#ifndef MUMIMO_CONFIG_HPP
#define MUMIMO_CONFIG_HPP

#include "mumimo/chanest.hpp"
#include "mumimo/grid.hpp"
#include "mumimo/waveform.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mumimo
{

enum class Scenario
{
    uplink,
    downlink,
    detect_bench,
    waveform
};

enum class CsiMode
{
    perfect,
    exact,
    power_decay
};

enum class ChannelKind
{
    kronecker,
    awgn
};

enum class CovarianceSource
{
    model,
    empirical,
    file
};

struct ChannelParams
{
    ChannelKind kind = ChannelKind::kronecker;
    double doppler = 0.0;
    double delay_spread = 0.0;
    double angular_std_deg = 10.0;
    double spacing = 0.5;
    std::vector<double> angles_deg; // empty: spread evenly over [-60, 60] degrees
    bool normalize = true;
};

struct PilotParams
{
    PilotLayout layout = PilotLayout::one_pilot;
    int comb = 2;
    std::vector<std::array<int, 3>> triples; // 1-based (user, symbol, subcarrier); overrides layout
};

struct ReceiverParams
{
    CsiMode csi = CsiMode::exact;
    InterpolationMode interpolation = InterpolationMode::spectral_temporal;
    int group_symbols = 7;
    int group_subcarriers = 2;
    CovarianceSource covariance = CovarianceSource::model;
    int covariance_samples = 2000;
    std::vector<std::string> covariance_files; // one per user
    std::optional<std::array<double, 3>> power_decay; // alpha, beta, gamma
};

struct DownlinkParams
{
    int statistics_samples = 200;
};

struct DetectorBenchParams
{
    bool ml = true;
    bool lmmse = true;
    bool mmnet = true;
    int iterations = 1;
    double psi = 1.0;
    std::string params_file;
    bool residual_uses_antenna_count = true;
};

struct WaveformParams
{
    WaveformConfig shape;
    int bits_per_symbol = 4;
    std::vector<double> eps{0.0, 1e-2, 1e-3};
    std::vector<int> reserved{0};
    int tr_iterations = 50;
    double clip_ratio = 0.8;
    int pilot_period = 0; // every pilot_period-th symbol carries unit-circle pilots on even subcarriers
    double ccdf_step_db = 0.1;
    double ccdf_max_db = 12.0;
    bool aclr = true;
};

struct SimConfig
{
    Scenario scenario = Scenario::uplink;
    std::uint64_t seed = 1;
    int trials = 100;
    std::vector<double> snr_db{0.0, 5.0, 10.0};
    std::string output;
    int workers = 1; // not part of the hash: results never depend on it

    GridConfig grid;
    PilotParams pilots;
    ChannelParams channel;
    ReceiverParams receiver;
    DownlinkParams downlink;
    DetectorBenchParams detector;
    WaveformParams waveform;

    // Throws config_error listing every violated invariant.
    void validate() const;
    PilotPattern pilot_pattern() const;
    std::vector<ScatteringModel> scattering_models() const;
};

class config_error : public std::invalid_argument
{
public:
    config_error(const std::string& what, std::vector<std::string> problems, std::size_t line = 0);
    const std::vector<std::string>& problems() const { return problems_; }
    std::size_t line() const { return line_; }

private:
    std::vector<std::string> problems_;
    std::size_t line_;
};

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

// Canonical JSON with every field filled in; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& cfg);

// FNV-1a 64 of the canonical JSON without the output path and worker count, as 16 hex digits.
std::string config_hash(const SimConfig& cfg);

bool operator==(const SimConfig& a, const SimConfig& b);

std::string to_string(Scenario s);
std::string to_string(CsiMode m);
CsiMode parse_csi_mode(const std::string& s);

} // namespace mumimo

#endif // MUMIMO_CONFIG_HPP
