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

#ifndef MUMIMO_SIM_HPP
#define MUMIMO_SIM_HPP

#include "mumimo/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mumimo
{

struct ReportRow
{
    std::string label;
    double snr_db = 0.0;
    std::vector<double> values; // one per SimReport::columns entry
    std::string status = "ok";
};

// Two-column table attached to a report (CCDF or PSD of one waveform row).
struct ReportTable
{
    std::string name; // file suffix, e.g. "ccdf_R16"
    std::string first;
    std::string second;
    std::vector<double> a;
    std::vector<double> b;
};

struct SimReport
{
    Scenario scenario = Scenario::uplink;
    std::string config_hash;
    std::string config_json; // canonical config echoed in the JSON summary
    std::vector<std::string> columns;
    std::vector<ReportRow> rows;
    std::vector<ReportTable> tables;

    // Value of `column` in row `row`; throws std::out_of_range for unknown columns.
    double value(std::size_t row, const std::string& column) const;
    const ReportRow& find(const std::string& label, double snr_db) const;

    void write_csv(std::ostream& os) const;
    void write_json(std::ostream& os) const;
    // <prefix>.csv, <prefix>.json and <prefix>_<table>.csv; returns the written paths.
    std::vector<std::string> write_files(const std::string& prefix) const;
};

SimReport run_uplink_sweep(const SimConfig& cfg);
SimReport run_downlink_sweep(const SimConfig& cfg);
SimReport run_detector_bench(const SimConfig& cfg);
SimReport run_waveform_report(const SimConfig& cfg);
SimReport run_scenario(const SimConfig& cfg);

// Empirical second-order statistics of a generated dataset.
struct ChannelStatistics
{
    std::vector<CMatrixd> sigma;                 // per-user pilot covariance (uplink)
    std::vector<double> snr_db;                  // downlink points (duplex configs only)
    std::vector<CMatrixd> omega;                 // per SNR point
    std::vector<CMatrixd> psi;                   // per SNR point
};

ChannelStatistics estimate_channel_statistics(const SimConfig& cfg);
// <prefix>_sigma_u<k>.csv, <prefix>_omega_snr<i>.csv, <prefix>_psi_snr<i>.csv (1-based k, i).
std::vector<std::string> write_channel_statistics(const ChannelStatistics& stats, const std::string& prefix);

} // namespace mumimo

#endif // MUMIMO_SIM_HPP
