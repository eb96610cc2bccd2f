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
#include "mumimo/io.hpp"
#include "mumimo/sim.hpp"
#include "mumimo/waveform.hpp"
#include "sim_internal.hpp"

#include <cmath>

namespace mumimo
{

using namespace detail;

namespace
{

constexpr std::size_t chunk_symbols = 64;
constexpr std::size_t psd_symbols = 512;

struct ChunkResult
{
    PowerRatioStatistics stats;
    double inband_sum = 0.0;
    double total_sum = 0.0;
    double reduction_sum = 0.0;
    std::size_t count = 0;
    std::vector<CVectord> psd_batch;
};

// Frequency-domain symbol s (shared by every R) and the subcarriers carrying pilots.
CVectord draw_symbol(const SimConfig& cfg, const Constellation& cons, std::size_t s, std::vector<int>& pilots)
{
    const auto& w = cfg.waveform;
    const int n = w.shape.subcarriers;
    Rng rng = derive_rng(cfg.seed, stream_waveform_data, s);
    std::uniform_int_distribution<int> pick(0, cons.size() - 1);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    CVectord x(n);
    for (int b = 0; b < n; ++b)
        x[b] = cons.point(pick(rng));
    pilots.clear();
    if (w.pilot_period > 0 && s % std::size_t(w.pilot_period) == 0)
        for (int b = 0; b < n; b += 2)
        {
            pilots.push_back(b);
            x[b] = std::polar(1.0, phase(rng));
        }
    return x;
}

} // namespace

SimReport run_waveform_report(const SimConfig& cfg)
{
    cfg.validate();
    const auto& w = cfg.waveform;
    const int n = w.shape.subcarriers;
    const Constellation cons(w.bits_per_symbol);
    const std::size_t symbols = std::size_t(cfg.trials);
    const std::size_t samples = symbols * std::size_t(n) * std::size_t(w.shape.oversampling);
    double max_eps = 0.0;
    for (double e : w.eps)
        max_eps = std::max(max_eps, e);
    const std::size_t capacity = std::size_t(std::floor(max_eps * double(samples))) + 1;

    RMatrixd j_mat, k_mat;
    if (w.aclr)
    {
        j_mat = inband_energy_matrix(w.shape);
        k_mat = total_energy_matrix(w.shape);
    }
    ToneReservationOptions tr_opts;
    tr_opts.clip_ratio = w.clip_ratio;

    SimReport report = make_report(cfg);
    report.columns = {"reserved", "symbols", "samples"};
    for (double e : w.eps)
        report.columns.push_back("papr_db_eps_" + format_number(e));
    report.columns.insert(report.columns.end(),
                          {"aclr_linear", "aclr_db", "inband_energy", "total_energy", "mean_peak_reduction_db"});
    std::vector<double> thresholds;
    for (int i = 0; double(i) * w.ccdf_step_db <= w.ccdf_max_db + 1e-12; ++i)
        thresholds.push_back(std::round(double(i) * w.ccdf_step_db * 1e9) / 1e9);

    for (int reserved : w.reserved)
    {
        const std::string label = "R=" + std::to_string(reserved);
        try
        {
            PowerRatioStatistics stats(capacity);
            double inband = 0.0, total = 0.0, reduction = 0.0;
            std::vector<CVectord> psd_batch;
            const std::size_t chunks = (symbols + chunk_symbols - 1) / chunk_symbols;
            ordered_parallel<ChunkResult>(
                chunks, cfg.workers,
                [&](std::size_t ci) {
                    ChunkResult r{PowerRatioStatistics(capacity), 0.0, 0.0, 0.0, 0, {}};
                    OfdmModulator mod(n, w.shape.oversampling);
                    const std::size_t begin = ci * chunk_symbols;
                    const std::size_t end = std::min(symbols, begin + chunk_symbols);
                    CMatrixd batch(n, Index(end - begin));
                    std::vector<int> pilots;
                    for (std::size_t s = begin; s < end; ++s)
                    {
                        CVectord x = draw_symbol(cfg, cons, s, pilots);
                        if (reserved > 0)
                        {
                            Rng prt_rng = derive_rng(cfg.seed, stream_waveform_prt, s);
                            auto prt = random_prt_placement(n, reserved, prt_rng, pilots);
                            for (int b : prt)
                                x[b] = 0.0;
                            const auto plan = ToneReservationPlan::from_reserved(n, std::move(prt));
                            const auto tr = tone_reservation(x, plan, mod, w.tr_iterations, tr_opts);
                            x += tr.r;
                            r.reduction_sum += linear_to_db(tr.input_peak / tr.peak);
                        }
                        r.stats.add(mod.modulate(x));
                        batch.col(Index(s - begin)) = x;
                        if (s < psd_symbols)
                            r.psd_batch.push_back(x);
                    }
                    if (w.aclr)
                    {
                        const AclrResult a = aclr(batch, j_mat, k_mat);
                        r.inband_sum = a.inband * double(end - begin);
                        r.total_sum = a.total * double(end - begin);
                    }
                    r.count = end - begin;
                    return r;
                },
                [&](ChunkResult&& r) {
                    stats.merge(r.stats);
                    inband += r.inband_sum;
                    total += r.total_sum;
                    reduction += r.reduction_sum;
                    for (auto& x : r.psd_batch)
                        psd_batch.push_back(std::move(x));
                },
                32);

            ReportRow row;
            row.label = label;
            row.snr_db = std::nan("");
            row.values = {double(reserved), double(symbols), double(stats.count())};
            for (double e : w.eps)
                row.values.push_back(stats.papr_db(e));
            if (w.aclr)
            {
                const double mean_in = inband / double(symbols);
                const double mean_total = total / double(symbols);
                const double lin = mean_total / mean_in - 1.0;
                row.values.insert(row.values.end(), {lin, linear_to_db(lin), mean_in, mean_total});
            }
            else
                row.values.insert(row.values.end(), 4, std::nan(""));
            row.values.push_back(reduction / double(symbols));
            report.rows.push_back(std::move(row));

            ReportTable ccdf{"ccdf_R" + std::to_string(reserved), "e_db", "probability", thresholds,
                             stats.ccdf(thresholds)};
            report.tables.push_back(std::move(ccdf));

            CMatrixd xb(n, Index(psd_batch.size()));
            for (std::size_t i = 0; i < psd_batch.size(); ++i)
                xb.col(Index(i)) = psd_batch[i];
            std::vector<double> freqs;
            for (int i = -20 * n; i <= 20 * n; ++i)
                freqs.push_back(0.05 * i * w.shape.subcarrier_spacing());
            const RVectord psd = power_spectral_density(
                xb, w.shape, Eigen::Map<const RVectord>(freqs.data(), Index(freqs.size())));
            report.tables.push_back({"psd_R" + std::to_string(reserved), "frequency", "psd", freqs,
                                     std::vector<double>(psd.data(), psd.data() + psd.size())});
        }
        catch (const std::exception& e)
        {
            auto row = error_row(label, std::nan(""), report.columns.size(), e.what());
            row.values[0] = double(reserved);
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

} // namespace mumimo
