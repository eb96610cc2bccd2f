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
#include "mumimo/io.hpp"
#include "mumimo/sim.hpp"
#include "sim_internal.hpp"

#include <array>
#include <bit>

namespace mumimo
{

using namespace detail;

namespace
{

enum Detector
{
    det_lmmse,
    det_ml,
    det_mmnet,
    det_count
};

constexpr std::array<const char*, det_count> detector_names{"lmmse", "ml", "mmnet"};

struct BenchCounters
{
    std::array<std::uint64_t, det_count> symbols{};
    std::array<std::uint64_t, det_count> symbol_errors{};
    std::array<std::uint64_t, det_count> bits{};
    std::array<std::uint64_t, det_count> bit_errors{};

    void merge(const BenchCounters& o)
    {
        for (int d = 0; d < det_count; ++d)
        {
            symbols[d] += o.symbols[d];
            symbol_errors[d] += o.symbol_errors[d];
            bits[d] += o.bits[d];
            bit_errors[d] += o.bit_errors[d];
        }
    }
};

void count(BenchCounters& c, Detector d, const std::vector<int>& sent, const HardDecision& got, int q)
{
    for (std::size_t k = 0; k < sent.size(); ++k)
    {
        const int diff = std::popcount(static_cast<unsigned>(sent[k] ^ got.labels[k]));
        c.symbols[d] += 1;
        c.symbol_errors[d] += diff ? 1 : 0;
        c.bits[d] += std::uint64_t(q);
        c.bit_errors[d] += std::uint64_t(diff);
    }
}

} // namespace

SimReport run_detector_bench(const SimConfig& cfg)
{
    cfg.validate();
    const int k_users = cfg.grid.users;
    const int l = cfg.grid.antennas;
    const int q = cfg.grid.bits_per_symbol;
    const Constellation cons(q);
    std::vector<SpatialSampler> samplers;
    for (const auto& m : cfg.scattering_models())
        samplers.emplace_back(m);
    std::optional<DetectorParams> shared;
    if (cfg.detector.mmnet && !cfg.detector.params_file.empty())
        shared = load_detector_params(cfg.detector.params_file, k_users, cfg.detector.iterations);
    DetectorOptions opts;
    opts.residual_uses_antenna_count = cfg.detector.residual_uses_antenna_count;
    const std::array<bool, det_count> enabled{cfg.detector.lmmse, cfg.detector.ml, cfg.detector.mmnet};

    SimReport report = make_report(cfg);
    report.columns = {"trials", "symbols", "symbol_errors", "ser", "bits", "bit_errors", "ber"};
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si)
    {
        const double snr = cfg.snr_db[si];
        const double sigma2 = snr_to_sigma2(snr);
        BenchCounters total;
        std::string failure;
        try
        {
            ordered_parallel<BenchCounters>(
                std::size_t(cfg.trials), cfg.workers,
                [&](std::size_t t) {
                    Rng rng = derive_rng(cfg.seed, si, t);
                    CMatrixd h(l, k_users);
                    for (int k = 0; k < k_users; ++k)
                        h.col(k) = samplers[std::size_t(k)].sample(rng);
                    std::uniform_int_distribution<int> pick(0, cons.size() - 1);
                    std::vector<int> sent(static_cast<std::size_t>(k_users), 0);
                    CVectord x(k_users);
                    for (int k = 0; k < k_users; ++k)
                    {
                        sent[std::size_t(k)] = pick(rng);
                        x[k] = cons.point(sent[std::size_t(k)]);
                    }
                    const CVectord y = h * x + complex_normal_vector(rng, l, sigma2);
                    BenchCounters c;
                    if (enabled[det_lmmse])
                        count(c, det_lmmse, sent, hard_decision(lmmse_detect(h, y, sigma2), cons), q);
                    if (enabled[det_ml])
                        count(c, det_ml, sent, ml_detect(h, y, cons), q);
                    if (enabled[det_mmnet])
                    {
                        const DetectorParams params =
                            shared ? *shared
                                   : DetectorParams::lmmse_initialized(qr_reduce(h, y).r, sigma2,
                                                                       cfg.detector.iterations, cfg.detector.psi);
                        count(c, det_mmnet, sent, mmnet_detect(h, y, sigma2, params, cons, opts).decision, q);
                    }
                    return c;
                },
                [&](BenchCounters&& c) { total.merge(c); });
        }
        catch (const std::exception& e)
        {
            failure = e.what();
        }
        for (int d = 0; d < det_count; ++d)
        {
            if (!enabled[std::size_t(d)])
                continue;
            if (!failure.empty())
            {
                report.rows.push_back(error_row(detector_names[std::size_t(d)], snr, report.columns.size(), failure));
                continue;
            }
            ReportRow row;
            row.label = detector_names[std::size_t(d)];
            row.snr_db = snr;
            const double ser = double(total.symbol_errors[d]) / double(total.symbols[d]);
            const double ber = double(total.bit_errors[d]) / double(total.bits[d]);
            row.values = {double(cfg.trials),           double(total.symbols[d]), double(total.symbol_errors[d]), ser,
                          double(total.bits[d]), double(total.bit_errors[d]), ber};
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

} // namespace mumimo
