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

#ifndef MUMIMO_SIM_INTERNAL_HPP
#define MUMIMO_SIM_INTERNAL_HPP

#include "mumimo/chanest.hpp"
#include "mumimo/channel.hpp"
#include "mumimo/config.hpp"
#include "mumimo/equalize.hpp"
#include "mumimo/sim.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <optional>
#include <thread>
#include <vector>

namespace mumimo::detail
{

// Stream ids passed as the first derive_rng index; SNR indices use small values.
inline constexpr std::uint64_t stream_sigma = 1ULL << 40;
inline constexpr std::uint64_t stream_downlink_stats = 1ULL << 41;
inline constexpr std::uint64_t stream_waveform_data = 1ULL << 42;
inline constexpr std::uint64_t stream_waveform_prt = 1ULL << 43;

// Runs work(i) for i in [0, count) on up to `workers` threads and feeds the results to
// merge() in index order. Exceptions surface in index order as well.
template <typename Result, typename Work, typename Merge>
void ordered_parallel(std::size_t count, int workers, Work&& work, Merge&& merge, std::size_t wave = 256)
{
    for (std::size_t begin = 0; begin < count; begin += wave)
    {
        const std::size_t end = std::min(count, begin + wave);
        std::vector<std::optional<Result>> results(end - begin);
        std::vector<std::exception_ptr> errors(end - begin);
        std::atomic<std::size_t> next{begin};
        auto run = [&] {
            for (;;)
            {
                const std::size_t i = next++;
                if (i >= end)
                    break;
                try
                {
                    results[i - begin].emplace(work(i));
                }
                catch (...)
                {
                    errors[i - begin] = std::current_exception();
                }
            }
        };
        const int threads = int(std::min<std::size_t>(std::size_t(std::max(workers, 1)), end - begin));
        if (threads <= 1)
            run();
        else
        {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(run);
            for (auto& t : pool)
                t.join();
        }
        for (std::size_t i = 0; i < end - begin; ++i)
        {
            if (errors[i])
                std::rethrow_exception(errors[i]);
            merge(std::move(*results[i]));
        }
    }
}

// SNR-independent state of an uplink/downlink sweep.
struct LinkSetup
{
    SimConfig cfg;
    GridConfig grid;
    PilotPattern pattern; // uplink slot
    Constellation constellation;
    std::vector<ScatteringModel> scattering;
    TemporalSpectralModel tsm;
    std::unique_ptr<ChannelSynthesizer> synthesizer; // null for the AWGN channel
    std::vector<CMatrixd> sigma;                     // per-user pilot covariance
    std::vector<ResourceElement> data_res;           // slot data REs, symbol-major
    std::vector<EqualizerGroup> groups;              // over the slot

    ChannelTensor draw(Rng& rng) const;
    int users() const { return grid.users; }
    int antennas() const { return grid.antennas; }
};

LinkSetup make_link_setup(const SimConfig& cfg);

// Stacked channel of one user on its pilot REs (symbols shifted by `offset`), in pilot order.
CVectord pilot_vector(const ChannelTensor& h, const PilotPattern& pattern, int user, int offset = 0);

// SNR-dependent state.
struct PointSetup
{
    double snr_db = 0.0;
    double sigma2 = 1.0;
    std::vector<PilotEstimator> estimators; // per user
    std::vector<CMatrixd> errors;           // per slot RE, empty for perfect CSI
};

PointSetup make_point(const LinkSetup& s, double snr_db);

// Per user, per slot RE (m * N + n) channel estimates from noisy pilots of the uplink slot.
std::vector<std::vector<CVectord>> estimate_uplink(const LinkSetup& s, const PointSetup& p, const ChannelTensor& h,
                                                   Rng& rng);

CMatrixd stack_estimates(const std::vector<std::vector<CVectord>>& est, std::size_t re, int antennas);

struct LinkCounters
{
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t symbols = 0;
    std::uint64_t symbol_errors = 0;
    double variance_sum = 0.0; // rho^2 or tau^2
    std::uint64_t variance_count = 0;
    double rate_sum = 0.0; // sum over users of C_k
    double energy_sum = 0.0;
    std::uint64_t energy_count = 0;

    void merge(const LinkCounters& o);
};

// Hard decisions, error counts and LLR collection for one equalized symbol.
void score_symbol(const Constellation& c, int sent_label, const RVectord& llr, LinkCounters& counters,
                  RVectord& llr_store, std::vector<std::uint8_t>& bit_store, Index& cursor);

ReportRow link_row(const LinkSetup& s, const std::string& label, double snr_db, const LinkCounters& c, int trials,
                   bool downlink);
std::vector<std::string> link_columns(bool downlink);
SimReport make_report(const SimConfig& cfg);
ReportRow error_row(const std::string& label, double snr_db, std::size_t columns, const std::string& what);

} // namespace mumimo::detail

#endif // MUMIMO_SIM_INTERNAL_HPP
