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
#include "mumimo/downlink.hpp"
#include "mumimo/equalize.hpp"
#include "mumimo/io.hpp"
#include "mumimo/sim.hpp"
#include "sim_internal.hpp"

#include <optional>

namespace mumimo
{

using namespace detail;

namespace
{

std::vector<int> draw_labels(Rng& rng, std::size_t count, const Constellation& c)
{
    std::uniform_int_distribution<int> pick(0, c.size() - 1);
    std::vector<int> labels(count);
    for (auto& l : labels)
        l = pick(rng);
    return labels;
}

double accumulate_rate(const std::vector<RVectord>& llrs, const std::vector<std::vector<std::uint8_t>>& bits, int q)
{
    const RateReport rate = bce_rate_metric(llrs, bits, q);
    double sum = 0.0;
    for (double r : rate.rate_per_user)
        sum += r;
    return sum;
}

LinkCounters uplink_trial(const LinkSetup& s, const PointSetup& p, Rng& rng)
{
    const int k_users = s.users();
    const int l = s.antennas();
    const int n_sub = s.grid.subcarriers;
    const int q = s.grid.bits_per_symbol;
    const bool perfect = s.cfg.receiver.csi == CsiMode::perfect;
    const Constellation& cons = s.constellation;

    const ChannelTensor h = s.draw(rng);
    std::vector<std::vector<CVectord>> est;
    if (!perfect)
        est = estimate_uplink(s, p, h, rng);

    const std::size_t d_count = s.data_res.size();
    const std::vector<int> labels = draw_labels(rng, d_count * std::size_t(k_users), cons);
    std::vector<int> data_index(std::size_t(s.grid.symbols) * n_sub, -1);
    std::vector<CVectord> y(d_count);
    for (std::size_t i = 0; i < d_count; ++i)
    {
        const auto [m, n] = s.data_res[i];
        data_index[std::size_t(m) * n_sub + n] = int(i);
        CVectord x(k_users);
        for (int k = 0; k < k_users; ++k)
            x[k] = cons.point(labels[i * std::size_t(k_users) + std::size_t(k)]);
        y[i] = h.at(m, n) * x + complex_normal_vector(rng, l, p.sigma2);
    }

    LinkCounters c;
    std::vector<RVectord> llrs(std::size_t(k_users), RVectord(Index(d_count) * q));
    std::vector<std::vector<std::uint8_t>> bits(std::size_t(k_users), std::vector<std::uint8_t>(d_count * q));
    std::vector<Index> cursor(std::size_t(k_users), 0);
    std::vector<CMatrixd> hs, es;
    std::vector<std::size_t> members;
    for (const auto& g : s.groups)
    {
        hs.clear();
        es.clear();
        members.clear();
        for (int m = g.symbol_begin; m < g.symbol_end; ++m)
            for (int n = g.subcarrier_begin; n < g.subcarrier_end; ++n)
            {
                const std::size_t re = std::size_t(m) * n_sub + n;
                if (data_index[re] < 0)
                    continue;
                members.push_back(re);
                hs.push_back(perfect ? h.at(m, n) : stack_estimates(est, re, l));
                if (!perfect)
                    es.push_back(p.errors[re]);
            }
        if (members.empty())
            continue;
        const CMatrixd w = grouped_lmmse_matrix<double>(hs, es, p.sigma2);
        for (std::size_t i = 0; i < members.size(); ++i)
        {
            const std::size_t di = std::size_t(data_index[members[i]]);
            const CVectord d = rescale_matrix(w, hs[i]);
            const CVectord x_hat = equalize(y[di], w, d);
            for (int k = 0; k < k_users; ++k)
            {
                const double rho2 = perfect ? post_eq_variance(w, hs[i], CMatrixd(), p.sigma2, k)
                                            : post_eq_variance(w, hs[i], es[i], p.sigma2, k);
                c.variance_sum += rho2;
                ++c.variance_count;
                const RVectord llr = awgn_llr(x_hat[k], rho2, cons);
                score_symbol(cons, labels[di * std::size_t(k_users) + std::size_t(k)], llr, c,
                             llrs[std::size_t(k)], bits[std::size_t(k)], cursor[std::size_t(k)]);
            }
        }
    }
    c.rate_sum = accumulate_rate(llrs, bits, q);
    return c;
}

// Precoders of the downlink slot: one (W, c) per equalizer group.
struct Precoders
{
    std::vector<CMatrixd> w;
    std::vector<RVectord> c;
    std::vector<int> group_of; // per slot RE
};

int reference_symbol(const PilotPattern& pattern)
{
    int last = 0;
    for (int k = 0; k < pattern.users(); ++k)
        last = std::max(last, pattern.pilot_symbols(k).back());
    return last;
}

Precoders make_precoders(const LinkSetup& s, const PointSetup& p, const ChannelTensor& h,
                         const std::vector<std::vector<CVectord>>& est)
{
    const int n_sub = s.grid.subcarriers;
    const int offset = s.grid.symbols;
    const bool perfect = s.cfg.receiver.csi == CsiMode::perfect;
    const int m_ref = reference_symbol(s.pattern);
    Precoders out;
    out.group_of.assign(std::size_t(s.grid.symbols) * n_sub, -1);
    std::vector<CMatrixd> hs, es;
    for (std::size_t gi = 0; gi < s.groups.size(); ++gi)
    {
        const auto& g = s.groups[gi];
        hs.clear();
        es.clear();
        for (int m = g.symbol_begin; m < g.symbol_end; ++m)
            for (int n = g.subcarrier_begin; n < g.subcarrier_end; ++n)
                out.group_of[std::size_t(m) * n_sub + n] = int(gi);
        if (perfect)
        {
            for (int m = g.symbol_begin; m < g.symbol_end; ++m)
                for (int n = g.subcarrier_begin; n < g.subcarrier_end; ++n)
                    hs.push_back(h.at(m + offset, n));
        }
        else
        {
            for (int n = g.subcarrier_begin; n < g.subcarrier_end; ++n)
            {
                const std::size_t re = std::size_t(m_ref) * n_sub + n;
                hs.push_back(stack_estimates(est, re, s.antennas()));
                es.push_back(p.errors[re]);
            }
        }
        CMatrixd w = grouped_lmmse_matrix<double>(hs, es, p.sigma2);
        out.c.push_back(normalization_matrix(w));
        out.w.push_back(std::move(w));
    }
    return out;
}

CMatrixd equivalent_at(const ChannelTensor& h, const Precoders& pc, int m_slot, int n, int offset, int n_sub)
{
    const int g = pc.group_of[std::size_t(m_slot) * n_sub + n];
    return equivalent_channel(h.at(m_slot + offset, n), pc.w[std::size_t(g)], pc.c[std::size_t(g)]);
}

// Main and interference sample covariances of the equivalent channel on the downlink pilots.
std::pair<CMatrixd, CMatrixd> downlink_statistics(const LinkSetup& s, const PointSetup& p, int samples,
                                                  std::uint64_t seed, std::uint64_t point)
{
    const int k_users = s.users();
    const int n_sub = s.grid.subcarriers;
    const Index dim = Index(s.pattern.positions(0).size());
    CovarianceAccumulator main(dim), inter(dim);
    for (int i = 0; i < samples; ++i)
    {
        Rng rng = derive_rng(seed, stream_downlink_stats + point, std::uint64_t(i));
        const ChannelTensor h = s.draw(rng);
        const auto est = estimate_uplink(s, p, h, rng);
        const Precoders pc = make_precoders(s, p, h, est);
        for (int k = 0; k < k_users; ++k)
            for (int stream = 0; stream < k_users; ++stream)
            {
                const auto& pos = s.pattern.positions(stream);
                if (Index(pos.size()) != dim)
                    throw dimension_error("downlink: every stream needs the same number of pilots");
                CVectord v(dim);
                for (std::size_t j = 0; j < pos.size(); ++j)
                    v[Index(j)] = equivalent_at(h, pc, pos[j].symbol, pos[j].subcarrier, s.grid.symbols, n_sub)(
                        k, stream);
                (stream == k ? main : inter).add(v);
            }
    }
    CMatrixd omega = main.covariance();
    CMatrixd psi = k_users > 1 ? inter.covariance() : omega;
    return {omega, psi};
}

LinkCounters downlink_trial(const LinkSetup& s, const PointSetup& p, const DownlinkReceiver* rx, Rng& rng)
{
    const int k_users = s.users();
    const int n_sub = s.grid.subcarriers;
    const int m_count = s.grid.symbols;
    const int q = s.grid.bits_per_symbol;
    const bool perfect = s.cfg.receiver.csi == CsiMode::perfect;
    const Constellation& cons = s.constellation;

    const ChannelTensor h = s.draw(rng);
    std::vector<std::vector<CVectord>> est;
    if (!perfect)
        est = estimate_uplink(s, p, h, rng);
    const Precoders pc = make_precoders(s, p, h, est);

    const std::size_t d_count = s.data_res.size();
    const std::vector<int> labels = draw_labels(rng, d_count * std::size_t(k_users), cons);
    const std::size_t res = std::size_t(m_count) * n_sub;
    std::vector<std::vector<cdouble>> u(std::size_t(k_users), std::vector<cdouble>(res, cdouble(0.0)));
    std::vector<int> data_index(res, -1);
    for (std::size_t i = 0; i < d_count; ++i)
        data_index[std::size_t(s.data_res[i].symbol) * n_sub + s.data_res[i].subcarrier] = int(i);

    LinkCounters c;
    for (int m = 0; m < m_count; ++m)
        for (int n = 0; n < n_sub; ++n)
        {
            const std::size_t re = std::size_t(m) * n_sub + n;
            CVectord sym = CVectord::Zero(k_users);
            const int owner = s.pattern.owner(m, n);
            if (owner >= 0)
                sym[owner] = 1.0;
            else
                for (int k = 0; k < k_users; ++k)
                    sym[k] = cons.point(labels[std::size_t(data_index[re]) * k_users + std::size_t(k)]);
            const int g = pc.group_of[re];
            const CVectord t = precode(sym, pc.w[std::size_t(g)], pc.c[std::size_t(g)]);
            if (owner < 0)
            {
                c.energy_sum += t.squaredNorm();
                ++c.energy_count;
            }
            const CVectord rx_signal = h.at(m + m_count, n).adjoint() * t;
            for (int k = 0; k < k_users; ++k)
                u[std::size_t(k)][re] = rx_signal[k] + complex_normal(rng, p.sigma2);
        }

    std::vector<RVectord> llrs(std::size_t(k_users), RVectord(Index(d_count) * q));
    std::vector<std::vector<std::uint8_t>> bits(std::size_t(k_users), std::vector<std::uint8_t>(d_count * q));
    for (int k = 0; k < k_users; ++k)
    {
        std::optional<DownlinkUserEstimate> ue;
        if (!perfect)
            ue = rx->estimate_equalize(k, u[std::size_t(k)]);
        Index cursor = 0;
        for (std::size_t i = 0; i < d_count; ++i)
        {
            const auto [m, n] = s.data_res[i];
            const std::size_t re = std::size_t(m) * n_sub + n;
            cdouble s_hat;
            double tau2;
            if (perfect)
            {
                const CVectord g = equivalent_at(h, pc, m, n, m_count, n_sub).row(k).transpose();
                tau2 = dl_post_eq_variance(g, RVectord::Zero(k_users), p.sigma2, k);
                s_hat = u[std::size_t(k)][re] / g[k];
            }
            else
            {
                tau2 = dl_post_eq_variance(ue->g_hat[re], ue->v[re], p.sigma2, k);
                s_hat = ue->s_hat[re];
            }
            c.variance_sum += tau2;
            ++c.variance_count;
            const RVectord llr = awgn_llr(s_hat, tau2, cons);
            score_symbol(cons, labels[i * std::size_t(k_users) + std::size_t(k)], llr, c, llrs[std::size_t(k)],
                         bits[std::size_t(k)], cursor);
        }
    }
    c.rate_sum = accumulate_rate(llrs, bits, q);
    return c;
}

std::string point_label(const SimConfig& cfg) { return to_string(cfg.receiver.csi); }

} // namespace

SimReport run_uplink_sweep(const SimConfig& cfg)
{
    cfg.validate();
    const LinkSetup s = make_link_setup(cfg);
    SimReport report = make_report(cfg);
    report.columns = link_columns(false);
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si)
    {
        const double snr = cfg.snr_db[si];
        try
        {
            const PointSetup p = make_point(s, snr);
            LinkCounters total;
            ordered_parallel<LinkCounters>(
                std::size_t(cfg.trials), cfg.workers,
                [&](std::size_t t) {
                    Rng rng = derive_rng(cfg.seed, si, t);
                    return uplink_trial(s, p, rng);
                },
                [&](LinkCounters&& c) { total.merge(c); });
            report.rows.push_back(link_row(s, point_label(cfg), snr, total, cfg.trials, false));
        }
        catch (const std::exception& e)
        {
            report.rows.push_back(error_row(point_label(cfg), snr, report.columns.size(), e.what()));
        }
    }
    return report;
}

SimReport run_downlink_sweep(const SimConfig& cfg)
{
    cfg.validate();
    if (cfg.grid.duplex != Duplex::uplink_downlink)
        throw std::invalid_argument("run_downlink_sweep: grid.duplex must be 'uplink-downlink'");
    const LinkSetup s = make_link_setup(cfg);
    SimReport report = make_report(cfg);
    report.columns = link_columns(true);
    const bool perfect = cfg.receiver.csi == CsiMode::perfect;
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si)
    {
        const double snr = cfg.snr_db[si];
        try
        {
            const PointSetup p = make_point(s, snr);
            std::optional<DownlinkReceiver> rx;
            if (!perfect)
            {
                const auto [omega, psi] = downlink_statistics(s, p, cfg.downlink.statistics_samples, cfg.seed, si);
                rx.emplace(omega, psi, p.sigma2, s.pattern, cfg.receiver.interpolation);
            }
            LinkCounters total;
            ordered_parallel<LinkCounters>(
                std::size_t(cfg.trials), cfg.workers,
                [&](std::size_t t) {
                    Rng rng = derive_rng(cfg.seed, si, t);
                    return downlink_trial(s, p, rx ? &*rx : nullptr, rng);
                },
                [&](LinkCounters&& c) { total.merge(c); });
            report.rows.push_back(link_row(s, point_label(cfg), snr, total, cfg.trials, true));
        }
        catch (const std::exception& e)
        {
            report.rows.push_back(error_row(point_label(cfg), snr, report.columns.size(), e.what()));
        }
    }
    return report;
}

ChannelStatistics estimate_channel_statistics(const SimConfig& cfg)
{
    cfg.validate();
    SimConfig base = cfg;
    if (base.receiver.csi == CsiMode::perfect)
        base.receiver.csi = CsiMode::exact;
    base.receiver.covariance = CovarianceSource::empirical;
    const LinkSetup s = make_link_setup(base);
    ChannelStatistics stats;
    stats.sigma = s.sigma;
    if (cfg.grid.duplex == Duplex::uplink_downlink)
        for (std::size_t si = 0; si < cfg.snr_db.size(); ++si)
        {
            const PointSetup p = make_point(s, cfg.snr_db[si]);
            auto [omega, psi] = downlink_statistics(s, p, cfg.downlink.statistics_samples, cfg.seed, si);
            stats.snr_db.push_back(cfg.snr_db[si]);
            stats.omega.push_back(std::move(omega));
            stats.psi.push_back(std::move(psi));
        }
    return stats;
}

std::vector<std::string> write_channel_statistics(const ChannelStatistics& stats, const std::string& prefix)
{
    std::vector<std::string> paths;
    for (std::size_t k = 0; k < stats.sigma.size(); ++k)
    {
        paths.push_back(prefix + "_sigma_u" + std::to_string(k + 1) + ".csv");
        save_matrix_csv(paths.back(), stats.sigma[k]);
    }
    for (std::size_t i = 0; i < stats.omega.size(); ++i)
    {
        paths.push_back(prefix + "_omega_snr" + std::to_string(i + 1) + ".csv");
        save_matrix_csv(paths.back(), stats.omega[i]);
        paths.push_back(prefix + "_psi_snr" + std::to_string(i + 1) + ".csv");
        save_matrix_csv(paths.back(), stats.psi[i]);
    }
    return paths;
}

} // namespace mumimo
