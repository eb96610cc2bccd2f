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

#include "mumimo/io.hpp"
#include "mumimo/sim.hpp"
#include "sim_internal.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <ostream>

namespace mumimo
{

namespace detail
{

ChannelTensor LinkSetup::draw(Rng& rng) const
{
    if (synthesizer)
        return synthesizer->draw(rng);
    return unit_channel(grid);
}

CVectord pilot_vector(const ChannelTensor& h, const PilotPattern& pattern, int user, int offset)
{
    const auto& pos = pattern.positions(user);
    const int l = h.antennas();
    CVectord v(Index(pos.size()) * l);
    for (std::size_t p = 0; p < pos.size(); ++p)
        for (int a = 0; a < l; ++a)
            v[Index(p) * l + a] = h(pos[p].symbol + offset, pos[p].subcarrier, a, user);
    return v;
}

LinkSetup make_link_setup(const SimConfig& cfg)
{
    LinkSetup s;
    s.cfg = cfg;
    s.grid = cfg.grid;
    s.pattern = cfg.pilot_pattern();
    s.constellation = Constellation(cfg.grid.bits_per_symbol);
    s.scattering = cfg.scattering_models();
    if (cfg.channel.kind == ChannelKind::kronecker)
    {
        s.tsm = TemporalSpectralModel{cfg.channel.doppler, cfg.channel.delay_spread};
        s.synthesizer = std::make_unique<ChannelSynthesizer>(s.grid, s.scattering, s.tsm, cfg.channel.normalize);
    }

    const int k_users = s.grid.users;
    const int l = s.grid.antennas;
    if (cfg.receiver.csi != CsiMode::perfect)
    {
        switch (cfg.receiver.covariance)
        {
        case CovarianceSource::model:
            for (int k = 0; k < k_users; ++k)
            {
                if (s.synthesizer)
                    s.sigma.push_back(model_pilot_covariance(s.pattern, k, s.scattering[std::size_t(k)].covariance(),
                                                             s.tsm));
                else
                    s.sigma.push_back(
                        model_pilot_covariance(s.pattern, k, CMatrixd::Ones(l, l), TemporalSpectralModel{}));
            }
            break;
        case CovarianceSource::empirical:
        {
            std::vector<CovarianceAccumulator> acc;
            for (int k = 0; k < k_users; ++k)
                acc.emplace_back(Index(s.pattern.positions(k).size()) * l);
            for (int i = 0; i < cfg.receiver.covariance_samples; ++i)
            {
                Rng rng = derive_rng(cfg.seed, stream_sigma, std::uint64_t(i));
                const ChannelTensor h = s.draw(rng);
                for (int k = 0; k < k_users; ++k)
                    acc[std::size_t(k)].add(pilot_vector(h, s.pattern, k));
            }
            for (const auto& a : acc)
                s.sigma.push_back(a.covariance());
            break;
        }
        case CovarianceSource::file:
            for (int k = 0; k < k_users; ++k)
            {
                CMatrixd m = load_matrix_csv(cfg.receiver.covariance_files[std::size_t(k)]);
                const Index dim = Index(s.pattern.positions(k).size()) * l;
                if (m.rows() != dim || m.cols() != dim)
                    throw dimension_error("covariance file for user " + std::to_string(k + 1) + " is " +
                                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                                          std::to_string(dim) + "x" + std::to_string(dim));
                s.sigma.push_back(std::move(m));
            }
            break;
        }
    }

    for (int m = 0; m < s.grid.symbols; ++m)
        for (int n = 0; n < s.grid.subcarriers; ++n)
            if (!s.pattern.is_pilot(m, n))
                s.data_res.push_back({m, n});
    s.groups = tile_groups(0, s.grid.symbols, s.grid.subcarriers, cfg.receiver.group_symbols,
                           cfg.receiver.group_subcarriers);
    return s;
}

PointSetup make_point(const LinkSetup& s, double snr_db)
{
    PointSetup p;
    p.snr_db = snr_db;
    p.sigma2 = snr_to_sigma2(snr_db);
    if (s.cfg.receiver.csi == CsiMode::perfect)
        return p;
    std::vector<CMatrixd> pilot_errors;
    for (int k = 0; k < s.users(); ++k)
    {
        p.estimators.emplace_back(s.sigma[std::size_t(k)], p.sigma2);
        pilot_errors.push_back(p.estimators.back().error_covariance());
    }
    p.errors = assemble_error_covariances(pilot_errors, s.pattern, s.antennas());
    if (s.cfg.receiver.csi == CsiMode::power_decay)
    {
        const int m_count = s.grid.symbols;
        const int n_count = s.grid.subcarriers;
        PowerDecayParams params;
        params.alpha = RMatrixd::Zero(m_count, n_count);
        params.beta = RMatrixd::Zero(m_count, n_count);
        if (const auto& given = s.cfg.receiver.power_decay)
        {
            params.alpha.setConstant((*given)[0]);
            params.beta.setConstant((*given)[1]);
            params.gamma = (*given)[2];
        }
        else
        {
            double gamma_sum = 0.0;
            for (int m = 0; m < m_count; ++m)
                for (int n = 0; n < n_count; ++n)
                {
                    const auto fit = fit_power_decay(p.errors[std::size_t(m) * n_count + n]);
                    params.alpha(m, n) = fit.alpha;
                    params.beta(m, n) = fit.beta;
                    gamma_sum += fit.gamma;
                }
            params.gamma = gamma_sum / double(m_count * n_count);
        }
        params.validate();
        for (int m = 0; m < m_count; ++m)
            for (int n = 0; n < n_count; ++n)
                p.errors[std::size_t(m) * n_count + n] = params.covariance(m, n, s.antennas());
    }
    return p;
}

std::vector<std::vector<CVectord>> estimate_uplink(const LinkSetup& s, const PointSetup& p, const ChannelTensor& h,
                                                   Rng& rng)
{
    const int l = s.antennas();
    std::vector<std::vector<CVectord>> out;
    for (int k = 0; k < s.users(); ++k)
    {
        const auto& pos = s.pattern.positions(k);
        CMatrixd y(Index(pos.size()), l);
        for (std::size_t i = 0; i < pos.size(); ++i)
            for (int a = 0; a < l; ++a)
                y(Index(i), a) = h(pos[i].symbol, pos[i].subcarrier, a, k) + complex_normal(rng, p.sigma2);
        out.push_back(interpolate_grid(p.estimators[std::size_t(k)].estimate(y), s.pattern, k,
                                       s.cfg.receiver.interpolation));
    }
    return out;
}

CMatrixd stack_estimates(const std::vector<std::vector<CVectord>>& est, std::size_t re, int antennas)
{
    CMatrixd h(antennas, Index(est.size()));
    for (std::size_t k = 0; k < est.size(); ++k)
        h.col(Index(k)) = est[k][re];
    return h;
}

void LinkCounters::merge(const LinkCounters& o)
{
    bits += o.bits;
    bit_errors += o.bit_errors;
    symbols += o.symbols;
    symbol_errors += o.symbol_errors;
    variance_sum += o.variance_sum;
    variance_count += o.variance_count;
    rate_sum += o.rate_sum;
    energy_sum += o.energy_sum;
    energy_count += o.energy_count;
}

void score_symbol(const Constellation& c, int sent_label, const RVectord& llr, LinkCounters& counters,
                  RVectord& llr_store, std::vector<std::uint8_t>& bit_store, Index& cursor)
{
    bool wrong = false;
    for (int q = 0; q < c.bits_per_symbol(); ++q)
    {
        const int sent = c.bit(sent_label, q);
        const int decided = llr[q] > 0.0 ? 1 : 0;
        if (sent != decided)
        {
            ++counters.bit_errors;
            wrong = true;
        }
        llr_store[cursor] = llr[q];
        bit_store[std::size_t(cursor)] = std::uint8_t(sent);
        ++cursor;
    }
    counters.bits += std::uint64_t(c.bits_per_symbol());
    ++counters.symbols;
    counters.symbol_errors += wrong ? 1 : 0;
}

std::vector<std::string> link_columns(bool downlink)
{
    std::vector<std::string> cols{"trials",
                                  "bits",
                                  "bit_errors",
                                  "ber",
                                  "symbols",
                                  "symbol_errors",
                                  "ser",
                                  downlink ? "mean_tau2" : "mean_rho2",
                                  "rate_per_user",
                                  "rate_per_re",
                                  "data_fraction",
                                  "goodput"};
    if (downlink)
        cols.push_back("mean_tx_energy");
    return cols;
}

ReportRow link_row(const LinkSetup& s, const std::string& label, double snr_db, const LinkCounters& c, int trials,
                   bool downlink)
{
    const double ber = c.bits ? double(c.bit_errors) / double(c.bits) : 0.0;
    const double ser = c.symbols ? double(c.symbol_errors) / double(c.symbols) : 0.0;
    const double data_res = double(s.data_res.size());
    const double rho = data_res / double(s.grid.symbols * s.grid.subcarriers);
    const double rate_user = c.rate_sum / (double(trials) * s.users());
    ReportRow row;
    row.label = label;
    row.snr_db = snr_db;
    row.values = {double(trials),
                  double(c.bits),
                  double(c.bit_errors),
                  ber,
                  double(c.symbols),
                  double(c.symbol_errors),
                  ser,
                  c.variance_count ? c.variance_sum / double(c.variance_count) : 0.0,
                  rate_user,
                  rate_user / data_res,
                  rho,
                  rho * s.grid.bits_per_symbol * (1.0 - ber)};
    if (downlink)
        row.values.push_back(c.energy_count ? c.energy_sum / double(c.energy_count) : 0.0);
    return row;
}

SimReport make_report(const SimConfig& cfg)
{
    SimReport r;
    r.scenario = cfg.scenario;
    r.config_hash = config_hash(cfg);
    auto j = nlohmann::json::parse(serialize_config(cfg));
    j.erase("output");
    j.erase("workers");
    r.config_json = j.dump(2);
    return r;
}

ReportRow error_row(const std::string& label, double snr_db, std::size_t columns, const std::string& what)
{
    ReportRow row;
    row.label = label;
    row.snr_db = snr_db;
    row.values.assign(columns, std::nan(""));
    row.status = "error: " + what;
    return row;
}

} // namespace detail

namespace
{

std::string csv_field(std::string s)
{
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"')
            ch = ch == ',' ? ';' : ' ';
    return s;
}

} // namespace

double SimReport::value(std::size_t row, const std::string& column) const
{
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == column)
            return rows.at(row).values.at(c);
    throw std::out_of_range("SimReport: no column '" + column + "'");
}

const ReportRow& SimReport::find(const std::string& label, double snr_db) const
{
    for (const auto& r : rows)
        if (r.label == label && (r.snr_db == snr_db || (std::isnan(r.snr_db) && std::isnan(snr_db))))
            return r;
    throw std::out_of_range("SimReport: no row '" + label + "' at " + format_number(snr_db) + " dB");
}

void SimReport::write_csv(std::ostream& os) const
{
    os << "config_hash,scenario,label,snr_db";
    for (const auto& c : columns)
        os << ',' << c;
    os << ",status\n";
    for (const auto& r : rows)
    {
        os << config_hash << ',' << to_string(scenario) << ',' << csv_field(r.label) << ',' << format_number(r.snr_db);
        for (double v : r.values)
            os << ',' << format_number(v);
        os << ',' << csv_field(r.status) << '\n';
    }
}

void SimReport::write_json(std::ostream& os) const
{
    using nlohmann::json;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["scenario"] = to_string(scenario);
    j["config_hash"] = config_hash;
    j["config"] = json::parse(config_json);
    j["columns"] = columns;
    json rows_json = json::array();
    for (const auto& r : rows)
    {
        json values = json::object();
        for (std::size_t c = 0; c < columns.size() && c < r.values.size(); ++c)
            values[columns[c]] = num(r.values[c]);
        rows_json.push_back({{"label", r.label}, {"snr_db", num(r.snr_db)}, {"values", values}, {"status", r.status}});
    }
    j["rows"] = rows_json;
    json tables_json = json::array();
    for (const auto& t : tables)
        tables_json.push_back({{"name", t.name}, {"columns", {t.first, t.second}}, {"points", t.a.size()}});
    j["tables"] = tables_json;
    os << j.dump(2) << '\n';
}

std::vector<std::string> SimReport::write_files(const std::string& prefix) const
{
    std::vector<std::string> paths;
    auto open = [&](const std::string& path) {
        std::ofstream out(path);
        if (!out)
            throw io_error("cannot write '" + path + "'");
        paths.push_back(path);
        return out;
    };
    {
        auto out = open(prefix + ".csv");
        write_csv(out);
    }
    {
        auto out = open(prefix + ".json");
        write_json(out);
    }
    for (const auto& t : tables)
    {
        auto out = open(prefix + "_" + t.name + ".csv");
        write_two_column_csv(out, t.first, t.second, t.a, t.b);
    }
    return paths;
}

SimReport run_scenario(const SimConfig& cfg)
{
    switch (cfg.scenario)
    {
    case Scenario::uplink:
        return run_uplink_sweep(cfg);
    case Scenario::downlink:
        return run_downlink_sweep(cfg);
    case Scenario::detect_bench:
        return run_detector_bench(cfg);
    case Scenario::waveform:
        return run_waveform_report(cfg);
    }
    throw std::invalid_argument("run_scenario: unknown scenario");
}

} // namespace mumimo
