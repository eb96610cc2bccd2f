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

#include "mumimo/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mumimo
{

using nlohmann::json;

namespace
{

constexpr double deg = pi / 180.0;

std::size_t line_of_offset(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return std::size_t(std::count(text.begin(), text.begin() + std::ptrdiff_t(offset), '\n')) + 1;
}

std::size_t line_of_key(const std::string& text, const std::string& key)
{
    const auto pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

template <typename E>
struct EnumName
{
    E value;
    const char* name;
};

constexpr EnumName<Scenario> scenario_names[] = {{Scenario::uplink, "uplink"},
                                                 {Scenario::downlink, "downlink"},
                                                 {Scenario::detect_bench, "detect-bench"},
                                                 {Scenario::waveform, "waveform"}};
constexpr EnumName<CsiMode> csi_names[] = {
    {CsiMode::perfect, "perfect"}, {CsiMode::exact, "exact"}, {CsiMode::power_decay, "power-decay"}};
constexpr EnumName<ChannelKind> channel_names[] = {{ChannelKind::kronecker, "kronecker"}, {ChannelKind::awgn, "awgn"}};
constexpr EnumName<CovarianceSource> covariance_names[] = {
    {CovarianceSource::model, "model"}, {CovarianceSource::empirical, "empirical"}, {CovarianceSource::file, "file"}};
constexpr EnumName<InterpolationMode> interpolation_names[] = {
    {InterpolationMode::spectral, "spectral"}, {InterpolationMode::spectral_temporal, "spectral-temporal"}};
constexpr EnumName<PilotLayout> layout_names[] = {{PilotLayout::one_pilot, "1P"}, {PilotLayout::two_pilot, "2P"}};
constexpr EnumName<Duplex> duplex_names[] = {{Duplex::uplink_only, "uplink"},
                                             {Duplex::uplink_downlink, "uplink-downlink"}};

template <typename E, std::size_t N>
std::string name_of(const EnumName<E> (&table)[N], E v)
{
    for (const auto& e : table)
        if (e.value == v)
            return e.name;
    return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const EnumName<E> (&table)[N], const std::string& s)
{
    for (const auto& e : table)
        if (s == e.name)
            return e.value;
    return std::nullopt;
}

template <typename E, std::size_t N>
std::string choices(const EnumName<E> (&table)[N])
{
    std::string out;
    for (const auto& e : table)
        out += (out.empty() ? "" : " | ") + std::string(e.name);
    return out;
}

// Reads the keys of one JSON object, recording type errors and unknown keys.
class Section
{
public:
    Section(const json& j, std::string prefix, const std::string& text, std::vector<std::string>& problems,
            std::size_t& first_line)
        : j_(j), prefix_(std::move(prefix)), text_(text), problems_(problems), first_line_(first_line)
    {
        if (!j_.is_object())
        {
            fail(prefix_.empty() ? "" : prefix_.substr(0, prefix_.size() - 1), "must be an object");
            valid_ = false;
        }
    }

    bool has(const std::string& key)
    {
        used_.insert(key);
        return valid_ && j_.contains(key);
    }

    const json& raw(const std::string& key) const { return j_.at(key); }
    std::string path(const std::string& key) const { return prefix_ + key; }

    void fail(const std::string& key, const std::string& message)
    {
        const std::size_t line = line_of_key(text_, key.substr(key.rfind('.') + 1));
        problems_.push_back(key + ": " + message + (line ? " (line " + std::to_string(line) + ")" : ""));
        if (!first_line_)
            first_line_ = line;
    }

    void get(const std::string& key, int& out)
    {
        if (!has(key))
            return;
        const auto& v = j_.at(key);
        if (v.is_number_integer() && v.get<long long>() >= INT32_MIN && v.get<long long>() <= INT32_MAX)
            out = v.get<int>();
        else
            fail(path(key), "expected an integer");
    }

    void get(const std::string& key, std::uint64_t& out)
    {
        if (!has(key))
            return;
        const auto& v = j_.at(key);
        if (v.is_number_unsigned())
            out = v.get<std::uint64_t>();
        else
            fail(path(key), "expected a non-negative integer");
    }

    void get(const std::string& key, double& out)
    {
        if (!has(key))
            return;
        const auto& v = j_.at(key);
        if (v.is_number())
            out = v.get<double>();
        else
            fail(path(key), "expected a number");
    }

    void get(const std::string& key, bool& out)
    {
        if (!has(key))
            return;
        const auto& v = j_.at(key);
        if (v.is_boolean())
            out = v.get<bool>();
        else
            fail(path(key), "expected true or false");
    }

    void get(const std::string& key, std::string& out)
    {
        if (!has(key))
            return;
        const auto& v = j_.at(key);
        if (v.is_string())
            out = v.get<std::string>();
        else
            fail(path(key), "expected a string");
    }

    template <typename T>
    void get(const std::string& key, std::vector<T>& out)
    {
        if (!has(key))
            return;
        const auto& v = j_.at(key);
        bool ok = v.is_array();
        if (ok)
            for (const auto& e : v)
            {
                if constexpr (std::is_same_v<T, std::string>)
                    ok = ok && e.is_string();
                else if constexpr (std::is_integral_v<T>)
                    ok = ok && e.is_number_integer();
                else
                    ok = ok && e.is_number();
            }
        if (ok)
            out = v.get<std::vector<T>>();
        else
            fail(path(key), "expected an array of " + std::string(std::is_same_v<T, std::string> ? "strings"
                                                                  : std::is_integral_v<T>        ? "integers"
                                                                                                 : "numbers"));
    }

    template <typename E, std::size_t N>
    void get_enum(const std::string& key, const EnumName<E> (&table)[N], E& out)
    {
        std::string s;
        if (!has(key))
            return;
        if (!j_.at(key).is_string())
        {
            fail(path(key), "expected one of " + choices(table));
            return;
        }
        s = j_.at(key).get<std::string>();
        if (auto v = value_of(table, s))
            out = *v;
        else
            fail(path(key), "unknown value '" + s + "', expected one of " + choices(table));
    }

    void finish()
    {
        if (!valid_)
            return;
        for (const auto& item : j_.items())
            if (!used_.count(item.key()))
                fail(path(item.key()), "unknown key");
    }

private:
    const json& j_;
    std::string prefix_;
    const std::string& text_;
    std::vector<std::string>& problems_;
    std::size_t& first_line_;
    std::set<std::string> used_;
    bool valid_ = true;
};

json to_json(const SimConfig& c)
{
    json j;
    j["scenario"] = to_string(c.scenario);
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["snr_db"] = c.snr_db;
    j["output"] = c.output;
    j["workers"] = c.workers;
    j["grid"] = {{"symbols", c.grid.symbols},
                 {"subcarriers", c.grid.subcarriers},
                 {"users", c.grid.users},
                 {"antennas", c.grid.antennas},
                 {"bits_per_symbol", c.grid.bits_per_symbol},
                 {"subcarrier_spacing", c.grid.subcarrier_spacing},
                 {"duplex", name_of(duplex_names, c.grid.duplex)}};
    json triples = json::array();
    for (const auto& t : c.pilots.triples)
        triples.push_back({t[0], t[1], t[2]});
    j["pilots"] = {{"layout", name_of(layout_names, c.pilots.layout)}, {"comb", c.pilots.comb}, {"triples", triples}};
    j["channel"] = {{"model", name_of(channel_names, c.channel.kind)},
                    {"doppler", c.channel.doppler},
                    {"delay_spread", c.channel.delay_spread},
                    {"angular_std_deg", c.channel.angular_std_deg},
                    {"spacing", c.channel.spacing},
                    {"angles_deg", c.channel.angles_deg},
                    {"normalize", c.channel.normalize}};
    json rx = {{"csi", to_string(c.receiver.csi)},
               {"interpolation", name_of(interpolation_names, c.receiver.interpolation)},
               {"group_symbols", c.receiver.group_symbols},
               {"group_subcarriers", c.receiver.group_subcarriers},
               {"covariance", name_of(covariance_names, c.receiver.covariance)},
               {"covariance_samples", c.receiver.covariance_samples},
               {"covariance_files", c.receiver.covariance_files}};
    if (c.receiver.power_decay)
        rx["power_decay"] = {{"alpha", (*c.receiver.power_decay)[0]},
                             {"beta", (*c.receiver.power_decay)[1]},
                             {"gamma", (*c.receiver.power_decay)[2]}};
    j["receiver"] = rx;
    j["downlink"] = {{"statistics_samples", c.downlink.statistics_samples}};
    j["detector"] = {{"ml", c.detector.ml},
                     {"lmmse", c.detector.lmmse},
                     {"mmnet", c.detector.mmnet},
                     {"iterations", c.detector.iterations},
                     {"psi", c.detector.psi},
                     {"params_file", c.detector.params_file},
                     {"residual_uses_antenna_count", c.detector.residual_uses_antenna_count}};
    const auto& w = c.waveform;
    j["waveform"] = {{"subcarriers", w.shape.subcarriers},
                     {"oversampling", w.shape.oversampling},
                     {"symbol_duration", w.shape.symbol_duration},
                     {"cp_duration", w.shape.cp_duration},
                     {"bits_per_symbol", w.bits_per_symbol},
                     {"eps", w.eps},
                     {"reserved", w.reserved},
                     {"tr_iterations", w.tr_iterations},
                     {"clip_ratio", w.clip_ratio},
                     {"pilot_period", w.pilot_period},
                     {"ccdf_step_db", w.ccdf_step_db},
                     {"ccdf_max_db", w.ccdf_max_db},
                     {"aclr", w.aclr}};
    return j;
}

void check(std::vector<std::string>& problems, bool ok, const std::string& message)
{
    if (!ok)
        problems.push_back(message);
}

} // namespace

config_error::config_error(const std::string& what, std::vector<std::string> problems, std::size_t line)
    : std::invalid_argument(what), problems_(std::move(problems)), line_(line)
{
}

std::string to_string(Scenario s) { return name_of(scenario_names, s); }
std::string to_string(CsiMode m) { return name_of(csi_names, m); }

CsiMode parse_csi_mode(const std::string& s)
{
    if (auto v = value_of(csi_names, s))
        return *v;
    throw config_error("unknown CSI mode '" + s + "', expected one of " + choices(csi_names),
                       {"mode: unknown value '" + s + "'"});
}

void SimConfig::validate() const
{
    std::vector<std::string> p;
    check(p, trials >= 1, "trials: must be >= 1");
    check(p, !snr_db.empty(), "snr_db: must not be empty");
    check(p, workers >= 1, "workers: must be >= 1");
    for (double s : snr_db)
        check(p, std::isfinite(s), "snr_db: entries must be finite");
    try
    {
        grid.validate();
    }
    catch (const std::invalid_argument& e)
    {
        p.push_back(std::string("grid: ") + e.what());
    }
    check(p, scenario != Scenario::downlink || grid.duplex == Duplex::uplink_downlink,
          "grid.duplex: the downlink scenario needs 'uplink-downlink'");
    if (scenario == Scenario::uplink || scenario == Scenario::downlink)
    {
        try
        {
            (void)pilot_pattern();
        }
        catch (const std::exception& e)
        {
            p.push_back(std::string("pilots: ") + e.what());
        }
    }
    check(p, pilots.comb >= 1, "pilots.comb: must be >= 1");

    check(p, channel.doppler >= 0.0, "channel.doppler: must be >= 0");
    check(p, channel.delay_spread >= 0.0, "channel.delay_spread: must be >= 0");
    check(p, channel.angular_std_deg >= 0.0, "channel.angular_std_deg: must be >= 0");
    check(p, channel.spacing > 0.0, "channel.spacing: must be > 0");
    check(p, channel.angles_deg.empty() || int(channel.angles_deg.size()) == grid.users,
          "channel.angles_deg: needs one angle per user");

    check(p, receiver.group_symbols >= 1, "receiver.group_symbols: must be >= 1");
    check(p, receiver.group_subcarriers >= 1, "receiver.group_subcarriers: must be >= 1");
    check(p, receiver.covariance_samples >= 2, "receiver.covariance_samples: must be >= 2");
    check(p, receiver.covariance != CovarianceSource::file || int(receiver.covariance_files.size()) == grid.users,
          "receiver.covariance_files: needs one file per user");
    if (receiver.power_decay)
    {
        const auto& pd = *receiver.power_decay;
        check(p, pd[0] >= 0.0, "receiver.power_decay.alpha: must be >= 0");
        check(p, pd[1] >= 0.0 && pd[1] <= 1.0, "receiver.power_decay.beta: must lie in [0, 1]");
    }
    check(p, downlink.statistics_samples >= 2, "downlink.statistics_samples: must be >= 2");

    check(p, detector.iterations >= 1, "detector.iterations: must be >= 1");
    check(p, detector.psi > 0.0, "detector.psi: must be > 0");
    if (scenario == Scenario::detect_bench)
    {
        check(p, detector.ml || detector.lmmse || detector.mmnet, "detector: enable at least one detector");
        check(p, !detector.ml || grid.bits_per_symbol * grid.users <= 20,
              "detector.ml: needs Q K <= 20 (got " + std::to_string(grid.bits_per_symbol * grid.users) + ")");
        check(p, grid.antennas >= grid.users, "grid.antennas: detection needs L >= K");
    }

    const auto& w = waveform;
    try
    {
        w.shape.validate();
    }
    catch (const std::invalid_argument& e)
    {
        p.push_back(std::string("waveform: ") + e.what());
    }
    check(p, w.bits_per_symbol == 2 || w.bits_per_symbol == 4 || w.bits_per_symbol == 6 || w.bits_per_symbol == 8,
          "waveform.bits_per_symbol: must be 2, 4, 6 or 8");
    check(p, !w.eps.empty(), "waveform.eps: must not be empty");
    for (double e : w.eps)
        check(p, e >= 0.0 && e < 1.0, "waveform.eps: entries must lie in [0, 1)");
    check(p, !w.reserved.empty(), "waveform.reserved: must not be empty");
    for (int r : w.reserved)
        check(p, r >= 0 && r <= w.shape.subcarriers, "waveform.reserved: entries must lie in [0, N]");
    check(p, w.tr_iterations >= 0, "waveform.tr_iterations: must be >= 0");
    check(p, w.clip_ratio > 0.0 && w.clip_ratio < 1.0, "waveform.clip_ratio: must lie in (0, 1)");
    check(p, w.pilot_period >= 0, "waveform.pilot_period: must be >= 0");
    check(p, w.ccdf_step_db > 0.0, "waveform.ccdf_step_db: must be > 0");
    check(p, w.ccdf_max_db >= 0.0, "waveform.ccdf_max_db: must be >= 0");

    if (!p.empty())
    {
        std::string msg = "invalid configuration:";
        for (const auto& s : p)
            msg += "\n  " + s;
        throw config_error(msg, p);
    }
}

PilotPattern SimConfig::pilot_pattern() const
{
    GridConfig g = grid;
    if (!pilots.triples.empty())
        return pilot_pattern_from_triples(g, pilots.triples);
    return build_pilot_pattern(g, pilots.layout, pilots.comb);
}

std::vector<ScatteringModel> SimConfig::scattering_models() const
{
    std::vector<ScatteringModel> out;
    for (int k = 0; k < grid.users; ++k)
    {
        ScatteringModel s;
        const double angle = channel.angles_deg.empty() ? -60.0 + 120.0 * (k + 0.5) / grid.users
                                                        : channel.angles_deg[std::size_t(k)];
        s.angle = angle * deg;
        s.angular_std = channel.angular_std_deg * deg;
        s.spacing = channel.spacing;
        s.antennas = grid.antennas;
        out.push_back(s);
    }
    return out;
}

SimConfig parse_config(const std::string& text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        const std::size_t line = line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
        throw config_error("config parse error at line " + std::to_string(line) + ": " + e.what(),
                           {"parse error (line " + std::to_string(line) + ")"}, line);
    }

    SimConfig c;
    std::vector<std::string> problems;
    std::size_t first_line = 0;
    Section top(j, "", text, problems, first_line);
    top.get_enum("scenario", scenario_names, c.scenario);
    top.get("seed", c.seed);
    top.get("trials", c.trials);
    top.get("snr_db", c.snr_db);
    top.get("output", c.output);
    top.get("workers", c.workers);

    c.grid.duplex = c.scenario == Scenario::downlink ? Duplex::uplink_downlink : Duplex::uplink_only;
    if (top.has("grid"))
    {
        Section s(top.raw("grid"), "grid.", text, problems, first_line);
        s.get("symbols", c.grid.symbols);
        s.get("subcarriers", c.grid.subcarriers);
        s.get("users", c.grid.users);
        s.get("antennas", c.grid.antennas);
        s.get("bits_per_symbol", c.grid.bits_per_symbol);
        s.get("subcarrier_spacing", c.grid.subcarrier_spacing);
        s.get_enum("duplex", duplex_names, c.grid.duplex);
        s.finish();
    }
    if (top.has("pilots"))
    {
        Section s(top.raw("pilots"), "pilots.", text, problems, first_line);
        s.get_enum("layout", layout_names, c.pilots.layout);
        s.get("comb", c.pilots.comb);
        if (s.has("triples"))
        {
            const auto& t = s.raw("triples");
            bool ok = t.is_array();
            if (ok)
                for (const auto& e : t)
                {
                    ok = ok && e.is_array() && e.size() == 3 &&
                         std::all_of(e.begin(), e.end(), [](const json& v) { return v.is_number_integer(); });
                    if (ok)
                        c.pilots.triples.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
                }
            if (!ok)
                s.fail("pilots.triples", "expected an array of [user, symbol, subcarrier] integer triples");
        }
        s.finish();
    }
    if (top.has("channel"))
    {
        Section s(top.raw("channel"), "channel.", text, problems, first_line);
        s.get_enum("model", channel_names, c.channel.kind);
        s.get("doppler", c.channel.doppler);
        s.get("delay_spread", c.channel.delay_spread);
        s.get("angular_std_deg", c.channel.angular_std_deg);
        s.get("spacing", c.channel.spacing);
        s.get("angles_deg", c.channel.angles_deg);
        s.get("normalize", c.channel.normalize);
        s.finish();
    }
    if (top.has("receiver"))
    {
        Section s(top.raw("receiver"), "receiver.", text, problems, first_line);
        s.get_enum("csi", csi_names, c.receiver.csi);
        s.get_enum("interpolation", interpolation_names, c.receiver.interpolation);
        s.get("group_symbols", c.receiver.group_symbols);
        s.get("group_subcarriers", c.receiver.group_subcarriers);
        s.get_enum("covariance", covariance_names, c.receiver.covariance);
        s.get("covariance_samples", c.receiver.covariance_samples);
        s.get("covariance_files", c.receiver.covariance_files);
        if (s.has("power_decay"))
        {
            Section pd(s.raw("power_decay"), "receiver.power_decay.", text, problems, first_line);
            std::array<double, 3> v{0.0, 0.0, 0.0};
            const std::size_t before = problems.size();
            for (int i = 0; i < 3; ++i)
            {
                const char* key = i == 0 ? "alpha" : i == 1 ? "beta" : "gamma";
                if (!pd.has(key))
                    pd.fail(std::string("receiver.power_decay.") + key, "missing");
                else
                    pd.get(key, v[std::size_t(i)]);
            }
            pd.finish();
            if (problems.size() == before)
                c.receiver.power_decay = v;
        }
        s.finish();
    }
    if (top.has("downlink"))
    {
        Section s(top.raw("downlink"), "downlink.", text, problems, first_line);
        s.get("statistics_samples", c.downlink.statistics_samples);
        s.finish();
    }
    if (top.has("detector"))
    {
        Section s(top.raw("detector"), "detector.", text, problems, first_line);
        s.get("ml", c.detector.ml);
        s.get("lmmse", c.detector.lmmse);
        s.get("mmnet", c.detector.mmnet);
        s.get("iterations", c.detector.iterations);
        s.get("psi", c.detector.psi);
        s.get("params_file", c.detector.params_file);
        s.get("residual_uses_antenna_count", c.detector.residual_uses_antenna_count);
        s.finish();
    }
    if (top.has("waveform"))
    {
        auto& w = c.waveform;
        Section s(top.raw("waveform"), "waveform.", text, problems, first_line);
        s.get("subcarriers", w.shape.subcarriers);
        s.get("oversampling", w.shape.oversampling);
        s.get("symbol_duration", w.shape.symbol_duration);
        s.get("cp_duration", w.shape.cp_duration);
        s.get("bits_per_symbol", w.bits_per_symbol);
        s.get("eps", w.eps);
        s.get("reserved", w.reserved);
        s.get("tr_iterations", w.tr_iterations);
        s.get("clip_ratio", w.clip_ratio);
        s.get("pilot_period", w.pilot_period);
        s.get("ccdf_step_db", w.ccdf_step_db);
        s.get("ccdf_max_db", w.ccdf_max_db);
        s.get("aclr", w.aclr);
        s.finish();
    }
    top.finish();

    if (!problems.empty())
    {
        std::string msg = "invalid configuration:";
        for (const auto& s : problems)
            msg += "\n  " + s;
        throw config_error(msg, problems, first_line);
    }
    c.validate();
    return c;
}

SimConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config file '" + path + "'", {"file: cannot open '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const SimConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const SimConfig& cfg)
{
    json j = to_json(cfg);
    j.erase("output");
    j.erase("workers");
    const std::string canon = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon)
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool operator==(const SimConfig& a, const SimConfig& b) { return to_json(a) == to_json(b); }

} // namespace mumimo
