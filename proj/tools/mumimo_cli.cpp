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
#include "mumimo/io.hpp"
#include "mumimo/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

namespace
{

using nlohmann::json;

struct Options
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string mode;
    int workers = 0;
};

int fail(const std::string& kind, const std::string& message, int code, const json& extra = json::object())
{
    json j = {{"status", "error"}, {"kind", kind}, {"message", message}};
    j.update(extra);
    std::cerr << j.dump() << std::endl;
    return code;
}

mumimo::SimConfig prepare(const Options& opt, std::optional<mumimo::Scenario> scenario)
{
    mumimo::SimConfig cfg = mumimo::load_config(opt.config);
    if (scenario)
    {
        cfg.scenario = *scenario;
        if (*scenario == mumimo::Scenario::downlink)
            cfg.grid.duplex = mumimo::Duplex::uplink_downlink;
    }
    if (opt.seed)
        cfg.seed = *opt.seed;
    if (!opt.out.empty())
        cfg.output = opt.out;
    if (!opt.mode.empty())
        cfg.receiver.csi = mumimo::parse_csi_mode(opt.mode);
    if (opt.workers > 0)
        cfg.workers = opt.workers;
    cfg.validate();
    return cfg;
}

int run(const std::string& command, const Options& opt)
{
    using mumimo::Scenario;
    if (command == "estimate-stats")
    {
        const auto cfg = prepare(opt, std::nullopt);
        if (cfg.output.empty())
            return fail("usage", "estimate-stats needs --out or an 'output' config entry", 2);
        const auto stats = mumimo::estimate_channel_statistics(cfg);
        const auto files = mumimo::write_channel_statistics(stats, cfg.output);
        std::cout << json{{"status", "ok"}, {"config_hash", mumimo::config_hash(cfg)}, {"files", files}}.dump()
                  << std::endl;
        return 0;
    }
    const Scenario scenario = command == "uplink"     ? Scenario::uplink
                              : command == "downlink" ? Scenario::downlink
                              : command == "waveform" ? Scenario::waveform
                                                      : Scenario::detect_bench;
    const auto cfg = prepare(opt, scenario);
    const auto report = mumimo::run_scenario(cfg);
    if (cfg.output.empty())
    {
        report.write_csv(std::cout);
        return 0;
    }
    const auto files = report.write_files(cfg.output);
    std::cout << json{{"status", "ok"}, {"config_hash", report.config_hash}, {"files", files}}.dump() << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mumimo: link-level MU-MIMO OFDM simulation"};
    app.require_subcommand(1);
    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"uplink", "uplink Monte Carlo sweep"},
        {"downlink", "uplink estimation, precoding and downlink sweep"},
        {"detect-bench", "LMMSE / ML / iterative detector benchmark"},
        {"waveform", "PAPR, ACLR and tone reservation report"},
        {"estimate-stats", "empirical Sigma / Omega / Psi from generated channels"}};
    for (const auto& [name, help] : commands)
    {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "JSON configuration file")->required();
        sub->add_option("--seed", opt.seed, "override the configured seed");
        sub->add_option("--out", opt.out, "output path prefix (CSV to stdout when absent)");
        sub->add_option("--mode", opt.mode, "CSI mode: perfect | exact | power-decay");
        sub->add_option("--workers", opt.workers, "worker threads (results do not depend on it)")
            ->check(CLI::PositiveNumber);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        return fail("usage", e.what(), 2);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try
    {
        return run(command, opt);
    }
    catch (const mumimo::config_error& e)
    {
        json extra = {{"problems", e.problems()}};
        if (e.line())
            extra["line"] = e.line();
        return fail("config", e.what(), 2, extra);
    }
    catch (const mumimo::io_error& e)
    {
        json extra = json::object();
        if (e.line())
            extra["line"] = e.line();
        return fail("io", e.what(), 3, extra);
    }
    catch (const mumimo::dimension_error& e)
    {
        return fail("dimension", e.what(), 4);
    }
    catch (const mumimo::model_error& e)
    {
        return fail("model", e.what(), 4);
    }
    catch (const std::exception& e)
    {
        return fail("runtime", e.what(), 1);
    }
}
