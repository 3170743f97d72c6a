// SPDX-License-Identifier: Apache-2.0
//
// mcbf - multicell coordinated beamforming with limited feedback
// Copyright (C) 2026 The mcbf authors
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

#ifndef MCBF_CLI_HPP
#define MCBF_CLI_HPP

#include "fading.hpp"
#include "harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mcbf {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/*
 * Scenario file: one `key = value` per line, `#` starts a comment, lists are
 * comma separated.
 *
 *   M, K              antennas per station, cells (must be equal)
 *   Ts_ms             subframe duration [ms]
 *   T                 horizon [subframes]
 *   Bs                feedback bits per user
 *   velocities_kmh    one velocity per user [km/h]; link (i, j) uses user j's
 *   fc_hz             carrier frequency, default 2e9
 *   c_mps             propagation speed, default 299792458
 *   mu11_db_start / mu11_db_stop / mu11_db_step   sweep, default 10 / 19 / 1
 *   cross_offsets_db  K-1 offsets below mu11 for stations i+1, i+2, ... (mod K),
 *                     default 2, 3, ...
 *   trials, codebook_refresh, seed   default 500, 50, 1
 */
namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    text = trim(text);
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw ConfigError("config field '" + std::string(key) + "': not a valid number: '" + std::string(text) + "'");
    return value;
}

inline std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    while (true) {
        const auto comma = text.find(',');
        out.push_back(parse_number<double>(key, text.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

} // namespace detail

inline NetworkConfig parse_config(std::string_view text) {
    std::map<std::string, std::string, std::less<>> fields;
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (fields.contains(key))
            throw ConfigError("config field '" + key + "': given twice");
        fields[key] = std::string(detail::trim(line.substr(eq + 1)));
    }

    static const std::vector<std::string> known = {
        "M", "K", "Ts_ms", "T", "Bs", "velocities_kmh", "fc_hz", "c_mps", "mu11_db_start", "mu11_db_stop",
        "mu11_db_step", "cross_offsets_db", "trials", "codebook_refresh", "seed"};
    for (const auto& [key, _] : fields)
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config field '" + key + "': unknown key");

    auto required = [&](const std::string& key) -> const std::string& {
        const auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("config field '" + key + "': missing mandatory field");
        return it->second;
    };
    auto optional = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = fields.find(key);
        if (it == fields.end())
            return std::nullopt;
        return it->second;
    };

    NetworkConfig cfg;
    cfg.M = detail::parse_number<int>("M", required("M"));
    cfg.K = detail::parse_number<int>("K", required("K"));
    cfg.Ts = detail::parse_number<double>("Ts_ms", required("Ts_ms")) * 1e-3;
    cfg.T = detail::parse_number<int>("T", required("T"));
    cfg.Bs = detail::parse_number<int>("Bs", required("Bs"));
    if (cfg.K < 2)
        throw ConfigError("config field 'K': cell count must be >= 2");

    const auto vel = detail::parse_list("velocities_kmh", required("velocities_kmh"));
    if (vel.size() != static_cast<std::size_t>(cfg.K))
        throw ConfigError("config field 'velocities_kmh': need exactly K values");
    std::vector<double> vel_mps;
    for (double v : vel)
        vel_mps.push_back(kmh_to_mps(v));
    cfg.v = velocities_from_users(vel_mps);

    if (auto s = optional("fc_hz"))
        cfg.fc = detail::parse_number<double>("fc_hz", *s);
    if (auto s = optional("c_mps"))
        cfg.c = detail::parse_number<double>("c_mps", *s);
    if (auto s = optional("mu11_db_start"))
        cfg.sweep_start_db = detail::parse_number<double>("mu11_db_start", *s);
    if (auto s = optional("mu11_db_stop"))
        cfg.sweep_stop_db = detail::parse_number<double>("mu11_db_stop", *s);
    if (auto s = optional("mu11_db_step"))
        cfg.sweep_step_db = detail::parse_number<double>("mu11_db_step", *s);
    cfg.cross_offsets_db = default_cross_offsets_db(cfg.K);
    if (auto s = optional("cross_offsets_db"))
        cfg.cross_offsets_db = detail::parse_list("cross_offsets_db", *s);
    if (auto s = optional("trials"))
        cfg.trials = detail::parse_number<int>("trials", *s);
    if (auto s = optional("codebook_refresh"))
        cfg.codebook_refresh = detail::parse_number<int>("codebook_refresh", *s);
    if (auto s = optional("seed"))
        cfg.seed = detail::parse_number<std::uint64_t>("seed", *s);

    if (cfg.cross_offsets_db.size() != static_cast<std::size_t>(cfg.K - 1))
        throw ConfigError("config field 'cross_offsets_db': need exactly K-1 values");
    cfg.mu = cfg.powers_at(cfg.sweep_start_db);

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

// ---- CSV ------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "mu11_db,scheme,mean_sum_rate,std_err,trials";

inline std::string format_g9(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline std::string write_csv(std::vector<SweepRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), sweep_row_less);
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += format_g9(r.mu11_db) + ',' + std::string(scheme_name(r.scheme)) + ',' + format_g9(r.mean_rate) + ',' +
               format_g9(r.std_err) + ',' + std::to_string(r.trials) + '\n';
    }
    return out;
}

inline std::vector<SweepRow> parse_csv(std::string_view text) {
    std::vector<SweepRow> rows;
    bool header = true;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = detail::trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty())
            continue;
        if (header) {
            if (line != kCsvHeader)
                throw std::invalid_argument("parse_csv: unexpected header");
            header = false;
            continue;
        }
        std::vector<std::string_view> cols;
        std::string_view rest = line;
        while (true) {
            const auto c = rest.find(',');
            cols.push_back(rest.substr(0, c));
            if (c == std::string_view::npos)
                break;
            rest.remove_prefix(c + 1);
        }
        if (cols.size() != 5)
            throw std::invalid_argument("parse_csv: expected 5 columns");
        const auto scheme = parse_scheme(cols[1]);
        if (!scheme)
            throw std::invalid_argument("parse_csv: unknown scheme");
        rows.push_back({detail::parse_number<double>("mu11_db", cols[0]), *scheme,
                        detail::parse_number<double>("mean_sum_rate", cols[2]),
                        detail::parse_number<double>("std_err", cols[3]), detail::parse_number<int>("trials", cols[4])});
    }
    return rows;
}

// ---- run ------------------------------------------------------------------

struct RunManifest {
    std::string config_path;
    std::string output_path;
    std::vector<SchemeId> schemes{kAllSchemes.begin(), kAllSchemes.end()};
    std::optional<std::uint64_t> seed_override;
    std::optional<int> trials_override;
    unsigned threads = 0;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

inline std::string describe_schedule(const SweepPoint& pt) {
    const FeedbackSchedule& s = *pt.schedule;
    std::ostringstream os;
    os << "mu11=" << format_g9(pt.mu11_db) << "dB " << scheme_name(s.scheme) << ":";
    if (s.scheme == SchemeId::PerfectCsi)
        return os.str() + " no feedback";
    const std::size_t k = s.bits.size();
    for (std::size_t i = 0; i < k; ++i) {
        os << " user" << i + 1 << " bits[";
        for (std::size_t j = 0, r = 0; j < k; ++j)
            if (j != i)
                os << (r++ ? "," : "") << s.bits(i, j);
        os << "]";
        if (s.scheme == SchemeId::Afp) {
            os << " omega[";
            for (std::size_t j = 0, r = 0; j < k; ++j)
                if (j != i)
                    os << (r++ ? "," : "") << s.period(i, j);
            os << "] total[";
            const auto& tot = s.afp[i].bits_total;
            for (std::size_t r = 0; r < tot.size(); ++r)
                os << (r ? "," : "") << tot[r];
            os << "]";
        }
    }
    return os.str();
}

/// Writes `contents` to a sibling temp file, then renames it over `path`.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw std::runtime_error("cannot open '" + tmp + "' for writing");
        os << contents;
        os.flush();
        if (!os) {
            os.close();
            std::remove(tmp.c_str());
            throw std::runtime_error("write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move output into place at '" + path + "': " + ec.message());
    }
}

/// Exit status: 0 success, 1 usage/config error, 2 runtime error.
inline int run(const RunManifest& manifest, std::ostream& diag) {
    if (manifest.config_path.empty() || manifest.output_path.empty() || manifest.schemes.empty()) {
        diag << "error: config path, output path and at least one scheme are required\n";
        return kExitConfig;
    }

    NetworkConfig cfg;
    try {
        std::ifstream is(manifest.config_path, std::ios::binary);
        if (!is)
            throw ConfigError("cannot read config file '" + manifest.config_path + "'");
        std::stringstream buf;
        buf << is.rdbuf();
        cfg = parse_config(buf.str());
        if (manifest.seed_override)
            cfg.seed = *manifest.seed_override;
        if (manifest.trials_override)
            cfg.trials = *manifest.trials_override;
        cfg.validate();
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::vector<SweepRow> rows;
    try {
        SweepOptions opt;
        opt.threads = manifest.threads;
        opt.on_plan = [&](const SweepPoint& pt) { diag << describe_schedule(pt) << '\n'; };
        rows = run_sweep(cfg, manifest.schemes, opt);
    } catch (const AfpConvergenceError& e) {
        diag << "error: solver did not converge at " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return kExitRuntime;
    }

    try {
        write_file_atomic(manifest.output_path, write_csv(rows));
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace mcbf

#endif
