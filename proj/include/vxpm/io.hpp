// Copyright 2026 The vxpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VXPM_IO_HPP
#define VXPM_IO_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vxpm/types.hpp"

namespace vxpm {

// Flat numeric table with a resolved-configuration echo. CSV is the primary
// artifact (one comment row with the config, one header row, %.12g cells);
// JSON mirrors the same content for programmatic consumers.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, double>> footer;  // fit diagnostics etc.

    void add_config(const std::string& key, const std::string& value) {
        config.emplace_back(key, value);
    }
    void add_config(const std::string& key, double value) {
        config.emplace_back(key, format_double(value));
    }

    static std::string format_double(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return buf;
    }
};

inline std::string config_line(const Table& t) {
    std::string line;
    for (const auto& [k, v] : t.config) {
        if (!line.empty()) line += " ";
        line += k + "=" + v;
    }
    return line;
}

inline void write_csv(std::ostream& os, const Table& t) {
    os << "# config: " << config_line(t) << "\n";
    for (size_t c = 0; c < t.columns.size(); ++c) {
        os << t.columns[c] << (c + 1 < t.columns.size() ? "," : "");
    }
    os << "\n";
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            os << Table::format_double(row[c]) << (c + 1 < row.size() ? "," : "");
        }
        os << "\n";
    }
    for (const auto& [k, v] : t.footer) {
        os << "# " << k << "=" << Table::format_double(v) << "\n";
    }
}

inline void write_json(std::ostream& os, const Table& t) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : t.config) j["config"][k] = v;
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) j["rows"].push_back(row);
    for (const auto& [k, v] : t.footer) j["diagnostics"][k] = v;
    os << j.dump(2) << "\n";
}

inline void write_table(const std::string& path, const Table& t, const std::string& format) {
    std::ofstream os(path);
    if (!os) throw InvalidParameter("cannot open output file: " + path);
    if (format == "csv") {
        write_csv(os, t);
    } else if (format == "json") {
        write_json(os, t);
    } else {
        throw InvalidParameter("unknown output format: " + format);
    }
}

}  // namespace vxpm

#endif  // VXPM_IO_HPP
