/*
 * Copyright 2026 The hmera Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "filters.hpp"

namespace hmera {

/// Rows of numbers with a header; rendered with 12 significant digits and an optional JSON footer.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json footer;

    void add(std::vector<double> row) {
        if (row.size() != columns.size()) throw InvalidInput("table row has the wrong number of columns");
        rows.push_back(std::move(row));
    }

    std::string csv() const {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os << std::setprecision(12);
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
        if (!footer.is_null()) {
            os << "# ---\n";
            std::istringstream js(dump_json(footer));
            for (std::string line; std::getline(js, line);) os << "# " << line << '\n';
        }
        return os.str();
    }

    nlohmann::json json() const {
        nlohmann::json j;
        j["columns"] = columns;
        j["rows"] = rows;
        if (!footer.is_null()) j["meta"] = footer;
        return j;
    }
};

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path);
    out << text;
}

}  // namespace hmera
