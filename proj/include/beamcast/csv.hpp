// SPDX-License-Identifier: Apache-2.0
//
// beamcast — link-level simulator for predictive hybrid beamforming on
// high-speed-railway mmWave links
// Copyright (C) 2026 beamcast developers
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

#ifndef BEAMCAST_CSV_HPP
#define BEAMCAST_CSV_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "beamcast/common.hpp"

namespace beamcast {

// Shortest round-trip formatting keeps output CSVs byte-stable across runs.
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char tight[40];
            std::snprintf(tight, sizeof(tight), "%.*g", prec, v);
            if (std::strtod(tight, nullptr) == v)
                return tight;
        }
    }
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& header) : out_(path) {
        if (!out_)
            throw std::runtime_error("cannot open for writing: " + path);
        out_ << header << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    return cells;
}

// Reads a CSV with the given exact header; returns rows of parsed doubles.
inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path,
                                                         const std::string& expected_header) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty csv: " + path);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != expected_header)
        throw std::runtime_error("unexpected header in " + path + ": got '" + line + "', want '" +
                                 expected_header + "'");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        std::vector<double> vals;
        vals.reserve(cells.size());
        for (auto& c : cells)
            vals.push_back(std::strtod(c.c_str(), nullptr));
        rows.push_back(std::move(vals));
    }
    return rows;
}

} // namespace beamcast

#endif
