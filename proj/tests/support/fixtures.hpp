#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fxrp::testing {

/// Numeric CSV with a header row, keyed by column name.
inline std::map<std::string, std::vector<double>> read_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> names;
    for (std::stringstream ss(line); std::getline(ss, line, ',');) names.push_back(line);
    std::map<std::string, std::vector<double>> cols;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t i = 0; i < names.size() && std::getline(ss, cell, ','); ++i)
            cols[names[i]].push_back(std::stod(cell));
    }
    return cols;
}

}  // namespace fxrp::testing
