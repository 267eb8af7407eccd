#pragma once

#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace srct::jsonl {

using json = nlohmann::ordered_json;

// Reads line-delimited JSON records. Also accepts a whole-file JSON array,
// which is how some published population files are laid out.
inline std::vector<json> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<json> records;

    // Peek past whitespace to detect an array file.
    char first = 0;
    while (in.get(first) && (first == ' ' || first == '\t' || first == '\n' || first == '\r')) {
    }
    if (!in && first == 0) return records;
    in.seekg(0);

    if (first == '[') {
        json arr;
        try {
            arr = json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ": invalid JSON array: " + e.what());
        }
        if (!arr.is_array()) throw std::runtime_error(path + ": expected a JSON array");
        for (auto& item : arr) records.push_back(std::move(item));
        return records;
    }

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed record: " + e.what());
        }
    }
    return records;
}

inline void write_records(const std::string& path, const std::vector<json>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& r : records) out << r.dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace srct::jsonl
