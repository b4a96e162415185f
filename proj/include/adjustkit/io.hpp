#pragma once

#include <adjustkit/dataset.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace adjustkit {

// Distribution file:
//   {"variables":[{"name":"A","cardinality":2},...],"probabilities":[...]}
// probabilities are row-major with the last declared variable fastest.
//
// Dataset file: CSV, header = variable names in order, then one row of
// decimal category indices per sample. No quoting, no trailing fields.

inline nlohmann::json to_json(const JointDistribution& dist) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : dist.variables()) {
        vars.push_back({{"name", v.name}, {"cardinality", v.cardinality}});
    }
    nlohmann::json probs = nlohmann::json::array();
    for (double p : dist.probabilities()) probs.push_back(p);
    nlohmann::json out;
    out["variables"] = std::move(vars);
    out["probabilities"] = std::move(probs);
    return out;
}

inline JointDistribution dist_from_json(const nlohmann::json& doc) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ParseError, what); };
    if (!doc.is_object()) fail("distribution document must be an object");
    if (!doc.contains("variables") || !doc["variables"].is_array()) fail("missing \"variables\" array");
    if (!doc.contains("probabilities") || !doc["probabilities"].is_array()) {
        fail("missing \"probabilities\" array");
    }
    std::vector<VariableSpec> vars;
    std::size_t i = 0;
    for (const auto& v : doc["variables"]) {
        if (!v.is_object() || !v.contains("name") || !v["name"].is_string() || !v.contains("cardinality") ||
            !v["cardinality"].is_number_unsigned()) {
            fail("variables[" + std::to_string(i) + "] needs a string name and a positive integer cardinality");
        }
        vars.push_back({v["name"].get<std::string>(), v["cardinality"].get<std::size_t>()});
        ++i;
    }
    std::vector<double> probs;
    i = 0;
    for (const auto& p : doc["probabilities"]) {
        if (!p.is_number()) fail("probabilities[" + std::to_string(i) + "] is not a number");
        probs.push_back(p.get<double>());
        ++i;
    }
    return JointDistribution(std::move(vars), std::move(probs));
}

inline JointDistribution parse_dist(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    return dist_from_json(doc);
}

inline std::string format_dist(const JointDistribution& dist) { return to_json(dist).dump() + "\n"; }

namespace detail {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

inline JointDistribution read_dist(const std::string& path) { return parse_dist(detail::slurp(path)); }

inline void write_dist(const JointDistribution& dist, const std::string& path) {
    detail::spit(path, format_dist(dist));
}

inline std::string format_data(const SampleDataset& data) {
    std::string out;
    for (std::size_t i = 0; i < data.width(); ++i) {
        if (i) out += ',';
        out += data.variables()[i].name;
    }
    out += '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto row = data.row(r);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(row[i]);
        }
        out += '\n';
    }
    return out;
}

/// Parses the CSV dataset format. With a schema, the header must list the
/// schema's variables in order and indices are range-checked against it;
/// without one, each cardinality is inferred as max index + 1.
inline SampleDataset parse_data(const std::string& text,
                                const std::optional<std::vector<VariableSpec>>& schema = std::nullopt) {
    auto fail = [](std::size_t line, const std::string& what) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
    };
    std::vector<std::string_view> lines;
    {
        std::string_view view(text);
        std::size_t start = 0;
        while (start < view.size()) {
            std::size_t end = view.find('\n', start);
            if (end == std::string_view::npos) end = view.size();
            std::string_view line = view.substr(start, end - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            start = end + 1;
        }
    }
    if (lines.empty() || lines[0].empty()) fail(1, "missing header row");

    std::vector<std::string> names;
    for (auto field : detail::split(lines[0], ',')) {
        if (field.empty()) fail(1, "empty variable name in header");
        names.emplace_back(field);
    }
    if (schema) {
        if (schema->size() != names.size()) fail(1, "header does not match schema width");
        for (std::size_t i = 0; i < names.size(); ++i) {
            if ((*schema)[i].name != names[i]) fail(1, "header column " + names[i] + " does not match schema");
        }
    }

    std::vector<std::uint32_t> cells;
    std::vector<std::size_t> max_seen(names.size(), 0);
    for (std::size_t l = 1; l < lines.size(); ++l) {
        if (lines[l].empty() && l + 1 == lines.size()) break;
        const auto fields = detail::split(lines[l], ',');
        if (fields.size() != names.size()) fail(l + 1, "expected " + std::to_string(names.size()) + " fields");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            std::uint32_t value = 0;
            const auto* first = fields[i].data();
            const auto* last = first + fields[i].size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (fields[i].empty() || ec != std::errc() || ptr != last) {
                fail(l + 1, "field " + std::to_string(i + 1) + " is not a category index");
            }
            if (schema && value >= (*schema)[i].cardinality) {
                fail(l + 1, "index " + std::to_string(value) + " out of range for " + names[i]);
            }
            max_seen[i] = std::max<std::size_t>(max_seen[i], value);
            cells.push_back(value);
        }
    }

    std::vector<VariableSpec> vars;
    if (schema) {
        vars = *schema;
    } else {
        for (std::size_t i = 0; i < names.size(); ++i) vars.push_back({names[i], max_seen[i] + 1});
    }
    try {
        return SampleDataset(std::move(vars), std::move(cells));
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

inline SampleDataset read_data(const std::string& path,
                               const std::optional<std::vector<VariableSpec>>& schema = std::nullopt) {
    return parse_data(detail::slurp(path), schema);
}

inline void write_data(const SampleDataset& data, const std::string& path) {
    detail::spit(path, format_data(data));
}

}  // namespace adjustkit
