#pragma once

#include <adjustkit/ci.hpp>
#include <adjustkit/dataset.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>
#include <adjustkit/estimators.hpp>
#include <adjustkit/io.hpp>
#include <adjustkit/parallel.hpp>
#include <adjustkit/search.hpp>

#include <chrono>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace adjustkit {

enum class SearchSource { Oracle, Empirical };

struct ExperimentConfig {
    AdjustmentQuery query;
    double epsilon = 0.05;
    double delta = 0.1;
    double c0 = 2.0;
    std::vector<std::size_t> grid;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    SamplingMode sampling = SamplingMode::FixedN;
    SearchSource search = SearchSource::Oracle;
    bool timing = false;
};

// CSV schema, one row per (method, n, trial):
//   method,n,trial,estimate,abs_error,chosen,decision,alpha_s,elapsed
// method    direct | amba | amba+bamba
// chosen    adjustment set used, names joined by ';' (empty for the empty set)
// decision  use-subset | use-Z, the trial's subset-vs-Z decision (empty in
//           convergence runs)
// alpha_s   alpha of the AMBA output fed to the decision (empty if unused)
// elapsed   seconds spent on the method, only with timing enabled
inline constexpr const char* kReportHeader = "method,n,trial,estimate,abs_error,chosen,decision,alpha_s,elapsed";

struct ReportRow {
    std::string method;
    std::size_t n = 0;
    std::size_t trial = 0;
    double estimate = 0.0;
    std::optional<double> abs_error;
    VarSet chosen;
    std::string decision;
    std::optional<double> alpha_s;
    std::optional<double> elapsed;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join(const VarSet& names, char sep) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += sep;
        out += names[i];
    }
    return out;
}

/// Stream key for one (grid point, trial) pair.
inline std::uint64_t trial_key(std::uint64_t seed, std::size_t grid_index, std::size_t trial) {
    return seed ^ ((static_cast<std::uint64_t>(grid_index) << 32) | static_cast<std::uint64_t>(trial));
}

inline SampleDataset draw(const JointDistribution& dist, std::size_t n, SamplingMode mode, std::uint64_t key) {
    if (mode == SamplingMode::Poissonized && n >= 1) return poissonized_sample(dist, static_cast<double>(n), key);
    return sample(dist, n, key);
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw Error(ErrorCode::Usage, "trials must be >= 1");
    if (cfg.grid.empty()) throw Error(ErrorCode::Usage, "sample grid must not be empty");
    for (std::size_t i = 1; i < cfg.grid.size(); ++i) {
        if (cfg.grid[i] <= cfg.grid[i - 1]) throw Error(ErrorCode::Usage, "sample grid must be strictly increasing");
    }
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

inline std::string format_row(const ReportRow& r) {
    std::string out = r.method + "," + std::to_string(r.n) + "," + std::to_string(r.trial) + "," +
                      detail::format_double(r.estimate) + ",";
    if (r.abs_error) out += detail::format_double(*r.abs_error);
    out += "," + detail::join(r.chosen, ';') + "," + r.decision + ",";
    if (r.alpha_s) out += detail::format_double(*r.alpha_s);
    out += ",";
    if (r.elapsed) out += detail::format_double(*r.elapsed);
    return out;
}

inline std::string format_report(const std::vector<ReportRow>& rows) {
    std::string out = std::string(kReportHeader) + "\n";
    for (const auto& r : rows) out += format_row(r) + "\n";
    return out;
}

inline ReportRow parse_row(const std::string& line) {
    const auto fields = detail::split(line, ',');
    if (fields.size() != 9) throw Error(ErrorCode::ParseError, "report row needs 9 fields: " + line);
    auto number = [&](std::string_view f) {
        try {
            std::size_t used = 0;
            const std::string s(f);
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "bad number in report row: " + line);
        }
    };
    auto optional_number = [&](std::string_view f) -> std::optional<double> {
        if (f.empty()) return std::nullopt;
        return number(f);
    };
    ReportRow r;
    r.method = std::string(fields[0]);
    if (r.method != "direct" && r.method != "amba" && r.method != "amba+bamba") {
        throw Error(ErrorCode::ParseError, "unknown method " + r.method);
    }
    r.n = static_cast<std::size_t>(number(fields[1]));
    r.trial = static_cast<std::size_t>(number(fields[2]));
    r.estimate = number(fields[3]);
    r.abs_error = optional_number(fields[4]);
    if (r.abs_error && *r.abs_error < 0.0) throw Error(ErrorCode::ParseError, "negative abs_error");
    if (!fields[5].empty()) {
        for (auto name : detail::split(fields[5], ';')) r.chosen.emplace_back(name);
    }
    r.decision = std::string(fields[6]);
    r.alpha_s = optional_number(fields[7]);
    r.elapsed = optional_number(fields[8]);
    return r;
}

inline std::vector<ReportRow> parse_report(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader) throw Error(ErrorCode::ParseError, "bad report header");
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(parse_row(line));
    }
    return rows;
}

/// Plug-in error |T_hat - T| on the adjustment set of cfg.query for every n
/// in the grid and every trial. Rows are ordered by (n, trial).
inline std::vector<ReportRow> run_convergence(const JointDistribution& oracle, const ExperimentConfig& cfg) {
    detail::validate_config(cfg);
    const double truth = exact_adjustment(oracle, cfg.query);
    const VarSet chosen = detail::Schema{oracle.variables()}.names(oracle.positions(cfg.query.adjust));
    const std::size_t per_n = cfg.trials;
    return parallel_map<ReportRow>(cfg.grid.size() * per_n, [&](std::size_t job) {
        const std::size_t gi = job / per_n;
        const std::size_t trial = job % per_n;
        const std::size_t n = cfg.grid[gi];
        detail::Stopwatch clock;
        const auto data = detail::draw(oracle, n, cfg.sampling, detail::trial_key(cfg.seed, gi, trial));
        const auto est = plugin_adjustment(data, cfg.query);
        ReportRow row;
        row.method = "direct";
        row.n = n;
        row.trial = trial;
        row.estimate = est.value;
        row.abs_error = std::abs(est.value - truth);
        row.chosen = chosen;
        if (cfg.timing) row.elapsed = clock.seconds();
        return row;
    });
}

/// Per trial, one shared dataset and three estimates: directly on Z, on the
/// AMBA blanket S, and on the BAMBA screening set S'. Each row carries the
/// trial's subset-vs-Z decision. Rows are ordered by (method, n, trial).
inline std::vector<ReportRow> run_pipeline_comparison(const JointDistribution& oracle, const ExperimentConfig& cfg) {
    detail::validate_config(cfg);
    const auto& q = cfg.query;
    const double truth = exact_adjustment(oracle, q);
    const detail::Schema schema{oracle.variables()};
    const VarSet x = q.x.variables();
    const VarSet y = q.y.variables();
    const VarSet z = schema.names(oracle.positions(q.adjust));
    const std::size_t per_n = cfg.trials;
    const std::size_t jobs = cfg.grid.size() * per_n;

    struct TrialRows {
        ReportRow direct, amba, both;
    };
    const auto results = parallel_map<TrialRows>(jobs, [&](std::size_t job) {
        const std::size_t gi = job / per_n;
        const std::size_t trial = job % per_n;
        const std::size_t n = cfg.grid[gi];
        const auto data = detail::draw(oracle, n, cfg.sampling, detail::trial_key(cfg.seed, gi, trial));

        const bool use_oracle = cfg.search == SearchSource::Oracle;
        const CiTester tester = use_oracle ? CiTester::exact(cfg.epsilon, cfg.delta)
                                           : CiTester::empirical(cfg.epsilon, cfg.delta, cfg.c0);
        const Evidence evidence = use_oracle ? Evidence(oracle) : Evidence(data);

        auto make = [&](const char* method, const VarSet& set, double seconds) {
            ReportRow row;
            row.method = method;
            row.n = n;
            row.trial = trial;
            row.estimate = plugin_adjustment(data, {q.x, q.y, set}).value;
            row.abs_error = std::abs(row.estimate - truth);
            row.chosen = set;
            if (cfg.timing) row.elapsed = seconds;
            return row;
        };

        TrialRows out;
        detail::Stopwatch direct_clock;
        out.direct = make("direct", z, 0.0);
        if (cfg.timing) out.direct.elapsed = direct_clock.seconds();

        detail::Stopwatch amba_clock;
        const auto blanket = amba(tester, evidence, x, z);
        const double alpha_s = use_oracle ? alpha(oracle, q.x, blanket.chosen) : empirical_alpha(data, q.x, blanket.chosen);
        const auto decision = amba_decision({n, data.alphabet_size(x), data.alphabet_size(z), blanket.chosen.size(), alpha_s});
        out.amba = make("amba", blanket.chosen, 0.0);
        if (cfg.timing) out.amba.elapsed = amba_clock.seconds();

        const auto screening = bamba(tester, evidence, x, y, z, blanket.chosen);
        out.both = make("amba+bamba", screening.chosen, 0.0);
        if (cfg.timing) out.both.elapsed = amba_clock.seconds();

        for (ReportRow* r : {&out.direct, &out.amba, &out.both}) {
            r->decision = std::string(to_string(decision.decision));
            r->alpha_s = alpha_s;
        }
        return out;
    });

    std::vector<ReportRow> rows;
    rows.reserve(3 * jobs);
    for (const auto& r : results) rows.push_back(r.direct);
    for (const auto& r : results) rows.push_back(r.amba);
    for (const auto& r : results) rows.push_back(r.both);
    return rows;
}

}  // namespace adjustkit
