// adjustkit command-line front end. Every command prints one JSON object on
// stdout; failures print {"error": {...}} and exit non-zero.

#include <adjustkit/adjustkit.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ak = adjustkit;
using json = nlohmann::json;

namespace {

ak::VarSet parse_set(const std::string& text) {
    ak::VarSet out;
    if (text.empty()) return out;
    for (auto name : ak::detail::split(text, ',')) {
        if (name.empty()) throw ak::Error(ak::ErrorCode::Usage, "empty name in set '" + text + "'");
        out.emplace_back(name);
    }
    return out;
}

std::size_t parse_index(std::string_view text, const std::string& context) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ak::Error(ak::ErrorCode::Usage, "expected a non-negative integer in '" + context + "'");
    }
    return value;
}

// NAME=index[,NAME=index...]
ak::Event parse_event(const std::string& text) {
    ak::Event event;
    if (text.empty()) return event;
    for (auto item : ak::detail::split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw ak::Error(ak::ErrorCode::Usage, "event binding '" + std::string(item) + "' is not NAME=index");
        }
        event.bind(std::string(item.substr(0, eq)), parse_index(item.substr(eq + 1), text));
    }
    return event;
}

std::vector<std::size_t> parse_grid(const std::string& text) {
    std::vector<std::size_t> out;
    for (auto item : ak::detail::split(text, ',')) out.push_back(parse_index(item, text));
    return out;
}

double parse_number(const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ak::Error(ak::ErrorCode::Usage, "expected a number, got '" + text + "'");
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ak::Error(ak::ErrorCode::Usage, "parameter '" + item + "' is not key=value");
        }
        out[item.substr(0, eq)] = parse_number(item.substr(eq + 1));
    }
    return out;
}

json to_json(const ak::EstimateReport& r) {
    return {{"estimate", r.value},
            {"n_effective", r.n_effective},
            {"zero_cells", r.zero_cells},
            {"mode", r.mode == ak::SamplingMode::FixedN ? "fixed-n" : "poissonized"}};
}

json to_json(const ak::DecisionRecord& d) {
    return {{"n", d.inputs.n},       {"sigma_x", d.inputs.sigma_x}, {"sigma_z", d.inputs.sigma_z},
            {"k", d.inputs.k},       {"alpha_s", d.inputs.alpha_s}, {"lhs", d.lhs},
            {"rhs", d.rhs},          {"decision", ak::to_string(d.decision)}};
}

json to_json(const ak::SearchReport& r) {
    json out = {{"chosen", r.chosen},
                {"level_reached", r.level_reached},
                {"tests_run", r.tests_run},
                {"tests_per_level", r.tests_per_level},
                {"samples_required", r.samples_required},
                {"fallback_used", r.fallback_used}};
    if (r.decision_trace) out["decision_trace"] = to_json(*r.decision_trace);
    return out;
}

// Echo of every option the command accepts: given values, else defaults.
json echo(const CLI::App& cmd) {
    json cfg = {{"command", cmd.get_name()}};
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string key = opt->get_single_name();
        if (key == "help") continue;
        if (opt->get_expected_min() == 0) {
            cfg[key] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto& res = opt->results();
            cfg[key] = opt->get_expected_max() > 1 ? json(res) : json(res.back());
        } else if (!opt->get_default_str().empty()) {
            cfg[key] = opt->get_default_str();
        } else {
            cfg[key] = nullptr;
        }
    }
    return cfg;
}

struct Sources {
    std::string dist;
    std::string data;
    std::string schema;
};

std::optional<std::vector<ak::VariableSpec>> schema_for(const Sources& s) {
    const std::string& path = !s.schema.empty() ? s.schema : s.dist;
    if (path.empty()) return std::nullopt;
    return ak::read_dist(path).variables();
}

ak::SampleDataset load_data(const Sources& s) { return ak::read_data(s.data, schema_for(s)); }

void add_data_options(CLI::App* cmd, Sources& s) {
    cmd->add_option("--data", s.data, "dataset CSV")->check(CLI::ExistingFile);
    cmd->add_option("--schema", s.schema, "distribution file whose variables give the dataset cardinalities")
        ->check(CLI::ExistingFile);
}

struct Gallery {
    std::string family;
    std::vector<std::string> params;
    std::uint64_t seed = 0;

    ak::JointDistribution build() const { return ak::make_gallery({family, parse_params(params), seed}); }
};

struct Bench {
    Sources src;
    Gallery gallery;
    std::string x, y, set, grid, out, search = "oracle";
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    double eps = 0.05, delta = 0.1, c0 = 2.0;
    bool poisson = false, timing = false;

    ak::JointDistribution oracle() const {
        if (!src.dist.empty() && !gallery.family.empty()) {
            throw ak::Error(ak::ErrorCode::Usage, "give either --dist or --family, not both");
        }
        if (!src.dist.empty()) return ak::read_dist(src.dist);
        if (!gallery.family.empty()) return gallery.build();
        throw ak::Error(ak::ErrorCode::Usage, "need --dist or --family");
    }

    ak::ExperimentConfig config() const {
        ak::ExperimentConfig cfg;
        cfg.query = {parse_event(x), parse_event(y), parse_set(set)};
        cfg.epsilon = eps;
        cfg.delta = delta;
        cfg.c0 = c0;
        cfg.grid = parse_grid(grid);
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.sampling = poisson ? ak::SamplingMode::Poissonized : ak::SamplingMode::FixedN;
        if (search == "oracle") {
            cfg.search = ak::SearchSource::Oracle;
        } else if (search == "empirical") {
            cfg.search = ak::SearchSource::Empirical;
        } else {
            throw ak::Error(ak::ErrorCode::Usage, "--search must be oracle or empirical");
        }
        cfg.timing = timing;
        return cfg;
    }
};

void add_bench_options(CLI::App* cmd, Bench& b) {
    cmd->add_option("--dist,--oracle", b.src.dist, "ground-truth distribution file")->check(CLI::ExistingFile);
    cmd->add_option("--family", b.gallery.family, "gallery family used as ground truth");
    cmd->add_option("--param", b.gallery.params, "gallery parameter key=value (repeatable)");
    cmd->add_option("--gallery-seed", b.gallery.seed, "gallery seed");
    cmd->add_option("--x", b.x, "treatment event NAME=index,...")->required();
    cmd->add_option("--y", b.y, "outcome event NAME=index,...")->required();
    cmd->add_option("--set", b.set, "adjustment set Z");
    cmd->add_option("--grid", b.grid, "sample sizes, comma separated")->required();
    cmd->add_option("--trials", b.trials, "trials per sample size")->capture_default_str();
    cmd->add_option("--seed", b.seed, "experiment seed")->capture_default_str();
    cmd->add_option("--out", b.out, "CSV report path");
    cmd->add_flag("--poisson", b.poisson, "Poissonized sample sizes");
    cmd->add_flag("--timing", b.timing, "fill the elapsed column");
}

// Median abs_error per (method, n), in report order.
json summarize(const std::vector<ak::ReportRow>& rows) {
    json out = json::array();
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        std::vector<double> errors;
        std::size_t subset = 0;
        while (j < rows.size() && rows[j].method == rows[i].method && rows[j].n == rows[i].n) {
            errors.push_back(rows[j].abs_error.value_or(0.0));
            if (rows[j].decision == "use-subset") ++subset;
            ++j;
        }
        std::sort(errors.begin(), errors.end());
        const std::size_t m = errors.size();
        const double median = m % 2 ? errors[m / 2] : 0.5 * (errors[m / 2 - 1] + errors[m / 2]);
        json entry = {{"method", rows[i].method}, {"n", rows[i].n}, {"trials", m}, {"median_abs_error", median}};
        if (!rows[i].decision.empty()) entry["use_subset_trials"] = subset;
        out.push_back(entry);
        i = j;
    }
    return out;
}

json bench_report(const CLI::App& cmd, const Bench& b, const std::vector<ak::ReportRow>& rows) {
    if (!b.out.empty()) ak::detail::spit(b.out, ak::format_report(rows));
    return {{"config", echo(cmd)},
            {"rows", rows.size()},
            {"csv", b.out.empty() ? json(nullptr) : json(b.out)},
            {"summary", summarize(rows)}};
}

int fail(const std::string& code, const std::string& message, int status, json extra = json::object()) {
    json err = {{"code", code}, {"message", message}};
    err.update(extra);
    std::cout << json{{"error", err}}.dump() << "\n";
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariate adjustment, approximate CI testing and blanket search over discrete tables"};
    app.require_subcommand(1);
    std::map<CLI::App*, std::function<json()>> handlers;

    // validate
    {
        auto* cmd = app.add_subcommand("validate", "check a distribution or dataset file");
        auto s = std::make_shared<Sources>();
        cmd->add_option("--dist", s->dist, "distribution file")->check(CLI::ExistingFile);
        add_data_options(cmd, *s);
        handlers[cmd] = [cmd, s] {
            json out = {{"config", echo(*cmd)}, {"valid", true}};
            if (!s->data.empty()) {
                const auto data = load_data(*s);
                out["rows"] = data.rows();
                json vars = json::array();
                for (const auto& v : data.variables()) vars.push_back({{"name", v.name}, {"cardinality", v.cardinality}});
                out["variables"] = vars;
            } else if (!s->dist.empty()) {
                const auto dist = ak::read_dist(s->dist);
                out["cells"] = dist.probabilities().size();
                out["variables"] = ak::to_json(dist)["variables"];
            } else {
                throw ak::Error(ak::ErrorCode::Usage, "need --dist or --data");
            }
            return out;
        };
    }

    // estimate
    {
        auto* cmd = app.add_subcommand("estimate", "adjustment functional, exact on --dist or plug-in on --data");
        auto s = std::make_shared<Sources>();
        auto q = std::make_shared<std::array<std::string, 3>>();
        cmd->add_option("--dist,--oracle", s->dist, "distribution file")->check(CLI::ExistingFile);
        add_data_options(cmd, *s);
        cmd->add_option("--x", (*q)[0], "treatment event NAME=index,...")->required();
        cmd->add_option("--y", (*q)[1], "outcome event NAME=index,...")->required();
        cmd->add_option("--set", (*q)[2], "adjustment set");
        handlers[cmd] = [cmd, s, q] {
            const ak::AdjustmentQuery query{parse_event((*q)[0]), parse_event((*q)[1]), parse_set((*q)[2])};
            json out = {{"config", echo(*cmd)}};
            if (!s->data.empty()) {
                const auto report = to_json(ak::plugin_adjustment(load_data(*s), query));
                out.update(report);
                out["method"] = "plugin";
            } else if (!s->dist.empty()) {
                out["estimate"] = ak::exact_adjustment(ak::read_dist(s->dist), query);
                out["method"] = "exact";
            } else {
                throw ak::Error(ak::ErrorCode::Usage, "need --dist or --data");
            }
            return out;
        };
    }

    // delta
    {
        auto* cmd = app.add_subcommand("delta", "approximate conditional independence measure");
        auto s = std::make_shared<Sources>();
        auto q = std::make_shared<std::array<std::string, 3>>();
        cmd->add_option("--dist,--oracle", s->dist, "distribution file")->check(CLI::ExistingFile);
        add_data_options(cmd, *s);
        cmd->add_option("--a", (*q)[0], "first separand")->required();
        cmd->add_option("--b", (*q)[1], "second separand")->required();
        cmd->add_option("--c", (*q)[2], "conditioning set");
        handlers[cmd] = [cmd, s, q] {
            const ak::CiQuery query{parse_set((*q)[0]), parse_set((*q)[1]), parse_set((*q)[2])};
            json out = {{"config", echo(*cmd)}};
            if (!s->data.empty()) {
                out["delta"] = ak::delta_ci_empirical(load_data(*s), query);
                out["method"] = "plugin";
            } else if (!s->dist.empty()) {
                out["delta"] = ak::delta_ci(ak::read_dist(s->dist), query);
                out["method"] = "exact";
            } else {
                throw ak::Error(ak::ErrorCode::Usage, "need --dist or --data");
            }
            return out;
        };
    }

    // alpha
    {
        auto* cmd = app.add_subcommand("alpha", "positivity parameter min_a P(x | a)");
        auto s = std::make_shared<Sources>();
        auto q = std::make_shared<std::array<std::string, 2>>();
        cmd->add_option("--dist,--oracle", s->dist, "distribution file")->check(CLI::ExistingFile);
        add_data_options(cmd, *s);
        cmd->add_option("--x", (*q)[0], "treatment event NAME=index,...")->required();
        cmd->add_option("--set", (*q)[1], "covariate set");
        handlers[cmd] = [cmd, s, q] {
            const auto x = parse_event((*q)[0]);
            const auto set = parse_set((*q)[1]);
            json out = {{"config", echo(*cmd)}};
            if (!s->data.empty()) {
                out["alpha"] = ak::empirical_alpha(load_data(*s), x, set);
                out["method"] = "plugin";
            } else if (!s->dist.empty()) {
                out["alpha"] = ak::alpha(ak::read_dist(s->dist), x, set);
                out["method"] = "exact";
            } else {
                throw ak::Error(ak::ErrorCode::Usage, "need --dist or --data");
            }
            return out;
        };
    }

    // amba / bamba share the tester options
    struct SearchArgs {
        Sources src;
        std::string x, y, candidates, s;
        double eps = 0.05, delta = 0.1, c0 = 2.0;

        ak::CiTester tester() const {
            return src.data.empty() ? ak::CiTester::exact(eps, delta) : ak::CiTester::empirical(eps, delta, c0);
        }
    };
    auto add_search_options = [](CLI::App* cmd, SearchArgs& a) {
        cmd->add_option("--oracle,--dist", a.src.dist, "distribution file; selects the exact tester")
            ->check(CLI::ExistingFile);
        add_data_options(cmd, a.src);
        cmd->add_option("--x", a.x, "treatment variables")->required();
        cmd->add_option("--candidates", a.candidates, "candidate set A")->required();
        cmd->add_option("--eps", a.eps, "CI tolerance")->capture_default_str();
        cmd->add_option("--delta", a.delta, "failure probability")->capture_default_str();
        cmd->add_option("--c0", a.c0, "TV-learning constant")->capture_default_str();
    };
    auto run_search = [](const SearchArgs& a, const std::function<ak::SearchReport(const ak::Evidence&)>& fn) {
        if (!a.src.data.empty()) {
            const auto data = load_data(a.src);
            return fn(ak::Evidence(data));
        }
        if (a.src.dist.empty()) throw ak::Error(ak::ErrorCode::Usage, "need --oracle or --data");
        const auto dist = ak::read_dist(a.src.dist);
        return fn(ak::Evidence(dist));
    };

    {
        auto* cmd = app.add_subcommand("amba", "minimum-size approximate Markov blanket search");
        auto a = std::make_shared<SearchArgs>();
        add_search_options(cmd, *a);
        handlers[cmd] = [cmd, a, run_search] {
            const auto report = run_search(*a, [&](const ak::Evidence& ev) {
                return ak::amba(a->tester(), ev, parse_set(a->x), parse_set(a->candidates));
            });
            json out = to_json(report);
            out["config"] = echo(*cmd);
            out["tester"] = ak::to_string(a->tester().mode);
            return out;
        };
    }

    {
        auto* cmd = app.add_subcommand("bamba", "screening-set search below a blanket S");
        auto a = std::make_shared<SearchArgs>();
        add_search_options(cmd, *a);
        cmd->add_option("--y", a->y, "outcome variables")->required();
        cmd->add_option("--s", a->s, "blanket S within the candidates")->required();
        handlers[cmd] = [cmd, a, run_search] {
            const auto report = run_search(*a, [&](const ak::Evidence& ev) {
                return ak::bamba(a->tester(), ev, parse_set(a->x), parse_set(a->y), parse_set(a->candidates),
                                 parse_set(a->s));
            });
            json out = to_json(report);
            out["config"] = echo(*cmd);
            out["tester"] = ak::to_string(a->tester().mode);
            return out;
        };
    }

    // auto
    {
        auto* cmd = app.add_subcommand("auto", "AMBA, decision rule, BAMBA, then the plug-in estimate");
        auto s = std::make_shared<Sources>();
        auto q = std::make_shared<std::array<std::string, 3>>();
        auto cfg = std::make_shared<ak::AutoConfig>();
        cmd->add_option("--data", s->data, "dataset CSV")->required()->check(CLI::ExistingFile);
        cmd->add_option("--schema", s->schema, "distribution file giving cardinalities")->check(CLI::ExistingFile);
        cmd->add_option("--oracle,--dist", s->dist, "ground truth used for searches and alpha")
            ->check(CLI::ExistingFile);
        cmd->add_option("--x", (*q)[0], "treatment event NAME=index,...")->required();
        cmd->add_option("--y", (*q)[1], "outcome event NAME=index,...")->required();
        cmd->add_option("--set", (*q)[2], "adjustment set Z");
        cmd->add_option("--eps", cfg->epsilon, "CI tolerance")->capture_default_str();
        cmd->add_option("--delta", cfg->delta, "failure probability")->capture_default_str();
        cmd->add_option("--c0", cfg->c0, "TV-learning constant")->capture_default_str();
        handlers[cmd] = [cmd, s, q, cfg] {
            const ak::AdjustmentQuery query{parse_event((*q)[0]), parse_event((*q)[1]), parse_set((*q)[2])};
            const auto data = load_data(*s);
            std::optional<ak::JointDistribution> oracle;
            if (!s->dist.empty()) oracle = ak::read_dist(s->dist);
            const auto res = ak::auto_estimate(data, query, *cfg, oracle ? &*oracle : nullptr);
            json out = to_json(res.estimate);
            out["config"] = echo(*cmd);
            out["blanket"] = to_json(res.blanket);
            out["screening"] = res.screening ? to_json(*res.screening) : json(nullptr);
            out["decision"] = to_json(res.decision);
            out["s_star"] = res.s_star;
            return out;
        };
    }

    // gallery: prints the distribution file itself unless --out is given
    auto* gallery_cmd = app.add_subcommand("gallery", "build a named distribution");
    auto gallery = std::make_shared<Gallery>();
    auto gallery_out = std::make_shared<std::string>();
    gallery_cmd->add_option("--family", gallery->family, "hardness | weak-edge | xor | backdoor | random")
        ->required();
    gallery_cmd->add_option("--param", gallery->params, "key=value (repeatable)");
    gallery_cmd->add_option("--seed", gallery->seed, "seed for backdoor and random")->capture_default_str();
    gallery_cmd->add_option("--out", *gallery_out, "write the distribution here and print a report");

    // sample: prints the dataset CSV unless --out is given
    auto* sample_cmd = app.add_subcommand("sample", "draw a dataset from a distribution");
    auto sample_dist = std::make_shared<std::string>();
    auto sample_out = std::make_shared<std::string>();
    auto sample_n = std::make_shared<std::size_t>(0);
    auto sample_seed = std::make_shared<std::uint64_t>(0);
    auto sample_poisson = std::make_shared<bool>(false);
    sample_cmd->add_option("--dist", *sample_dist, "distribution file")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("--n", *sample_n, "rows (Poisson mean with --poisson)")->required();
    sample_cmd->add_option("--seed", *sample_seed, "seed")->capture_default_str();
    sample_cmd->add_flag("--poisson", *sample_poisson, "draw the row count from Pois(n)");
    sample_cmd->add_option("--out", *sample_out, "write the CSV here and print a report");

    {
        auto* cmd = app.add_subcommand("bench-convergence", "plug-in error across a sample-size grid");
        auto b = std::make_shared<Bench>();
        add_bench_options(cmd, *b);
        handlers[cmd] = [cmd, b] { return bench_report(*cmd, *b, ak::run_convergence(b->oracle(), b->config())); };
    }
    {
        auto* cmd = app.add_subcommand("bench-compare", "direct vs AMBA vs AMBA+BAMBA on shared datasets");
        auto b = std::make_shared<Bench>();
        add_bench_options(cmd, *b);
        cmd->add_option("--eps", b->eps, "CI tolerance")->capture_default_str();
        cmd->add_option("--delta", b->delta, "failure probability")->capture_default_str();
        cmd->add_option("--c0", b->c0, "TV-learning constant")->capture_default_str();
        cmd->add_option("--search", b->search, "oracle | empirical")->capture_default_str();
        handlers[cmd] = [cmd, b] {
            return bench_report(*cmd, *b, ak::run_pipeline_comparison(b->oracle(), b->config()));
        };
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("USAGE", e.what(), 2);
    }

    try {
        if (gallery_cmd->parsed()) {
            const auto dist = gallery->build();
            if (gallery_out->empty()) {
                std::cout << ak::format_dist(dist);
            } else {
                ak::write_dist(dist, *gallery_out);
                std::cout << json{{"config", echo(*gallery_cmd)}, {"path", *gallery_out},
                                  {"cells", dist.probabilities().size()}}.dump()
                          << "\n";
            }
            return 0;
        }
        if (sample_cmd->parsed()) {
            const auto dist = ak::read_dist(*sample_dist);
            const auto data = *sample_poisson ? ak::poissonized_sample(dist, static_cast<double>(*sample_n), *sample_seed)
                                              : ak::sample(dist, *sample_n, *sample_seed);
            if (sample_out->empty()) {
                std::cout << ak::format_data(data);
            } else {
                ak::write_data(data, *sample_out);
                std::cout << json{{"config", echo(*sample_cmd)}, {"path", *sample_out}, {"rows", data.rows()}}.dump()
                          << "\n";
            }
            return 0;
        }
        for (auto& [cmd, handler] : handlers) {
            if (cmd->parsed()) {
                std::cout << handler().dump() << "\n";
                return 0;
            }
        }
        return fail("USAGE", "no command given", 2);
    } catch (const ak::InsufficientSamples& e) {
        return fail("INSUFFICIENT_SAMPLES", e.what(), 1, {{"required", e.required()}, {"available", e.available()}});
    } catch (const ak::Error& e) {
        return fail(std::string(ak::to_string(e.code())), e.what(), e.code() == ak::ErrorCode::Usage ? 2 : 1);
    } catch (const std::exception& e) {
        return fail("INTERNAL", e.what(), 1);
    }
}
