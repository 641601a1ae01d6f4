/*
 * Copyright 2026 The mixlaw Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <mixlaw/mixlaw.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlaw::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::vector<std::int64_t> parse_steps(const std::string& text) {
    std::vector<std::int64_t> steps;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        const std::string item = text.substr(start, comma - start);
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || v < 1) {
            throw UsageError("--steps expects a comma-separated list of positive integers, got '" + text + "'");
        }
        steps.push_back(v);
        start = comma + 1;
    }
    return steps;
}

std::set<std::string> parse_names(const std::string& text) {
    std::set<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        if (comma > start) out.insert(text.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

// Regular, non-hidden files of a directory sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension = {}) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) fail(ErrorCode::IoError, "'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.empty() || name.front() == '.') continue;
        if (!extension.empty() && entry.path().extension() != extension) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// Domain or mixture name of a file: its name without the last extension.
std::map<std::string, fs::path> files_by_stem(const fs::path& dir, const std::string& extension = {}) {
    std::map<std::string, fs::path> out;
    for (const auto& f : list_files(dir, extension)) {
        if (!out.emplace(f.stem().string(), f).second) {
            fail(ErrorCode::InvalidArgument, "two files in '" + dir.string() + "' share the name '" + f.stem().string() + "'");
        }
    }
    return out;
}

Json provenance_of(const std::string& command, const Json& config) {
    return {{"command", command}, {"config", config}, {"config_hash", config_hash(config)}};
}

void print_warnings(const CoefficientFile& file, std::ostream& err) {
    for (const auto& w : file.warnings) err << "warning: " << w << '\n';
}

void warn_if_extrapolating(const CoefficientFile& file, std::int64_t s, std::ostream& err) {
    const auto& p = file.provenance;
    if ((p.min_step && s < *p.min_step) || (p.max_step && s > *p.max_step)) {
        err << "warning: step " << s << " lies outside the fitted range [" << (p.min_step ? std::to_string(*p.min_step) : "?")
            << ", " << (p.max_step ? std::to_string(*p.max_step) : "?") << "]; the prediction is an extrapolation\n";
    }
}

void print_report_table(const FitReport& report, std::ostream& out) {
    std::size_t width = 9;
    for (const auto& [d, r] : report.per_domain) width = std::max(width, d.str().size());
    width += 2;
    const bool with_r2 = report.aggregate.r_squared.has_value();
    out << pad("domain", width) << pad("mean", 14) << pad("worst", 14) << pad("best", 14);
    if (with_r2) out << "r_squared";
    out << '\n';
    auto row = [&](const std::string& name, const ReportRecord& r) {
        out << pad(name, width) << pad(fmt(r.mean_rel_error), 14) << pad(fmt(r.worst_rel_error), 14)
            << pad(fmt(r.best_rel_error), 14);
        if (with_r2) out << (r.r_squared ? fmt(*r.r_squared) : "-");
        out << '\n';
    };
    for (const auto& [d, r] : report.per_domain) row(d.str(), r);
    row("aggregate", report.aggregate);
}

// ------------------------------------------------------------------ commands

struct ProfileArgs {
    std::string corpus_dir, measure, embeddings_dir, out;
    std::size_t seq_len = 1024;
    std::size_t max_samples = 1024;
    std::uint64_t seed = 0;
};

int cmd_profile(const ProfileArgs& a, const Json& config, std::ostream& out) {
    if (a.measure == "vne" && a.embeddings_dir.empty()) throw UsageError("--measure vne requires --embeddings-dir");
    const auto corpus = files_by_stem(a.corpus_dir);
    if (corpus.empty()) fail(ErrorCode::EmptyInput, "no domain files in '" + a.corpus_dir + "'");
    std::map<std::string, fs::path> embeddings;
    if (a.measure == "vne") {
        embeddings = files_by_stem(a.embeddings_dir);
        for (const auto& [name, path] : corpus) {
            if (!embeddings.contains(name)) fail(ErrorCode::MissingDomain, "no embeddings file for domain '" + name + "'");
        }
    }

    std::vector<std::pair<std::string, fs::path>> jobs(corpus.begin(), corpus.end());
    std::vector<double> values(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        const auto& [name, path] = jobs[i];
        try {
            if (a.measure == "vne") {
                const auto vectors = read_embeddings(embeddings.at(name));
                values[i] = von_neumann_entropy(vectors, a.max_samples, a.seed);
                return;
            }
            const auto stats = count_token_file(path, a.seq_len);
            if (a.measure == "se") {
                values[i] = shannon_entropy(stats);
            } else if (a.measure == "je") {
                values[i] = joint_entropy(stats);
            } else {
                values[i] = conditional_entropy(stats);
            }
        } catch (const Error& e) {
            throw Error(e.code(), "domain '" + name + "': " + e.what());
        }
    });

    EntropyProfile profile;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& rec = profile.per_domain[DomainId(jobs[i].first)];
        if (a.measure == "se") rec.se = values[i];
        if (a.measure == "je") rec.je = values[i];
        if (a.measure == "ce") rec.ce = values[i];
        if (a.measure == "vne") rec.vne = values[i];
    }
    write_profile(profile, a.out, provenance_of("profile", config));
    for (std::size_t i = 0; i < jobs.size(); ++i) out << pad(jobs[i].first, 24) << fmt(values[i]) << '\n';
    return 0;
}

struct MixArgs {
    std::string profile, measure, out;
    double temperature = 1.0;
};

int cmd_mix(const MixArgs& a, const Json& config, std::ostream& out) {
    const auto file = read_profile(a.profile);
    std::map<DomainId, double> entropies;
    for (const auto& [d, rec] : file.profile.per_domain) {
        const std::optional<double>& v = a.measure == "se" ? rec.se : a.measure == "je" ? rec.je : a.measure == "ce" ? rec.ce : rec.vne;
        if (!v) fail(ErrorCode::SchemaError, "profile has no '" + a.measure + "' value for domain '" + d.str() + "'");
        entropies.emplace(d, *v);
    }
    const auto recipe = proportions_from_entropies(entropies, a.temperature);
    Json prov = provenance_of("mix", config);
    prov["measure"] = a.measure;
    prov["temperature"] = a.temperature;
    write_recipe(recipe, a.out, prov);
    for (const auto& [d, r] : recipe.proportions()) out << pad(d.str(), 24) << fmt(r) << '\n';
    return 0;
}

struct FitArgs {
    std::string observations, out, report;
    int max_iters = 2000;
    int restarts = 0;
    std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a, const Json& config, std::ostream& out, std::ostream& err) {
    const auto set = read_observations(a.observations);
    FitConfig cfg;
    cfg.max_iterations = a.max_iters;
    cfg.restarts = a.restarts;
    cfg.seed = a.seed;
    const auto result = fit_bimix(set, cfg);

    Json full = config;
    full["solver"] = fit_config_to_json(cfg);
    CoefficientProvenance prov;
    prov.config = full;
    prov.config_hash = config_hash(full);
    for (const auto& [d, info] : result.info) prov.converged.emplace(d, info.converged);
    prov.min_step = result.min_step;
    prov.max_step = result.max_step;
    write_coefficients(result.coefficients, a.out, prov);
    if (!a.report.empty()) write_report(result.report, a.report, provenance_of("fit", full));

    for (const auto& d : result.non_converged()) {
        err << "warning: domain '" << d.str() << "' did not converge (" << result.info.at(d).stop_reason << ")\n";
    }
    out << pad("domain", 24) << pad("B", 14) << pad("C", 14) << pad("alpha", 14) << pad("beta", 14) << "converged\n";
    for (const auto& [d, c] : result.coefficients) {
        out << pad(d.str(), 24) << pad(fmt(c.B), 14) << pad(fmt(c.C), 14) << pad(fmt(c.alpha), 14) << pad(fmt(c.beta), 14)
            << (result.info.at(d).converged ? "yes" : "no") << '\n';
    }
    return 0;
}

struct EvaluateArgs {
    std::string coeffs, observations, holdout, mixtures, out;
};

int cmd_evaluate(const EvaluateArgs& a, const Json& config, std::ostream& out, std::ostream& err) {
    const auto coeffs = read_coefficients(a.coeffs);
    print_warnings(coeffs, err);
    const auto set = read_observations(a.observations);
    HoldoutRule rule = LastStep{};
    if (a.holdout == "full-series") rule = FullSeries{parse_names(a.mixtures)};
    const auto report = evaluate_holdout(set, coeffs.coefficients, rule);
    write_report(report, a.out, provenance_of("evaluate", config));
    print_report_table(report, out);
    return 0;
}

struct PredictArgs {
    std::string coeffs, recipe;
    std::int64_t steps = 1;
    std::int64_t tokens_per_step = 0;
};

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
    const auto coeffs = read_coefficients(a.coeffs);
    print_warnings(coeffs, err);
    const auto recipe = read_recipe(a.recipe).recipe;
    const auto losses = predict_mixture(coeffs.coefficients, recipe, static_cast<double>(a.steps));
    warn_if_extrapolating(coeffs, a.steps, err);
    double sum = 0.0;
    out << pad("domain", 24) << pad("proportion", 14) << "loss\n";
    for (const auto& [d, loss] : losses) {
        out << pad(d.str(), 24) << pad(fmt(recipe.at(d)), 14) << fmt(loss) << '\n';
        sum += loss;
    }
    out << pad("sum", 38) << fmt(sum) << '\n';
    out << pad("mean", 38) << fmt(sum / static_cast<double>(losses.size())) << '\n';
    if (a.tokens_per_step > 0) {
        const auto tokens = static_cast<unsigned __int128>(a.steps) * static_cast<unsigned __int128>(a.tokens_per_step);
        if (tokens > static_cast<unsigned __int128>(UINT64_MAX)) {
            out << "tokens: " << fmt(static_cast<double>(a.steps) * static_cast<double>(a.tokens_per_step)) << '\n';
        } else {
            out << "tokens: " << static_cast<std::uint64_t>(tokens) << '\n';
        }
    }
    return 0;
}

struct OptimizeArgs {
    std::string coeffs, out;
    std::int64_t steps = 0;  // 0: largest fitted step
    double min_prop = 1e-4;
    bool oracle_check = false;
    double oracle_resolution = 0.01;
};

int cmd_optimize(const OptimizeArgs& a, const Json& config, std::ostream& out, std::ostream& err) {
    const auto coeffs = read_coefficients(a.coeffs);
    print_warnings(coeffs, err);
    std::int64_t steps = a.steps;
    if (steps == 0) {
        if (!coeffs.provenance.max_step) throw UsageError("--steps is required when the coefficient file records no fitted step range");
        steps = *coeffs.provenance.max_step;
    }
    warn_if_extrapolating(coeffs, steps, err);
    OptimizeConfig cfg;
    cfg.step_budget = steps;
    cfg.min_proportion = a.min_prop;
    const auto res = optimize_mixture(coeffs.coefficients, cfg);

    Json prov = provenance_of("optimize", config);
    prov["steps"] = steps;
    prov["objective"] = res.objective;
    prov["kkt_residual"] = res.kkt_residual;
    Json floored = Json::array();
    for (const auto& d : res.floored) floored.push_back(d.str());
    prov["floored"] = floored;
    write_recipe(res.recipe, a.out, prov);

    for (const auto& [d, r] : res.recipe.proportions()) out << pad(d.str(), 24) << fmt(r) << (res.floored.contains(d) ? "  (floor)" : "") << '\n';
    out << "objective: " << fmt(res.objective) << '\n';
    out << "kkt_residual: " << fmt(res.kkt_residual) << '\n';
    if (a.oracle_check) {
        const auto oracle = brute_force_oracle(coeffs.coefficients, steps, a.oracle_resolution);
        const double gap = res.objective - oracle.objective;
        out << "oracle_objective: " << fmt(oracle.objective) << '\n';
        out << "oracle_gap: " << fmt(gap) << '\n';
        if (gap > 1e-4) {
            err << "error: grid search found an objective lower by " << fmt(gap) << '\n';
            return 1;
        }
        out << "oracle_check: ok\n";
    }
    return 0;
}

struct CountArgs {
    std::string law;
    std::uint64_t m = 1;
    std::uint64_t n = 1;
};

int cmd_count(const CountArgs& a, std::ostream& out) {
    out << count_coefficients(a.law == "bimix" ? MixingLaw::BiMix : MixingLaw::Exponential, a.m, a.n) << '\n';
    return 0;
}

struct SynthArgs {
    std::string coeffs, mixtures, steps, out, dataset;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::int64_t tokens_per_step = 0;
};

int cmd_synth(const SynthArgs& a, const Json& config, std::ostream& out, std::ostream& err) {
    const auto steps = parse_steps(a.steps);
    const auto coeffs = read_coefficients(a.coeffs);
    print_warnings(coeffs, err);
    std::vector<NamedRecipe> mixtures;
    for (const auto& [name, path] : files_by_stem(a.mixtures, ".json")) mixtures.push_back({name, read_recipe(path).recipe});
    if (mixtures.empty()) fail(ErrorCode::EmptyInput, "no recipe files in '" + a.mixtures + "'");
    auto set = generate_synthetic(coeffs.coefficients, mixtures, steps, a.noise, a.seed);
    if (!a.dataset.empty()) set.dataset = a.dataset;
    if (a.tokens_per_step > 0) set.tokens_per_step = a.tokens_per_step;
    write_observations(set, a.out, provenance_of("synth", config));
    out << "wrote " << set.observations.size() << " observations (" << mixtures.size() << " mixtures, " << steps.size()
        << " steps)\n";
    return 0;
}

// ------------------------------------------------------------- config plumbing

bool is_flag(const CLI::Option* opt) { return opt->get_expected_min() == 0; }

bool given_on_command_line(const CLI::Option* opt, const std::vector<std::string>& args) {
    for (const auto& arg : args) {
        for (const auto& l : opt->get_lnames()) {
            if (arg == "--" + l || arg.rfind("--" + l + "=", 0) == 0) return true;
        }
        for (const auto& s : opt->get_snames()) {
            if (arg.rfind("-" + s, 0) == 0) return true;
        }
    }
    return false;
}

// Flags > config file > defaults: every config key naming an option of the
// subcommand that the command line leaves unset is appended as a flag.
void apply_config_file(CLI::App* sub, std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return;
    const Json doc = detail::parse_json_file(path);
    if (!doc.is_object()) fail(ErrorCode::SchemaError, path + ": config must be a JSON object");
    const std::vector<std::string> given = args;
    for (const auto& [key, value] : doc.items()) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config" || given_on_command_line(opt, given)) continue;
        if (is_flag(opt)) {
            if (!value.is_boolean()) fail(ErrorCode::SchemaError, path + ": '" + key + "' must be true or false");
            if (value.get<bool>()) args.push_back("--" + key);
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
}

// Every option of the subcommand with its final value, keyed by long name.
Json effective_config(const CLI::App* sub) {
    Json config = Json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help" || names.front() == "config") continue;
        const std::string& key = names.front();
        if (is_flag(opt)) {
            config[key] = opt->count() > 0;
        } else if (opt->count() > 0) {
            config[key] = opt->as<std::string>();
        } else if (!opt->get_default_str().empty()) {
            config[key] = opt->get_default_str();
        }
    }
    return config;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bivariate data-mixing law toolkit", "mixlaw"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    const std::vector<std::string> measures{"se", "ce", "je", "vne"};

    ProfileArgs pa;
    auto* profile = app.add_subcommand("profile", "Compute an entropy measure for every domain of a corpus");
    profile->add_option("--corpus-dir", pa.corpus_dir, "Directory with one token-sequence file per domain")->required();
    profile->add_option("--measure", pa.measure, "Entropy measure")->required()->check(CLI::IsMember(measures));
    profile->add_option("--embeddings-dir", pa.embeddings_dir, "Directory with one embedding CSV per domain (vne)");
    profile->add_option("--seq-len", pa.seq_len, "Tokens per sequence")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
    profile->add_option("--max-samples", pa.max_samples, "Embeddings sampled per domain (vne)")->check(CLI::PositiveNumber);
    profile->add_option("--seed", pa.seed, "Sampling seed");
    profile->add_option("--out", pa.out, "Output profile JSON")->required();

    MixArgs ma;
    auto* mix = app.add_subcommand("mix", "Turn an entropy profile into a mixture recipe");
    mix->add_option("--profile", ma.profile, "Profile JSON")->required();
    mix->add_option("--measure", ma.measure, "Entropy measure to use")->required()->check(CLI::IsMember(measures));
    mix->add_option("--temperature", ma.temperature, "Softmax temperature")->check(CLI::PositiveNumber);
    mix->add_option("--out", ma.out, "Output recipe JSON")->required();

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit per-domain law coefficients to observations");
    fit->add_option("--observations", fa.observations, "Observation CSV")->required();
    fit->add_option("--out", fa.out, "Output coefficient JSON")->required();
    fit->add_option("--report", fa.report, "Output in-sample report JSON");
    fit->add_option("--max-iters", fa.max_iters, "Solver iteration limit")->check(CLI::PositiveNumber);
    fit->add_option("--restarts", fa.restarts, "Extra randomized starts per domain")->check(CLI::NonNegativeNumber);
    fit->add_option("--seed", fa.seed, "Seed for randomized starts");

    EvaluateArgs ea;
    auto* evaluate = app.add_subcommand("evaluate", "Score coefficients on held-out observations");
    evaluate->add_option("--coeffs", ea.coeffs, "Coefficient JSON")->required();
    evaluate->add_option("--observations", ea.observations, "Observation CSV")->required();
    evaluate->add_option("--holdout", ea.holdout, "Holdout rule")->required()->check(CLI::IsMember({"last-step", "full-series"}));
    evaluate->add_option("--mixtures", ea.mixtures, "Comma-separated mixtures for full-series (default: all)");
    evaluate->add_option("--out", ea.out, "Output report JSON")->required();

    PredictArgs pr;
    auto* predict = app.add_subcommand("predict", "Predict per-domain losses for a recipe");
    predict->add_option("--coeffs", pr.coeffs, "Coefficient JSON")->required();
    predict->add_option("--recipe", pr.recipe, "Recipe JSON")->required();
    predict->add_option("--steps", pr.steps, "Training steps")->required()->check(CLI::PositiveNumber);
    predict->add_option("--tokens-per-step", pr.tokens_per_step, "Tokens per step, for the printed budget")->check(CLI::PositiveNumber);

    OptimizeArgs oa;
    auto* optimize = app.add_subcommand("optimize", "Find the recipe minimizing total predicted loss");
    optimize->add_option("--coeffs", oa.coeffs, "Coefficient JSON")->required();
    optimize->add_option("--steps", oa.steps, "Training steps (default: largest fitted step)")->check(CLI::PositiveNumber);
    optimize->add_option("--min-prop", oa.min_prop, "Lower bound on every proportion")->check(CLI::PositiveNumber);
    optimize->add_option("--out", oa.out, "Output recipe JSON")->required();
    optimize->add_flag("--oracle-check", oa.oracle_check, "Compare against an exhaustive grid search (at most 4 domains)");
    optimize->add_option("--oracle-resolution", oa.oracle_resolution, "Grid spacing for --oracle-check")->check(CLI::Range(1e-6, 1.0));

    CountArgs ca;
    auto* count = app.add_subcommand("count-coeffs", "Number of coefficients a mixing law fits");
    count->add_option("--law", ca.law, "Mixing law")->required()->check(CLI::IsMember({"bimix", "exponential"}));
    count->add_option("-m", ca.m, "Number of domains")->required()->check(CLI::PositiveNumber);
    count->add_option("-n", ca.n, "Number of step targets")->required()->check(CLI::PositiveNumber);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Generate observations from known coefficients");
    synth->add_option("--coeffs", sa.coeffs, "Coefficient JSON")->required();
    synth->add_option("--mixtures", sa.mixtures, "Directory of recipe JSON files")->required();
    synth->add_option("--steps", sa.steps, "Comma-separated increasing steps")->required();
    synth->add_option("--noise", sa.noise, "Log-normal noise sigma")->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", sa.seed, "Noise seed");
    synth->add_option("--dataset", sa.dataset, "Dataset name written as metadata");
    synth->add_option("--tokens-per-step", sa.tokens_per_step, "Tokens per step written as metadata")->check(CLI::PositiveNumber);
    synth->add_option("--out", sa.out, "Output observation CSV")->required();

    for (auto* sub : app.get_subcommands({})) sub->add_option("--config", "JSON file of option defaults");

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    try {
        for (const auto& arg : args) {
            if (auto* sub = app.get_subcommand_no_throw(arg)) {
                apply_config_file(sub, args);
                break;
            }
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    const Json config = effective_config(sub);
    try {
        const std::string name = sub->get_name();
        if (name == "profile") return cmd_profile(pa, config, out);
        if (name == "mix") return cmd_mix(ma, config, out);
        if (name == "fit") return cmd_fit(fa, config, out, err);
        if (name == "evaluate") return cmd_evaluate(ea, config, out, err);
        if (name == "predict") return cmd_predict(pr, out, err);
        if (name == "optimize") return cmd_optimize(oa, config, out, err);
        if (name == "count-coeffs") return cmd_count(ca, out);
        if (name == "synth") return cmd_synth(sa, config, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace mixlaw::cli
