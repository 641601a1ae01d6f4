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

#pragma once

// File formats:
//   observations  CSV, header `mixture_id,domain,proportion,step,loss`,
//                 optional `# key=value` metadata lines before the header
//   recipes       JSON {"proportions": {domain: r}, "provenance": {...}}
//   coefficients  JSON {"coefficients": {domain: {A, B, C, alpha, beta}},
//                       "provenance": {...}}
//   profiles      JSON {"domains": {domain: {se, je, ce, vne}}, "provenance": {...}}
//   reports       JSON {"aggregate": {...}, "per_domain": {...}, "per_mixture": {...}}
//   tokens        text, one sequence per line, space-separated ids
//   embeddings    CSV of floats, one vector per row

#include <mixlaw/core.hpp>
#include <mixlaw/entropy.hpp>
#include <mixlaw/fitting.hpp>
#include <mixlaw/law.hpp>
#include <mixlaw/random.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace mixlaw {

using Json = nlohmann::json;

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
    return in;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // nlohmann reports a byte offset; turn it into line/column.
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw LocatedError(ErrorCode::ParseError, line, column, path.string() + ": " + e.what());
    }
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

struct CsvField {
    std::string text;
    std::size_t column;  // 1-based start
};

/// Splits one CSV line, honoring double-quoted fields with "" escapes.
inline std::vector<CsvField> split_csv(const std::string& line, std::size_t line_no) {
    std::vector<CsvField> fields;
    std::size_t i = 0;
    while (true) {
        CsvField f{{}, i + 1};
        if (i < line.size() && line[i] == '"') {
            ++i;
            while (true) {
                if (i >= line.size()) throw LocatedError(ErrorCode::ParseError, line_no, f.column, "unterminated quoted field");
                if (line[i] == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        f.text.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                f.text.push_back(line[i++]);
            }
            if (i < line.size() && line[i] != ',') {
                throw LocatedError(ErrorCode::ParseError, line_no, i + 1, "unexpected character after quoted field");
            }
        } else {
            while (i < line.size() && line[i] != ',') f.text.push_back(line[i++]);
        }
        fields.push_back(std::move(f));
        if (i >= line.size()) break;
        ++i;  // comma
    }
    return fields;
}

inline std::string quote_csv(const std::string& s) {
    const bool needs = s.find_first_of(",\"\n\r") != std::string::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' '));
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, std::size_t column, const char* what) {
    text = trim(text);
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last) {
        throw LocatedError(ErrorCode::ParseError, line, column, std::string("invalid ") + what + " '" + std::string(text) + "'");
    }
    return value;
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(ErrorCode::SchemaError, where + ": missing key '" + key + "'");
    return obj.at(key);
}

inline double require_number(const Json& obj, const char* key, const std::string& where) {
    const Json& v = require(obj, key, where);
    if (!v.is_number()) fail(ErrorCode::SchemaError, where + ": '" + key + "' must be a number");
    return v.get<double>();
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Stable 16-hex-digit fingerprint of a JSON value.
inline std::string config_hash(const Json& config) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.dump());
    return ss.str();
}

// ---------------------------------------------------------------- observations

inline constexpr std::string_view kObservationHeader = "mixture_id,domain,proportion,step,loss";

/// Streaming reader for the observation CSV: metadata and header are read on
/// construction, rows one at a time through next().
class ObservationReader {
public:
    explicit ObservationReader(std::istream& in) : in_(in) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            detail::strip_cr(line);
            if (!line.empty() && line.front() == '#') {
                parse_metadata(line);
                continue;
            }
            if (line != kObservationHeader) {
                throw LocatedError(ErrorCode::SchemaError, line_, 1,
                                   "expected header '" + std::string(kObservationHeader) + "', got '" + line + "'");
            }
            return;
        }
        throw LocatedError(ErrorCode::SchemaError, line_ + 1, 1, "missing header '" + std::string(kObservationHeader) + "'");
    }

    const std::optional<std::string>& dataset() const noexcept { return dataset_; }
    const std::optional<std::int64_t>& tokens_per_step() const noexcept { return tokens_per_step_; }

    bool next(std::optional<Observation>& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            detail::strip_cr(line);
            if (line.empty()) continue;
            const auto fields = detail::split_csv(line, line_);
            if (fields.size() != 5) {
                throw LocatedError(ErrorCode::ParseError, line_, 0, "expected 5 fields, found " + std::to_string(fields.size()));
            }
            if (fields[0].text.empty()) throw LocatedError(ErrorCode::ParseError, line_, fields[0].column, "empty mixture_id");
            if (fields[1].text.empty()) throw LocatedError(ErrorCode::ParseError, line_, fields[1].column, "empty domain");
            out.emplace(Observation{
                fields[0].text,
                DomainId(fields[1].text),
                detail::parse_number<double>(fields[2].text, line_, fields[2].column, "proportion"),
                detail::parse_number<std::int64_t>(fields[3].text, line_, fields[3].column, "step"),
                detail::parse_number<double>(fields[4].text, line_, fields[4].column, "loss"),
            });
            return true;
        }
        return false;
    }

private:
    void parse_metadata(const std::string& line) {
        const std::string body(detail::trim(std::string_view(line).substr(1)));
        const auto eq = body.find('=');
        if (eq == std::string::npos) return;  // plain comment
        const std::string key(detail::trim(std::string_view(body).substr(0, eq)));
        const std::string value(detail::trim(std::string_view(body).substr(eq + 1)));
        if (key == "dataset") {
            dataset_ = value;
        } else if (key == "tokens_per_step") {
            tokens_per_step_ = detail::parse_number<std::int64_t>(value, line_, line.find('=') + 2, "tokens_per_step");
        }
    }

    std::istream& in_;
    std::size_t line_ = 0;
    std::optional<std::string> dataset_;
    std::optional<std::int64_t> tokens_per_step_;
};

inline ObservationSet read_observations(std::istream& in) {
    ObservationReader reader(in);
    ObservationSet set;
    set.dataset = reader.dataset();
    set.tokens_per_step = reader.tokens_per_step();
    std::optional<Observation> row;
    while (reader.next(row)) set.observations.push_back(std::move(*row));
    return set;
}

inline ObservationSet read_observations(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_observations(in);
}

/// `provenance`, when given, goes into a `# provenance=` line that readers
/// skip.
inline void write_observations(const ObservationSet& set, std::ostream& out, const Json& provenance = nullptr) {
    if (set.dataset) out << "# dataset=" << *set.dataset << '\n';
    if (set.tokens_per_step) out << "# tokens_per_step=" << *set.tokens_per_step << '\n';
    if (!provenance.is_null()) out << "# provenance=" << provenance.dump() << '\n';
    out << kObservationHeader << '\n';
    for (const auto& o : set.observations) {
        out << detail::quote_csv(o.mixture_id) << ',' << detail::quote_csv(o.domain.str()) << ','
            << format_double(o.proportion) << ',' << o.step << ',' << format_double(o.loss) << '\n';
    }
}

inline void write_observations(const ObservationSet& set, const std::filesystem::path& path, const Json& provenance = nullptr) {
    std::ostringstream ss;
    write_observations(set, ss, provenance);
    detail::write_text_file(path, ss.str());
}

// --------------------------------------------------------------------- recipes

struct RecipeFile {
    MixtureRecipe recipe;
    Json provenance;  // null when absent
};

/// Proportions summing to 1 within 1e-12 are kept bit for bit; anything else
/// goes through make_recipe and is normalized.
inline MixtureRecipe recipe_from_json(const Json& proportions, const std::string& where) {
    if (!proportions.is_object()) fail(ErrorCode::SchemaError, where + ": proportions must be an object");
    MixtureRecipe::Map raw;
    double total = 0.0;
    for (const auto& [name, value] : proportions.items()) {
        if (!value.is_number()) fail(ErrorCode::SchemaError, where + ": proportion of '" + name + "' must be a number");
        raw.emplace(DomainId(name), value.get<double>());
        total += value.get<double>();
    }
    if (std::abs(total - 1.0) <= kRecipeStoredTolerance) return MixtureRecipe::exact(std::move(raw));
    return make_recipe(raw);
}

inline Json recipe_to_json(const MixtureRecipe& recipe) {
    Json j = Json::object();
    for (const auto& [d, r] : recipe.proportions()) j[d.str()] = r;
    return j;
}

inline RecipeFile read_recipe(const std::filesystem::path& path) {
    const Json doc = detail::parse_json_file(path);
    const std::string where = path.string();
    if (!doc.is_object()) fail(ErrorCode::SchemaError, where + ": expected a JSON object");
    RecipeFile out{recipe_from_json(detail::require(doc, "proportions", where), where), nullptr};
    if (doc.contains("provenance")) out.provenance = doc.at("provenance");
    return out;
}

inline void write_recipe(const MixtureRecipe& recipe, const std::filesystem::path& path, const Json& provenance = nullptr) {
    Json doc = {{"proportions", recipe_to_json(recipe)}};
    if (!provenance.is_null()) doc["provenance"] = provenance;
    detail::write_text_file(path, detail::dump(doc));
}

// ---------------------------------------------------------------- coefficients

struct CoefficientProvenance {
    std::string config_hash;
    std::map<DomainId, bool> converged;
    std::optional<std::int64_t> min_step;
    std::optional<std::int64_t> max_step;
    Json config;  // effective configuration that produced the file

    friend bool operator==(const CoefficientProvenance&, const CoefficientProvenance&) = default;
};

struct CoefficientFile {
    CoefficientSet coefficients;
    CoefficientProvenance provenance;
    std::vector<std::string> warnings;  // e.g. canonicalized domains
};

inline Json coefficients_to_json(const CoefficientSet& set) {
    Json j = Json::object();
    for (const auto& [d, c] : set) j[d.str()] = {{"A", c.A}, {"B", c.B}, {"C", c.C}, {"alpha", c.alpha}, {"beta", c.beta}};
    return j;
}

inline void write_coefficients(const CoefficientSet& set, const std::filesystem::path& path,
                               const CoefficientProvenance& provenance = {}) {
    Json prov = Json::object();
    prov["config_hash"] = provenance.config_hash;
    Json conv = Json::object();
    for (const auto& [d, ok] : provenance.converged) conv[d.str()] = ok;
    prov["converged"] = conv;
    if (provenance.min_step) prov["min_step"] = *provenance.min_step;
    if (provenance.max_step) prov["max_step"] = *provenance.max_step;
    if (!provenance.config.is_null()) prov["config"] = provenance.config;
    const Json doc = {{"coefficients", coefficients_to_json(set)}, {"provenance", prov}};
    detail::write_text_file(path, detail::dump(doc));
}

/// Reads a coefficient file. Entries with A != 1 are rescaled to the
/// canonical A = 1 form (predictions unchanged) and listed in `warnings`.
inline CoefficientFile read_coefficients(const std::filesystem::path& path) {
    const Json doc = detail::parse_json_file(path);
    const std::string where = path.string();
    const Json& body = detail::require(doc, "coefficients", where);
    if (!body.is_object() || body.empty()) fail(ErrorCode::SchemaError, where + ": 'coefficients' must be a non-empty object");
    CoefficientFile out;
    for (const auto& [name, entry] : body.items()) {
        const std::string at = where + ": domain '" + name + "'";
        BiMixCoefficients c{detail::require_number(entry, "A", at), detail::require_number(entry, "B", at),
                            detail::require_number(entry, "C", at), detail::require_number(entry, "alpha", at),
                            detail::require_number(entry, "beta", at)};
        if (const auto problem = c.invariant_problem(); !problem.empty()) fail(ErrorCode::InvariantViolation, at + ": " + problem);
        if (c.A != 1.0) {
            out.warnings.push_back("domain '" + name + "' has A = " + format_double(c.A) + "; rescaled to canonical A = 1");
            c = c.canonical();
        }
        out.coefficients.emplace(DomainId(name), c);
    }
    if (doc.contains("provenance")) {
        const Json& prov = doc.at("provenance");
        if (prov.contains("config_hash")) out.provenance.config_hash = prov.at("config_hash").get<std::string>();
        if (prov.contains("converged")) {
            for (const auto& [name, ok] : prov.at("converged").items()) out.provenance.converged.emplace(DomainId(name), ok.get<bool>());
        }
        if (prov.contains("min_step")) out.provenance.min_step = prov.at("min_step").get<std::int64_t>();
        if (prov.contains("max_step")) out.provenance.max_step = prov.at("max_step").get<std::int64_t>();
        if (prov.contains("config")) out.provenance.config = prov.at("config");
    }
    return out;
}

inline Json fit_config_to_json(const FitConfig& c) {
    return {{"log_scale_lower", c.log_scale_lower}, {"log_scale_upper", c.log_scale_upper},
            {"exponent_lower", c.exponent_lower},   {"exponent_upper", c.exponent_upper},
            {"max_iterations", c.max_iterations},   {"relative_tolerance", c.relative_tolerance},
            {"gradient_tolerance", c.gradient_tolerance}, {"restarts", c.restarts},
            {"seed", c.seed}};
}

// -------------------------------------------------------------------- profiles

struct ProfileFile {
    EntropyProfile profile;
    Json provenance;
};

inline void write_profile(const EntropyProfile& profile, const std::filesystem::path& path, const Json& provenance = nullptr) {
    Json domains = Json::object();
    for (const auto& [d, rec] : profile.per_domain) {
        Json e = Json::object();
        if (rec.se) e["se"] = *rec.se;
        if (rec.je) e["je"] = *rec.je;
        if (rec.ce) e["ce"] = *rec.ce;
        if (rec.vne) e["vne"] = *rec.vne;
        domains[d.str()] = e;
    }
    Json doc = {{"domains", domains}};
    if (!provenance.is_null()) doc["provenance"] = provenance;
    detail::write_text_file(path, detail::dump(doc));
}

inline ProfileFile read_profile(const std::filesystem::path& path) {
    const Json doc = detail::parse_json_file(path);
    const std::string where = path.string();
    const Json& domains = detail::require(doc, "domains", where);
    if (!domains.is_object()) fail(ErrorCode::SchemaError, where + ": 'domains' must be an object");
    ProfileFile out{{}, nullptr};
    for (const auto& [name, entry] : domains.items()) {
        EntropyRecord rec;
        auto get = [&](const char* key, std::optional<double>& slot) {
            if (!entry.contains(key)) return;
            const double v = entry.at(key).get<double>();
            if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::InvariantViolation, where + ": '" + name + "." + key + "' must be finite and >= 0");
            slot = v;
        };
        get("se", rec.se);
        get("je", rec.je);
        get("ce", rec.ce);
        get("vne", rec.vne);
        out.profile.per_domain.emplace(DomainId(name), rec);
    }
    if (doc.contains("provenance")) out.provenance = doc.at("provenance");
    return out;
}

// --------------------------------------------------------------------- reports

inline Json record_to_json(const ReportRecord& r) {
    Json j = {{"mean_rel_error", r.mean_rel_error}, {"worst_rel_error", r.worst_rel_error},
              {"best_rel_error", r.best_rel_error}, {"residual_norm", r.residual_norm},
              {"points", r.points}};
    if (r.r_squared) j["r_squared"] = *r.r_squared;
    if (r.r_squared_worst) j["r_squared_worst"] = *r.r_squared_worst;
    if (r.r_squared_best) j["r_squared_best"] = *r.r_squared_best;
    if (r.converged) j["converged"] = *r.converged;
    return j;
}

inline ReportRecord record_from_json(const Json& j) {
    ReportRecord r;
    r.mean_rel_error = j.at("mean_rel_error").get<double>();
    r.worst_rel_error = j.at("worst_rel_error").get<double>();
    r.best_rel_error = j.at("best_rel_error").get<double>();
    r.residual_norm = j.at("residual_norm").get<double>();
    r.points = j.at("points").get<std::size_t>();
    if (j.contains("r_squared")) r.r_squared = j.at("r_squared").get<double>();
    if (j.contains("r_squared_worst")) r.r_squared_worst = j.at("r_squared_worst").get<double>();
    if (j.contains("r_squared_best")) r.r_squared_best = j.at("r_squared_best").get<double>();
    if (j.contains("converged")) r.converged = j.at("converged").get<bool>();
    return r;
}

inline Json report_to_json(const FitReport& report) {
    Json per_domain = Json::object();
    for (const auto& [d, r] : report.per_domain) per_domain[d.str()] = record_to_json(r);
    Json per_mixture = Json::object();
    for (const auto& [m, r] : report.per_mixture) per_mixture[m] = record_to_json(r);
    return {{"aggregate", record_to_json(report.aggregate)}, {"per_domain", per_domain}, {"per_mixture", per_mixture}};
}

inline void write_report(const FitReport& report, const std::filesystem::path& path, const Json& provenance = nullptr) {
    Json doc = report_to_json(report);
    if (!provenance.is_null()) doc["provenance"] = provenance;
    detail::write_text_file(path, detail::dump(doc));
}

inline FitReport read_report(const std::filesystem::path& path) {
    const Json doc = detail::parse_json_file(path);
    try {
        FitReport out;
        out.aggregate = record_from_json(doc.at("aggregate"));
        for (const auto& [name, r] : doc.at("per_domain").items()) out.per_domain.emplace(DomainId(name), record_from_json(r));
        for (const auto& [name, r] : doc.at("per_mixture").items()) out.per_mixture.emplace(name, record_from_json(r));
        return out;
    } catch (const Json::exception& e) {
        fail(ErrorCode::SchemaError, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------- tokens

/// Streams fixed-length token sequences from a text file, one per line.
class TokenSequenceReader {
public:
    TokenSequenceReader(const std::filesystem::path& path, std::size_t T) : in_(detail::open_input(path)), length_(T) {
        if (T < 2) fail(ErrorCode::TooShort, "sequence length must be >= 2");
    }

    /// Reads the next sequence into `out`; false at end of file.
    bool next(std::vector<TokenId>& out) {
        std::string line;
        if (!std::getline(in_, line)) return false;
        ++line_;
        detail::strip_cr(line);
        out.clear();
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            if (i >= line.size()) break;
            const std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
            TokenId id{};
            auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + i, id);
            if (ec != std::errc() || ptr != line.data() + i) {
                throw LocatedError(ErrorCode::ParseError, line_, start + 1,
                                   "invalid token id '" + line.substr(start, i - start) + "'");
            }
            out.push_back(id);
        }
        if (out.size() != length_) {
            throw LocatedError(ErrorCode::BadSequenceLength, line_, 0,
                               "sequence has " + std::to_string(out.size()) + " tokens, expected " + std::to_string(length_));
        }
        return true;
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::ifstream in_;
    std::size_t length_;
    std::size_t line_ = 0;
};

/// Counts a whole token file in one streaming pass.
inline CorpusStats count_token_file(const std::filesystem::path& path, std::size_t T) {
    TokenSequenceReader reader(path, T);
    CorpusStats stats(T);
    std::vector<TokenId> seq;
    while (reader.next(seq)) stats.add_sequence(seq);
    return stats;
}

// ------------------------------------------------------------------ embeddings

/// Reads embedding rows and scales each to unit Euclidean norm.
inline std::vector<Embedding> read_embeddings(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::vector<Embedding> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::trim(line).empty()) continue;
        Embedding v;
        for (const auto& f : detail::split_csv(line, line_no)) v.push_back(detail::parse_number<double>(f.text, line_no, f.column, "value"));
        if (!out.empty() && v.size() != out.front().size()) {
            throw LocatedError(ErrorCode::DimensionMismatch, line_no, 0,
                               "row has " + std::to_string(v.size()) + " values, expected " + std::to_string(out.front().size()));
        }
        double sq = 0.0;
        for (double x : v) {
            if (!std::isfinite(x)) throw LocatedError(ErrorCode::ParseError, line_no, 0, "non-finite value");
            sq += x * x;
        }
        const double norm = std::sqrt(sq);
        if (norm == 0.0) throw LocatedError(ErrorCode::ZeroVector, line_no, 0, "zero vector cannot be normalized");
        if (norm != 1.0) {
            for (double& x : v) x /= norm;
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ------------------------------------------------------------------- synthesis

struct NamedRecipe {
    std::string id;
    MixtureRecipe recipe;
};

/// Forward-generates observations from known coefficients:
///   loss = predict_loss(r, s) * exp(eta),  eta ~ Normal(0, noise_sigma^2).
/// Rows are ordered mixture, domain, step; noise draws follow that order.
inline ObservationSet generate_synthetic(const CoefficientSet& coeffs, const std::vector<NamedRecipe>& mixtures,
                                         const std::vector<std::int64_t>& steps, double noise_sigma, std::uint64_t seed) {
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i] < 1) fail(ErrorCode::InvalidArgument, "steps must be >= 1");
        if (i > 0 && steps[i] <= steps[i - 1]) fail(ErrorCode::InvalidArgument, "steps must be strictly increasing");
    }
    Rng rng(seed);
    ObservationSet set;
    for (const auto& mix : mixtures) {
        for (const auto& [domain, r] : mix.recipe.proportions()) {
            auto it = coeffs.find(domain);
            if (it == coeffs.end()) fail(ErrorCode::UnknownDomain, "no coefficients for domain '" + domain.str() + "'");
            for (std::int64_t s : steps) {
                double loss = predict_loss(it->second, r, static_cast<double>(s));
                if (noise_sigma > 0.0) loss *= std::exp(noise_sigma * rng.normal());
                set.observations.push_back({mix.id, domain, r, s, loss});
            }
        }
    }
    return set;
}

}  // namespace mixlaw
