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

#include "support.hpp"

#include <cmath>

namespace mixlaw {
namespace {

using test::TempDir;
using test::write_file;

ObservationSet parse_csv(const std::string& text) {
    std::istringstream in(text);
    return read_observations(in);
}

template <typename Fn>
void expect_located(Fn&& fn, ErrorCode code, std::size_t line, std::size_t column) {
    try {
        fn();
        ADD_FAILURE() << "no error";
    } catch (const LocatedError& e) {
        EXPECT_EQ(e.code(), code) << e.what();
        EXPECT_EQ(e.line(), line) << e.what();
        EXPECT_EQ(e.column(), column) << e.what();
    }
}

TEST(Observations, EmptyFileWithHeader) {
    const auto set = parse_csv("mixture_id,domain,proportion,step,loss\n");
    EXPECT_TRUE(set.observations.empty());
    EXPECT_FALSE(set.dataset.has_value());
}

TEST(Observations, SingleRow) {
    const auto set = parse_csv("mixture_id,domain,proportion,step,loss\nm1,ArXiv,0.0886,5000,3.21\n");
    ASSERT_EQ(set.observations.size(), 1u);
    EXPECT_EQ(set.observations[0], (Observation{"m1", DomainId("ArXiv"), 0.0886, 5000, 3.21}));
}

TEST(Observations, MetadataAndQuoting) {
    const auto set = parse_csv(
        "# dataset=pile\n# tokens_per_step=524288\n# a plain comment\nmixture_id,domain,proportion,step,loss\r\n"
        "\"mix, one\",\"Wikipedia (en)\",0.5,10,2\r\n\"say \"\"hi\"\"\",b,1,1,1e-3\n");
    EXPECT_EQ(set.dataset, "pile");
    EXPECT_EQ(set.tokens_per_step, 524288);
    ASSERT_EQ(set.observations.size(), 2u);
    EXPECT_EQ(set.observations[0].mixture_id, "mix, one");
    EXPECT_EQ(set.observations[0].domain, DomainId("Wikipedia (en)"));
    EXPECT_EQ(set.observations[1].mixture_id, "say \"hi\"");
    EXPECT_EQ(set.observations[1].loss, 1e-3);
}

TEST(Observations, HeaderErrors) {
    EXPECT_MIXLAW_ERROR(parse_csv(""), ErrorCode::SchemaError);
    EXPECT_MIXLAW_ERROR(parse_csv("mixture,domain,proportion,step,loss\n"), ErrorCode::SchemaError);
    EXPECT_MIXLAW_ERROR(parse_csv("# dataset=x\n"), ErrorCode::SchemaError);
}

TEST(Observations, ParseErrorsCarryLocation) {
    const std::string header = "mixture_id,domain,proportion,step,loss\n";
    expect_located([&] { parse_csv(header + "m1,a,0.5,10,2\nm1,a,0.5,x,2\n"); }, ErrorCode::ParseError, 3, 10);
    expect_located([&] { parse_csv(header + "m1,a,abc,10,2\n"); }, ErrorCode::ParseError, 2, 6);
    expect_located([&] { parse_csv(header + "m1,a,0.5,10,2.5.1\n"); }, ErrorCode::ParseError, 2, 13);
    expect_located([&] { parse_csv(header + "m1,a,0.5,10\n"); }, ErrorCode::ParseError, 2, 0);
    expect_located([&] { parse_csv(header + "\"m1,a,0.5,10,2\n"); }, ErrorCode::ParseError, 2, 1);
    expect_located([&] { parse_csv(header + ",a,0.5,10,2\n"); }, ErrorCode::ParseError, 2, 1);
    expect_located([&] { parse_csv("# tokens_per_step=many\n" + header); }, ErrorCode::ParseError, 1, 19);
}

TEST(Observations, StreamingReader) {
    std::istringstream in("# dataset=x\nmixture_id,domain,proportion,step,loss\nm,a,0.5,1,2\nm,a,0.5,2,1.5\n");
    ObservationReader reader(in);
    EXPECT_EQ(reader.dataset(), "x");
    std::optional<Observation> row;
    ASSERT_TRUE(reader.next(row));
    EXPECT_EQ(row->step, 1);
    ASSERT_TRUE(reader.next(row));
    EXPECT_EQ(row->step, 2);
    EXPECT_FALSE(reader.next(row));
}

TEST(Observations, RoundTripRandomSet) {
    Rng rng(61);
    ObservationSet set;
    set.dataset = "synthetic, v2";
    set.tokens_per_step = 512 * 1024;
    const char* names[] = {"ArXiv", "Pile-CC", "Ubuntu IRC", "a,b", "q\"uote"};
    for (int i = 0; i < 1000; ++i) {
        set.observations.push_back({"mix" + std::to_string(rng.below(7)), DomainId(names[rng.below(5)]),
                                    rng.uniform(1e-9, 1.0), static_cast<std::int64_t>(1 + rng.below(1u << 30)),
                                    std::exp(rng.uniform(-30, 30))});
    }
    TempDir dir("obs");
    write_observations(set, dir / "obs.csv");
    EXPECT_EQ(read_observations(dir / "obs.csv"), set);
}

TEST(Observations, MissingFile) { EXPECT_MIXLAW_ERROR(read_observations(std::filesystem::path("/nonexistent/x.csv")), ErrorCode::IoError); }

TEST(Recipes, SlimPajamaBaselineFixture) {
    const auto file = read_recipe(test::source_dir() / "data/recipes/slimpajama/baseline.json");
    EXPECT_EQ(file.recipe.size(), 7u);
    EXPECT_NEAR(file.recipe.sum(), 1.0, 1e-6);
    EXPECT_EQ(file.recipe.at(DomainId("CommonCrawl")), 0.52030249);
    EXPECT_EQ(file.provenance.at("dataset"), "slimpajama");
}

TEST(Recipes, PileBaselineFixture) {
    const auto file = read_recipe(test::source_dir() / "data/recipes/pile/baseline.json");
    EXPECT_EQ(file.recipe.size(), 22u);
    EXPECT_EQ(file.recipe.at(DomainId("ArXiv")), 0.08861781321648841);
}

TEST(Recipes, Errors) {
    TempDir dir("recipe");
    write_file(dir / "zero.json", R"({"proportions": {"a": 0.0, "b": 1.0}})");
    EXPECT_MIXLAW_ERROR(read_recipe(dir / "zero.json"), ErrorCode::ZeroDomain);
    write_file(dir / "mass.json", R"({"proportions": {"a": 0.0, "b": 0.0}})");
    EXPECT_MIXLAW_ERROR(read_recipe(dir / "mass.json"), ErrorCode::ZeroMass);
    write_file(dir / "bad.json", "{\n  \"proportions\": {\"a\": 0.5,\n  }\n}");
    expect_located([&] { read_recipe(dir / "bad.json"); }, ErrorCode::ParseError, 3, 3);
    write_file(dir / "schema.json", R"({"weights": {"a": 1}})");
    EXPECT_MIXLAW_ERROR(read_recipe(dir / "schema.json"), ErrorCode::SchemaError);
    write_file(dir / "type.json", R"({"proportions": {"a": "x"}})");
    EXPECT_MIXLAW_ERROR(read_recipe(dir / "type.json"), ErrorCode::SchemaError);
}

TEST(Recipes, UnnormalizedInputIsNormalized) {
    TempDir dir("recipe");
    write_file(dir / "raw.json", R"({"proportions": {"a": 1, "b": 3}})");
    const auto r = read_recipe(dir / "raw.json").recipe;
    EXPECT_EQ(r.at(DomainId("a")), 0.25);
    EXPECT_TRUE(read_recipe(dir / "raw.json").provenance.is_null());
}

TEST(Recipes, RoundTrip) {
    Rng rng(62);
    TempDir dir("recipe");
    for (int trial = 0; trial < 100; ++trial) {
        MixtureRecipe::Map raw;
        for (int i = 0; i < 1 + static_cast<int>(rng.below(30)); ++i) raw.emplace(DomainId("d" + std::to_string(i)), rng.uniform(1e-6, 1));
        const auto recipe = make_recipe(raw);
        const Json prov = {{"measure", "ce"}, {"temperature", 1.0}};
        write_recipe(recipe, dir / "r.json", prov);
        const auto back = read_recipe(dir / "r.json");
        EXPECT_EQ(back.recipe, recipe);
        EXPECT_EQ(back.provenance, prov);
    }
}

TEST(Coefficients, RoundTrip) {
    Rng rng(63);
    TempDir dir("coeffs");
    CoefficientSet set;
    CoefficientProvenance prov;
    for (int i = 0; i < 22; ++i) {
        const DomainId d("domain " + std::to_string(i));
        set.emplace(d, BiMixCoefficients{1, std::exp(rng.uniform(-30, 30)), rng.uniform(0, 10), rng.uniform(0, 5), rng.uniform(0, 5)});
        prov.converged.emplace(d, rng.uniform() < 0.5);
    }
    prov.config_hash = "0123456789abcdef";
    prov.min_step = 1000;
    prov.max_step = 20000;
    prov.config = {{"max-iters", "2000"}};
    write_coefficients(set, dir / "c.json", prov);
    const auto back = read_coefficients(dir / "c.json");
    EXPECT_EQ(back.coefficients, set);
    EXPECT_EQ(back.provenance, prov);
    EXPECT_TRUE(back.warnings.empty());
}

TEST(Coefficients, NonCanonicalFilesAreRescaled) {
    TempDir dir("coeffs");
    write_file(dir / "c.json", R"({"coefficients": {"a": {"A": 2, "B": 3, "C": 1, "alpha": 0.5, "beta": 0.25}}})");
    const auto file = read_coefficients(dir / "c.json");
    EXPECT_EQ(file.coefficients.at(DomainId("a")), (BiMixCoefficients{1, 6, 2, 0.5, 0.25}));
    ASSERT_EQ(file.warnings.size(), 1u);
    const BiMixCoefficients original{2, 3, 1, 0.5, 0.25};
    for (double r : {0.01, 0.3, 1.0}) {
        for (double s : {1.0, 1e3, 1e6}) EXPECT_DOUBLE_EQ(predict_loss(file.coefficients.at(DomainId("a")), r, s), predict_loss(original, r, s));
    }
}

TEST(Coefficients, Errors) {
    TempDir dir("coeffs");
    write_file(dir / "neg.json", R"({"coefficients": {"a": {"A": 1, "B": 3, "C": 1, "alpha": -0.5, "beta": 0.25}}})");
    EXPECT_MIXLAW_ERROR(read_coefficients(dir / "neg.json"), ErrorCode::InvariantViolation);
    write_file(dir / "missing.json", R"({"coefficients": {"a": {"A": 1, "B": 3, "C": 1, "beta": 0.25}}})");
    EXPECT_MIXLAW_ERROR(read_coefficients(dir / "missing.json"), ErrorCode::SchemaError);
    write_file(dir / "broken.json", R"({"coefficients": )");
    EXPECT_MIXLAW_ERROR(read_coefficients(dir / "broken.json"), ErrorCode::ParseError);
}

TEST(Profiles, RoundTrip) {
    TempDir dir("profile");
    EntropyProfile p;
    p.per_domain[DomainId("a")] = {0.5, std::nullopt, 1.25, std::nullopt};
    p.per_domain[DomainId("b")] = {std::nullopt, 3.0, std::nullopt, 0.1};
    write_profile(p, dir / "p.json", Json{{"max-samples", "1024"}});
    const auto back = read_profile(dir / "p.json");
    EXPECT_EQ(back.profile, p);
    EXPECT_EQ(back.provenance.at("max-samples"), "1024");
    write_file(dir / "neg.json", R"({"domains": {"a": {"se": -1}}})");
    EXPECT_MIXLAW_ERROR(read_profile(dir / "neg.json"), ErrorCode::InvariantViolation);
}

TEST(Reports, RoundTrip) {
    TempDir dir("report");
    FitReport r;
    r.per_domain[DomainId("a")] = {0.01, 0.02, 0.001, 0.5, 0.97, 0.95, 0.99, 12, true};
    r.per_mixture["m1"] = {0.01, 0.02, 0.001, 0.5, std::nullopt, std::nullopt, std::nullopt, 12, std::nullopt};
    r.aggregate = {0.01, 0.02, 0.001, 0.5, 0.97, 0.95, 0.99, 12, std::nullopt};
    write_report(r, dir / "r.json");
    EXPECT_EQ(read_report(dir / "r.json"), r);
}

TEST(TokenSequences, ReadsFixedLengthLines) {
    TempDir dir("tokens");
    write_file(dir / "t.txt", "1 2 3 4\n5 6 7 8\n");
    TokenSequenceReader reader(dir / "t.txt", 4);
    std::vector<TokenId> seq;
    ASSERT_TRUE(reader.next(seq));
    EXPECT_EQ(seq, (std::vector<TokenId>{1, 2, 3, 4}));
    ASSERT_TRUE(reader.next(seq));
    EXPECT_EQ(seq, (std::vector<TokenId>{5, 6, 7, 8}));
    EXPECT_FALSE(reader.next(seq));
}

TEST(TokenSequences, Errors) {
    TempDir dir("tokens");
    write_file(dir / "short.txt", "1 2 3 4\n1 2 3\n");
    expect_located([&] { count_token_file(dir / "short.txt", 4); }, ErrorCode::BadSequenceLength, 2, 0);
    write_file(dir / "bad.txt", "1 2 x 4\n");
    expect_located([&] { count_token_file(dir / "bad.txt", 4); }, ErrorCode::ParseError, 1, 5);
    write_file(dir / "neg.txt", "1 -2 3 4\n");
    expect_located([&] { count_token_file(dir / "neg.txt", 4); }, ErrorCode::ParseError, 1, 3);
    write_file(dir / "empty.txt", "");
    EXPECT_EQ(count_token_file(dir / "empty.txt", 4).num_sequences, 0u);
    EXPECT_MIXLAW_ERROR(count_token_file(dir / "absent.txt", 4), ErrorCode::IoError);
}

TEST(Embeddings, NormalizedOnRead) {
    TempDir dir("emb");
    write_file(dir / "e.csv", "3,4,0,0\n0,0,0,2\n1,1,1,1\n");
    const auto e = read_embeddings(dir / "e.csv");
    ASSERT_EQ(e.size(), 3u);
    EXPECT_EQ(e[0], (Embedding{0.6, 0.8, 0, 0}));
    EXPECT_EQ(e[1], (Embedding{0, 0, 0, 1}));
    for (double x : e[2]) EXPECT_NEAR(x, 0.5, 1e-15);
}

TEST(Embeddings, PreNormalizedRowsPassThrough) {
    TempDir dir("emb");
    Rng rng(64);
    std::string text;
    std::vector<Embedding> rows;
    for (int i = 0; i < 50; ++i) {
        Embedding v(8);
        double sq = 0;
        for (auto& x : v) {
            x = rng.normal();
            sq += x * x;
        }
        for (auto& x : v) x /= std::sqrt(sq);
        for (std::size_t j = 0; j < v.size(); ++j) text += (j ? "," : "") + format_double(v[j]);
        text += "\n";
        rows.push_back(v);
    }
    write_file(dir / "e.csv", text);
    const auto e = read_embeddings(dir / "e.csv");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(e[i][j], rows[i][j], 1e-12);
    }
}

TEST(Embeddings, Errors) {
    TempDir dir("emb");
    write_file(dir / "zero.csv", "1,0\n0,0\n");
    expect_located([&] { read_embeddings(dir / "zero.csv"); }, ErrorCode::ZeroVector, 2, 0);
    write_file(dir / "dims.csv", "1,0\n0,1,0\n");
    expect_located([&] { read_embeddings(dir / "dims.csv"); }, ErrorCode::DimensionMismatch, 2, 0);
    write_file(dir / "text.csv", "1,0\n0,zz\n");
    expect_located([&] { read_embeddings(dir / "text.csv"); }, ErrorCode::ParseError, 2, 3);
}

const CoefficientSet kGenerator{{DomainId("a"), {1, 50, 2, 0.5, 0.5}}, {DomainId("b"), {1, 20, 1.5, 0.8, 0.4}}};

std::vector<NamedRecipe> two_mixtures() {
    return {{"m1", make_recipe({{DomainId("a"), 0.2}, {DomainId("b"), 0.8}})},
            {"m2", make_recipe({{DomainId("a"), 0.6}, {DomainId("b"), 0.4}})}};
}

TEST(GenerateSynthetic, NoiselessIsExact) {
    const auto set = generate_synthetic(kGenerator, two_mixtures(), {10, 100, 1000}, 0.0, 5);
    ASSERT_EQ(set.observations.size(), 12u);
    for (const auto& o : set.observations) {
        EXPECT_EQ(o.loss, predict_loss(kGenerator.at(o.domain), o.proportion, static_cast<double>(o.step)));
    }
    EXPECT_TRUE(validate_observations(set).empty());
}

TEST(GenerateSynthetic, SeededAndDeterministic) {
    const auto a = generate_synthetic(kGenerator, two_mixtures(), {10, 100, 1000}, 0.05, 9);
    const auto b = generate_synthetic(kGenerator, two_mixtures(), {10, 100, 1000}, 0.05, 9);
    const auto c = generate_synthetic(kGenerator, two_mixtures(), {10, 100, 1000}, 0.05, 10);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(GenerateSynthetic, NoiseHasRequestedSpread) {
    std::vector<std::int64_t> steps;
    for (std::int64_t s = 1; s <= 2500; ++s) steps.push_back(s);
    const auto set = generate_synthetic(kGenerator, two_mixtures(), steps, 0.01, 77);
    ASSERT_GE(set.observations.size(), 10000u);
    double sum = 0, sq = 0;
    for (const auto& o : set.observations) {
        const double e = std::log(o.loss / predict_loss(kGenerator.at(o.domain), o.proportion, static_cast<double>(o.step)));
        sum += e;
        sq += e * e;
    }
    const double n = static_cast<double>(set.observations.size());
    const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
    EXPECT_NEAR(sd, 0.01, 0.002);
}

TEST(GenerateSynthetic, Errors) {
    EXPECT_MIXLAW_ERROR(generate_synthetic(kGenerator, two_mixtures(), {10, 10}, 0.0, 0), ErrorCode::InvalidArgument);
    EXPECT_MIXLAW_ERROR(generate_synthetic(kGenerator, two_mixtures(), {0, 10}, 0.0, 0), ErrorCode::InvalidArgument);
    EXPECT_MIXLAW_ERROR(generate_synthetic(kGenerator, two_mixtures(), {10}, -1.0, 0), ErrorCode::InvalidArgument);
    const CoefficientSet only_a{{DomainId("a"), {1, 50, 2, 0.5, 0.5}}};
    EXPECT_MIXLAW_ERROR(generate_synthetic(only_a, two_mixtures(), {10}, 0.0, 0), ErrorCode::UnknownDomain);
}

TEST(Formatting, ShortestRoundTrip) {
    Rng rng(65);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::exp(rng.uniform(-300, 300)) * (rng.uniform() < 0.5 ? -1 : 1);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(config_hash(Json{{"a", 1}}), config_hash(Json{{"a", 1}}));
    EXPECT_NE(config_hash(Json{{"a", 1}}), config_hash(Json{{"a", 2}}));
    EXPECT_EQ(config_hash(Json{{"a", 1}}).size(), 16u);
}

}  // namespace
}  // namespace mixlaw
