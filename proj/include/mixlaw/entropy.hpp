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

#include <mixlaw/core.hpp>
#include <mixlaw/random.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <ranges>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mixlaw {

using TokenId = std::uint32_t;
using Count = std::uint64_t;

/// Unigram and adjacent-pair counts over fixed-length token sequences.
///
/// Pairs are counted within a sequence only; the last token of one sequence
/// and the first of the next never form a pair. `position_t_counts` counts
/// tokens that have a successor, i.e. positions 1..T-1, so it is exactly the
/// first-token marginal of `bigram_counts`.
struct CorpusStats {
    std::size_t sequence_length = 1024;
    Count num_sequences = 0;
    std::unordered_map<TokenId, Count> unigram_counts;
    std::unordered_map<TokenId, Count> position_t_counts;
    std::unordered_map<std::uint64_t, Count> bigram_counts;  // key: bigram_key(x, x')

    static constexpr std::uint64_t bigram_key(TokenId first, TokenId second) noexcept {
        return (static_cast<std::uint64_t>(first) << 32) | second;
    }
    static constexpr TokenId first_of(std::uint64_t key) noexcept { return static_cast<TokenId>(key >> 32); }
    static constexpr TokenId second_of(std::uint64_t key) noexcept { return static_cast<TokenId>(key & 0xffffffffu); }

    explicit CorpusStats(std::size_t T = 1024) : sequence_length(T) {
        if (T < 2) fail(ErrorCode::TooShort, "sequence length must be >= 2, got " + std::to_string(T));
    }

    void add_sequence(std::span<const TokenId> tokens) {
        if (tokens.size() != sequence_length) {
            fail(ErrorCode::BadSequenceLength, "sequence has " + std::to_string(tokens.size()) +
                                                   " tokens, expected " + std::to_string(sequence_length));
        }
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            ++unigram_counts[tokens[t]];
            if (t + 1 < tokens.size()) {
                ++position_t_counts[tokens[t]];
                ++bigram_counts[bigram_key(tokens[t], tokens[t + 1])];
            }
        }
        ++num_sequences;
    }

    /// Adds another shard's counts. Merging is associative and commutative.
    void merge(const CorpusStats& other) {
        if (other.sequence_length != sequence_length) {
            fail(ErrorCode::BadSequenceLength, "cannot merge counts over different sequence lengths");
        }
        num_sequences += other.num_sequences;
        for (const auto& [k, c] : other.unigram_counts) unigram_counts[k] += c;
        for (const auto& [k, c] : other.position_t_counts) position_t_counts[k] += c;
        for (const auto& [k, c] : other.bigram_counts) bigram_counts[k] += c;
    }

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Counts a range of sequences, each exactly T tokens long, in one pass.
template <std::ranges::input_range R>
CorpusStats accumulate_counts(R&& sequences, std::size_t T) {
    CorpusStats stats(T);
    for (const auto& seq : sequences) stats.add_sequence(std::span<const TokenId>(std::ranges::data(seq), std::ranges::size(seq)));
    return stats;
}

namespace detail {

// Neumaier-compensated sum over values sorted ascending, so the result does
// not depend on hash-map iteration order.
inline double stable_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    double comp = 0.0;
    for (double v : terms) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

inline void require_nonempty(const CorpusStats& stats) {
    if (stats.num_sequences == 0) fail(ErrorCode::EmptyCorpus, "no sequences were counted");
}

}  // namespace detail

/// Plug-in entropy (nats) of the distribution given by a map of counts.
template <typename CountMap>
double entropy_of(const CountMap& counts) {
    Count total = 0;
    for (const auto& [k, c] : counts) total += c;
    if (total == 0) fail(ErrorCode::EmptyCorpus, "no counts");
    const double n = static_cast<double>(total);
    std::vector<double> terms;
    terms.reserve(counts.size());
    for (const auto& [k, c] : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        terms.push_back(-p * std::log(p));
    }
    return std::max(0.0, detail::stable_sum(terms));
}

/// Token-level Shannon entropy over every position.
inline double shannon_entropy(const CorpusStats& stats) {
    detail::require_nonempty(stats);
    return entropy_of(stats.unigram_counts);
}

/// Entropy of adjacent token pairs.
inline double joint_entropy(const CorpusStats& stats) {
    detail::require_nonempty(stats);
    return entropy_of(stats.bigram_counts);
}

/// H(X_{t+1} | X_t) = -sum P(x, x') log P(x' | x) with P(x' | x) estimated
/// as count(x, x') / count of x at a position that has a successor.
inline double conditional_entropy(const CorpusStats& stats) {
    detail::require_nonempty(stats);
    Count total = 0;
    for (const auto& [k, c] : stats.bigram_counts) total += c;
    const double n = static_cast<double>(total);
    std::vector<double> terms;
    terms.reserve(stats.bigram_counts.size());
    for (const auto& [key, c] : stats.bigram_counts) {
        const auto marginal = stats.position_t_counts.at(CorpusStats::first_of(key));
        const double joint = static_cast<double>(c) / n;
        terms.push_back(-joint * std::log(static_cast<double>(c) / static_cast<double>(marginal)));
    }
    return std::max(0.0, detail::stable_sum(terms));
}

using Embedding = std::vector<double>;

/// Eigenvalues of the density matrix K / N built from sampled embeddings.
struct KernelSpectrum {
    std::size_t n = 0;
    std::vector<double> eigenvalues;  // ascending, clamped at 0
};

inline constexpr double kNormTolerance = 1e-6;
inline constexpr double kNegativeEigenvalueTolerance = 1e-9;

/// k distinct indices out of [0, n), chosen by a seeded partial
/// Fisher-Yates shuffle and returned in ascending order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k >= n) return idx;
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Samples min(N, max_samples) embeddings, forms the cosine Gram matrix
/// divided by the sample count, and returns its eigenvalues.
inline KernelSpectrum kernel_spectrum(std::span<const Embedding> embeddings, std::size_t max_samples, std::uint64_t seed) {
    if (embeddings.empty()) fail(ErrorCode::EmptyInput, "no embeddings");
    if (max_samples == 0) fail(ErrorCode::InvalidArgument, "max_samples must be positive");
    const std::size_t dim = embeddings.front().size();
    if (dim == 0) fail(ErrorCode::DimensionMismatch, "embeddings have zero dimension");
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i].size() != dim) {
            fail(ErrorCode::DimensionMismatch, "embedding #" + std::to_string(i) + " has dimension " +
                                                   std::to_string(embeddings[i].size()) + ", expected " + std::to_string(dim));
        }
        double sq = 0.0;
        for (double v : embeddings[i]) sq += v * v;
        if (!(std::abs(std::sqrt(sq) - 1.0) <= kNormTolerance)) {
            fail(ErrorCode::NotNormalized, "embedding #" + std::to_string(i) + " does not have unit norm");
        }
    }

    const auto chosen = sample_indices(embeddings.size(), max_samples, seed);
    const auto n = static_cast<Eigen::Index>(chosen.size());
    Eigen::MatrixXd V(n, static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& e = embeddings[chosen[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(dim); ++j) V(i, j) = e[static_cast<std::size_t>(j)];
    }
    Eigen::MatrixXd rho = V * V.transpose();
    rho /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "eigendecomposition did not converge");

    KernelSpectrum out;
    out.n = chosen.size();
    out.eigenvalues.reserve(chosen.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        double lambda = solver.eigenvalues()[i];
        if (lambda < -kNegativeEigenvalueTolerance) {
            fail(ErrorCode::NumericalFailure, "kernel is not positive semi-definite (eigenvalue " + std::to_string(lambda) + ")");
        }
        out.eigenvalues.push_back(std::max(lambda, 0.0));
    }
    return out;
}

/// -sum lambda log lambda over a spectrum, with 0 log 0 = 0.
inline double spectrum_entropy(const KernelSpectrum& spectrum) {
    std::vector<double> terms;
    terms.reserve(spectrum.eigenvalues.size());
    for (double lambda : spectrum.eigenvalues) {
        if (lambda > 0.0) terms.push_back(-lambda * std::log(lambda));
    }
    return std::max(0.0, detail::stable_sum(terms));
}

/// Von Neumann entropy -Tr(rho log rho) of rho = K / N, K the cosine kernel
/// over (a seeded subsample of) unit-norm embeddings.
inline double von_neumann_entropy(std::span<const Embedding> embeddings, std::size_t max_samples = 1024, std::uint64_t seed = 0) {
    return spectrum_entropy(kernel_spectrum(embeddings, max_samples, seed));
}

/// r_i = exp(H_i / T) / sum_j exp(H_j / T), shifted by the maximum for
/// numerical stability.
inline MixtureRecipe proportions_from_entropies(const std::map<DomainId, double>& entropies, double temperature = 1.0) {
    if (entropies.empty()) fail(ErrorCode::EmptyInput, "no entropies");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) fail(ErrorCode::InvalidArgument, "temperature must be positive and finite");
    double max_scaled = -std::numeric_limits<double>::infinity();
    for (const auto& [d, h] : entropies) {
        if (!std::isfinite(h)) fail(ErrorCode::NonFiniteEntropy, "entropy of '" + d.str() + "' is not finite");
        max_scaled = std::max(max_scaled, h / temperature);
    }
    MixtureRecipe::Map weights;
    for (const auto& [d, h] : entropies) weights.emplace(d, std::exp(h / temperature - max_scaled));
    return make_recipe(weights);
}

}  // namespace mixlaw
