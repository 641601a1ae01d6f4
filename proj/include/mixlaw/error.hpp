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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mixlaw {

enum class ErrorCode {
    InvalidArgument,
    // recipes
    EmptyRecipe,
    ZeroMass,
    ZeroDomain,
    // entropy
    BadSequenceLength,
    TooShort,
    EmptyCorpus,
    EmptyInput,
    DimensionMismatch,
    NotNormalized,
    NonFiniteEntropy,
    NumericalFailure,
    // fitting / prediction
    InsufficientData,
    OutOfDomain,
    UnknownDomain,
    DomainMismatch,
    MixedSteps,
    MissingRecipe,
    // evaluation
    NonPositiveActual,
    LengthMismatch,
    DegenerateVariance,
    MissingDomain,
    EmptyHoldout,
    // optimization
    AllAlphaZero,
    InfeasibleFloor,
    TooManyDomains,
    // io
    ParseError,
    SchemaError,
    InvariantViolation,
    ZeroVector,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyRecipe: return "EmptyRecipe";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::ZeroDomain: return "ZeroDomain";
    case ErrorCode::BadSequenceLength: return "BadSequenceLength";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NonFiniteEntropy: return "NonFiniteEntropy";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::MixedSteps: return "MixedSteps";
    case ErrorCode::MissingRecipe: return "MissingRecipe";
    case ErrorCode::NonPositiveActual: return "NonPositiveActual";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::MissingDomain: return "MissingDomain";
    case ErrorCode::EmptyHoldout: return "EmptyHoldout";
    case ErrorCode::AllAlphaZero: return "AllAlphaZero";
    case ErrorCode::InfeasibleFloor: return "InfeasibleFloor";
    case ErrorCode::TooManyDomains: return "TooManyDomains";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Base exception for every failure raised by the library. The code is the
/// stable part; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Error tied to a location in an input file. Line and column are 1-based;
/// column 0 means "whole line".
class LocatedError : public Error {
public:
    LocatedError(ErrorCode code, std::size_t line, std::size_t column, const std::string& message)
        : Error(code, "line " + std::to_string(line) +
                          (column ? ", column " + std::to_string(column) : std::string()) + ": " +
                          message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace mixlaw
