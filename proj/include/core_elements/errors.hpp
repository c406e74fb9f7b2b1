#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace core_elements {

/// Base class of all library errors. code() is a stable machine-readable tag.
class Error : public std::runtime_error {
public:
    explicit Error(std::string message) : std::runtime_error(std::move(message)) {}
    virtual const char* code() const noexcept { return "error"; }
};

#define CORE_ELEMENTS_ERROR(Name, tag)                                   \
    class Name : public Error {                                          \
    public:                                                              \
        using Error::Error;                                              \
        const char* code() const noexcept override { return tag; }       \
    }

CORE_ELEMENTS_ERROR(RankDeficient, "rank_deficient");
CORE_ELEMENTS_ERROR(SingularSystem, "singular_system");
CORE_ELEMENTS_ERROR(RankDeficientDesign, "rank_deficient_design");
CORE_ELEMENTS_ERROR(RankDeficientSubsample, "rank_deficient_subsample");
CORE_ELEMENTS_ERROR(InsufficientRows, "insufficient_rows");
CORE_ELEMENTS_ERROR(AllBlocksSingular, "all_blocks_singular");
CORE_ELEMENTS_ERROR(EmptyInput, "empty_input");
CORE_ELEMENTS_ERROR(ZeroResidual, "zero_residual");
CORE_ELEMENTS_ERROR(InvalidEpsPrime, "invalid_eps_prime");
CORE_ELEMENTS_ERROR(DegenerateSignal, "degenerate_signal");
CORE_ELEMENTS_ERROR(DegenerateMisspec, "degenerate_misspec");
CORE_ELEMENTS_ERROR(DimensionTooSmall, "dimension_too_small");
CORE_ELEMENTS_ERROR(ZeroReference, "zero_reference");
CORE_ELEMENTS_ERROR(ZeroResponse, "zero_response");
CORE_ELEMENTS_ERROR(DimensionMismatch, "dimension_mismatch");
CORE_ELEMENTS_ERROR(IoError, "io_error");

#undef CORE_ELEMENTS_ERROR

/// Power iteration hit the iteration cap before the relative tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(std::string message, double last_estimate, int iterations)
        : Error(std::move(message)), last_estimate(last_estimate), iterations(iterations) {}
    const char* code() const noexcept override { return "non_convergence"; }

    double last_estimate;
    int iterations;
};

/// The sketch Gram X*'X could not be factorized at the requested budget.
class SingularSketchGram : public Error {
public:
    SingularSketchGram(std::string message, std::int64_t r)
        : Error(std::move(message)), r(r) {}
    const char* code() const noexcept override { return "singular_sketch_gram"; }

    std::int64_t r;
};

/// A CSV cell could not be parsed. Line and column are 1-based file positions.
class ParseError : public Error {
public:
    ParseError(std::string message, std::int64_t line, std::int64_t column)
        : Error(std::move(message)), line(line), column(column) {}
    const char* code() const noexcept override { return "parse_error"; }

    std::int64_t line;
    std::int64_t column;
};

}  // namespace core_elements
