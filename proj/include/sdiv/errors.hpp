#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdiv {

// Base for every recoverable failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// (alpha, lambda) gives A <= 0 and the data has an empty cell inside the
// truncated support, so the ordinary S-divergence is infinite/undefined.
class EmptyCellUndefined : public Error {
public:
    EmptyCellUndefined(double alpha, double lambda, double A);

    double alpha() const noexcept { return alpha_; }
    double lambda() const noexcept { return lambda_; }
    double A() const noexcept { return A_; }

private:
    double alpha_;
    double lambda_;
    double A_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SingularInformation : public Error {
public:
    using Error::Error;
};

class AllReplicatesFailed : public Error {
public:
    using Error::Error;
};

class MissingCells : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::string field);

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class DuplicateSupportPoint : public Error {
public:
    explicit DuplicateSupportPoint(unsigned long long x);
};

class NonPositiveCount : public Error {
public:
    NonPositiveCount(unsigned long long x, long long count);
};

}  // namespace sdiv
