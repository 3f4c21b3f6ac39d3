#include "sdiv/errors.hpp"

#include <sstream>

namespace sdiv {

namespace {

std::string empty_cell_message(double alpha, double lambda, double A) {
    std::ostringstream os;
    os << "S-divergence undefined: empty cell present with alpha=" << alpha << ", lambda=" << lambda
       << " (A=" << A << " <= 0)";
    return os.str();
}

}  // namespace

EmptyCellUndefined::EmptyCellUndefined(double alpha, double lambda, double A)
    : Error(empty_cell_message(alpha, lambda, A)), alpha_(alpha), lambda_(lambda), A_(A) {}

ParseError::ParseError(const std::string& what, std::size_t line, std::string field)
    : Error("line " + std::to_string(line) + (field.empty() ? "" : ", field '" + field + "'") + ": " + what),
      line_(line),
      field_(std::move(field)) {}

DuplicateSupportPoint::DuplicateSupportPoint(unsigned long long x)
    : Error("duplicate support point x=" + std::to_string(x)) {}

NonPositiveCount::NonPositiveCount(unsigned long long x, long long count)
    : Error("non-positive count " + std::to_string(count) + " at x=" + std::to_string(x)) {}

}  // namespace sdiv
