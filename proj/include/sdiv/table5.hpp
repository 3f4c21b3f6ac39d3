#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdiv/estimation.hpp"
#include "sdiv/frequency_table.hpp"

namespace sdiv {

enum class CellStatus { Ok, Undefined, NotConverged };

const char* to_string(CellStatus s);

struct EstimateCell {
    CellStatus status = CellStatus::Ok;
    /// Set unless status is Undefined.
    std::optional<double> theta;
};

struct DrosophilaRow {
    double lambda;
    double alpha;
    /// 1/A; +/-infinity when A = 0.
    double inv_A;
    EstimateCell msde;
    /// One entry per h of the table's h list.
    std::vector<EstimateCell> mpsde;
};

struct DrosophilaTable {
    std::vector<double> h_list;
    std::vector<DrosophilaRow> rows;
};

/// lambda in {0, -0.5, -1, -1.5, -2} by alpha in {0, 0.1, 0.25, 0.5}.
std::vector<double> table5_lambdas();
std::vector<double> table5_alphas();

/// Poisson MSDE and MPSDE(h) for each (lambda, alpha) row, lambda-major.
DrosophilaTable compute_table5(const FrequencyTable& data, const std::vector<double>& h_list = {0.5, 1.0},
                               const FitOptions& fit_opts = {});

/// Header lambda,alpha,inv_A,msde,mpsde_h<h>...; "--" for undefined cells,
/// "NC:<value>" for estimates that did not converge.
void write_table5_csv(const DrosophilaTable& table, std::ostream& os);

}  // namespace sdiv
