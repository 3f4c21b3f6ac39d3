#include "sdiv/table5.hpp"

#include <cmath>
#include <limits>

#include "sdiv/errors.hpp"
#include "sdiv/simulation.hpp"

namespace sdiv {

const char* to_string(CellStatus s) {
    switch (s) {
        case CellStatus::Ok: return "ok";
        case CellStatus::Undefined: return "undefined";
        case CellStatus::NotConverged: return "not_converged";
    }
    return "?";
}

std::vector<double> table5_lambdas() { return {0.0, -0.5, -1.0, -1.5, -2.0}; }
std::vector<double> table5_alphas() { return {0.0, 0.1, 0.25, 0.5}; }

namespace {

EstimateCell estimate_cell(const FrequencyTable& data, const PoissonModel& model, const DivergenceParams& params,
                           Mode mode, const FitOptions& opts) {
    try {
        const EstimationResult r = fit(data, model, params, mode, opts);
        return {r.converged ? CellStatus::Ok : CellStatus::NotConverged, r.theta_hat.front()};
    } catch (const EmptyCellUndefined&) {
        return {CellStatus::Undefined, std::nullopt};
    }
}

std::string format_cell(const EstimateCell& c) {
    switch (c.status) {
        case CellStatus::Ok: return format_double(*c.theta);
        case CellStatus::Undefined: return "--";
        case CellStatus::NotConverged: return "NC:" + format_double(*c.theta);
    }
    return "";
}

std::string format_inverse(double v) {
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    return format_double(v);
}

}  // namespace

DrosophilaTable compute_table5(const FrequencyTable& data, const std::vector<double>& h_list,
                               const FitOptions& fit_opts) {
    const PoissonModel model;
    DrosophilaTable table{h_list, {}};
    for (double lambda : table5_lambdas()) {
        for (double alpha : table5_alphas()) {
            const DivergenceParams base(alpha, lambda);
            DrosophilaRow row{lambda, alpha, 0.0, {}, {}};
            row.inv_A = base.regime() == Regime::ALimitZero ? std::numeric_limits<double>::infinity() : 1.0 / base.A();
            row.msde = estimate_cell(data, model, base, Mode::Msde, fit_opts);
            for (double h : h_list) row.mpsde.push_back(estimate_cell(data, model, base.with_h(h), Mode::Mpsde, fit_opts));
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

void write_table5_csv(const DrosophilaTable& table, std::ostream& os) {
    os << "lambda,alpha,inv_A,msde";
    for (double h : table.h_list) os << ",mpsde_h" << format_double(h);
    os << '\n';
    for (const auto& row : table.rows) {
        os << format_double(row.lambda) << ',' << format_double(row.alpha) << ',' << format_inverse(row.inv_A) << ','
           << format_cell(row.msde);
        for (const auto& c : row.mpsde) os << ',' << format_cell(c);
        os << '\n';
    }
}

}  // namespace sdiv
