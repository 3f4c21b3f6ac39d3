// Command-line front end: estimate, simulate, table5, verify.
//
// Exit codes: 0 ok, 1 usage or input error, 2 divergence undefined for the
// data (msde with A <= 0 and empty cells), 3 estimator did not converge,
// 4 oracle verification failed.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdiv/dataset.hpp"
#include "sdiv/errors.hpp"
#include "sdiv/estimation.hpp"
#include "sdiv/simulation.hpp"
#include "sdiv/table5.hpp"
#include "sdiv/verify.hpp"

namespace {

using namespace sdiv;
using ojson = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 1, kUndefined = 2, kNoConvergence = 3, kVerifyFailed = 4 };

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SDIV_SEED"); env && *env) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring unparsable SDIV_SEED='" << env << "'\n";
        }
    }
    return kDefaultBaseSeed;
}

Dataset resolve_dataset(const std::string& name_or_path, const std::string& format) {
    if (auto d = builtin_dataset(name_or_path)) return *d;
    if (format == "csv") return load_dataset(name_or_path, DatasetFormat::Csv);
    if (format == "json") return load_dataset(name_or_path, DatasetFormat::Json);
    return load_dataset(name_or_path);
}

Mode parse_mode(const std::string& s) { return s == "msde" ? Mode::Msde : Mode::Mpsde; }

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_file_atomic(path, text);
    }
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string data = "drosophila-day177";
    std::string format = "auto";
    std::string model = "poisson";
    double alpha = 0.0;
    double lambda = 0.0;
    std::string mode = "mpsde";
    double h = 1.0;
    std::optional<double> beta;
    std::string init = "mean";
    std::string out = "json";
    std::string out_file;
    double tail_eps = kDefaultTailEps;
};

int run_estimate(const EstimateArgs& a) {
    const Dataset ds = resolve_dataset(a.data, a.format);
    const PoissonModel model;
    const DivergenceParams params(a.alpha, a.lambda, a.h, a.beta);
    const Mode mode = parse_mode(a.mode);
    FitOptions opts;
    opts.tail_eps = a.tail_eps;
    opts.initializer = a.init == "robust" ? Initializer::Robust : Initializer::SampleMean;

    EstimationResult r;
    try {
        r = fit(ds.table, model, params, mode, opts);
    } catch (const EmptyCellUndefined& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUndefined;
    }

    const double n = static_cast<double>(ds.table.n());
    double sandwich = NAN;
    try {
        sandwich = asymptotic_variance(model, r.theta_hat, a.alpha, a.tail_eps).sandwich(0, 0);
    } catch (const SingularInformation& e) {
        std::cerr << "warning: " << e.what() << '\n';
    }
    const double se = std::sqrt(sandwich / n);

    std::ostringstream os;
    if (a.out == "csv") {
        os << "dataset,n,model,mode,alpha,lambda,h,beta,A,B,theta_hat,objective,residual_norm,iterations,converged,"
              "method,sandwich,se,tail_eps,residual_tol\n";
        os << ds.name << ',' << ds.table.n() << ',' << model.name() << ',' << to_string(mode) << ','
           << format_double(a.alpha) << ',' << format_double(a.lambda) << ','
           << (mode == Mode::Mpsde ? format_double(a.h) : "NA") << ',' << format_double(params.beta()) << ','
           << format_double(params.A()) << ',' << format_double(params.B()) << ',' << format_double(r.theta_hat[0])
           << ',' << format_double(r.objective) << ',' << format_double(r.residual_norm) << ',' << r.iterations << ','
           << (r.converged ? "true" : "false") << ',' << to_string(r.method_trace) << ',' << format_double(sandwich)
           << ',' << format_double(se) << ',' << format_double(opts.tail_eps) << ','
           << format_double(opts.residual_tol) << '\n';
    } else {
        ojson j;
        j["dataset"] = ds.name;
        j["n"] = ds.table.n();
        j["model"] = std::string(model.name());
        j["mode"] = to_string(mode);
        j["alpha"] = a.alpha;
        j["lambda"] = a.lambda;
        j["h"] = mode == Mode::Mpsde ? ojson(a.h) : ojson();
        j["beta"] = params.beta();
        j["A"] = params.A();
        j["B"] = params.B();
        j["regime"] = to_string(params.regime());
        j["theta_hat"] = r.theta_hat;
        j["objective"] = r.objective;
        j["residual_norm"] = r.residual_norm;
        j["iterations"] = r.iterations;
        j["converged"] = r.converged;
        j["method"] = to_string(r.method_trace);
        j["sandwich"] = std::isfinite(sandwich) ? ojson(sandwich) : ojson();
        j["se"] = std::isfinite(se) ? ojson(se) : ojson();
        j["tail_eps"] = opts.tail_eps;
        j["residual_tol"] = opts.residual_tol;
        os << j.dump(2) << '\n';
    }
    emit(os.str(), a.out_file);
    if (!r.converged) {
        std::cerr << "error: estimating equation not solved (residual " << r.residual_norm << ")\n";
        return kNoConvergence;
    }
    return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string grid_file;
    std::vector<std::uint64_t> n;
    std::vector<double> theta;
    std::vector<double> alpha;
    std::vector<double> lambda;
    std::vector<double> h;
    std::vector<double> beta;
    std::string mode = "mpsde";
    std::string sweep = "h";
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    bool fast = false;
    unsigned threads = 0;
    std::string out_dir = ".";
};

template <class T>
void take_list(const ojson& j, const char* key, std::vector<T>& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::vector<T>>();
}

ExperimentGrid build_grid(const SimulateArgs& a) {
    ExperimentGrid g;
    std::string mode = a.mode;
    std::string sweep = a.sweep;
    if (!a.grid_file.empty()) {
        std::ifstream in(a.grid_file);
        if (!in) throw std::invalid_argument("cannot open grid file " + a.grid_file);
        ojson j = ojson::parse(in);
        take_list(j, "n", g.n_values);
        take_list(j, "theta", g.theta_values);
        take_list(j, "alpha", g.alpha_values);
        take_list(j, "lambda", g.lambda_values);
        take_list(j, "h", g.h_values);
        take_list(j, "beta", g.beta_values);
        if (j.contains("mode")) mode = j["mode"].get<std::string>();
        if (j.contains("sweep")) sweep = j["sweep"].get<std::string>();
        if (j.contains("replicates")) g.replicates = j["replicates"].get<std::size_t>();
        if (j.contains("seed")) g.base_seed = j["seed"].get<std::uint64_t>();
        else g.base_seed = default_seed();
    } else {
        g.base_seed = default_seed();
    }
    if (!a.n.empty()) g.n_values = a.n;
    if (!a.theta.empty()) g.theta_values = a.theta;
    if (!a.alpha.empty()) g.alpha_values = a.alpha;
    if (!a.lambda.empty()) g.lambda_values = a.lambda;
    if (!a.h.empty()) g.h_values = a.h;
    if (!a.beta.empty()) g.beta_values = a.beta;
    if (mode != "msde" && mode != "mpsde") throw std::invalid_argument("mode must be msde or mpsde");
    g.mode = parse_mode(mode);
    if (sweep == "beta" && g.beta_values.empty()) g.beta_values = default_beta_grid();
    if (sweep != "beta") g.beta_values.clear();
    if (a.replicates) g.replicates = *a.replicates;
    if (a.fast) g.replicates = kFastReplicates;
    if (a.seed) g.base_seed = *a.seed;
    g.threads = a.threads;
    g.validate();
    return g;
}

int run_simulate(const SimulateArgs& a) {
    ExperimentGrid grid;
    try {
        grid = build_grid(a);
    } catch (const std::exception& e) {
        std::cerr << "error: invalid grid: " << e.what() << '\n';
        return kUsage;
    }
    const bool beta_sweep = !grid.beta_values.empty();
    const MseSurface surface = beta_sweep ? sweep_beta(grid) : sweep_h(grid);

    std::filesystem::create_directories(a.out_dir);
    std::ostringstream csv;
    write_surface_csv(surface, csv);
    const auto dir = std::filesystem::path(a.out_dir);
    write_file_atomic((dir / "surface.csv").string(), csv.str());
    write_file_atomic((dir / "manifest.json").string(), manifest_json(grid, surface, a.fast));
    std::cerr << "wrote " << surface.cells.size() << " cells to " << (dir / "surface.csv").string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------- table5

int run_table5(const std::string& data, const std::vector<double>& h_list, const std::string& out) {
    const Dataset ds = resolve_dataset(data, "auto");
    const DrosophilaTable t = compute_table5(ds.table, h_list);
    std::ostringstream os;
    write_table5_csv(t, os);
    emit(os.str(), out);
    return kOk;
}

// ---------------------------------------------------------------- verify

int run_verify(VerifyOptions opts, const std::string& report_path, double perturb_slope) {
    if (perturb_slope != 0.0) opts.perturb = [perturb_slope](double t) { return perturb_slope * t; };
    const VerifyReport r = run_verification(opts);
    emit(r.to_json(), report_path);
    std::cerr << (r.passed() ? "verify: all checks passed" : "verify: FAILED") << " (" << r.fits.size()
              << " fit checks, " << r.power_sums.size() << " power-sum checks, " << r.failures() << " failures)\n";
    return r.passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum S-divergence and penalized S-divergence estimation for discrete models"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate", "Fit one estimator to a dataset");
    c_est->add_option("--data", est.data, "Dataset file or builtin name")->capture_default_str();
    c_est->add_option("--format", est.format, "Dataset format")
        ->check(CLI::IsMember({"auto", "csv", "json"}))
        ->capture_default_str();
    c_est->add_option("--model", est.model, "Model family")->check(CLI::IsMember({"poisson"}))->capture_default_str();
    c_est->add_option("--alpha", est.alpha)->check(CLI::NonNegativeNumber)->capture_default_str();
    c_est->add_option("--lambda", est.lambda)->capture_default_str();
    c_est->add_option("--mode", est.mode)->check(CLI::IsMember({"msde", "mpsde"}))->capture_default_str();
    c_est->add_option("--h", est.h, "Empty-cell penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
    c_est->add_option("--beta", est.beta, "Empty-cell exponent minus one (default alpha)")
        ->check(CLI::NonNegativeNumber);
    c_est->add_option("--init", est.init)->check(CLI::IsMember({"mean", "robust"}))->capture_default_str();
    c_est->add_option("--out", est.out, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    c_est->add_option("--out-file", est.out_file, "Write output here instead of stdout");
    c_est->add_option("--tail-eps", est.tail_eps)->check(CLI::PositiveNumber)->capture_default_str();

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Monte-Carlo MSE surface over a parameter grid");
    c_sim->add_option("--grid-file", sim.grid_file, "JSON grid: n, theta, alpha, lambda, h, beta, mode, replicates");
    c_sim->add_option("--n", sim.n)->delimiter(',');
    c_sim->add_option("--theta", sim.theta)->delimiter(',');
    c_sim->add_option("--alpha", sim.alpha)->delimiter(',');
    c_sim->add_option("--lambda", sim.lambda)->delimiter(',');
    c_sim->add_option("--h", sim.h)->delimiter(',');
    c_sim->add_option("--beta", sim.beta)->delimiter(',');
    c_sim->add_option("--mode", sim.mode)->check(CLI::IsMember({"msde", "mpsde"}))->capture_default_str();
    c_sim->add_option("--sweep", sim.sweep, "Extra axis: h only, or h and beta")
        ->check(CLI::IsMember({"h", "beta"}))
        ->capture_default_str();
    c_sim->add_option("--replicates", sim.replicates);
    c_sim->add_option("--seed", sim.seed, "Base seed (default $SDIV_SEED or 20150601)");
    c_sim->add_flag("--fast", sim.fast, "Use 200 replicates");
    c_sim->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();
    c_sim->add_option("--out-dir", sim.out_dir)->capture_default_str();

    std::string t5_data = "drosophila-day177";
    std::vector<double> t5_h{0.5, 1.0};
    std::string t5_out;
    auto* c_t5 = app.add_subcommand("table5", "Drosophila estimates over the (lambda, alpha) grid as CSV");
    c_t5->add_option("--h-list", t5_h)->delimiter(',')->check(CLI::NonNegativeNumber);
    c_t5->add_option("--data", t5_data)->capture_default_str();
    c_t5->add_option("--out", t5_out, "Output CSV (default stdout)");

    VerifyOptions vopt;
    vopt.seed = default_seed();
    std::string v_report = "verify_report.json";
    double v_perturb = 0.0;
    auto* c_ver = app.add_subcommand("verify", "Cross-check the estimator against the brute-force oracle");
    c_ver->add_option("--cases", vopt.cases)->check(CLI::PositiveNumber)->capture_default_str();
    c_ver->add_option("--seed", vopt.seed)->capture_default_str();
    c_ver->add_option("--report", v_report, "JSON report path ('-' for stdout)")->capture_default_str();
    c_ver->add_option("--perturb-oracle", v_perturb, "Add slope*theta to the oracle objective (test hook)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*c_est) return run_estimate(est);
        if (*c_sim) return run_simulate(sim);
        if (*c_t5) return run_table5(t5_data, t5_h, t5_out);
        if (*c_ver) return run_verify(vopt, v_report, v_perturb);
    } catch (const EmptyCellUndefined& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUndefined;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
