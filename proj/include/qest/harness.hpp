#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qest/analytics.hpp"
#include "qest/ensemble.hpp"
#include "qest/errors.hpp"
#include "qest/protocol.hpp"

namespace qest::cli {

// Exit codes: 0 success, 2 malformed command line, 3 parameter outside its
// domain, 4 output I/O failure.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitIo = 4;

enum class RunMode { simulate, analytic, compare, fig1, fig2a, fig2b };

inline bool wants_ensemble(RunMode m) { return m != RunMode::analytic; }
inline bool wants_analytic(RunMode m) { return m != RunMode::simulate; }

// Fully resolved run description. Presets fill (dp, tau, omega_e, steps,
// trajectories); any flag given explicitly wins over its preset value.
struct RunConfig {
    RunMode mode = RunMode::simulate;
    double omega = 1.0;
    double omega_e = 1.0;
    double dp = 0.04;
    double tau = std::numbers::pi / 50.0;
    long n_steps = 2000;
    int n_trajectories = 1000;
    std::uint64_t master_seed = 1;
    std::string output_path;
    double ode_step = 0.0;  // 0 = tau/10
    unsigned threads = 0;   // 0 = hardware concurrency

    ProtocolParams params() const { return {omega, omega_e, dp, tau}; }
};

namespace detail {

struct PresetShape {
    double dp = 0.04;
    double tau = std::numbers::pi / 50.0;
    double delta_over_gamma = 0.0;
    long steps = 2000;
    int trajectories = 1000;
};

inline std::optional<PresetShape> preset_for(RunMode mode) {
    switch (mode) {
        case RunMode::fig1:
            return PresetShape{0.04, std::numbers::pi / 50.0, 0.0, 16000, 1000};
        case RunMode::fig2a:
            return PresetShape{0.04, std::numbers::pi / 50.0, 1.0 / 20.0, 12800, 1000};
        case RunMode::fig2b:
            return PresetShape{0.04, std::numbers::pi / 50.0, 1.0 / 5.0, 12800, 1000};
        default:
            return std::nullopt;
    }
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

// Parses the command line (without the program name). Throws usage_error for
// malformed invocations and invalid_parameter for out-of-range values; the
// help text ends up in usage_error with exit code 0 requested via
// `help_requested`.
inline RunConfig parse_args(const std::vector<std::string>& args, std::string* help_text = nullptr) {
    CLI::App app{"Real-time qubit state estimation under periodic unsharp measurements"};
    app.name("qest");

    std::string mode_name;
    app.add_option("mode", mode_name,
                   "simulate | analytic | compare | fig1 | fig2a | fig2b")
        ->required();

    RunConfig cfg;
    auto* omega_opt = app.add_option("--omega", cfg.omega, "Drive frequency (time unit)");
    auto* omega_e_opt =
        app.add_option("--omega-est", cfg.omega_e, "Frequency used to propagate the estimate");
    auto* dp_opt = app.add_option("--dp", cfg.dp, "Measurement strength in [0,1]");
    auto* tau_opt = app.add_option("--tau", cfg.tau, "Period between measurements");
    auto* steps_opt = app.add_option("--steps", cfg.n_steps, "Number of elementary steps");
    auto* traj_opt =
        app.add_option("--trajectories", cfg.n_trajectories, "Monte Carlo trajectory count");
    app.add_option("--seed", cfg.master_seed, "Master seed for trajectory streams");
    app.add_option("--ode-step", cfg.ode_step, "Integrator step (default tau/10)");
    app.add_option("--out", cfg.output_path, "Output CSV path")->required();
    app.add_option("--threads", cfg.threads, "Worker threads (0 = hardware)");

    try {
        // CLI11 wants argv order reversed.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        if (help_text != nullptr) *help_text = app.help();
        throw usage_error("help requested");
    } catch (const CLI::ParseError& e) {
        throw usage_error(std::string(e.what()) + "\nRun with --help for usage.");
    }

    if (mode_name == "simulate") cfg.mode = RunMode::simulate;
    else if (mode_name == "analytic") cfg.mode = RunMode::analytic;
    else if (mode_name == "compare") cfg.mode = RunMode::compare;
    else if (mode_name == "fig1") cfg.mode = RunMode::fig1;
    else if (mode_name == "fig2a") cfg.mode = RunMode::fig2a;
    else if (mode_name == "fig2b") cfg.mode = RunMode::fig2b;
    else throw usage_error("unknown mode '" + mode_name + "'");

    if (const auto preset = detail::preset_for(cfg.mode)) {
        if (dp_opt->count() == 0) cfg.dp = preset->dp;
        if (tau_opt->count() == 0) cfg.tau = preset->tau;
        if (steps_opt->count() == 0) cfg.n_steps = preset->steps;
        if (traj_opt->count() == 0) cfg.n_trajectories = preset->trajectories;
        if (omega_e_opt->count() == 0) {
            const double gamma = gamma_from_discrete(cfg.dp, cfg.tau);
            cfg.omega_e = cfg.omega - preset->delta_over_gamma * gamma;
        }
    } else if (omega_e_opt->count() == 0) {
        cfg.omega_e = cfg.omega;  // matched frequencies unless told otherwise
    }
    (void)omega_opt;

    // Domain validation beyond what ProtocolParams rechecks later.
    if (cfg.n_steps < 0) throw invalid_parameter("steps must be nonnegative");
    if (cfg.n_trajectories < 1) throw invalid_parameter("trajectories must be at least 1");
    if (cfg.ode_step < 0.0 || !std::isfinite(cfg.ode_step)) {
        throw invalid_parameter("ode-step must be nonnegative");
    }
    (void)cfg.params();  // throws invalid_parameter on bad omega/dp/tau
    return cfg;
}

namespace detail {

struct AnalyticColumns {
    std::vector<double> ode_plus;
    std::vector<double> ode_minus;
    std::vector<double> ode_avg;
    std::vector<double> closed_form;
    double f_minus = 1.0;
};

inline AnalyticColumns analytic_columns(const RunConfig& cfg, double f0) {
    const ProtocolParams params = cfg.params();
    const double gamma = params.gamma();
    const double delta = params.delta();
    const auto n = static_cast<std::size_t>(cfg.n_steps);

    AnalyticColumns out;
    out.ode_plus.resize(n + 1, f0);
    out.ode_minus.resize(n + 1, f0);
    out.ode_avg.resize(n + 1, f0);
    out.closed_form.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        out.closed_form[k] = closed_form_fidelity(static_cast<double>(k) * cfg.tau, gamma);
    }
    out.f_minus = gamma > 0.0 ? asymptotic_fidelities(gamma, delta).f_minus : 1.0;
    if (n == 0 || gamma <= 0.0) return out;

    // Integrate on a sub-grid that lands exactly on the row times k*tau.
    const double want = cfg.ode_step > 0.0 ? cfg.ode_step : cfg.tau / 10.0;
    const auto per_row = static_cast<std::size_t>(
        std::max(1.0, std::round(cfg.tau / want)));
    const double h = cfg.tau / static_cast<double>(per_row);
    const double t_end = static_cast<double>(cfg.n_steps) * cfg.tau;
    const FidelityTrace plus = integrate_ode(OdeSpec(gamma, delta, +1, f0), t_end, h);
    const FidelityTrace minus = integrate_ode(OdeSpec(gamma, delta, -1, f0), t_end, h);
    for (std::size_t k = 0; k <= n; ++k) {
        const std::size_t j = std::min(k * per_row, plus.size() - 1);
        out.ode_plus[k] = plus.fidelities[j];
        out.ode_minus[k] = minus.fidelities[j];
        out.ode_avg[k] = 0.5 * (plus.fidelities[j] + minus.fidelities[j]);
    }
    return out;
}

} // namespace detail

// Runs the configured experiment and writes the CSV. Columns are fixed:
//   t,mean_fidelity,std_error,ode_plus,ode_minus,ode_avg,closed_form,f_minus
// Ensemble columns are empty in analytic mode, analytic columns are empty in
// simulate mode. Floats are printed with 17 significant digits so parsing
// the file recovers every value bit-exactly.
inline int execute(const RunConfig& cfg, std::ostream& summary_out = std::cout) {
    const ProtocolParams params = cfg.params();
    const QubitState init_actual = QubitState::ket0();
    const QubitState init_estimate = QubitState::ket1();
    const double f0 = fidelity(init_actual, init_estimate);
    const double gamma = params.gamma();
    const double t_end = static_cast<double>(cfg.n_steps) * cfg.tau;

    std::optional<EnsembleTrace> ensemble;
    if (wants_ensemble(cfg.mode)) {
        if (cfg.n_steps > 0) {
            ensemble = run_ensemble(EnsembleSpec(params, cfg.n_trajectories, cfg.n_steps,
                                                 cfg.master_seed, init_actual, init_estimate),
                                    cfg.threads);
        } else {
            // Zero-step boundary: every trajectory is its initial fidelity.
            EnsembleTrace t;
            t.times = {0.0};
            t.mean_fidelity = {f0};
            t.std_error = {0.0};
            t.n_trajectories = cfg.n_trajectories;
            ensemble = std::move(t);
        }
    }
    std::optional<detail::AnalyticColumns> analytic;
    if (wants_analytic(cfg.mode)) analytic = detail::analytic_columns(cfg, f0);

    std::ofstream csv(cfg.output_path, std::ios::binary);
    if (!csv) throw io_error("cannot open '" + cfg.output_path + "' for writing");
    csv << "t,mean_fidelity,std_error,ode_plus,ode_minus,ode_avg,closed_form,f_minus\n";
    const auto n_rows = static_cast<std::size_t>(cfg.n_steps) + 1;
    for (std::size_t k = 0; k < n_rows; ++k) {
        csv << detail::format_double(static_cast<double>(k) * cfg.tau);
        if (ensemble) {
            csv << ',' << detail::format_double(ensemble->mean_fidelity[k]) << ','
                << detail::format_double(ensemble->std_error[k]);
        } else {
            csv << ",,";
        }
        if (analytic) {
            csv << ',' << detail::format_double(analytic->ode_plus[k]) << ','
                << detail::format_double(analytic->ode_minus[k]) << ','
                << detail::format_double(analytic->ode_avg[k]) << ','
                << detail::format_double(analytic->closed_form[k]) << ','
                << detail::format_double(analytic->f_minus);
        } else {
            csv << ",,,,,";
        }
        csv << '\n';
    }
    csv.flush();
    if (!csv) throw io_error("write to '" + cfg.output_path + "' failed");

    // Asymptotic window: past the transient scale 5/gamma when the horizon
    // allows it, otherwise the last quarter of the run.
    double window_start = 0.75 * t_end;
    if (gamma > 0.0 && 5.0 / gamma < t_end) window_start = 5.0 / gamma;
    WindowStats window{f0, 0.0};
    if (ensemble) {
        window = asymptotic_mean(*ensemble, window_start, t_end);
    } else if (analytic) {
        EnsembleTrace proxy;
        proxy.n_trajectories = 1;
        proxy.mean_fidelity = analytic->ode_avg;
        proxy.std_error.assign(analytic->ode_avg.size(), 0.0);
        proxy.times.resize(analytic->ode_avg.size());
        for (std::size_t k = 0; k < proxy.times.size(); ++k) {
            proxy.times[k] = static_cast<double>(k) * cfg.tau;
        }
        window = asymptotic_mean(proxy, window_start, t_end);
    }
    const double f_bar =
        gamma > 0.0 ? asymptotic_fidelities(gamma, params.delta()).f_bar
                    : std::numeric_limits<double>::quiet_NaN();
    char line[256];
    std::snprintf(line, sizeof(line),
                  "gamma=%.10g delta=%.10g window=[%.6g,%.6g] window_mean=%.10g "
                  "window_se=%.4g predicted_f_bar=%.10g",
                  gamma, params.delta(), window_start, t_end, window.mean, window.std_error,
                  f_bar);
    summary_out << line << '\n';
    return 0;
}

// Full front end: parse, execute, map failures to exit codes.
inline int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    std::string help_text;
    try {
        const RunConfig cfg = parse_args(args, &help_text);
        return execute(cfg);
    } catch (const usage_error& e) {
        if (!help_text.empty()) {
            std::cout << help_text;
            return 0;
        }
        std::cerr << "qest: " << e.what() << '\n';
        return kExitUsage;
    } catch (const io_error& e) {
        std::cerr << "qest: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "qest: " << e.what() << '\n';
        return kExitValidation;
    }
}

} // namespace qest::cli
