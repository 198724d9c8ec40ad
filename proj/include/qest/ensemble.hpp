#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qest/errors.hpp"
#include "qest/protocol.hpp"
#include "qest/rng.hpp"
#include "qest/trace.hpp"

namespace qest {

// Monte Carlo ensemble description. Trajectory i draws its uniforms from
// UniformStream(trajectory_seed(master_seed, i)), so the ensemble is fully
// determined by this value regardless of how trajectories are scheduled.
class EnsembleSpec {
  public:
    EnsembleSpec(ProtocolParams params, int n_trajectories, long n_steps,
                 std::uint64_t master_seed, QubitState init_actual, QubitState init_estimate)
        : params_(params), n_trajectories_(n_trajectories), n_steps_(n_steps),
          master_seed_(master_seed), init_actual_(init_actual), init_estimate_(init_estimate) {
        if (n_trajectories < 1) {
            throw invalid_parameter("EnsembleSpec: need at least one trajectory");
        }
        if (n_steps < 1) throw invalid_parameter("EnsembleSpec: need at least one step");
    }

    const ProtocolParams& params() const { return params_; }
    int n_trajectories() const { return n_trajectories_; }
    long n_steps() const { return n_steps_; }
    std::uint64_t master_seed() const { return master_seed_; }
    const QubitState& init_actual() const { return init_actual_; }
    const QubitState& init_estimate() const { return init_estimate_; }

  private:
    ProtocolParams params_;
    int n_trajectories_;
    long n_steps_;
    std::uint64_t master_seed_;
    QubitState init_actual_, init_estimate_;
};

// Per-step ensemble statistics. std_error is the sample standard deviation
// (n-1 normalization) divided by sqrt(n_trajectories); zero for a single
// trajectory.
struct EnsembleTrace {
    std::vector<double> times;
    std::vector<double> mean_fidelity;
    std::vector<double> std_error;
    int n_trajectories = 0;

    std::size_t size() const { return times.size(); }
};

struct WindowStats {
    double mean;
    double std_error;
};

namespace detail {

// Trajectories are reduced in fixed chunks of kReductionChunk consecutive
// indices: Welford accumulation runs in index order within a chunk and the
// per-chunk (count, mean, M2) triples combine in ascending chunk order. The
// reduction is therefore bit-identical for any worker count; only which
// thread computes a chunk varies.
inline constexpr int kReductionChunk = 32;

struct ChunkMoments {
    long count = 0;
    std::vector<double> mean;
    std::vector<double> m2;
};

} // namespace detail

// Runs the ensemble, parallelized over trajectory chunks. n_threads = 0 uses
// the hardware concurrency. Identical specs give bit-identical traces for
// every n_threads. A degenerate estimate update aborts the run; the error
// message carries the lowest failing trajectory index.
inline EnsembleTrace run_ensemble(const EnsembleSpec& spec, unsigned n_threads = 0) {
    const MeasurementModel model = make_measurement_model(spec.params().dp());
    const auto n_points = static_cast<std::size_t>(spec.n_steps()) + 1;
    const int n_traj = spec.n_trajectories();
    const int n_chunks = (n_traj + detail::kReductionChunk - 1) / detail::kReductionChunk;

    std::vector<detail::ChunkMoments> chunks(static_cast<std::size_t>(n_chunks));
    std::atomic<int> next_chunk{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::optional<std::pair<int, std::string>> first_failure;

    const auto worker = [&] {
        for (;;) {
            const int c = next_chunk.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            detail::ChunkMoments& out = chunks[static_cast<std::size_t>(c)];
            out.mean.assign(n_points, 0.0);
            out.m2.assign(n_points, 0.0);
            const int begin = c * detail::kReductionChunk;
            const int end = std::min(n_traj, begin + detail::kReductionChunk);
            for (int i = begin; i < end; ++i) {
                try {
                    UniformStream u01(trajectory_seed(spec.master_seed(),
                                                      static_cast<std::uint64_t>(i)));
                    const FidelityTrace trace =
                        run_trajectory(spec.params(), model, spec.init_actual(),
                                       spec.init_estimate(), spec.n_steps(), u01);
                    ++out.count;
                    const double inv_count = 1.0 / static_cast<double>(out.count);
                    for (std::size_t k = 0; k < n_points; ++k) {
                        const double f = trace.fidelities[k];
                        const double delta = f - out.mean[k];
                        out.mean[k] += delta * inv_count;
                        out.m2[k] += delta * (f - out.mean[k]);
                    }
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!first_failure || i < first_failure->first) {
                        first_failure = {i, e.what()};
                    }
                    failed.store(true);
                    return;
                }
            }
        }
    };

    unsigned want = n_threads != 0 ? n_threads : std::max(1u, std::thread::hardware_concurrency());
    want = std::min<unsigned>(want, static_cast<unsigned>(n_chunks));
    if (want <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(want);
        for (unsigned t = 0; t < want; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_failure) {
        throw degenerate_update("trajectory " + std::to_string(first_failure->first) + ": " +
                                first_failure->second);
    }

    // Combine chunk moments in ascending chunk order.
    std::vector<double> mean(n_points, 0.0);
    std::vector<double> m2(n_points, 0.0);
    long count = 0;
    for (const detail::ChunkMoments& c : chunks) {
        if (c.count == 0) continue;
        if (count == 0) {
            mean = c.mean;
            m2 = c.m2;
            count = c.count;
            continue;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(c.count);
        const double w = nb / (na + nb);
        for (std::size_t k = 0; k < n_points; ++k) {
            const double delta = c.mean[k] - mean[k];
            mean[k] += delta * w;
            m2[k] += c.m2[k] + delta * delta * na * w;
        }
        count += c.count;
    }

    EnsembleTrace result;
    result.n_trajectories = n_traj;
    result.times.resize(n_points);
    result.mean_fidelity.resize(n_points);
    result.std_error.resize(n_points);
    const double n = static_cast<double>(n_traj);
    for (std::size_t k = 0; k < n_points; ++k) {
        result.times[k] = static_cast<double>(k) * spec.params().tau();
        result.mean_fidelity[k] = mean[k];
        if (n_traj > 1) {
            const double var = std::max(0.0, m2[k] / (n - 1.0));
            result.std_error[k] = std::sqrt(var / n);
        } else {
            result.std_error[k] = 0.0;
        }
    }
    return result;
}

// Time-average of the ensemble mean over [window_start, window_end]. The
// error is the average of the per-step standard errors (steps of one
// ensemble are strongly correlated, so no 1/sqrt(#steps) reduction is
// claimed).
inline WindowStats asymptotic_mean(const EnsembleTrace& trace, double window_start,
                                   double window_end) {
    if (!std::isfinite(window_start) || !std::isfinite(window_end) ||
        window_start > window_end) {
        throw invalid_window("asymptotic_mean: malformed window");
    }
    double acc = 0.0;
    double err = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (trace.times[k] < window_start || trace.times[k] > window_end) continue;
        acc += trace.mean_fidelity[k];
        err += trace.std_error[k];
        ++count;
    }
    if (count == 0) throw invalid_window("asymptotic_mean: window selects no samples");
    const double inv = 1.0 / static_cast<double>(count);
    return {acc * inv, err * inv};
}

} // namespace qest
