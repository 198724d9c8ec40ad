#pragma once

#include <cstddef>
#include <vector>

namespace qest {

// Fidelity time series of a single trajectory or deterministic curve.
// Invariants: equal lengths, strictly increasing times.
struct FidelityTrace {
    std::vector<double> times;
    std::vector<double> fidelities;

    std::size_t size() const { return times.size(); }
};

} // namespace qest
