#pragma once

#include <cstddef>
#include <vector>

namespace sbsa {

// Uniformly sampled real-valued time series. Sample i lives at t0 + i*dt.
// Amplitude units are whatever the source provides (mmHg for pressure data);
// dt and t0 are seconds.
struct Signal {
    std::vector<double> samples;
    double dt = 0.0;
    double t0 = 0.0;

    std::size_t size() const { return samples.size(); }
    double time_at(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double duration() const {
        return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1);
    }
};

// Validating constructor: length >= 3, dt > 0 and finite, all samples finite.
// Throws input_error naming the first offending sample.
Signal make_signal(std::vector<double> samples, double dt, double t0 = 0.0);

// Same checks on an existing instance.
void validate_signal(const Signal& s);

} // namespace sbsa
