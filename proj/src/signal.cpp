#include "sbsa/signal.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "sbsa/errors.hpp"

namespace sbsa {

void validate_signal(const Signal& s) {
    if (s.samples.size() < 3)
        throw input_error("signal needs at least 3 samples, got " +
                          std::to_string(s.samples.size()));
    if (!(s.dt > 0.0) || !std::isfinite(s.dt))
        throw input_error("signal dt must be strictly positive and finite");
    if (!std::isfinite(s.t0))
        throw input_error("signal t0 must be finite");
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        if (!std::isfinite(s.samples[i]))
            throw input_error("non-finite sample at index " + std::to_string(i));
    }
}

Signal make_signal(std::vector<double> samples, double dt, double t0) {
    Signal s{std::move(samples), dt, t0};
    validate_signal(s);
    return s;
}

} // namespace sbsa
