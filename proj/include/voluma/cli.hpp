#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "voluma/distributions.hpp"

namespace voluma::cli {

/// Exit codes: 0 success, 1 error, 2 a trace was inconclusive or anomalous.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitSignal = 2;

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "5ms", "0.5s", "100us", "1min"; a bare number is seconds.
std::optional<double> parse_duration(std::string_view text);

/// Timescale as a file-name friendly millisecond label, e.g. "100ms".
std::string duration_label(double seconds);

/// "lognormal:mu=2,sigma=0.5", "weibull:k=1.5,lambda=2", "gaussian:mean=10,sd=2",
/// "exponential:rate=0.5", "powerlaw:alpha=2.5,xmin=1".
Model parse_model_spec(std::string_view text);

}  // namespace voluma::cli
