#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace voluma {

enum class Kind { LogNormal, Gaussian, Weibull, Exponential, PowerLaw };

inline constexpr Kind kAllKinds[] = {Kind::LogNormal, Kind::Gaussian, Kind::Weibull, Kind::Exponential,
                                     Kind::PowerLaw};

std::string_view kind_name(Kind kind);
std::optional<Kind> parse_kind(std::string_view name);

// ln X ~ N(mu, sigma^2)
struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
  friend bool operator==(const LogNormal&, const LogNormal&) = default;
};

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

// f(x) = (k/λ)(x/λ)^(k-1) exp(-(x/λ)^k), x ≥ 0
struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
  friend bool operator==(const Weibull&, const Weibull&) = default;
};

struct Exponential {
  double rate = 1.0;
  friend bool operator==(const Exponential&, const Exponential&) = default;
};

// Continuous power law: f(x) = ((α-1)/xmin)(x/xmin)^(-α), x ≥ xmin
struct PowerLaw {
  double alpha = 2.0;
  double xmin = 1.0;
  friend bool operator==(const PowerLaw&, const PowerLaw&) = default;
};

using Model = std::variant<LogNormal, Gaussian, Weibull, Exponential, PowerLaw>;

Kind kind_of(const Model& model);

/// DomainError when a parameter violates its positivity constraint.
void check_parameters(const Model& model);

double pdf(const Model& model, double x);
/// Natural log of the density; -inf outside the support.
double log_pdf(const Model& model, double x);
double cdf(const Model& model, double x);
/// Inverse CDF for 0 < p < 1; DomainError otherwise.
double quantile(const Model& model, double p);

/// Standard normal inverse CDF.
double normal_quantile(double p);

struct FitOptions {
  std::size_t min_samples = 8;
};

/// Maximum-likelihood fit for every kind except PowerLaw.
Model fit_mle(Kind kind, std::span<const double> samples, const FitOptions& options = {});

/// Exponent MLE with the lower cutoff held fixed; uses samples ≥ xmin only.
PowerLaw fit_powerlaw_alpha(std::span<const double> samples, double xmin);

struct PowerLawFit {
  PowerLaw model;
  double ks = 0.0;  // tail KS distance at the chosen cutoff
  std::size_t n_tail = 0;
};

/// Scans candidate cutoffs (unique sample values, thinned to at most 500
/// quantile-spaced ones) and keeps the one minimising the tail KS distance.
PowerLawFit fit_powerlaw(std::span<const double> samples, const FitOptions& options = {});

/// Same, for samples already sorted ascending.
PowerLawFit fit_powerlaw_sorted(std::span<const double> sorted, const FitOptions& options = {});

/// n deterministic draws for (model, seed).
std::vector<double> sample(const Model& model, std::size_t n, std::uint64_t seed);

}  // namespace voluma
