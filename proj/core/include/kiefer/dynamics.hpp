#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kiefer {

enum class ProcessKind { Lsv, Linear, Iid };

std::string_view to_string(ProcessKind kind);
/// Accepts "lsv", "linear", "iid"; throws DomainError otherwise.
ProcessKind parse_process_kind(std::string_view name);

/// Description of one stationary process together with its seed.
///
/// - Lsv: orbit of the Liverani-Saussol-Vaienti map with parameter gamma.
/// - Linear: X_i = sum_k rho^k eps_{i-k}, eps i.i.d. uniform(-1/2, 1/2).
/// - Iid: uniform(0, 1) draws.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::Iid;
  double gamma = 0.3;
  double rho = 0.5;
  /// Number of linear-process coefficients kept; 0 selects the smallest K
  /// with rho^K < 2^-52.
  std::size_t coefficient_count = 0;
  std::size_t burn_in = 10'000;
  std::uint64_t seed = 0;

  static ProcessSpec lsv(double gamma, std::uint64_t seed, std::size_t burn_in = 10'000);
  static ProcessSpec linear(double rho, std::uint64_t seed, std::size_t burn_in = 10'000);
  static ProcessSpec iid(std::uint64_t seed);

  /// Throws DomainError if a parameter used by `kind` is out of range.
  void validate() const;
  /// Effective truncation K of the linear filter.
  std::size_t truncation() const;
  /// Orbits of a map are time-reversed copies of the associated Markov chain.
  bool is_orbit() const noexcept { return kind == ProcessKind::Lsv; }
  /// Same process with another seed.
  ProcessSpec reseeded(std::uint64_t new_seed) const;

  bool operator==(const ProcessSpec&) const = default;
};

/// A finite realization of a process, burn-in excluded.
class Trajectory {
 public:
  Trajectory(std::vector<double> values, ProcessSpec spec);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const ProcessSpec& spec() const noexcept { return spec_; }

  /// The same values in reverse order, same spec.
  Trajectory reversed() const;

 private:
  std::vector<double> values_;
  ProcessSpec spec_;
};

/// One step of the LSV map:
///   T(x) = x (1 + (2x)^gamma)  on [0, 1/2],   T(x) = 2x - 1  on (1/2, 1].
/// Written with (2x)^gamma rather than 2^gamma x^gamma so that T(1/2) = 1
/// holds exactly in floating point.
double lsv_apply(double x, double gamma);

/// Deterministic in (spec, n). LSV orbits start from a uniform point and drop
/// `burn_in` iterates. Near the neutral fixed point the escape
/// x -> x(1 + (2x)^gamma) stays in normal double range for any start
/// >= 2^-53, so no special handling is needed there.
Trajectory generate_trajectory(const ProcessSpec& spec, std::size_t n);

}  // namespace kiefer
