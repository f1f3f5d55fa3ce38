#include "kiefer/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "kiefer/error.hpp"
#include "kiefer/rng.hpp"

namespace kiefer {

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::Lsv:
      return "lsv";
    case ProcessKind::Linear:
      return "linear";
    case ProcessKind::Iid:
      return "iid";
  }
  return "unknown";
}

ProcessKind parse_process_kind(std::string_view name) {
  if (name == "lsv") return ProcessKind::Lsv;
  if (name == "linear") return ProcessKind::Linear;
  if (name == "iid") return ProcessKind::Iid;
  throw DomainError("unknown process kind '" + std::string(name) + "'");
}

ProcessSpec ProcessSpec::lsv(double gamma, std::uint64_t seed, std::size_t burn_in) {
  ProcessSpec spec;
  spec.kind = ProcessKind::Lsv;
  spec.gamma = gamma;
  spec.burn_in = burn_in;
  spec.seed = seed;
  spec.validate();
  return spec;
}

ProcessSpec ProcessSpec::linear(double rho, std::uint64_t seed, std::size_t burn_in) {
  ProcessSpec spec;
  spec.kind = ProcessKind::Linear;
  spec.rho = rho;
  spec.burn_in = burn_in;
  spec.seed = seed;
  spec.validate();
  return spec;
}

ProcessSpec ProcessSpec::iid(std::uint64_t seed) {
  ProcessSpec spec;
  spec.kind = ProcessKind::Iid;
  spec.burn_in = 0;
  spec.seed = seed;
  return spec;
}

void ProcessSpec::validate() const {
  if (kind == ProcessKind::Lsv && !(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("LSV gamma must lie in (0,1)");
  }
  if (kind == ProcessKind::Linear && !(rho > 0.0 && rho < 1.0)) {
    throw DomainError("linear-process rho must lie in (0,1)");
  }
}

std::size_t ProcessSpec::truncation() const {
  if (coefficient_count > 0) return coefficient_count;
  // smallest K with rho^K < 2^-52
  const double k = 52.0 * std::log(2.0) / -std::log(rho);
  return static_cast<std::size_t>(std::floor(k)) + 1;
}

ProcessSpec ProcessSpec::reseeded(std::uint64_t new_seed) const {
  ProcessSpec copy = *this;
  copy.seed = new_seed;
  return copy;
}

Trajectory::Trajectory(std::vector<double> values, ProcessSpec spec)
    : values_(std::move(values)), spec_(spec) {
  if (values_.empty()) throw RangeError("trajectory must be nonempty");
}

Trajectory Trajectory::reversed() const {
  std::vector<double> rev(values_.rbegin(), values_.rend());
  return Trajectory(std::move(rev), spec_);
}

double lsv_apply(double x, double gamma) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("lsv_apply: x outside [0,1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("lsv_apply: gamma outside (0,1)");
  if (x <= 0.5) return x * (1.0 + std::pow(2.0 * x, gamma));
  return 2.0 * x - 1.0;
}

namespace {

inline double lsv_step(double x, double gamma) {
  return x <= 0.5 ? x * (1.0 + std::pow(2.0 * x, gamma)) : 2.0 * x - 1.0;
}

std::vector<double> lsv_orbit(const ProcessSpec& spec, std::size_t n, Rng& rng) {
  double x = rng.uniform_open();
  for (std::size_t i = 0; i < spec.burn_in; ++i) x = lsv_step(x, spec.gamma);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    x = lsv_step(x, spec.gamma);
    out[i] = x;
  }
  return out;
}

// The recursion x_i = rho x_{i-1} + eps_i started from 0 and run for K
// warm-up steps reproduces the K-term filter up to rho^K < 2^-52.
std::vector<double> linear_series(const ProcessSpec& spec, std::size_t n, Rng& rng) {
  const std::size_t warm = spec.truncation() + spec.burn_in;
  double x = 0.0;
  for (std::size_t i = 0; i < warm; ++i) x = spec.rho * x + (rng.uniform() - 0.5);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    x = spec.rho * x + (rng.uniform() - 0.5);
    out[i] = x;
  }
  return out;
}

}  // namespace

Trajectory generate_trajectory(const ProcessSpec& spec, std::size_t n) {
  spec.validate();
  if (n == 0) throw RangeError("generate_trajectory: n must be positive");
  Rng rng(spec.seed);
  switch (spec.kind) {
    case ProcessKind::Lsv:
      return Trajectory(lsv_orbit(spec, n, rng), spec);
    case ProcessKind::Linear:
      return Trajectory(linear_series(spec, n, rng), spec);
    case ProcessKind::Iid: {
      std::vector<double> out(n);
      for (auto& v : out) v = rng.uniform();
      return Trajectory(std::move(out), spec);
    }
  }
  throw DomainError("unknown process kind");
}

}  // namespace kiefer
