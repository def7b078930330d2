#pragma once

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvmag/app/config.hpp"

namespace nvmag::app {

enum class Tolerance { relative, absolute, upper_bound, lower_bound };

inline std::string to_string(Tolerance t) {
  switch (t) {
    case Tolerance::relative: return "relative";
    case Tolerance::absolute: return "absolute";
    case Tolerance::upper_bound: return "upper_bound";
    case Tolerance::lower_bound: return "lower_bound";
  }
  return "unknown";
}

/// One checked number. `reference` and `tolerance` are interpreted by `kind`:
/// relative  |v - ref| <= tol·|ref|;  absolute  |v - ref| <= tol;
/// upper_bound  v <= ref;  lower_bound  v >= ref.
struct Metric {
  int criterion = 0;  // 0 = informational, not part of acceptance
  std::string name;
  double value = 0.0;
  std::string unit;
  double reference = 0.0;
  double tolerance = 0.0;
  Tolerance kind = Tolerance::relative;
  bool pass = false;
};

inline bool evaluate(double value, double reference, double tolerance, Tolerance kind) {
  if (!std::isfinite(value)) return false;
  switch (kind) {
    case Tolerance::relative: return std::abs(value - reference) <= tolerance * std::abs(reference);
    case Tolerance::absolute: return std::abs(value - reference) <= tolerance;
    case Tolerance::upper_bound: return value <= reference;
    case Tolerance::lower_bound: return value >= reference;
  }
  return false;
}

class RunReport {
 public:
  RunReport(std::string scenario, std::string input_hash)
      : scenario_(std::move(scenario)), hash_(std::move(input_hash)) {}

  const Metric& add(int criterion, std::string name, double value, std::string unit, double reference,
                    double tolerance, Tolerance kind) {
    if (!names_.insert(name).second) throw std::logic_error("RunReport: duplicate metric '" + name + "'");
    Metric m{criterion, std::move(name), value, std::move(unit), reference, tolerance, kind, false};
    m.pass = evaluate(m.value, m.reference, m.tolerance, m.kind);
    metrics_.push_back(std::move(m));
    return metrics_.back();
  }

  /// Informational value, always passing.
  void note(std::string name, double value, std::string unit) {
    if (!names_.insert(name).second) throw std::logic_error("RunReport: duplicate metric '" + name + "'");
    metrics_.push_back(Metric{0, std::move(name), value, std::move(unit), value, 0.0, Tolerance::absolute, true});
  }

  void set_wall_time(double seconds) { wall_time_ = seconds; }

  const std::vector<Metric>& metrics() const { return metrics_; }
  const std::string& scenario() const { return scenario_; }
  const std::string& input_hash() const { return hash_; }

  bool all_pass() const {
    for (const auto& m : metrics_)
      if (!m.pass) return false;
    return true;
  }

  std::vector<int> criteria() const {
    std::set<int> ids;
    for (const auto& m : metrics_)
      if (m.criterion > 0) ids.insert(m.criterion);
    return {ids.begin(), ids.end()};
  }

  bool criterion_pass(int id) const {
    bool any = false;
    for (const auto& m : metrics_) {
      if (m.criterion != id) continue;
      any = true;
      if (!m.pass) return false;
    }
    return any;
  }

  json to_json() const {
    json j;
    j["scenario"] = scenario_;
    j["input_hash"] = hash_;
    j["version"] = kVersion;
    j["all_pass"] = all_pass();
    j["wall_time_s"] = wall_time_;
    json ms = json::array();
    for (const auto& m : metrics_) {
      ms.push_back({{"criterion", m.criterion},
                    {"name", m.name},
                    {"value", m.value},
                    {"unit", m.unit},
                    {"reference", m.reference},
                    {"tolerance", m.tolerance},
                    {"tolerance_kind", to_string(m.kind)},
                    {"pass", m.pass}});
    }
    j["metrics"] = ms;
    return j;
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "scenario " << scenario_ << "  config " << hash_ << "  nvmag " << kVersion << '\n';
    for (const auto& m : metrics_) {
      os << (m.pass ? "  ok   " : "  FAIL ") << std::left << std::setw(44) << m.name << std::right
         << std::setprecision(6) << std::setw(14) << m.value << ' ' << m.unit;
      if (m.criterion > 0) {
        os << "  [" << describe(m) << ']';
      }
      os << '\n';
    }
    if (wall_time_ > 0.0) os << std::setprecision(3) << "wall time " << wall_time_ << " s\n";
    return os.str();
  }

  static std::string describe(const Metric& m) {
    std::ostringstream os;
    os << std::setprecision(6);
    switch (m.kind) {
      case Tolerance::relative: os << "ref " << m.reference << " ± " << m.tolerance * 100.0 << "%"; break;
      case Tolerance::absolute: os << "ref " << m.reference << " ± " << m.tolerance; break;
      case Tolerance::upper_bound: os << "<= " << m.reference; break;
      case Tolerance::lower_bound: os << ">= " << m.reference; break;
    }
    return os.str();
  }

 private:
  std::string scenario_;
  std::string hash_;
  std::vector<Metric> metrics_;
  std::set<std::string> names_;
  double wall_time_ = 0.0;
};

}  // namespace nvmag::app
