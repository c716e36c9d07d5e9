/*
Copyright 2026 <Project Authors>

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "stencilio/bounds.hpp"
#include "stencilio/errors.hpp"
#include "stencilio/grid.hpp"
#include "stencilio/kinds.hpp"
#include "stencilio/l1.hpp"
#include "stencilio/layout.hpp"
#include "stencilio/machine.hpp"
#include "stencilio/oracles.hpp"
#include "stencilio/sweeps.hpp"

namespace stencilio {

inline constexpr std::int64_t kFullFidelityLimit = std::int64_t{1} << 20;

// Non-compulsory I/Os may undershoot the lower bound by this fraction before a row fails.
inline constexpr double kLowerBoundHeadroom = 0.25;

struct Tolerance {
  std::optional<double> ratio_min;
  std::optional<double> ratio_max;
};

struct ExperimentSpec {
  std::string name;
  LayoutKind kind = LayoutKind::BlockAlignedDiagonal2D;
  int n = 2;
  int s = 1;
  std::int64_t M = 0;
  std::int64_t B = 0;
  std::vector<std::int64_t> sides;
  std::optional<Fidelity> fidelity;  // unset: Full up to kFullFidelityLimit vertices
  Tolerance tolerance;
  SizeDerivation m_mode = SizeDerivation::CapacitySearch;
  bool simulate = true;
  bool check_lower_bound = true;
  std::optional<ErrorCode> expect_error;
  std::uint64_t seed = 1;

  Fidelity effective_fidelity() const {
    if (fidelity) return *fidelity;
    std::int64_t N = 1;
    for (auto k : sides)
      if (__builtin_mul_overflow(N, k, &N)) return Fidelity::CountOnly;
    return N <= kFullFidelityLimit ? Fidelity::Full : Fidelity::CountOnly;
  }
};

struct ExperimentConfig {
  std::vector<ExperimentSpec> experiments;
};

inline const char* to_string(Fidelity f) { return f == Fidelity::Full ? "full" : "count"; }

inline Fidelity parse_fidelity(const std::string& s) {
  if (s == "full" || s == "Full") return Fidelity::Full;
  if (s == "count" || s == "CountOnly") return Fidelity::CountOnly;
  fail(ErrorCode::InvalidArgument, "unknown fidelity '" + s + "'");
}

inline ErrorCode parse_error_code(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::BudgetExceeded); ++i)
    if (s == to_string(static_cast<ErrorCode>(i))) return static_cast<ErrorCode>(i);
  fail(ErrorCode::InvalidArgument, "unknown error code '" + s + "'");
}

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key, std::size_t row) {
  if (!j.contains(key)) fail(ErrorCode::InvalidArgument, "experiment " + std::to_string(row) + ": missing '" + key + "'");
  return j.at(key);
}

inline ExperimentSpec parse_experiment(const nlohmann::json& j, std::size_t row) {
  static const char* known[] = {"name", "kind", "n", "s", "M", "B", "sides", "fidelity", "tolerance",
                                "m_mode", "simulate", "check_lower_bound", "expect_error", "seed"};
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "experiment " + std::to_string(row) + " is not an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(ErrorCode::InvalidArgument, "experiment " + std::to_string(row) + ": unknown key '" + key + "'");
  }
  ExperimentSpec e;
  try {
    e.kind = parse_layout_kind(require_key(j, "kind", row).get<std::string>());
    e.M = require_key(j, "M", row).get<std::int64_t>();
    e.B = require_key(j, "B", row).get<std::int64_t>();
    e.sides = require_key(j, "sides", row).get<std::vector<std::int64_t>>();
    e.n = j.value("n", static_cast<int>(e.sides.size()));
    e.s = j.value("s", 1);
    e.name = j.value("name", std::string());
    if (j.contains("fidelity")) e.fidelity = parse_fidelity(j.at("fidelity").get<std::string>());
    if (j.contains("tolerance")) {
      const auto& t = j.at("tolerance");
      if (t.contains("ratio_min")) e.tolerance.ratio_min = t.at("ratio_min").get<double>();
      if (t.contains("ratio_max")) e.tolerance.ratio_max = t.at("ratio_max").get<double>();
    }
    if (j.contains("m_mode")) e.m_mode = parse_size_derivation(j.at("m_mode").get<std::string>());
    e.simulate = j.value("simulate", true);
    e.check_lower_bound = j.value("check_lower_bound", true);
    if (j.contains("expect_error")) e.expect_error = parse_error_code(j.at("expect_error").get<std::string>());
    e.seed = j.value("seed", std::uint64_t{1});
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::InvalidArgument, "experiment " + std::to_string(row) + ": " + ex.what());
  }
  if (static_cast<std::size_t>(e.n) != e.sides.size())
    fail(ErrorCode::InvalidArgument, "experiment " + std::to_string(row) + ": n differs from the number of sides");
  return e;
}

}  // namespace detail

// {"experiments": [{"kind": ..., "M": ..., "B": ..., "sides": [...], ...}, ...]}
inline ExperimentConfig parse_experiment_config(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + ex.what());
  }
  if (!j.is_object() || !j.contains("experiments") || !j.at("experiments").is_array())
    fail(ErrorCode::InvalidArgument, "config needs an 'experiments' array");
  ExperimentConfig cfg;
  std::size_t row = 0;
  for (const auto& e : j.at("experiments")) cfg.experiments.push_back(detail::parse_experiment(e, row++));
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open config '" + path + "'");
  return parse_experiment_config(in);
}

struct ExperimentRow {
  ExperimentSpec spec;
  std::optional<std::int64_t> m;
  std::optional<std::int64_t> input_blocks, output_blocks;
  std::optional<RunReport> report;
  std::optional<double> predicted, ceiling, lower_bound, ratio;
  std::optional<bool> replay_equal;
  std::optional<bool> oracle_equal;
  std::vector<std::string> failed;  // names of failed checks
  std::string checks;               // names of checks evaluated, ';'-separated
  std::string error;
  bool passed = false;

  const char* status() const {
    if (!error.empty() && !passed) return "error";
    return passed ? "pass" : "fail";
  }
};

namespace detail {

inline void add_check(ExperimentRow& r, const char* name, bool ok) {
  if (!r.checks.empty()) r.checks += ';';
  r.checks += name;
  if (!ok) r.failed.emplace_back(name);
}

inline void simulate_row(ExperimentRow& r, const SweepPlan& plan, const GridSpec& g, const MachineConfig& cfg,
                         const std::string& trace_path) {
  const ExperimentSpec& e = r.spec;
  const StencilSpec st(e.s);
  const Layout& L = *plan.layout;
  const Fidelity fid = e.effective_fidelity();
  Machine mach(g, st, cfg, L, fid);
  std::vector<std::int64_t> input;
  if (fid == Fidelity::Full) {
    std::mt19937_64 rng(e.seed);
    input.resize(static_cast<std::size_t>(g.vertex_count()));
    for (auto& v : input) v = static_cast<std::int64_t>(rng());
    mach.set_input(input);
  }
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) fail(ErrorCode::InvalidArgument, "cannot write trace '" + trace_path + "'");
    mach.set_trace(&trace);
  }
  r.report = run_sweep(L, mach);
  if (fid == Fidelity::Full) r.oracle_equal = mach.output() == naive_stencil(g, st, input);
  if (!trace_path.empty()) {
    trace.close();
    std::ifstream in(trace_path);
    Machine again(g, st, cfg, L, Fidelity::CountOnly);
    r.replay_equal = replay_trace(in, again).stats == r.report->stats;
  }
}

}  // namespace detail

// Runs one configuration. Errors are recorded in the row, never thrown.
inline ExperimentRow run_experiment_row(const ExperimentSpec& e, const std::string& trace_path = {}) {
  ExperimentRow r;
  r.spec = e;
  try {
    const GridSpec g(e.sides);
    const StencilSpec st(e.s);
    st.validate_for(g);
    require_dimension(e.kind, g.n());
    const MachineConfig cfg(e.M, e.B);
    double N = 1;
    for (auto k : e.sides) N *= static_cast<double>(k);
    r.predicted = upper_bound_leading(e.kind, g.n(), e.s, static_cast<double>(e.M), static_cast<double>(e.B)) * N;
    r.lower_bound = lower_bound_constant(g.n(), e.s, static_cast<double>(e.M)) * N / static_cast<double>(e.B);
    r.m = sweep_shape_size(e.kind, g.n(), e.s, e.M, e.B, e.m_mode).m;
    if (e.simulate) {
      const SweepPlan plan = make_sweep_plan(e.kind, g, st, cfg, e.m_mode);
      r.m = plan.size.m;
      r.input_blocks = plan.layout->input_blocks();
      r.output_blocks = plan.layout->output_blocks();
      r.ceiling = noncompulsory_ceiling(*plan.layout);
      detail::simulate_row(r, plan, g, cfg, trace_path);
      const RunReport& rep = *r.report;
      const IoStats& io = rep.stats;
      const double nc = static_cast<double>(io.noncompulsory());
      r.ratio = nc / *r.predicted;
      detail::add_check(r, "complete", rep.complete);
      detail::add_check(r, "peak", rep.peak_footprint <= e.M);
      detail::add_check(r, "compulsory", io.compulsory_reads == *r.input_blocks && io.compulsory_writes == *r.output_blocks);
      detail::add_check(r, "ceiling", nc <= *r.ceiling);
      if (e.check_lower_bound) detail::add_check(r, "lower_bound", nc >= *r.lower_bound * (1 - kLowerBoundHeadroom));
      if (e.tolerance.ratio_min) detail::add_check(r, "ratio_min", *r.ratio >= *e.tolerance.ratio_min);
      if (e.tolerance.ratio_max) detail::add_check(r, "ratio_max", *r.ratio <= *e.tolerance.ratio_max);
      if (r.oracle_equal) detail::add_check(r, "oracle", *r.oracle_equal);
      if (r.replay_equal) detail::add_check(r, "replay", *r.replay_equal);
    }
    detail::add_check(r, "expect_error", !e.expect_error);
    r.passed = r.failed.empty();
  } catch (const Error& ex) {
    r.error = ex.what();
    r.passed = e.expect_error && *e.expect_error == ex.code();
    if (e.expect_error) detail::add_check(r, "expect_error", r.passed);
  } catch (const std::exception& ex) {
    r.error = ex.what();
    r.passed = false;
  }
  return r;
}

// Rows run on up to `jobs` threads; the result order follows the config.
inline std::vector<ExperimentRow> run_experiments(const ExperimentConfig& cfg, int jobs = 1,
                                                  const std::string& trace_dir = {}) {
  if (jobs < 1) fail(ErrorCode::InvalidArgument, "jobs must be >= 1");
  if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir);
  const std::size_t count = cfg.experiments.size();
  std::vector<ExperimentRow> rows(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      std::string trace;
      if (!trace_dir.empty()) trace = (std::filesystem::path(trace_dir) / ("row" + std::to_string(i) + ".trace")).string();
      rows[i] = run_experiment_row(cfg.experiments[i], trace);
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline constexpr const char* kReportColumns[] = {
    "row", "name", "kind", "n", "s", "M", "B", "sides", "m", "m_mode", "fidelity", "input_blocks", "output_blocks",
    "compulsory_reads", "noncompulsory_reads", "compulsory_writes", "noncompulsory_writes", "evaluated", "complete",
    "peak_footprint", "predicted", "ceiling", "lower_bound", "ratio", "checks", "failed", "status", "error"};

namespace detail {

inline std::string csv_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_text(const std::string& v) {
  if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

template <class T>
std::string csv_opt(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>)
    return csv_real(*v);
  else
    return std::to_string(*v);
}

}  // namespace detail

inline void write_report_csv(const std::vector<ExperimentRow>& rows, std::ostream& os) {
  using namespace detail;
  bool first = true;
  for (const char* c : kReportColumns) {
    os << (first ? "" : ",") << c;
    first = false;
  }
  os << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ExperimentRow& r = rows[i];
    const ExperimentSpec& e = r.spec;
    std::string sides;
    for (std::size_t d = 0; d < e.sides.size(); ++d) sides += (d ? "x" : "") + std::to_string(e.sides[d]);
    std::string failed;
    for (const auto& f : r.failed) failed += (failed.empty() ? "" : ";") + f;
    std::vector<std::string> f = {std::to_string(i), csv_text(e.name), std::string(to_string(e.kind)),
                                  std::to_string(e.n), std::to_string(e.s), std::to_string(e.M), std::to_string(e.B),
                                  sides, csv_opt(r.m), to_string(e.m_mode),
                                  e.simulate ? to_string(e.effective_fidelity()) : "none", csv_opt(r.input_blocks),
                                  csv_opt(r.output_blocks)};
    if (r.report) {
      const IoStats& io = r.report->stats;
      for (auto v : {io.compulsory_reads, io.noncompulsory_reads, io.compulsory_writes, io.noncompulsory_writes,
                     io.evaluated_vertices})
        f.push_back(std::to_string(v));
      f.push_back(r.report->complete ? "1" : "0");
      f.push_back(std::to_string(r.report->peak_footprint));
    } else {
      f.insert(f.end(), 7, std::string());
    }
    for (const auto& v : {r.predicted, r.ceiling, r.lower_bound, r.ratio}) f.push_back(csv_opt(v));
    f.push_back(r.checks);
    f.push_back(failed);
    f.push_back(r.status());
    f.push_back(csv_text(r.error));
    for (std::size_t c = 0; c < f.size(); ++c) os << (c ? "," : "") << f[c];
    os << '\n';
  }
}

inline bool all_passed(const std::vector<ExperimentRow>& rows) {
  for (const auto& r : rows)
    if (!r.passed) return false;
  return true;
}

// Small Full-fidelity configuration of the kind with several working bands.
inline ExperimentSpec random_oracle_spec(LayoutKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  ExperimentSpec e;
  e.kind = kind;
  e.seed = seed;
  e.s = static_cast<int>(pick(1, 2));
  e.B = std::int64_t{1} << pick(1, 3);
  e.fidelity = Fidelity::Full;
  e.check_lower_bound = false;
  switch (kind) {
    case LayoutKind::Row2D:
    case LayoutKind::BlockAlignedColumn2D:
    case LayoutKind::BlockAlignedDiagonal2D: e.n = 2; break;
    case LayoutKind::BlockAlignedColumnND: e.n = static_cast<int>(pick(2, 4)); break;
    default: e.n = 3;
  }
  const std::int64_t m = 4 * e.s + 1 + pick(0, e.n == 2 ? 10 : 5);
  const std::int64_t hi = e.n == 2 ? 90 : e.n == 3 ? 36 : 12;
  for (int i = 0; i < e.n; ++i) e.sides.push_back(pick(2 * e.s + 2, hi));
  e.M = footprint_blocks(kind, e.n, e.s, m, e.B) * e.B + pick(0, e.B - 1);
  e.name = "oracle-" + std::string(to_string(kind)) + "-" + std::to_string(seed);
  return e;
}

struct OracleCheckSummary {
  int passed = 0;
  int failed = 0;
  bool ok() const { return failed == 0; }
};

// Combinatorics, isoperimetry and per-kind sweep oracles. One line per check on `log`.
inline OracleCheckSummary run_oracle_checks(std::ostream& log, double budget = kDefaultEnumerationBudget,
                                            int configs_per_kind = 3) {
  OracleCheckSummary sum;
  auto report = [&](bool ok, const std::string& what) {
    (ok ? sum.passed : sum.failed) += 1;
    log << (ok ? "ok   " : "FAIL ") << what << '\n';
  };
  for (int n = 1; n <= 4; ++n) {
    bool ok = true;
    for (const BallWeights& w : brute_ball_weights(n, 8)) {
      ok = ok && w.ball == ball_weight(n, w.r) && w.boundary == boundary_weight(n, w.r) &&
           w.core == (w.r == 0 ? 0 : ball_weight(n, w.r - 1));
      if (w.r > 0) ok = ok && ball_weight(n, w.r) - ball_weight(n, w.r - 1) == boundary_weight(n, w.r);
    }
    report(ok, "ball weights n=" + std::to_string(n) + " r<=8");
  }
  for (auto [k, cap] : {std::pair<std::int64_t, int>{4, 8}, {6, 5}}) {
    try {
      bool ok = true;
      for (const auto& v : exhaustive_isoperimetry(k, 2, cap, 1, budget)) ok = ok && v.closure_ok && v.core_ok;
      report(ok, "isoperimetry Z_" + std::to_string(k) + "^2 v<=" + std::to_string(cap));
    } catch (const Error& ex) {
      report(false, "isoperimetry Z_" + std::to_string(k) + "^2: " + ex.what());
    }
  }
  for (LayoutKind kind : kAllLayoutKinds)
    for (int i = 0; i < configs_per_kind; ++i) {
      const ExperimentSpec e = random_oracle_spec(kind, 1000 * static_cast<std::uint64_t>(kind) + i + 1);
      const ExperimentRow r = run_experiment_row(e);
      std::string sides;
      for (std::size_t d = 0; d < e.sides.size(); ++d) sides += (d ? "x" : "") + std::to_string(e.sides[d]);
      std::string what = std::string(to_string(kind)) + " s=" + std::to_string(e.s) + " M=" + std::to_string(e.M) +
                         " B=" + std::to_string(e.B) + " " + sides;
      for (const auto& f : r.failed) what += " failed:" + f;
      if (!r.error.empty()) what += " error:" + r.error;
      report(r.passed && r.oracle_equal.value_or(false), what);
    }
  return sum;
}

// Leading-term constants for the 1-star stencil, in units of prod(k) / (B * M^(1/(n-1))).
inline std::string report_tables() {
  using namespace detail;
  std::ostringstream os;
  auto scaled = [](double per_point, int n, double M, double B) { return per_point * B * std::pow(M, 1.0 / (n - 1)); };
  const double M = 4096, B = 16;  // the coefficients below do not depend on these
  os << "Lower bounds, coefficient of prod(k)/(B*M^(1/(n-1)))\n";
  os << "n,lower_bound,frumkin_wijngaart,leopold\n";
  for (int n = 2; n <= 5; ++n) {
    os << n << ',' << csv_real(scaled(lower_bound_constant(n, 1, M) / B, n, M, B)) << ','
       << csv_real(scaled(reference::frumkin_wijngaart_lower(n, M, B), n, M, B)) << ',';
    if (n == 2) os << csv_real(scaled(reference::leopold_lower_2d(M, B), n, M, B));
    if (n == 3) os << csv_real(scaled(reference::leopold_lower_3d(M, B), n, M, B));
    os << '\n';
  }
  os << "\nUpper bounds by layout, coefficient of prod(k)/(B*M^(1/(n-1)))\n";
  os << "n,layout,upper_bound,over_lower_bound,note\n";
  for (int n = 2; n <= 5; ++n)
    for (LayoutKind k : kAllLayoutKinds) {
      if (!kind_supports_dimension(k, n)) continue;
      const double up = scaled(upper_bound_leading(k, n, 1, M, B), n, M, B);
      const double lo = scaled(lower_bound_constant(n, 1, M) / B, n, M, B);
      os << n << ',' << to_string(k) << ',' << csv_real(up) << ',' << csv_real(up / lo) << ',';
      if (detail::row_kind(k)) os << "depends on B; shown at B=" << B;
      os << '\n';
    }
  os << "\nGap of the n-D column sweep over the lower bound\n";
  os << "n,gap\n";
  for (int n = 2; n <= 5; ++n) os << n << ',' << csv_real(gap_ratio(n)) << '\n';
  return os.str();
}

}  // namespace stencilio
