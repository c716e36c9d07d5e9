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
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stencilio/bounds.hpp"
#include "stencilio/experiment.hpp"
#include "stencilio/l1.hpp"
#include "stencilio/oracles.hpp"
#include "stencilio/sweeps.hpp"

#ifndef STENCILIO_SOURCE_DIR
#define STENCILIO_SOURCE_DIR "."
#endif

using namespace stencilio;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Verdict {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

// Compulsory counters of every completed run, checked together by criterion 8.
struct CompulsoryLedger {
  int runs = 0;
  std::vector<std::string> bad;
  void add(const std::string& name, const RunReport& r, std::int64_t input_blocks, std::int64_t output_blocks) {
    if (!r.complete) return;
    ++runs;
    if (r.stats.compulsory_reads != input_blocks || r.stats.compulsory_writes != output_blocks) bad.push_back(name);
  }
};

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

Verdict criterion1() {
  Verdict v;
  double worst = 0;
  const double Ms[] = {64, 4096, 6144, 1e6}, Bs[] = {1, 8, 16};
  for (double M : Ms)
    for (double B : Bs)
      for (int n = 2; n <= 5; ++n) {
        const double root = std::pow(M, 1.0 / (n - 1)), fact = std::tgamma(n + 1.0);
        const double lb_general = 4 * std::pow(2.0, 1.0 / (n - 1)) * (n - 1) / std::pow(fact, 1.0 / (n - 1)) / (B * root);
        const double ub_general = 4 * std::pow(2.0, 1.0 / (n - 1)) * (n - 1) / (B * root);
        std::vector<std::pair<double, double>> pairs = {
            {lower_bound_constant(n, 1, M) / B, lb_general},
            {upper_bound_leading(LayoutKind::BlockAlignedColumnND, n, 1, M, B), ub_general}};
        if (n == 2) {
          pairs.push_back({lower_bound_constant(2, 1, M) / B, 4 / (B * M)});
          pairs.push_back({upper_bound_leading(LayoutKind::BlockAlignedDiagonal2D, 2, 1, M, B), 4 / (B * M)});
        }
        if (n == 3) {
          pairs.push_back({lower_bound_constant(3, 1, M) / B, 8 / std::sqrt(3.0) / (B * std::sqrt(M))});
          pairs.push_back({upper_bound_leading(LayoutKind::HexagonalAlignedDiagonal3D, 3, 1, M, B),
                           8 * std::sqrt(2.0) / std::sqrt(3.0) / (B * std::sqrt(M))});
        }
        for (auto [got, want] : pairs) worst = std::max(worst, rel_err(got, want));
      }
  v.require(worst <= 1e-12, "relative error " + fmt(worst));
  v.note("max relative error " + fmt(worst));
  return v;
}

struct ScaleRun {
  RunReport report;
  double seconds = 0;
  std::int64_t m = 0;
  double ceiling = 0;
  std::int64_t input_blocks = 0, output_blocks = 0;
};

ScaleRun scale_run(LayoutKind kind, std::vector<std::int64_t> sides, int s, std::int64_t M, std::int64_t B) {
  const auto t0 = Clock::now();
  const GridSpec g(std::move(sides));
  const StencilSpec st(s);
  const MachineConfig cfg(M, B);
  const SweepPlan plan = make_sweep_plan(kind, g, st, cfg);
  Machine mach(g, st, cfg, *plan.layout, Fidelity::CountOnly);
  ScaleRun r;
  r.report = run_sweep(plan, mach);
  r.seconds = seconds_since(t0);
  r.m = plan.size.m;
  r.ceiling = noncompulsory_ceiling(*plan.layout);
  r.input_blocks = plan.layout->input_blocks();
  r.output_blocks = plan.layout->output_blocks();
  return r;
}

struct LowerBoundRow {
  std::string name;
  int n = 0, s = 1;
  std::int64_t M = 0, B = 0;
  double N = 0;
  std::int64_t noncompulsory = 0;
};

Verdict criterion2(CompulsoryLedger& ledger, std::vector<LowerBoundRow>& rows) {
  Verdict v;
  const std::int64_t k = 32768, M = 4096, B = 16;
  const int s = 1;
  const ScaleRun r = scale_run(LayoutKind::BlockAlignedDiagonal2D, {k, k}, s, M, B);
  ledger.add("diagonal 32768^2", r.report, r.input_blocks, r.output_blocks);
  const double nc = static_cast<double>(r.report.stats.noncompulsory());
  const double kk = static_cast<double>(k), mm = static_cast<double>(r.m);
  const double normalized = nc / (kk * kk / (static_cast<double>(B) * M));
  const double ceiling = std::ceil((std::ceil(kk / (2 * mm - 2 * s)) + 1) * 2 * s * kk / B) * 2;
  v.require(r.report.complete, "incomplete sweep");
  v.require(normalized >= 2.0 && normalized <= 4.4, "normalized " + fmt(normalized) + " outside [2.0, 4.4]");
  v.require(nc <= ceiling, "measured above ceiling");
  v.require(r.seconds < 120, "runtime " + fmt(r.seconds) + " s");
  v.note("m=" + std::to_string(r.m) + " measured=" + fmt(nc) + " normalized=" + fmt(normalized) + " ceiling=" +
         fmt(ceiling) + " time=" + fmt(r.seconds) + "s");
  rows.push_back({"diagonal 32768^2", 2, s, M, B, kk * kk, r.report.stats.noncompulsory()});
  return v;
}

Verdict criterion3(CompulsoryLedger& ledger, std::vector<LowerBoundRow>& rows) {
  Verdict v;
  const std::int64_t M = 6144, B = 8;
  const int s = 1;
  std::int64_t k = 1024;
  ScaleRun r = scale_run(LayoutKind::HexagonalAlignedDiagonal3D, {k, k, k}, s, M, B);
  if (r.seconds > 600) {
    v.note("1024^3 took " + fmt(r.seconds) + " s, judged at 512^3");
    k = 512;
    r = scale_run(LayoutKind::HexagonalAlignedDiagonal3D, {k, k, k}, s, M, B);
  }
  ledger.add("hexagonal " + std::to_string(k) + "^3", r.report, r.input_blocks, r.output_blocks);
  const double kk = static_cast<double>(k), N = kk * kk * kk;
  const double nc = static_cast<double>(r.report.stats.noncompulsory());
  const double leading = 8 * std::sqrt(2.0) / (std::sqrt(3.0) * std::sqrt(static_cast<double>(M)));
  const double ratio = nc / (N / B) / leading;
  v.require(r.report.complete, "incomplete sweep");
  v.require(ratio >= 0.5 && ratio <= 1.15, "ratio " + fmt(ratio) + " outside [0.5, 1.15]");
  v.require(nc <= r.ceiling, "measured above ceiling");
  v.note("grid " + std::to_string(k) + "^3 m=" + std::to_string(r.m) + " measured=" + fmt(nc) + " ratio=" + fmt(ratio) +
         " ceiling=" + fmt(r.ceiling) + " time=" + fmt(r.seconds) + "s");
  rows.push_back({"hexagonal " + std::to_string(k) + "^3", 3, s, M, B, N, r.report.stats.noncompulsory()});
  return v;
}

Verdict criterion4(CompulsoryLedger& ledger, std::vector<LowerBoundRow> rows) {
  Verdict v;
  for (const char* file : {"configs/smoke.json", "configs/trace.json"}) {
    const auto cfg = load_experiment_config(std::string(STENCILIO_SOURCE_DIR) + "/" + file);
    for (const ExperimentRow& r : run_experiments(cfg)) {
      if (!r.report) continue;
      ledger.add(r.spec.name, *r.report, *r.input_blocks, *r.output_blocks);
      double N = 1;
      for (auto k : r.spec.sides) N *= static_cast<double>(k);
      rows.push_back({std::string(file) + ":" + r.spec.name, r.spec.n, r.spec.s, r.spec.M, r.spec.B, N,
                      r.report->stats.noncompulsory()});
    }
  }
  double worst = 1e300;
  for (const auto& row : rows) {
    const double floor = lower_bound_constant(row.n, row.s, static_cast<double>(row.M)) * row.N /
                         static_cast<double>(row.B) * 0.75;
    const double q = static_cast<double>(row.noncompulsory) / floor;
    worst = std::min(worst, q);
    v.require(q >= 1, row.name + " measured " + std::to_string(row.noncompulsory) + " < " + fmt(floor));
  }
  v.note(std::to_string(rows.size()) + " rows, min measured/floor " + fmt(worst));
  return v;
}

Verdict criterion5_9(CompulsoryLedger& ledger, Verdict& replay) {
  Verdict v;
  int configs = 0, replays = 0;
  for (LayoutKind kind : kAllLayoutKinds)
    for (std::uint64_t i = 0; i < 3; ++i) {
      const ExperimentSpec e = random_oracle_spec(kind, 7919 * (static_cast<std::uint64_t>(kind) + 1) + i);
      const std::string name = std::string(to_string(kind)) + "#" + std::to_string(i);
      try {
        const GridSpec g(e.sides);
        const StencilSpec st(e.s);
        const MachineConfig cfg(e.M, e.B);
        v.require(g.vertex_count() <= 1000000 && (e.s == 1 || e.s == 2), name + " outside the config range");
        const SweepPlan plan = make_sweep_plan(kind, g, st, cfg);
        std::mt19937_64 rng(e.seed);
        std::vector<std::int64_t> input(static_cast<std::size_t>(g.vertex_count()));
        for (auto& x : input) x = static_cast<std::int64_t>(rng() >> 1) - (std::int64_t{1} << 61);
        Machine mach(g, st, cfg, *plan.layout, Fidelity::Full);
        mach.set_input(input);
        std::stringstream trace;
        mach.set_trace(&trace);
        const RunReport r = run_sweep(plan, mach);
        ++configs;
        v.require(mach.output() == naive_stencil(g, st, input), name + " output differs");
        v.require(r.complete, name + " incomplete");
        v.require(r.peak_footprint <= e.M, name + " peak above M");
        ledger.add(name, r, plan.layout->input_blocks(), plan.layout->output_blocks());
        Machine again(g, st, cfg, *plan.layout, Fidelity::CountOnly);
        const RunReport back = replay_trace(trace, again);
        ++replays;
        replay.require(back.stats == r.stats && back.complete == r.complete, name + " replay differs");
      } catch (const std::exception& ex) {
        v.require(false, name + " " + ex.what());
      }
    }
  v.note(std::to_string(configs) + " configurations");
  replay.note(std::to_string(replays) + " traces replayed");
  return v;
}

Verdict criterion6() {
  Verdict v;
  int checked = 0;
  for (int n = 1; n <= 4; ++n)
    for (const BallWeights& w : brute_ball_weights(n, 8)) {
      ++checked;
      const std::string at = "n=" + std::to_string(n) + " r=" + std::to_string(w.r);
      v.require(w.ball == ball_weight(n, w.r), "ball " + at);
      v.require(w.boundary == boundary_weight(n, w.r), "boundary " + at);
      v.require(w.core == (w.r == 0 ? 0 : ball_weight(n, w.r - 1)), "core " + at);
      if (w.r > 0) v.require(ball_weight(n, w.r) - ball_weight(n, w.r - 1) == boundary_weight(n, w.r), "identity " + at);
    }
  v.note(std::to_string(checked) + " (n, r) pairs");
  return v;
}

Verdict criterion7() {
  Verdict v;
  const auto t0 = Clock::now();
  std::int64_t subsets = 0;
  for (auto [k, cap] : {std::pair<std::int64_t, int>{4, 8}, {6, 5}})
    for (const IsoperimetryVerdict& r : exhaustive_isoperimetry(k, 2, cap)) {
      subsets += r.subsets;
      const std::string at = "Z_" + std::to_string(k) + "^2 v=" + std::to_string(r.weight);
      v.require(r.closure_ok, "closure " + at);
      v.require(r.core_ok, "core " + at);
    }
  const double t = seconds_since(t0);
  v.require(t < 300, "runtime " + fmt(t) + " s");
  v.note(std::to_string(subsets) + " subsets in " + fmt(t) + "s");
  return v;
}

}  // namespace

int main() {
  std::vector<std::pair<int, Verdict>> out;
  CompulsoryLedger ledger;
  std::vector<LowerBoundRow> rows;
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& ex) {
      Verdict v;
      v.require(false, ex.what());
      return v;
    }
  };
  auto print = [](int id, const Verdict& v) {
    std::cout << "criterion " << id << ": " << (v.ok ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
  };
  Verdict replay;
  const std::pair<int, std::function<Verdict()>> steps[] = {
      {1, criterion1},
      {6, criterion6},
      {7, criterion7},
      {5, [&] { return criterion5_9(ledger, replay); }},
      {2, [&] { return criterion2(ledger, rows); }},
      {3, [&] { return criterion3(ledger, rows); }},
      {4, [&] { return criterion4(ledger, rows); }},
  };
  std::vector<Verdict> verdicts(10);
  for (const auto& [id, f] : steps) {
    verdicts[static_cast<std::size_t>(id)] = guarded(f);
    print(id, verdicts[static_cast<std::size_t>(id)]);
  }
  Verdict& c8 = verdicts[8];
  c8.require(ledger.runs > 0, "no completed runs");
  for (const auto& name : ledger.bad) c8.require(false, name);
  c8.note(std::to_string(ledger.runs) + " completed runs");
  print(8, c8);
  verdicts[9] = replay;
  print(9, replay);

  bool all = true;
  std::cout << "\nsummary\n";
  for (int id = 1; id <= 9; ++id) {
    all = all && verdicts[static_cast<std::size_t>(id)].ok;
    std::cout << "criterion " << id << ": " << (verdicts[static_cast<std::size_t>(id)].ok ? "PASS" : "FAIL") << '\n';
  }
  return all ? 0 : 1;
}
