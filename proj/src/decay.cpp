// SPDX-License-Identifier: Apache-2.0
#include "occ/decay.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace occ {

RecallCurve RecallCurve::from_points(std::vector<std::pair<double, double>> pts) {
  check(!pts.empty(), "recall curve: no points");
  std::sort(pts.begin(), pts.end());
  for (size_t i = 0; i < pts.size(); ++i) {
    check(pts[i].first > 0, "recall curve: ratios must be positive");
    check(pts[i].second >= 0 && pts[i].second <= 1, "recall curve: precision out of [0,1]");
    if (i > 0) check(pts[i].first > pts[i - 1].first, "recall curve: duplicate ratio");
  }
  RecallCurve c;
  c.pts = std::move(pts);
  return c;
}

RecallCurve RecallCurve::from_summary_csv(const std::string& path) {
  std::ifstream f(path);
  check(f.is_open(), "recall curve: cannot open " + path);
  std::string line;
  check(static_cast<bool>(std::getline(f, line)), "recall curve: empty file");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  auto idx_of = [&](const std::string& name) {
    for (size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return static_cast<int>(i);
    fail("recall curve: column " + name + " missing in " + path);
  };
  int ratio_i = idx_of("ratio"), prec_i = idx_of("precision_mean");
  std::vector<std::pair<double, double>> pts;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    check(static_cast<int>(cells.size()) > std::max(ratio_i, prec_i),
          "recall curve: short row in " + path);
    pts.push_back({std::stod(cells[static_cast<size_t>(ratio_i)]),
                   std::stod(cells[static_cast<size_t>(prec_i)])});
  }
  return from_points(std::move(pts));
}

double RecallCurve::at(double ratio) const {
  check(!pts.empty(), "recall curve: empty");
  if (ratio <= pts.front().first) return pts.front().second;
  if (ratio >= pts.back().first) return pts.back().second;
  for (size_t i = 1; i < pts.size(); ++i) {
    if (ratio <= pts[i].first) {
      auto [x0, y0] = pts[i - 1];
      auto [x1, y1] = pts[i];
      double t = (ratio - x0) / (x1 - x0);
      return y0 + t * (y1 - y0);
    }
  }
  return pts.back().second;
}

int64_t stage_vision_tokens(const DecayStage& s) {
  check(!is_dynamic(s.mode), "decay: stage modes must be native");
  check(s.factor >= 1, "decay: downsample factor must be >= 1");
  int side = native_side(s.mode);
  check(side % (16 * s.factor) == 0, "decay: factor does not divide the mode's page grid");
  int64_t budget = tokens_for_mode(s.mode, 0);
  int64_t f2 = static_cast<int64_t>(s.factor) * s.factor;
  check(budget % f2 == 0, "decay: factor^2 does not divide the mode budget");
  return budget / f2;
}

void DecayPolicy::validate() const {
  check(keep_text_rounds >= 0, "decay: keep_text_rounds must be non-negative");
  check(!stages.empty(), "decay: stage table is empty");
  check(stages.front().age_min <= keep_text_rounds,
        "decay: first stage must start no later than keep_text_rounds");
  for (size_t i = 0; i < stages.size(); ++i) {
    check(stages[i].age_min >= 0, "decay: negative stage age");
    (void)stage_vision_tokens(stages[i]);  // validates mode/factor
    if (i > 0) {
      check(stages[i].age_min > stages[i - 1].age_min, "decay: stage ages must increase");
      check(stages[i].factor >= stages[i - 1].factor,
            "decay: downsample factors must not decrease with age");
      check(tokens_for_mode(stages[i].mode, 0) <= tokens_for_mode(stages[i - 1].mode, 0),
            "decay: stage token budgets must not increase with age");
    }
  }
}

DecayLedger assign_stages(const std::vector<RoundInfo>& rounds, const DecayPolicy& policy) {
  policy.validate();
  DecayLedger ledger;
  int prev_age = -1;
  for (const RoundInfo& r : rounds) {
    check(r.age >= 0, "decay: negative round age");
    check(r.age > prev_age, "decay: round ages must be strictly increasing");
    check(r.text_tokens >= 0, "decay: negative token count");
    prev_age = r.age;

    LedgerEntry e;
    e.age = r.age;
    e.text_tokens = r.text_tokens;
    if (r.age < policy.keep_text_rounds) {
      e.kind = RoundKind::text;
      e.tokens = r.text_tokens;
      e.ratio = 1.0;
      e.expected_precision = 1.0;
      ledger.rounds.push_back(e);
      continue;
    }
    size_t si = 0;
    for (size_t i = 0; i < policy.stages.size(); ++i)
      if (r.age >= policy.stages[i].age_min) si = i;
    bool terminal = si + 1 == policy.stages.size();
    if (terminal && policy.discard_terminal) {
      e.kind = RoundKind::discarded;
      e.stage = static_cast<int>(si);
      e.tokens = 0;
      e.ratio = 0.0;
      e.expected_precision = 0.0;
    } else {
      const DecayStage& s = policy.stages[si];
      e.kind = RoundKind::vision;
      e.stage = static_cast<int>(si);
      e.mode = s.mode;
      e.factor = s.factor;
      e.tokens = stage_vision_tokens(s);
      e.ratio = static_cast<double>(r.text_tokens) / static_cast<double>(e.tokens);
      e.expected_precision = 0.0;
    }
    ledger.rounds.push_back(e);
  }
  return ledger;
}

BudgetReport budget_report(const DecayLedger& ledger) {
  BudgetReport rep;
  std::vector<StageUsage> usage;
  auto bump = [&](int stage, int64_t tokens) {
    for (auto& u : usage)
      if (u.stage == stage) {
        ++u.n_rounds;
        u.tokens += tokens;
        return;
      }
    usage.push_back({stage, 1, tokens});
  };
  for (const LedgerEntry& e : ledger.rounds) {
    rep.raw_text_tokens += e.text_tokens;
    rep.total_tokens += e.tokens;
    int key = e.kind == RoundKind::text ? -1 : (e.kind == RoundKind::discarded ? -2 : e.stage);
    bump(key, e.tokens);
  }
  rep.compression_factor =
      rep.total_tokens > 0
          ? static_cast<double>(rep.raw_text_tokens) / static_cast<double>(rep.total_tokens)
          : 1.0;
  std::sort(usage.begin(), usage.end(),
            [](const StageUsage& a, const StageUsage& b) { return a.stage < b.stage; });
  rep.stages = std::move(usage);
  return rep;
}

std::vector<double> expected_recall(DecayLedger& ledger, const RecallCurve& curve) {
  check(!curve.empty(), "decay: empty recall curve");
  std::vector<double> out;
  out.reserve(ledger.rounds.size());
  for (LedgerEntry& e : ledger.rounds) {
    switch (e.kind) {
      case RoundKind::text: e.expected_precision = 1.0; break;
      case RoundKind::discarded: e.expected_precision = 0.0; break;
      case RoundKind::vision: e.expected_precision = curve.at(e.ratio); break;
    }
    out.push_back(e.expected_precision);
  }
  return out;
}

void write_ledger_csv(const DecayLedger& ledger, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  check(f.is_open(), "decay: cannot write " + path);
  f << "age,text_tokens,kind,stage,mode,factor,tokens,ratio,expected_precision\n";
  for (const LedgerEntry& e : ledger.rounds) {
    const char* kind = e.kind == RoundKind::text ? "text"
                       : e.kind == RoundKind::vision ? "vision"
                                                     : "discarded";
    char row[192];
    std::snprintf(row, sizeof(row), "%d,%lld,%s,%d,%s,%d,%lld,%.6f,%.6f\n", e.age,
                  static_cast<long long>(e.text_tokens), kind, e.stage,
                  e.kind == RoundKind::vision ? to_string(e.mode).c_str() : "-", e.factor,
                  static_cast<long long>(e.tokens), e.ratio, e.expected_precision);
    f << row;
  }
}

}  // namespace occ
