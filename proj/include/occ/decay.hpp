// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "occ/modes.hpp"

namespace occ {

// Measured precision-vs-ratio lookup, piecewise linear between points and
// clamped at the ends.
struct RecallCurve {
  std::vector<std::pair<double, double>> pts;  // (ratio, precision), ratio ascending

  static RecallCurve from_points(std::vector<std::pair<double, double>> pts);
  /// Reads the evalharness summary.csv (ratio + precision_mean columns).
  static RecallCurve from_summary_csv(const std::string& path);

  double at(double ratio) const;
  bool empty() const { return pts.empty(); }
};

// One rung of the forgetting ladder: rounds of age >= age_min (and below the
// next rung) render at `mode` and are downsampled by `factor`.
struct DecayStage {
  int age_min = 0;
  ResolutionMode mode = ResolutionMode::Base;
  int factor = 1;
};

struct DecayPolicy {
  int keep_text_rounds = 2;
  std::vector<DecayStage> stages;
  bool discard_terminal = false;  // rounds in the last rung are dropped outright

  void validate() const;
};

/// Token budget of one stage: the mode's budget shrunk by factor^2, i.e. the
/// downsampled page re-planned at its reduced pixel size.
int64_t stage_vision_tokens(const DecayStage& s);

struct RoundInfo {
  int age = 0;  // 0 = most recent
  int64_t text_tokens = 0;
};

enum class RoundKind { text, vision, discarded };

struct LedgerEntry {
  int age = 0;
  int64_t text_tokens = 0;
  RoundKind kind = RoundKind::text;
  int stage = -1;  // index into the policy's stage table; -1 for text
  ResolutionMode mode = ResolutionMode::Base;
  int factor = 1;
  int64_t tokens = 0;       // contribution to the context budget
  double ratio = 1.0;       // text_tokens / tokens (1 for text, 0 for discarded)
  double expected_precision = 0;

  bool operator==(const LedgerEntry&) const = default;
};

struct DecayLedger {
  std::vector<LedgerEntry> rounds;

  bool operator==(const DecayLedger&) const = default;
};

/// Maps rounds (ages strictly increasing) onto the policy ladder. Rounds
/// younger than keep_text_rounds stay raw text with precision 1; the rest
/// land on the stage covering their age. expected_precision is left at 0 for
/// vision rounds until expected_recall fills it.
DecayLedger assign_stages(const std::vector<RoundInfo>& rounds, const DecayPolicy& policy);

struct StageUsage {
  int stage = -1;  // -1 text, -2 discarded
  int n_rounds = 0;
  int64_t tokens = 0;
};

struct BudgetReport {
  int64_t raw_text_tokens = 0;
  int64_t total_tokens = 0;
  double compression_factor = 1.0;
  std::vector<StageUsage> stages;
};

BudgetReport budget_report(const DecayLedger& ledger);

/// Fills expected_precision per round from the measured curve (text rounds
/// get 1, discarded rounds 0) and returns the values in round order.
std::vector<double> expected_recall(DecayLedger& ledger, const RecallCurve& curve);

void write_ledger_csv(const DecayLedger& ledger, const std::string& path);

}  // namespace occ
