// Copyright 2026 The tempalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tempalign/eval.hpp"

#include <set>

#include "tempalign/csv.hpp"
#include "tempalign/error.hpp"

namespace tempalign {

void write_truth(std::ostream& out, const GroundTruth& truth) {
  out << "entity_a,entity_b\n";
  for (const auto& [a, b] : truth.pairs) out << a << ',' << b << '\n';
}

GroundTruth read_truth(std::istream& in) {
  csv::expect_header(in, "entity_a,entity_b");
  GroundTruth truth;
  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    const auto f = csv::split(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty())
      throw ParseError(line_no, "expected entity_a,entity_b");
    if (!truth.pairs.emplace(std::string(f[0]), std::string(f[1])).second)
      throw ParseError(line_no, "duplicate truth pair");
  }
  return truth;
}

double incorrectly_matched(const MatchSet& predicted, const GroundTruth& truth) {
  if (predicted.empty()) return 0.0;
  std::size_t wrong = 0;
  for (const auto& m : predicted.matches)
    if (!truth.contains(m.a, m.b)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

double incorrectly_not_matched(const MatchSet& predicted,
                               const GroundTruth& truth, Direction direction,
                               MissCounting counting) {
  if (truth.pairs.empty()) return 0.0;
  if (counting == MissCounting::kPair) {
    std::size_t missed = 0;
    for (const auto& [a, b] : truth.pairs)
      if (!predicted.contains(a, b)) ++missed;
    return static_cast<double>(missed) / static_cast<double>(truth.size());
  }
  const bool fwd = direction == Direction::kForward;
  std::set<std::string> wanted, seen;
  for (const auto& [a, b] : truth.pairs) wanted.insert(fwd ? a : b);
  for (const auto& m : predicted.matches) seen.insert(fwd ? m.a : m.b);
  std::size_t missed = 0;
  for (const auto& e : wanted)
    if (!seen.count(e)) ++missed;
  return static_cast<double>(missed) / static_cast<double>(wanted.size());
}

MetricsReport build_report(const MatchSet& predicted, const GroundTruth& truth,
                           MissCounting counting) {
  MetricsReport r;
  r.i_m = incorrectly_matched(predicted, truth);
  r.i_nm_forward =
      incorrectly_not_matched(predicted, truth, Direction::kForward, counting);
  r.i_nm_backward =
      incorrectly_not_matched(predicted, truth, Direction::kBackward, counting);
  r.ma = 1.0 - r.i_m;
  r.fnma = 1.0 - r.i_nm_forward;
  r.bnma = 1.0 - r.i_nm_backward;
  r.matched_count = predicted.size();
  r.truth_count = truth.size();
  r.empty_prediction = predicted.empty();
  return r;
}

void write_report(std::ostream& out, const MetricsReport& r) {
  using csv::format_double;
  out << "ma=" << format_double(r.ma) << '\n'
      << "fnma=" << format_double(r.fnma) << '\n'
      << "bnma=" << format_double(r.bnma) << '\n'
      << "i_m=" << format_double(r.i_m) << '\n'
      << "i_nm_forward=" << format_double(r.i_nm_forward) << '\n'
      << "i_nm_backward=" << format_double(r.i_nm_backward) << '\n'
      << "matched_count=" << r.matched_count << '\n'
      << "truth_count=" << r.truth_count << '\n'
      << "empty_prediction=" << (r.empty_prediction ? "true" : "false") << '\n'
      << "comparisons_performed=" << r.comparisons_performed << '\n'
      << "runtime_seconds=" << format_double(r.runtime_seconds) << '\n';
}

}  // namespace tempalign
