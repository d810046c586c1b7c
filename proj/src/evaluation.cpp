#include "veritas/evaluation.hpp"

#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "veritas/csv.hpp"

namespace veritas {
namespace {

const char* const kFamilies[] = {"claims_per_item", "source_claims"};
const char* const kClaimBuckets[] = {"1", "2", "3-5", "6+"};
const char* const kSourceBuckets[] = {"has_1_claim_source", "multi_claim_sources"};

template <typename Key>
EvalReport tally(const std::vector<std::pair<Key, bool>>& outcomes,
                 const std::map<Key, ItemStrata>& strata, std::string method) {
  EvalReport report;
  report.method = std::move(method);
  for (const char* b : kClaimBuckets) report.strata.push_back({kFamilies[0], b});
  for (const char* b : kSourceBuckets) report.strata.push_back({kFamilies[1], b});

  auto bump = [&](const std::string& family, const std::string& bucket, bool correct) {
    for (auto& s : report.strata) {
      if (s.family == family && s.bucket == bucket) {
        ++s.n;
        s.correct += correct;
      }
    }
  };
  for (const auto& [key, correct] : outcomes) {
    ++report.n_labeled;
    report.n_correct += correct;
    const auto it = strata.find(key);
    const ItemStrata info = it == strata.end() ? ItemStrata{} : it->second;
    bump(kFamilies[0], claims_bucket(std::max<std::size_t>(info.claims, 1)), correct);
    bump(kFamilies[1], info.has_single_claim_source ? kSourceBuckets[0] : kSourceBuckets[1],
         correct);
  }
  report.overall_accuracy = report.n_labeled ? static_cast<double>(report.n_correct) /
                                                   static_cast<double>(report.n_labeled)
                                             : 0.0;
  return report;
}

std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * x);
  return buf;
}

}  // namespace

const StratumResult* EvalReport::stratum(const std::string& family, const std::string& bucket) const {
  for (const auto& s : strata) {
    if (s.family == family && s.bucket == bucket) return &s;
  }
  return nullptr;
}

TruthEstimate majority_vote(std::string statement_id, std::span<const ClaimRecord> claims) {
  if (claims.empty()) {
    throw DataError("majority vote on statement '" + statement_id + "' without claims");
  }
  std::size_t ones = 0;
  for (const auto& c : claims) ones += c.value;
  return TruthEstimate::from_plausibility(
      std::move(statement_id), static_cast<double>(ones) / static_cast<double>(claims.size()));
}

TruthEstimate majority_vote(const StatementBundle& bundle) {
  return majority_vote(bundle.statement_id(), bundle.claims());
}

std::vector<TruthEstimate> majority_vote_all(const Dataset& dataset) {
  std::vector<TruthEstimate> out;
  out.reserve(dataset.size());
  for (const auto& b : dataset.bundles()) out.push_back(majority_vote(b));
  return out;
}

GroupDecisions per_attribute_decision(std::span<const TruthEstimate> estimates,
                                      const EncodingManifest& manifest) {
  std::map<std::size_t, double> p;
  for (const auto& e : estimates) {
    const auto& key = manifest.key_of(e.statement_id);
    p[*manifest.find(key)] = e.plausibility;
  }
  GroupDecisions out;
  for (const auto& [group, members] : manifest.groups()) {
    const std::size_t* best = nullptr;
    for (const std::size_t& f : members) {
      auto it = p.find(f);
      if (it == p.end()) continue;
      // members are in ascending value order, so strict > keeps the smallest value on ties.
      if (!best || it->second > p.at(*best)) best = &f;
    }
    if (!best) {
      throw DataError("no estimate for any statement of (" + group.entity + ", " +
                      group.attribute + ")");
    }
    out[group] = manifest.statements[*best].value;
  }
  return out;
}

std::string claims_bucket(std::size_t claims) {
  if (claims <= 1) return "1";
  if (claims == 2) return "2";
  if (claims <= 5) return "3-5";
  return "6+";
}

std::map<GroupKey, ItemStrata> group_strata(const Dataset& dataset, const EncodingManifest& manifest) {
  const auto positives = decode(dataset, manifest);
  std::map<std::string, std::size_t> per_source;
  for (const auto& pc : positives) {
    if (pc.source) ++per_source[*pc.source];
  }
  std::map<GroupKey, ItemStrata> out;
  for (const auto& pc : positives) {
    auto& s = out[pc.statement.group()];
    ++s.claims;
    if (!pc.source || per_source[*pc.source] == 1) s.has_single_claim_source = true;
  }
  return out;
}

std::map<std::string, ItemStrata> statement_strata(const Dataset& dataset) {
  std::map<std::string, std::size_t> per_source;
  for (const auto& b : dataset.bundles()) {
    for (const auto& c : b.claims()) {
      if (c.source_id) ++per_source[*c.source_id];
    }
  }
  std::map<std::string, ItemStrata> out;
  for (const auto& b : dataset.bundles()) {
    ItemStrata s{b.size(), false};
    for (const auto& c : b.claims()) {
      if (!c.source_id || per_source[*c.source_id] == 1) s.has_single_claim_source = true;
    }
    out[b.statement_id()] = s;
  }
  return out;
}

EvalReport evaluate(const GroupDecisions& decisions, const GroundTruth& truth,
                    const std::map<GroupKey, ItemStrata>& strata, std::string method) {
  if (truth.values.empty()) throw DataError("no labeled statements");
  std::vector<std::pair<GroupKey, bool>> outcomes;
  for (const auto& [group, value] : truth.values) {
    auto it = decisions.find(group);
    if (it != decisions.end()) outcomes.emplace_back(group, it->second == value);
  }
  if (outcomes.empty()) throw DataError("no overlap between decisions and ground truth");
  return tally(outcomes, strata, std::move(method));
}

EvalReport evaluate_statements(std::span<const TruthEstimate> estimates,
                               const std::map<std::string, Bit>& labels,
                               const std::map<std::string, ItemStrata>& strata, std::string method) {
  if (labels.empty()) throw DataError("no labeled statements");
  std::vector<std::pair<std::string, bool>> outcomes;
  for (const auto& e : estimates) {
    auto it = labels.find(e.statement_id);
    if (it != labels.end()) outcomes.emplace_back(e.statement_id, e.decision == it->second);
  }
  if (outcomes.empty()) throw DataError("no overlap between estimates and ground truth");
  return tally(outcomes, strata, std::move(method));
}

std::string config_digest(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json strata = nlohmann::json::array();
  for (const auto& s : r.strata) {
    strata.push_back({{"family", s.family},
                      {"bucket", s.bucket},
                      {"n", s.n},
                      {"correct", s.correct},
                      {"accuracy", s.accuracy()}});
  }
  return {{"method", r.method},
          {"config_digest", r.config_digest},
          {"n_labeled", r.n_labeled},
          {"n_correct", r.n_correct},
          {"overall_accuracy", r.overall_accuracy},
          {"strata", strata}};
}

std::string to_text_table(std::span<const EvalReport> reports) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"method", "stratum", "n", "correct", "accuracy%"});
  for (const auto& r : reports) {
    rows.push_back({r.method, "overall", std::to_string(r.n_labeled), std::to_string(r.n_correct),
                    percent(r.overall_accuracy)});
    for (const auto& s : r.strata) {
      if (s.n == 0) continue;
      rows.push_back({r.method, s.family + ":" + s.bucket, std::to_string(s.n),
                      std::to_string(s.correct), percent(s.accuracy())});
    }
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool numeric = c >= 2;
      out << (numeric ? std::right : std::left) << std::setw(static_cast<int>(width[c])) << row[c];
      out << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  return out.str();
}

std::string to_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "method,family,bucket,n,correct,accuracy\n";
  for (const auto& r : reports) {
    out << csv::join({r.method, "overall", "all", std::to_string(r.n_labeled),
                      std::to_string(r.n_correct), std::to_string(r.overall_accuracy)})
        << '\n';
    for (const auto& s : r.strata) {
      out << csv::join({r.method, s.family, s.bucket, std::to_string(s.n),
                        std::to_string(s.correct), std::to_string(s.accuracy())})
          << '\n';
    }
  }
  return out.str();
}

}  // namespace veritas
