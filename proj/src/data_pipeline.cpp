#include "veritas/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "veritas/csv.hpp"

namespace veritas {
namespace {

using nlohmann::json;

constexpr int kDatasetVersion = 1;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<double> parse_bool_flag(std::string_view s) {
  if (s == "1" || s == "true" || s == "TRUE" || s == "True") return 1.0;
  if (s == "0" || s == "false" || s == "FALSE" || s == "False") return 0.0;
  return std::nullopt;
}

[[noreturn]] void fail_with_issues(const std::filesystem::path& path,
                                   const std::vector<IngestIssue>& issues) {
  std::ostringstream msg;
  msg << path.string() << ": " << issues.size() << " malformed row(s)";
  const std::size_t shown = std::min<std::size_t>(issues.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    msg << "\n  line " << issues[i].line << ": " << issues[i].message;
  }
  if (shown < issues.size()) msg << "\n  ...";
  msg << "\n(use --lenient to skip malformed rows)";
  throw DataError(msg.str());
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

std::optional<std::string> validate_row(const RawClaimRow& row) {
  if (row.entity_id.empty()) return "empty entity";
  if (row.attribute_id.empty()) return "empty attribute";
  if (row.claimed_value.empty()) return "missing claimed value";
  return std::nullopt;
}

IngestResult ingest_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  const auto records = csv::read(in);
  IngestResult result;
  if (records.empty()) return result;

  const auto& header = records.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (!col.emplace(name, i).second) {
      throw DataError(path.string() + ": duplicate column '" + name + "' in header");
    }
  }
  for (const char* required : {"entity", "attribute", "value"}) {
    if (!col.contains(required)) {
      throw DataError(path.string() + ": header is missing required column '" + required + "'");
    }
  }
  auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
    if (auto it = col.find(name); it != col.end()) return it->second;
    return std::nullopt;
  };
  const auto source_col = optional_col("source");
  const auto ts_col = optional_col("timestamp");
  static const std::set<std::string> reserved{"entity", "attribute", "value", "source", "timestamp"};

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      result.issues.push_back({rec.line, "expected " + std::to_string(header.size()) +
                                             " fields, got " + std::to_string(rec.fields.size())});
      continue;
    }
    RawClaimRow row;
    row.line = rec.line;
    row.entity_id = trim(rec.fields[col["entity"]]);
    row.attribute_id = trim(rec.fields[col["attribute"]]);
    row.claimed_value = trim(rec.fields[col["value"]]);
    if (source_col) {
      auto s = trim(rec.fields[*source_col]);
      if (!s.empty()) row.source_id = std::move(s);
    }
    if (ts_col) {
      const auto t = trim(rec.fields[*ts_col]);
      if (!t.empty()) {
        row.timestamp = parse_int(t);
        if (!row.timestamp) {
          result.issues.push_back({rec.line, "timestamp '" + t + "' is not an integer"});
          continue;
        }
      }
    }
    for (const auto& [name, idx] : col) {
      if (!reserved.contains(name)) row.extra_columns[name] = rec.fields[idx];
    }
    if (auto problem = validate_row(row)) {
      result.issues.push_back({rec.line, *problem});
      continue;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

IngestResult ingest_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  IngestResult result;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty() || trim(text) == "\r") continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      result.issues.push_back({line, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!obj.is_object()) {
      result.issues.push_back({line, "record is not a JSON object"});
      continue;
    }
    RawClaimRow row;
    row.line = line;
    bool ok = true;
    for (const auto& [key, value] : obj.items()) {
      if (key == "entity") {
        row.entity_id = json_scalar_to_string(value);
      } else if (key == "attribute") {
        row.attribute_id = json_scalar_to_string(value);
      } else if (key == "value") {
        row.claimed_value = json_scalar_to_string(value);
      } else if (key == "source") {
        if (!value.is_null()) {
          auto s = json_scalar_to_string(value);
          if (!s.empty()) row.source_id = std::move(s);
        }
      } else if (key == "timestamp") {
        if (value.is_number_integer()) {
          row.timestamp = value.get<std::int64_t>();
        } else if (!value.is_null()) {
          result.issues.push_back({line, "timestamp is not an integer"});
          ok = false;
          break;
        }
      } else {
        row.extra_columns[key] = json_scalar_to_string(value);
      }
    }
    if (!ok) continue;
    if (auto problem = validate_row(row)) {
      result.issues.push_back({line, *problem});
      continue;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<std::string> extra_column_names(std::span<const RawClaimRow> rows) {
  std::set<std::string> names;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.extra_columns) names.insert(k);
  }
  return {names.begin(), names.end()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

ClaimFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return ClaimFormat::jsonl;
  return ClaimFormat::csv;
}

IngestResult ingest(const std::filesystem::path& path, ClaimFormat format, bool lenient) {
  IngestResult result = format == ClaimFormat::csv ? ingest_csv(path) : ingest_jsonl(path);
  if (!result.issues.empty()) {
    if (!lenient) fail_with_issues(path, result.issues);
    spdlog::warn("{}: skipped {} malformed row(s)", path.string(), result.issues.size());
  }
  if (result.rows.empty()) spdlog::warn("{}: no claims found", path.string());
  return result;
}

void write_claims_csv(const std::filesystem::path& path, std::span<const RawClaimRow> rows) {
  auto out = open_output(path);
  const auto extras = extra_column_names(rows);
  std::vector<std::string> header{"entity", "attribute", "source", "value", "timestamp"};
  header.insert(header.end(), extras.begin(), extras.end());
  out << csv::join(header) << '\n';
  for (const auto& r : rows) {
    std::vector<std::string> fields{r.entity_id, r.attribute_id, r.source_id.value_or(""),
                                    r.claimed_value,
                                    r.timestamp ? std::to_string(*r.timestamp) : ""};
    for (const auto& name : extras) {
      auto it = r.extra_columns.find(name);
      fields.push_back(it == r.extra_columns.end() ? "" : it->second);
    }
    out << csv::join(fields) << '\n';
  }
}

void write_claims_jsonl(const std::filesystem::path& path, std::span<const RawClaimRow> rows) {
  auto out = open_output(path);
  for (const auto& r : rows) {
    json obj{{"entity", r.entity_id}, {"attribute", r.attribute_id}, {"value", r.claimed_value}};
    obj["source"] = r.source_id ? json(*r.source_id) : json(nullptr);
    if (r.timestamp) obj["timestamp"] = *r.timestamp;
    for (const auto& [k, v] : r.extra_columns) obj[k] = v;
    out << obj.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

std::string_view to_string(NegativeClaimPolicy policy) noexcept {
  return policy == NegativeClaimPolicy::implicit_negatives ? "implicit-negatives"
                                                           : "positives-only";
}

NegativeClaimPolicy parse_policy(std::string_view name) {
  if (name == "implicit-negatives") return NegativeClaimPolicy::implicit_negatives;
  if (name == "positives-only") return NegativeClaimPolicy::positives_only;
  throw DataError("unknown negative-claim policy '" + std::string(name) +
                  "' (expected implicit-negatives or positives-only)");
}

std::optional<std::size_t> EncodingManifest::find(const StatementKey& key) const {
  // statements are sorted by construction.
  auto it = std::lower_bound(statements.begin(), statements.end(), key);
  if (it == statements.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - statements.begin());
}

const StatementKey& EncodingManifest::key_of(const std::string& statement_id) const {
  const auto idx = parse_int(statement_id);
  if (!idx || *idx < 0 || static_cast<std::size_t>(*idx) >= statements.size()) {
    throw DataError("statement id '" + statement_id + "' is not in the manifest");
  }
  return statements[static_cast<std::size_t>(*idx)];
}

std::map<GroupKey, std::vector<std::size_t>> EncodingManifest::groups() const {
  std::map<GroupKey, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < statements.size(); ++i) out[statements[i].group()].push_back(i);
  return out;
}

Encoding one_hot_encode(std::span<const RawClaimRow> rows, NegativeClaimPolicy policy) {
  if (rows.empty()) throw DataError("no claims to encode");

  // Resolve duplicates per (source, entity, attribute).
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<std::size_t>> by_key;
  std::vector<bool> keep(rows.size(), true);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].source_id) {
      by_key[{*rows[r].source_id, rows[r].entity_id, rows[r].attribute_id}].push_back(r);
    }
  }
  for (const auto& [key, idx] : by_key) {
    if (idx.size() < 2) continue;
    const bool same_value = std::all_of(idx.begin(), idx.end(), [&](std::size_t r) {
      return rows[r].claimed_value == rows[idx.front()].claimed_value;
    });
    std::size_t winner = idx.front();
    if (same_value) {
      // Keep the earliest statement of the claim.
      for (std::size_t r : idx) {
        if (rows[r].timestamp && (!rows[winner].timestamp || *rows[r].timestamp < *rows[winner].timestamp)) {
          winner = r;
        }
      }
    } else {
      const bool ordered = std::all_of(idx.begin(), idx.end(),
                                       [&](std::size_t r) { return rows[r].timestamp.has_value(); });
      std::size_t latest_count = 0;
      if (ordered) {
        for (std::size_t r : idx) {
          if (*rows[r].timestamp > *rows[winner].timestamp) winner = r;
        }
        for (std::size_t r : idx) latest_count += *rows[r].timestamp == *rows[winner].timestamp;
      }
      if (!ordered || latest_count != 1) {
        std::string lines;
        for (std::size_t r : idx) lines += (lines.empty() ? "" : ", ") + std::to_string(rows[r].line);
        throw DataError("source '" + std::get<0>(key) + "' gives conflicting values for (" +
                        std::get<1>(key) + ", " + std::get<2>(key) + ") on lines " + lines +
                        " with no unique latest timestamp");
      }
    }
    for (std::size_t r : idx) keep[r] = r == winner;
  }

  Encoding enc;
  enc.manifest.policy = policy;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (keep[r]) enc.rows.push_back(rows[r]);
  }

  std::set<StatementKey> keys;
  for (const auto& r : enc.rows) keys.insert({r.entity_id, r.attribute_id, r.claimed_value});
  enc.manifest.statements.assign(keys.begin(), keys.end());
  const auto groups = enc.manifest.groups();

  std::vector<std::vector<ClaimRecord>> claims(enc.manifest.statements.size());
  enc.provenance.assign(claims.size(), {});
  for (std::size_t r = 0; r < enc.rows.size(); ++r) {
    const auto& row = enc.rows[r];
    const StatementKey own{row.entity_id, row.attribute_id, row.claimed_value};
    const std::size_t own_idx = *enc.manifest.find(own);
    auto add = [&](std::size_t f, Bit value) {
      claims[f].push_back({EncodingManifest::statement_id(f), row.source_id, value, {}});
      enc.provenance[f].push_back(r);
    };
    add(own_idx, 1);
    if (policy == NegativeClaimPolicy::implicit_negatives) {
      for (std::size_t f : groups.at(own.group())) {
        if (f != own_idx) add(f, 0);
      }
    }
  }

  std::vector<StatementBundle> bundles;
  bundles.reserve(claims.size());
  for (std::size_t f = 0; f < claims.size(); ++f) {
    bundles.emplace_back(EncodingManifest::statement_id(f), std::move(claims[f]));
  }
  enc.dataset = Dataset(std::move(bundles), {});
  return enc;
}

std::vector<PositiveClaim> decode(const Dataset& dataset, const EncodingManifest& manifest) {
  std::vector<PositiveClaim> out;
  for (const auto& bundle : dataset.bundles()) {
    const auto& key = manifest.key_of(bundle.statement_id());
    for (const auto& c : bundle.claims()) {
      if (c.value == 1) out.push_back({key, c.source_id});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

std::string_view to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::source_claim_count: return "source_claim_count";
    case FeatureKind::statement_claim_count: return "statement_claim_count";
    case FeatureKind::temporal_rank: return "temporal_rank";
    case FeatureKind::binary: return "binary";
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::numeric: return "numeric";
  }
  return "numeric";
}

namespace {

FeatureKind parse_feature_kind(const std::string& s) {
  for (auto kind : {FeatureKind::source_claim_count, FeatureKind::statement_claim_count,
                    FeatureKind::temporal_rank, FeatureKind::binary, FeatureKind::categorical,
                    FeatureKind::numeric}) {
    if (to_string(kind) == s) return kind;
  }
  throw DataError("unknown recipe entry '" + s + "'");
}

bool column_backed(FeatureKind kind) {
  return kind == FeatureKind::binary || kind == FeatureKind::categorical ||
         kind == FeatureKind::numeric;
}

bool default_standardize(FeatureKind kind) {
  return kind != FeatureKind::binary && kind != FeatureKind::categorical;
}

FeatureDef make_def(FeatureKind kind, std::string column = {}) {
  FeatureDef d;
  d.kind = kind;
  d.column = std::move(column);
  d.standardize = default_standardize(kind);
  return d;
}

FeatureKind infer_column_kind(std::span<const RawClaimRow> rows, const std::string& column) {
  bool all_flags = true;
  bool all_numbers = true;
  for (const auto& r : rows) {
    auto it = r.extra_columns.find(column);
    if (it == r.extra_columns.end() || it->second.empty()) continue;
    const std::string v = trim(it->second);
    all_flags = all_flags && parse_bool_flag(v).has_value();
    all_numbers = all_numbers && parse_double(v).has_value();
  }
  if (all_flags) return FeatureKind::binary;
  if (all_numbers) return FeatureKind::numeric;
  return FeatureKind::categorical;
}

std::string cell(const RawClaimRow& row, const std::string& column) {
  auto it = row.extra_columns.find(column);
  return it == row.extra_columns.end() ? std::string{} : trim(it->second);
}

}  // namespace

FeatureRecipe FeatureRecipe::named(std::string_view name) {
  FeatureRecipe r;
  r.name = std::string(name);
  if (name == "none") return r;
  if (name == "basic" || name == "auto") {
    r.features = {make_def(FeatureKind::source_claim_count),
                  make_def(FeatureKind::statement_claim_count),
                  make_def(FeatureKind::temporal_rank)};
    r.include_all_columns = name == "auto";
    return r;
  }
  throw DataError("unknown feature recipe '" + std::string(name) +
                  "' (expected none, basic, auto or a JSON recipe file)");
}

std::vector<std::string> FeatureRecipe::feature_names() const {
  std::vector<std::string> names;
  for (const auto& d : features) {
    switch (d.kind) {
      case FeatureKind::source_claim_count: names.emplace_back("log_source_claims"); break;
      case FeatureKind::statement_claim_count: names.emplace_back("log_statement_claims"); break;
      case FeatureKind::temporal_rank: names.emplace_back("temporal_rank"); break;
      case FeatureKind::categorical:
        for (const auto& c : d.categories) names.push_back(d.column + "=" + c);
        break;
      default: names.push_back(d.column);
    }
  }
  return names;
}

std::size_t FeatureRecipe::dim() const { return feature_names().size(); }

json to_json(const FeatureRecipe& recipe) {
  json features = json::array();
  for (const auto& d : recipe.features) {
    json f{{"kind", std::string(to_string(d.kind))}, {"standardize", d.standardize}};
    if (column_backed(d.kind)) f["column"] = d.column;
    if (recipe.fitted) {
      f["mean"] = d.mean;
      f["scale"] = d.scale;
      if (d.kind == FeatureKind::categorical) f["categories"] = d.categories;
    }
    features.push_back(std::move(f));
  }
  return {{"name", recipe.name},
          {"include_all_columns", recipe.include_all_columns},
          {"fitted", recipe.fitted},
          {"features", features}};
}

FeatureRecipe recipe_from_json(const json& doc) {
  try {
    FeatureRecipe r;
    r.name = doc.value("name", std::string("custom"));
    r.include_all_columns = doc.value("include_all_columns", false);
    r.fitted = doc.value("fitted", false);
    for (const auto& f : doc.at("features")) {
      FeatureDef d = make_def(parse_feature_kind(f.at("kind").get<std::string>()),
                              f.value("column", std::string{}));
      if (column_backed(d.kind) && d.column.empty()) {
        throw DataError("recipe entry '" + std::string(to_string(d.kind)) + "' needs a column");
      }
      d.standardize = f.value("standardize", d.standardize);
      d.mean = f.value("mean", 0.0);
      d.scale = f.value("scale", 1.0);
      d.categories = f.value("categories", std::vector<std::string>{});
      r.features.push_back(std::move(d));
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed feature recipe: ") + e.what());
  }
}

FeatureResult compute_features(const Encoding& enc, const FeatureRecipe& recipe_in) {
  FeatureRecipe recipe = recipe_in;
  const auto& rows = enc.rows;
  const auto columns = extra_column_names(rows);
  const std::set<std::string> available(columns.begin(), columns.end());

  if (!recipe.fitted && recipe.include_all_columns) {
    std::set<std::string> used;
    for (const auto& d : recipe.features) {
      if (column_backed(d.kind)) used.insert(d.column);
    }
    for (const auto& c : columns) {
      if (!used.contains(c)) recipe.features.push_back(make_def(infer_column_kind(rows, c), c));
    }
  }
  for (const auto& d : recipe.features) {
    if (column_backed(d.kind) && !available.contains(d.column)) {
      throw DataError("feature recipe needs column '" + d.column + "', which the claims lack");
    }
  }

  // Statistics shared by the count and rank features.
  std::map<std::string, std::size_t> rows_by_source;
  for (const auto& r : rows) {
    if (r.source_id) ++rows_by_source[*r.source_id];
  }
  const auto bundles = enc.dataset.bundles();
  std::vector<std::vector<double>> rank(bundles.size());
  for (std::size_t f = 0; f < bundles.size(); ++f) {
    const auto& prov = enc.provenance[f];
    std::vector<std::size_t> order(prov.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto key = [&](std::size_t i) {
      const auto& row = rows[prov[i]];
      return std::pair{row.timestamp.value_or(std::numeric_limits<std::int64_t>::max()), prov[i]};
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return key(x) < key(y); });
    rank[f].assign(order.size(), 0.0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[f][order[pos]] = static_cast<double>(pos);
  }

  auto missing = [](const RawClaimRow& row, const std::string& column) {
    throw DataError("line " + std::to_string(row.line) + ": claim (" + row.entity_id + ", " +
                    row.attribute_id + ", " + row.claimed_value + ") from source '" +
                    row.source_id.value_or("<anonymous>") + "' has no value for feature column '" +
                    column + "'");
  };

  // Raw (unstandardised) value of one scalar feature for claim i of bundle f.
  auto raw_value = [&](const FeatureDef& d, std::size_t f, std::size_t i) -> double {
    const auto& row = rows[enc.provenance[f][i]];
    switch (d.kind) {
      case FeatureKind::source_claim_count:
        return std::log1p(row.source_id ? static_cast<double>(rows_by_source[*row.source_id]) : 1.0);
      case FeatureKind::statement_claim_count:
        return std::log1p(static_cast<double>(bundles[f].size()));
      case FeatureKind::temporal_rank:
        return rank[f][i];
      case FeatureKind::binary: {
        const auto v = cell(row, d.column);
        if (v.empty()) missing(row, d.column);
        if (auto flag = parse_bool_flag(v)) return *flag;
        throw DataError("line " + std::to_string(row.line) + ": column '" + d.column +
                        "' value '" + v + "' is not a binary flag");
      }
      case FeatureKind::numeric: {
        const auto v = cell(row, d.column);
        if (v.empty()) missing(row, d.column);
        if (auto x = parse_double(v)) return *x;
        throw DataError("line " + std::to_string(row.line) + ": column '" + d.column +
                        "' value '" + v + "' is not numeric");
      }
      case FeatureKind::categorical:
        break;
    }
    return 0.0;
  };

  if (!recipe.fitted) {
    for (auto& d : recipe.features) {
      if (d.kind == FeatureKind::categorical) {
        std::set<std::string> cats;
        for (const auto& r : rows) {
          if (auto v = cell(r, d.column); !v.empty()) cats.insert(v);
        }
        d.categories.assign(cats.begin(), cats.end());
        continue;
      }
      double sum = 0.0, sum_sq = 0.0;
      std::size_t n = 0;
      for (std::size_t f = 0; f < bundles.size(); ++f) {
        for (std::size_t i = 0; i < bundles[f].size(); ++i) {
          const double x = raw_value(d, f, i);
          sum += x;
          sum_sq += x * x;
          ++n;
        }
      }
      d.mean = n ? sum / static_cast<double>(n) : 0.0;
      const double var = n ? std::max(0.0, sum_sq / static_cast<double>(n) - d.mean * d.mean) : 0.0;
      const double sd = std::sqrt(var);
      d.scale = sd > 1e-12 ? sd : 1.0;
      if (!d.standardize) {
        d.mean = 0.0;
        d.scale = 1.0;
      }
    }
    recipe.fitted = true;
  }

  std::vector<StatementBundle> out;
  out.reserve(bundles.size());
  for (std::size_t f = 0; f < bundles.size(); ++f) {
    std::vector<ClaimRecord> claims(bundles[f].claims().begin(), bundles[f].claims().end());
    for (std::size_t i = 0; i < claims.size(); ++i) {
      auto& x = claims[i].features;
      x.clear();
      for (const auto& d : recipe.features) {
        if (d.kind == FeatureKind::categorical) {
          const auto& row = rows[enc.provenance[f][i]];
          const auto v = cell(row, d.column);
          if (v.empty()) missing(row, d.column);
          for (const auto& c : d.categories) x.push_back(c == v ? 1.0 : 0.0);
          continue;
        }
        x.push_back((raw_value(d, f, i) - d.mean) / d.scale);
      }
    }
    out.emplace_back(bundles[f].statement_id(), std::move(claims));
  }
  return {Dataset(std::move(out), recipe.feature_names()), std::move(recipe)};
}

// ---------------------------------------------------------------------------
// Manifest, ground truth, dataset documents
// ---------------------------------------------------------------------------

json to_json(const EncodingManifest& m) {
  json statements = json::array();
  for (const auto& k : m.statements) statements.push_back({k.entity, k.attribute, k.value});
  return {{"format", "veritas-manifest"},
          {"version", EncodingManifest::kVersion},
          {"policy", std::string(to_string(m.policy))},
          {"statements", statements},
          {"recipe", to_json(m.recipe)}};
}

EncodingManifest manifest_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "veritas-manifest") {
      throw DataError("not a manifest document");
    }
    if (doc.at("version").get<int>() != EncodingManifest::kVersion) {
      throw DataError("unsupported manifest version");
    }
    EncodingManifest m;
    m.policy = parse_policy(doc.at("policy").get<std::string>());
    for (const auto& s : doc.at("statements")) {
      m.statements.push_back({s.at(0).get<std::string>(), s.at(1).get<std::string>(),
                              s.at(2).get<std::string>()});
    }
    if (!std::is_sorted(m.statements.begin(), m.statements.end()) ||
        std::adjacent_find(m.statements.begin(), m.statements.end()) != m.statements.end()) {
      throw DataError("manifest statements must be sorted and unique");
    }
    m.recipe = recipe_from_json(doc.at("recipe"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

GroundTruth load_ground_truth(const std::filesystem::path& path, const EncodingManifest& manifest) {
  auto in = open_input(path);
  const auto records = csv::read(in);
  GroundTruth truth;
  if (records.empty()) {
    spdlog::warn("{}: truth file is empty", path.string());
    return truth;
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].fields.size(); ++i) col[trim(records[0].fields[i])] = i;
  for (const char* required : {"entity", "attribute", "value"}) {
    if (!col.contains(required)) {
      throw DataError(path.string() + ": truth header is missing column '" + required + "'");
    }
  }
  const auto groups = manifest.groups();
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != records[0].fields.size()) {
      throw DataError(path.string() + ": line " + std::to_string(rec.line) +
                      " has the wrong number of fields");
    }
    const StatementKey key{trim(rec.fields[col["entity"]]), trim(rec.fields[col["attribute"]]),
                           trim(rec.fields[col["value"]])};
    const auto group = groups.find(key.group());
    if (group == groups.end()) {
      spdlog::warn("{}: line {}: no claims on ({}, {}); skipped", path.string(), rec.line, key.entity,
                   key.attribute);
      continue;
    }
    if (!truth.values.emplace(key.group(), key.value).second) {
      spdlog::warn("{}: line {}: duplicate truth for ({}, {}); keeping the first", path.string(),
                   rec.line, key.entity, key.attribute);
      continue;
    }
    // A true value no source claimed still labels the group; every
    // candidate statement is then false.
    const auto idx = manifest.find(key);
    if (!idx) {
      spdlog::debug("{}: line {}: no source claims the true value of ({}, {})", path.string(),
                    rec.line, key.entity, key.attribute);
    }
    for (std::size_t f : group->second) {
      truth.statement_labels[EncodingManifest::statement_id(f)] = idx && f == *idx ? 1 : 0;
    }
  }
  return truth;
}

json to_json(const Dataset& dataset) {
  json bundles = json::array();
  for (const auto& b : dataset.bundles()) {
    json claims = json::array();
    for (const auto& c : b.claims()) {
      claims.push_back({{"source", c.source_id ? json(*c.source_id) : json(nullptr)},
                        {"value", static_cast<int>(c.value)},
                        {"features", c.features}});
    }
    bundles.push_back({{"id", b.statement_id()}, {"claims", std::move(claims)}});
  }
  std::vector<std::string> names(dataset.feature_names().begin(), dataset.feature_names().end());
  return {{"format", "veritas-dataset"},
          {"version", kDatasetVersion},
          {"feature_names", names},
          {"bundles", std::move(bundles)}};
}

Dataset dataset_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "veritas-dataset" ||
        doc.at("version").get<int>() != kDatasetVersion) {
      throw DataError("not a version-1 dataset document");
    }
    std::vector<StatementBundle> bundles;
    for (const auto& b : doc.at("bundles")) {
      const auto id = b.at("id").get<std::string>();
      std::vector<ClaimRecord> claims;
      for (const auto& c : b.at("claims")) {
        ClaimRecord rec;
        rec.statement_id = id;
        if (!c.at("source").is_null()) rec.source_id = c.at("source").get<std::string>();
        const int v = c.at("value").get<int>();
        if (v != 0 && v != 1) throw DataError("claim value must be 0 or 1");
        rec.value = static_cast<Bit>(v);
        rec.features = c.at("features").get<std::vector<double>>();
        claims.push_back(std::move(rec));
      }
      bundles.emplace_back(id, std::move(claims));
    }
    return Dataset(std::move(bundles), doc.at("feature_names").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed dataset document: ") + e.what());
  }
}

}  // namespace veritas
