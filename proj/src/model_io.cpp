#include "veritas/model_io.hpp"

#include <fstream>

#include "veritas/rbm.hpp"

namespace veritas {
namespace {

using nlohmann::json;

constexpr const char* kModelFormat = "veritas-model";
constexpr int kModelVersion = 1;

}  // namespace

RbmParameters align_parameters(const BaselineModel& model, const Dataset& dataset) {
  RbmParameters out = initial_parameters(dataset.source_count(), model.config);
  out.b0 = model.params.b0;
  std::map<std::string, std::size_t> known;
  for (std::size_t s = 0; s < model.sources.size(); ++s) known.emplace(model.sources[s], s);
  const auto names = dataset.source_names();
  for (std::size_t s = 0; s < names.size(); ++s) {
    auto it = known.find(names[s]);
    if (it == known.end()) continue;
    out.a[s] = model.params.a[it->second];
    out.w[s] = model.params.w[it->second];
    out.b_src[s] = model.params.b_src[it->second];
  }
  return out;
}

json to_json(const GrbmModel& model) {
  return {{"b0", model.b0}, {"network", to_json(model.net)}, {"config", config_to_json(model.config)}};
}

GrbmModel grbm_from_json(const json& doc) {
  try {
    return {network_from_json(doc.at("network")), doc.at("b0").get<double>(),
            config_from_json(doc.at("config"))};
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed GRBM model: ") + e.what());
  }
}

json to_json(const ModelFile& model) {
  json doc{{"format", kModelFormat}, {"version", kModelVersion}};
  if (model.kind == ModelKind::grbm) {
    if (!model.grbm) throw DataError("GRBM model file without a model");
    doc["method"] = "grbm";
    doc["model"] = to_json(*model.grbm);
  } else {
    if (!model.baseline) throw DataError("baseline model file without parameters");
    const auto& b = *model.baseline;
    doc["method"] = "baseline";
    doc["model"] = {{"sources", b.sources},
                    {"a", b.params.a},
                    {"w", b.params.w},
                    {"b_src", b.params.b_src},
                    {"b0", b.params.b0},
                    {"config", config_to_json(b.config)}};
  }
  doc["encoding"] = {{"policy", std::string(to_string(model.policy))}, {"recipe", to_json(model.recipe)}};
  return doc;
}

ModelFile model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kModelFormat) throw DataError("not a model document");
    if (doc.at("version").get<int>() != kModelVersion) {
      throw DataError("unsupported model version " + doc.at("version").dump());
    }
    ModelFile m;
    const auto method = doc.at("method").get<std::string>();
    const auto& body = doc.at("model");
    if (method == "grbm") {
      m.kind = ModelKind::grbm;
      m.grbm = grbm_from_json(body);
    } else if (method == "baseline") {
      m.kind = ModelKind::baseline;
      BaselineModel b;
      b.sources = body.at("sources").get<std::vector<std::string>>();
      b.params.a = body.at("a").get<std::vector<double>>();
      b.params.w = body.at("w").get<std::vector<double>>();
      b.params.b_src = body.at("b_src").get<std::vector<double>>();
      b.params.b0 = body.at("b0").get<double>();
      b.config = config_from_json(body.at("config"));
      const std::size_t n = b.sources.size();
      if (b.params.a.size() != n || b.params.w.size() != n || b.params.b_src.size() != n) {
        throw DataError("baseline model parameter arrays do not match the source list");
      }
      m.baseline = std::move(b);
    } else {
      throw DataError("unknown model method '" + method + "'");
    }
    const auto& enc = doc.at("encoding");
    m.policy = parse_policy(enc.at("policy").get<std::string>());
    m.recipe = recipe_from_json(enc.at("recipe"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << doc.dump(1) << '\n';
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  write_json_file(path, to_json(model));
}

ModelFile load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace veritas
