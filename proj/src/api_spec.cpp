#include "liftc/api_spec.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace liftc::api {

using nlohmann::json;

const char* liveness_name(Liveness l) {
  switch (l) {
    case Liveness::LiveIn: return "livein";
    case Liveness::LiveOut: return "liveout";
    default: return "liveinout";
  }
}

const ApiParam* ApiSpec::find(const std::string& n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}

int ApiSpec::position(const std::string& n) const {
  for (size_t i = 0; i < params.size(); i++)
    if (params[i].name == n) return (int)i;
  return -1;
}

std::vector<const ApiParam*> ApiSpec::arrays() const {
  std::vector<const ApiParam*> out;
  for (const auto& p : params)
    if (p.kind == ApiParamKind::Array) out.push_back(&p);
  return out;
}

std::vector<const ApiParam*> ApiSpec::size_params() const {
  std::vector<const ApiParam*> out;
  for (const auto& p : params)
    if (p.kind == ApiParamKind::IntSize) out.push_back(&p);
  return out;
}

std::vector<const ApiParam*> ApiSpec::float_scalars() const {
  std::vector<const ApiParam*> out;
  for (const auto& p : params)
    if (p.kind == ApiParamKind::FloatScalar) out.push_back(&p);
  return out;
}

int ApiSpec::dims_referenced_count() const {
  std::set<std::string> seen;
  for (const auto& p : params)
    for (const auto& d : p.dims) seen.insert(d);
  return (int)seen.size();
}

int ApiSpec::max_rank() const {
  size_t r = 1;
  for (const auto& p : params) r = std::max(r, p.dims.size());
  return (int)r;
}

namespace {

Liveness parse_liveness(const std::string& s) {
  if (s == "livein") return Liveness::LiveIn;
  if (s == "liveout") return Liveness::LiveOut;
  if (s == "liveinout") return Liveness::LiveInOut;
  throw SpecError("bad liveness '" + s + "'");
}

ApiParamKind parse_kind(const std::string& s) {
  if (s == "array") return ApiParamKind::Array;
  if (s == "int") return ApiParamKind::IntSize;
  if (s == "float") return ApiParamKind::FloatScalar;
  throw SpecError("bad param kind '" + s + "'");
}

DerivedSize parse_derived(const json& j) {
  DerivedSize d;
  for (const auto& t : j.at("terms"))
    d.terms.emplace_back(t.at(0).get<long long>(), t.at(1).get<std::string>());
  d.constant = j.value("constant", 0LL);
  d.slack_max = j.value("slack", 0LL);
  return d;
}

void validate(ApiSpec& spec) {
  if (spec.semantics != "gemm" && spec.semantics != "conv2d")
    throw SpecError(spec.name + ": semantics must be gemm or conv2d");
  std::set<std::string> names;
  for (const auto& p : spec.params)
    if (!names.insert(p.name).second)
      throw SpecError(spec.name + ": duplicate param '" + p.name + "'");

  bool has_output = false;
  for (auto& p : spec.params) {
    if (p.kind == ApiParamKind::Array) {
      if (p.dims.empty())
        throw SpecError(spec.name + ": array '" + p.name + "' has no dims");
      for (const auto& d : p.dims) {
        const ApiParam* dp = spec.find(d);
        if (!dp || dp->kind != ApiParamKind::IntSize)
          throw SpecError(spec.name + ": dim '" + d + "' of '" + p.name +
                          "' is not an int size param");
      }
      if (p.liveness != Liveness::LiveIn) has_output = true;
      if (p.element_type != "f32" && p.element_type != "f64" && p.element_type != "any")
        throw SpecError(spec.name + ": bad element_type '" + p.element_type + "'");
    } else if (p.liveness != Liveness::LiveIn) {
      throw SpecError(spec.name + ": scalar '" + p.name + "' must be livein");
    }
    // canonical dim order: by position in this spec's own signature
    std::sort(p.dims.begin(), p.dims.end(), [&](const std::string& a, const std::string& b) {
      return spec.position(a) < spec.position(b);
    });
  }
  if (!has_output) throw SpecError(spec.name + ": no output array");

  for (const auto& [name, d] : spec.derived) {
    if (!spec.find(name)) throw SpecError(spec.name + ": derived unknown param '" + name + "'");
    for (const auto& [c, t] : d.terms)
      if (!spec.find(t)) throw SpecError(spec.name + ": derived term unknown param '" + t + "'");
  }
}

ApiSpec from_json(const json& j) {
  ApiSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.affix = j.value("affix", "");
  std::string layout = j.value("layout", "rowmajor");
  if (layout == "rowmajor")
    spec.layout = Layout::RowMajor;
  else if (layout == "colmajor")
    spec.layout = Layout::ColMajor;
  else
    throw SpecError(spec.name + ": bad layout '" + layout + "'");
  spec.semantics = j.at("semantics").get<std::string>();
  for (const auto& pj : j.at("params")) {
    ApiParam p;
    p.name = pj.at("name").get<std::string>();
    p.kind = parse_kind(pj.at("kind").get<std::string>());
    p.liveness = parse_liveness(pj.value("liveness", "livein"));
    if (pj.contains("dims")) p.dims = pj.at("dims").get<std::vector<std::string>>();
    p.element_type = pj.value("element_type", "any");
    p.role = pj.value("role", "");
    spec.params.push_back(std::move(p));
  }
  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    if (s.contains("ranges"))
      for (const auto& [name, r] : s.at("ranges").items())
        spec.ranges[name] = {r.at(0).get<long long>(), r.at(1).get<long long>()};
    if (s.contains("derived"))
      for (const auto& [name, d] : s.at("derived").items())
        spec.derived[name] = parse_derived(d);
  }
  validate(spec);
  return spec;
}

}  // namespace

ApiSpec parse_api_spec(const std::string& json_text) {
  return from_json(json::parse(json_text));
}

ApiSpec load_api_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read api spec '" + path + "'");
  json j = json::parse(in, nullptr, true, true);  // allow comments
  return from_json(j);
}

SizeRules parse_size_rules(const std::string& json_text) {
  json j = json::parse(json_text);
  SizeRules r;
  if (j.contains("ranges"))
    for (const auto& [name, range] : j.at("ranges").items())
      r.ranges[name] = {range.at(0).get<long long>(), range.at(1).get<long long>()};
  if (j.contains("equal"))
    for (const auto& g : j.at("equal"))
      r.equal_groups.push_back(g.get<std::vector<std::string>>());
  if (j.contains("multiple_of"))
    for (const auto& [name, k] : j.at("multiple_of").items())
      r.multiple_of[name] = k.get<long long>();
  if (j.contains("power_of_two"))
    for (const auto& name : j.at("power_of_two")) r.power_of_two.insert(name.get<std::string>());
  if (j.contains("derived"))
    for (const auto& [name, dj] : j.at("derived").items()) {
      UserDerived d;
      d.is_product = dj.value("kind", "affine") == "product";
      if (d.is_product) {
        for (const auto& t : dj.at("terms")) d.terms.emplace_back(1, t.get<std::string>());
      } else {
        for (const auto& t : dj.at("terms"))
          d.terms.emplace_back(t.at(0).get<long long>(), t.at(1).get<std::string>());
        d.constant = dj.value("constant", 0LL);
      }
      r.derived[name] = d;
    }
  return r;
}

long long eval_derived(const UserDerived& d, const std::map<std::string, long long>& values) {
  auto value_of = [&](const std::string& name) {
    auto it = values.find(name);
    if (it == values.end()) throw SpecError("derived rule references unknown '" + name + "'");
    return it->second;
  };
  if (d.is_product) {
    long long v = 1;
    for (const auto& [c, name] : d.terms) v *= value_of(name);
    return v;
  }
  long long v = d.constant;
  for (const auto& [c, name] : d.terms) v += c * value_of(name);
  return v;
}

}  // namespace liftc::api
