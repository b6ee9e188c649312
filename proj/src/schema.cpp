#include "psos/schema.hpp"

namespace psos {

namespace {

using nlohmann::json;

bool matches_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

void walk(const json& v, const json& schema, const std::string& path,
          std::vector<std::string>& out) {
  auto fail = [&](const std::string& m) {
    out.push_back((path.empty() ? "$" : path) + ": " + m);
  };

  if (schema.contains("type")) {
    const json& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = matches_type(v, t.get<std::string>());
    } else if (t.is_array()) {
      for (const json& alt : t)
        if (alt.is_string() && matches_type(v, alt.get<std::string>())) ok = true;
    }
    if (!ok) {
      fail("expected type " + t.dump());
      return;  // further checks would just cascade
    }
  }

  if (schema.contains("enum")) {
    bool ok = false;
    for (const json& alt : schema.at("enum"))
      if (alt == v) ok = true;
    if (!ok) fail("value " + v.dump() + " not in enum");
  }

  if (v.is_number()) {
    double x = v.get<double>();
    if (schema.contains("minimum") && x < schema.at("minimum").get<double>())
      fail("below minimum " + schema.at("minimum").dump());
    if (schema.contains("exclusiveMinimum") &&
        x <= schema.at("exclusiveMinimum").get<double>())
      fail("not above exclusiveMinimum " + schema.at("exclusiveMinimum").dump());
    if (schema.contains("maximum") && x > schema.at("maximum").get<double>())
      fail("above maximum " + schema.at("maximum").dump());
  }

  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const json& name : schema.at("required"))
        if (!v.contains(name.get<std::string>()))
          fail("missing required field '" + name.get<std::string>() + "'");
    }
    const json* props =
        schema.contains("properties") ? &schema.at("properties") : nullptr;
    for (auto it = v.begin(); it != v.end(); ++it) {
      std::string child = (path.empty() ? "$." : path + ".") + it.key();
      if (props && props->contains(it.key())) {
        walk(it.value(), props->at(it.key()), child, out);
      } else if (schema.contains("additionalProperties") &&
                 schema.at("additionalProperties").is_boolean() &&
                 !schema.at("additionalProperties").get<bool>()) {
        out.push_back(child + ": unexpected field");
      }
    }
  }

  if (v.is_array() && schema.contains("items")) {
    const json& items = schema.at("items");
    for (std::size_t i = 0; i < v.size(); ++i)
      walk(v[i], items,
           (path.empty() ? "$" : path) + "[" + std::to_string(i) + "]", out);
  }
}

}  // namespace

std::vector<std::string> schema_violations(const nlohmann::json& value,
                                           const nlohmann::json& schema) {
  std::vector<std::string> out;
  walk(value, schema, "", out);
  return out;
}

}  // namespace psos
