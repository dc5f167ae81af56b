#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lutscope/properties.hpp"

namespace lutscope {

Property extract_constant(const std::string& signal, LogicValue observed) {
  if (!is_known(observed))
    throw Error(fmt::format("signal '{}' has no constant value to assert ({})", signal,
                            observed == LogicValue::Z ? "high-Z" : "unknown"));
  Property p;
  p.kind = Property::Kind::Constant;
  p.id = "const:" + signal;
  p.source = "low_switch:" + signal;
  p.constant = {signal, observed == LogicValue::One};
  return p;
}

Property extract_coverage(const std::string& cell, unsigned k, std::uint64_t cover, std::vector<std::string> lines) {
  if (k < 1 || k > 6) throw Error(fmt::format("LUT '{}': size {} out of range", cell, k));
  cover &= width_mask(init_width(k));
  if (cover == width_mask(init_width(k))) throw Error(fmt::format("LUT '{}' is fully covered", cell));
  if (lines.empty())
    for (unsigned i = 0; i < k; ++i) lines.push_back(fmt::format("a{}", i));
  if (lines.size() != k) throw Error(fmt::format("LUT '{}': {} line names for {} lines", cell, lines.size(), k));
  Property p;
  p.kind = Property::Kind::Never;
  p.id = "never:" + cell;
  p.source = "low_coverage:" + cell;
  p.never.cell = cell;
  p.never.k = k;
  p.never.cover = cover;
  p.never.lines = std::move(lines);
  p.never.cubes = minimize(k, p.never.uncovered());
  return p;
}

std::vector<Property> extract_properties(const Design& d, const AnalysisResult& r) {
  std::vector<Property> out;
  for (const auto& s : r.low_switch)
    if (s.reason == LowSwitchReason::CandidateTrigger) out.push_back(extract_constant(s.signal, s.value));
  for (const auto& l : r.low_coverage) {
    auto li = d.find_lut(l.cell);
    if (!li) throw Error(fmt::format("analysis names unknown LUT '{}'", l.cell));
    const auto& lut = d.luts()[*li];
    if (lut.k != l.k) throw Error(fmt::format("LUT '{}' has {} inputs, analysis says {}", l.cell, lut.k, l.k));
    std::vector<std::string> lines;
    for (NetId n : lut.inputs()) lines.push_back(d.net(n).name);
    out.push_back(extract_coverage(l.cell, l.k, l.cover, std::move(lines)));
  }
  return out;
}

std::string cube_expression(const NeverProperty& p, const Cube& c) {
  std::string s;
  for (unsigned i = p.k; i-- > 0;) {
    if (!((c.mask >> i) & 1u)) continue;
    if (!s.empty()) s += " & ";
    if (!((c.value >> i) & 1u)) s += "~";
    s += p.lines[i];
  }
  return s.empty() ? "1" : s;
}

std::string emit_sva(const Property& p) {
  if (p.kind == Property::Kind::Constant)
    return fmt::format("assert ({} == {})\n", p.constant.signal, p.constant.value ? 1 : 0);
  std::string out;
  for (const auto& c : p.never.cubes) out += fmt::format("assert ({} == 0)\n", cube_expression(p.never, c));
  return out;
}

std::string emit_blif(const std::string& cell, unsigned k, std::uint64_t cover, const std::vector<std::string>& lines) {
  if (k < 1 || k > 6) throw Error(fmt::format("LUT '{}': size {} out of range", cell, k));
  std::vector<std::string> names = lines;
  if (names.empty())
    for (unsigned i = 0; i < k; ++i) names.push_back(fmt::format("a{}", i));
  if (names.size() != k) throw Error(fmt::format("LUT '{}': {} line names for {} lines", cell, names.size(), k));
  auto blif_name = [](std::string s) {
    for (char& c : s)
      if (c == ' ' || c == '\t' || c == '#' || c == '\\') c = '_';
    return s;
  };
  std::string inputs;
  for (unsigned i = k; i-- > 0;) inputs += " " + blif_name(names[i]);
  std::string out = fmt::format(".model {}_uncovered\n.inputs{}\n.outputs uncovered\n.names{} uncovered\n",
                                blif_name(cell), inputs, inputs);
  const std::uint64_t onset = ~cover & width_mask(init_width(k));
  for (std::uint64_t m = 0; m < init_width(k); ++m) {
    if (!((onset >> m) & 1u)) continue;
    std::string row;
    for (unsigned i = k; i-- > 0;) row += ((m >> i) & 1u) ? '1' : '0';
    out += row + " 1\n";
  }
  out += ".end\n";
  return out;
}

std::string properties_to_json_text(const std::vector<Property>& ps) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : ps) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["source"] = p.source;
    if (p.kind == Property::Kind::Constant) {
      j["kind"] = "constant";
      j["signal"] = p.constant.signal;
      j["value"] = p.constant.value ? 1 : 0;
    } else {
      const unsigned bits = init_width(p.never.k);
      j["kind"] = "never";
      j["cell"] = p.never.cell;
      j["k"] = p.never.k;
      j["cover_hex"] = to_hex(p.never.cover, bits);
      j["lines"] = p.never.lines;
      auto cubes = nlohmann::ordered_json::array();
      for (const auto& c : p.never.cubes) cubes.push_back(c.key(p.never.k));
      j["cubes"] = cubes;
    }
    std::string sva = emit_sva(p);
    if (!sva.empty() && sva.back() == '\n') sva.pop_back();
    j["sva"] = sva;
    arr.push_back(j);
  }
  nlohmann::ordered_json root;
  root["properties"] = arr;
  return root.dump(2);
}

namespace {

Cube cube_from_key(const std::string& key, unsigned k) {
  if (key.size() != k) throw Error(fmt::format("cube '{}' does not have {} lines", key, k));
  Cube c;
  for (unsigned i = 0; i < k; ++i) {
    char ch = key[k - 1 - i];
    if (ch == '-') continue;
    if (ch != '0' && ch != '1') throw Error(fmt::format("bad cube '{}'", key));
    c.mask |= std::uint64_t{1} << i;
    if (ch == '1') c.value |= std::uint64_t{1} << i;
  }
  return c;
}

} // namespace

std::vector<Property> properties_from_json_text(std::string_view text) {
  std::vector<Property> out;
  try {
    auto root = nlohmann::json::parse(text);
    for (const auto& j : root.at("properties")) {
      Property p;
      p.id = j.at("id").get<std::string>();
      p.source = j.value("source", std::string{});
      auto kind = j.at("kind").get<std::string>();
      if (kind == "constant") {
        p.kind = Property::Kind::Constant;
        p.constant.signal = j.at("signal").get<std::string>();
        p.constant.value = j.at("value").get<int>() != 0;
      } else if (kind == "never") {
        p.kind = Property::Kind::Never;
        p.never.cell = j.at("cell").get<std::string>();
        p.never.k = j.at("k").get<unsigned>();
        if (p.never.k < 1 || p.never.k > 6) throw Error(fmt::format("property '{}': bad k", p.id));
        p.never.cover = parse_hex(j.at("cover_hex").get<std::string>(), init_width(p.never.k));
        p.never.lines = j.at("lines").get<std::vector<std::string>>();
        if (p.never.lines.size() != p.never.k) throw Error(fmt::format("property '{}': line count", p.id));
        for (const auto& c : j.at("cubes")) p.never.cubes.push_back(cube_from_key(c.get<std::string>(), p.never.k));
      } else {
        throw Error(fmt::format("property '{}': unknown kind '{}'", p.id, kind));
      }
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("properties: {}", e.what()));
  }
  return out;
}

} // namespace lutscope
