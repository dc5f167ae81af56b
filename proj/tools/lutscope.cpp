// lutscope: command-line front end. Each subcommand is one stage of the
// detection and prevention flow; `pipeline` runs them all.
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 confirmed Trojan,
// 4 resource cap reached or verdict UNKNOWN.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "lutscope/benchgen.hpp"
#include "lutscope/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lutscope;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kInput = 2, kTrojan = 3, kCap = 4 };

class InputError : public Error {
public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

std::string sha256(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

// Artifacts are JSON objects with a "links" map of input name -> SHA-256, so
// a stage fed with outputs of a different netlist refuses to run.
std::string with_links(const std::string& text, const json& links, const char* array_key = nullptr) {
  json body = json::parse(text);
  json out;
  out["links"] = links;
  if (array_key) {
    out[array_key] = body;
  } else {
    for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
  }
  return out.dump(2) + "\n";
}

struct Artifact {
  json doc;
  std::string hash;
  std::string path;

  /// The artifact body as text, without links (or the named array).
  std::string body(const char* array_key = nullptr) const {
    if (array_key) {
      if (!doc.is_object() || !doc.contains(array_key))
        throw InputError(fmt::format("'{}' has no '{}' array", path, array_key));
      return doc.at(array_key).dump();
    }
    json b = doc;
    if (b.is_object()) b.erase("links");
    return b.dump();
  }
  void expect_link(const std::string& name, const std::string& hash_of_input) const {
    if (!doc.is_object() || !doc.contains("links")) return;
    const auto& l = doc.at("links");
    if (l.contains(name) && l.at(name).get<std::string>() != hash_of_input)
      throw InputError(fmt::format("stale artifact: '{}' was produced from a different {}", path, name));
  }
};

Artifact load_artifact(const std::string& path) {
  Artifact a;
  a.path = path;
  const auto text = read_file(path);
  a.hash = sha256(text);
  try {
    a.doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("'{}' is not valid JSON: {}", path, e.what()));
  }
  return a;
}

struct LoadedNetlist {
  Netlist netlist;
  std::string hash;
};

LoadedNetlist load_netlist(const std::string& path) {
  const auto text = read_file(path);
  return {parse_netlist(text), sha256(text)};
}

PortRoles load_roles(const std::string& path) { return path.empty() ? PortRoles{} : PortRoles::from_json_text(read_file(path)); }

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t given) {
  if (opt->count()) return given;
  if (const char* env = std::getenv("LUTSCOPE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(fmt::format("LUTSCOPE_SEED '{}' is not a number", env));
    }
  }
  return 1;
}

std::vector<std::uint64_t> parse_schedule(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw InputError(fmt::format("bad schedule entry '{}'", item));
    }
  }
  return out;
}

std::uint64_t parse_hex_arg(const std::string& s) {
  std::string digits = s;
  if (digits.starts_with("0x") || digits.starts_with("0X")) digits = digits.substr(2);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(digits, &used, 16);
    if (used != digits.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(fmt::format("'{}' is not a hex number", s));
  }
}

// Options shared by every subcommand that builds a design.
struct Common {
  std::string netlist, roles, out;
  std::uint64_t seed = 1;
  CLI::Option* seed_opt = nullptr;
};

void add_netlist(CLI::App* app, Common& c, bool required = true) {
  auto* o = app->add_option("--netlist", c.netlist, "LUT-level Verilog netlist");
  if (required) o->required()->check(CLI::ExistingFile);
  app->add_option("--roles", c.roles, "port-role JSON (clock/reset/free)")->check(CLI::ExistingFile);
}

// The option is bound to the subcommand that actually runs, in its callback.
CLI::Option* add_seed(CLI::App* app, Common& c) {
  return app->add_option("--seed", c.seed, "random seed (default: $LUTSCOPE_SEED, else 1)");
}

ConvergeOptions converge_options(std::uint64_t seed, const std::string& schedule, int stable, bool full) {
  ConvergeOptions o;
  o.seed = seed;
  if (!schedule.empty()) o.schedule = parse_schedule(schedule);
  o.stable_rounds = stable;
  o.run_full_schedule = full;
  return o;
}

// --- subcommands -------------------------------------------------------

int cmd_simulate(const Common& c, std::uint64_t cycles, const std::string& trigger_path, std::uint64_t extra,
                 const std::string& stimulus_out) {
  auto n = load_netlist(c.netlist);
  const Design d = Design::build(n.netlist, load_roles(c.roles));
  EventTrace t;
  if (!trigger_path.empty()) {
    const auto a = load_artifact(trigger_path);
    a.expect_link("netlist", n.hash);
    t = replay(d, Trigger::from_json_text(a.body()), {.extra_steps = extra});
  } else {
    auto s = random_stimulus(d, resolve_seed(c.seed_opt, c.seed), cycles);
    if (!stimulus_out.empty()) write_file(stimulus_out, s.to_json_text() + "\n");
    t = simulate(d, s, cycles);
  }
  write_file(c.out, export_vcd(t, n.netlist.top_module().name));
  std::cout << fmt::format("{} cycles, {} signals, {} events -> {}\n", t.length, t.signals.size(), t.events.size(), c.out);
  return kOk;
}

int cmd_analyze(const Common& c, const std::string& vcd) {
  auto n = load_netlist(c.netlist);
  const Design d = Design::build(n.netlist, load_roles(c.roles));
  const auto vcd_text = read_file(vcd);
  EventTrace t;
  try {
    t = import_vcd(vcd_text, &d);
  } catch (const Error& e) {
    throw InputError(fmt::format("trace '{}' does not match the netlist: {}", vcd, e.what()));
  }
  const auto r = analyze(d, t);
  write_file(c.out, with_links(analysis_to_json_text(r), {{"netlist", n.hash}, {"vcd", sha256(vcd_text)}}));
  std::cout << fmt::format("{} cycles: {} low switching signals, {} low coverage LUTs -> {}\n", r.trace_len,
                           r.low_switch.size(), r.low_coverage.size(), c.out);
  return kOk;
}

int cmd_converge(const Common& c, const std::string& schedule, int stable, bool full) {
  auto n = load_netlist(c.netlist);
  const Design d = Design::build(n.netlist, load_roles(c.roles));
  const auto opts = converge_options(resolve_seed(c.seed_opt, c.seed), schedule, stable, full);
  const auto rep = converge(d, opts);
  write_file(c.out, with_links(analysis_to_json_text(rep.final, &rep), {{"netlist", n.hash}}));
  for (const auto& h : rep.history) std::cout << fmt::format("{:>8} cycles  |S| {:>4}  |L| {:>4}\n", h.length, h.low_switch, h.low_coverage);
  std::cout << (rep.converged ? "converged\n" : "not converged\n");
  return kOk;
}

int cmd_extract(const Common& c, const std::string& analysis_path, const std::string& sva, const std::string& blif_dir) {
  auto n = load_netlist(c.netlist);
  const Design d = Design::build(n.netlist, load_roles(c.roles));
  const auto a = load_artifact(analysis_path);
  a.expect_link("netlist", n.hash);
  const auto r = analysis_from_json_text(a.body());
  const auto props = extract_properties(d, r);
  write_file(c.out, with_links(properties_to_json_text(props), {{"netlist", n.hash}, {"analysis", a.hash}}, "properties"));
  if (!sva.empty()) {
    std::string text;
    for (const auto& p : props) text += emit_sva(p);
    write_file(sva, text);
  }
  if (!blif_dir.empty()) {
    for (const auto& p : props)
      if (p.kind == Property::Kind::Never)
        write_file(fs::path(blif_dir) / (p.never.cell + ".blif"), emit_blif(p.never.cell, p.never.k, p.never.cover, p.never.lines));
  }
  for (const auto& p : props) std::cout << p.id << ": " << emit_sva(p);
  return kOk;
}

int cmd_prove(const Common& c, const std::string& props_path, const std::string& method, unsigned depth,
              std::uint64_t budget, const std::string& trigger_dir, const std::string& dimacs_dir) {
  auto n = load_netlist(c.netlist);
  const Design d = Design::build(n.netlist, load_roles(c.roles));
  const auto a = load_artifact(props_path);
  a.expect_link("netlist", n.hash);
  const auto props = properties_from_json_text(a.body("properties"));
  ProveOptions po;
  po.conflict_budget = budget;
  if (depth) po.max_depth = depth;
  json arr = json::array();
  bool unknown = false;
  for (const auto& p : props) {
    ProofResult r;
    if (method == "chain") r = backtrace_chain(d, p, po);
    else if (method == "bmc") r = prove_bmc(d, p, depth ? depth : 16, po);
    else r = prove_combinational(d, p, po);
    unknown |= r.status == ProofStatus::Unknown;
    arr.push_back(json::parse(r.to_json_text()));
    std::cout << fmt::format("{}: {} ({}{})\n", p.id, to_string(r.status), r.method, r.confirmed ? ", confirmed" : "");
    std::cout << render_proof_table(r);
    if (r.trigger && !trigger_dir.empty())
      write_file(fs::path(trigger_dir) / (fmt::format("trigger_{}.json", arr.size() - 1)),
                 with_links(r.trigger->to_json_text(), {{"netlist", n.hash}}));
    if (!dimacs_dir.empty())
      write_file(fs::path(dimacs_dir) / fmt::format("property_{}.cnf", arr.size() - 1), property_cnf(d, p).to_dimacs());
  }
  write_file(c.out, with_links(arr.dump(), {{"netlist", n.hash}, {"properties", a.hash}}, "proofs"));
  return unknown ? kCap : kOk;
}

int cmd_patch(const Common& c, const std::string& analysis_path, const std::string& proofs_path,
              const std::vector<std::string>& cells_arg, bool all, const std::string& plan_in,
              const std::string& netlist_out, const std::string& equiv_out) {
  auto n = load_netlist(c.netlist);
  const auto roles = load_roles(c.roles);
  const Design d = Design::build(n.netlist, roles);
  json links = {{"netlist", n.hash}};
  PatchPlan plan;
  if (!plan_in.empty()) {
    const auto a = load_artifact(plan_in);
    a.expect_link("netlist", n.hash);
    plan = PatchPlan::from_json_text(a.body());
    links["plan"] = a.hash;
  } else {
    if (analysis_path.empty()) throw InputError("patch needs --analysis (or --plan)");
    const auto a = load_artifact(analysis_path);
    a.expect_link("netlist", n.hash);
    links["analysis"] = a.hash;
    const auto r = analysis_from_json_text(a.body());
    std::vector<std::string> cells = cells_arg;
    if (all) {
      for (const auto& l : r.low_coverage) cells.push_back(l.cell);
    } else if (cells.empty()) {
      if (proofs_path.empty()) throw InputError("patch needs --proofs, --cell or --all-low-coverage");
      const auto pa = load_artifact(proofs_path);
      pa.expect_link("netlist", n.hash);
      links["proofs"] = pa.hash;
      std::vector<ProofResult> proofs;
      for (const auto& j : json::parse(pa.body("proofs"))) proofs.push_back(ProofResult::from_json_text(j.dump()));
      cells = confirmed_trigger_luts(d, r, proofs);
    }
    plan = make_plan(d, r, cells);
  }
  write_file(c.out, with_links(plan.to_json_text(), links));
  for (const auto& e : plan.patches)
    std::cout << fmt::format("{}: {} -> {} (cover {})\n", e.cell, to_hex(e.old_init, init_width(e.k)),
                             to_hex(e.new_init, init_width(e.k)), to_hex(e.coverage, init_width(e.k)));
  if (plan.patches.empty()) std::cout << "empty plan\n";
  const Netlist patched = apply_plan(n.netlist, plan);
  if (!netlist_out.empty()) write_file(netlist_out, emit_netlist(patched));
  if (!equiv_out.empty()) {
    const Design p = Design::build(patched, roles);
    EquivOptions eo;
    eo.seed = resolve_seed(c.seed_opt, c.seed);
    const auto full = equivalence_check(d, p, eo);
    for (const auto& e : plan.patches) eo.care[e.cell] = e.coverage;
    const auto care = equivalence_check(d, p, eo);
    json j;
    j["links"] = links;
    j["full"] = json::parse(equivalence_to_json_text(full));
    j["care_set"] = json::parse(equivalence_to_json_text(care));
    write_file(equiv_out, j.dump(2) + "\n");
    std::cout << fmt::format("equivalence: full {}, care set {}\n", to_string(full.status), to_string(care.status));
    if (full.status == EquivStatus::Unknown || care.status == EquivStatus::Unknown) return kCap;
  }
  return kOk;
}

int cmd_verify(const Common& c, const std::string& original, const std::string& patched, const std::string& trigger_path,
               const std::string& signal, std::uint64_t vectors, const std::string& vcd_prefix) {
  auto a = load_netlist(original);
  auto b = load_netlist(patched);
  const auto roles = load_roles(c.roles);
  const Design da = Design::build(a.netlist, roles), db = Design::build(b.netlist, roles);
  const auto t = load_artifact(trigger_path);
  t.expect_link("netlist", a.hash);
  const auto trig = Trigger::from_json_text(t.body());
  MitigationOptions mo;
  mo.random_vectors = vectors;
  mo.seed = resolve_seed(c.seed_opt, c.seed);
  const auto rep = verify_mitigation(da, db, trig, signal, mo);
  write_file(c.out, with_links(mitigation_to_json_text(rep, signal),
                               {{"original", a.hash}, {"patched", b.hash}, {"trigger", t.hash}}));
  if (!vcd_prefix.empty()) {
    const ReplayOptions ro{.extra_steps = mo.extra_steps};
    write_file(vcd_prefix + "_original.vcd", export_vcd(replay(da, trig, ro), a.netlist.top_module().name));
    write_file(vcd_prefix + "_patched.vcd", export_vcd(replay(db, trig, ro), b.netlist.top_module().name));
  }
  std::cout << fmt::format("original trigger: {}\npatched trigger: {}\noutputs on {} random vectors: {}\n{}\n",
                           rep.original_fires ? "fires" : "did not activate", rep.patched_silent ? "stays low" : "fires",
                           rep.vectors_compared, rep.outputs_match ? "identical" : "differ (" + rep.mismatch + ")",
                           rep.passed() ? "PASS" : "FAIL");
  if (!rep.original_fires) return kCap;
  return rep.passed() ? kOk : kTrojan;
}

int cmd_bench(const Common& c, const std::string& archetype, unsigned width, const std::string& pattern, unsigned stages,
              unsigned counter_bits, std::uint64_t threshold, std::string truth_path) {
  BenchSpec s;
  s.archetype = archetype_from_string(archetype);
  s.width = width;
  s.pattern = pattern.empty() ? 0 : parse_hex_arg(pattern);
  s.stages = stages;
  s.counter_bits = counter_bits;
  s.threshold = threshold;
  s.seed = resolve_seed(c.seed_opt, c.seed);
  const auto b = generate(s);
  write_file(c.out, b.text);
  if (truth_path.empty()) truth_path = fs::path(c.out).replace_extension(".truth.json").string();
  write_file(truth_path, with_links(b.truth.to_json_text(), {{"netlist", sha256(b.text)}}));
  std::cout << fmt::format("{} -> {} (ground truth {})\n", to_string(s.archetype), c.out, truth_path);
  return kOk;
}

struct PipelineArgs {
  std::string schedule;
  int stable = 3;
  std::uint64_t budget = 200000;
  unsigned depth = 16;
  unsigned bmc_depth = 0;
  bool all = false;
  std::uint64_t vectors = 1000;
};

int cmd_pipeline(const Common& c, const PipelineArgs& pa) {
  auto n = load_netlist(c.netlist);
  PipelineConfig cfg;
  cfg.roles = load_roles(c.roles);
  const auto seed = resolve_seed(c.seed_opt, c.seed);
  cfg.converge = converge_options(seed, pa.schedule, pa.stable, false);
  cfg.prove.conflict_budget = pa.budget;
  cfg.prove.max_depth = pa.depth;
  cfg.bmc_depth = pa.bmc_depth;
  cfg.all_low_coverage = pa.all;
  cfg.mitigation.random_vectors = pa.vectors;
  const auto r = run_pipeline(n.netlist, cfg);

  const fs::path dir(c.out);
  json artifacts;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    artifacts[name] = sha256(text);
  };
  const json base = {{"netlist", n.hash}};
  put("analysis.json", with_links(analysis_to_json_text(r.convergence.final, &r.convergence), base));
  json plinks = base;
  plinks["analysis"] = artifacts["analysis.json"];
  put("properties.json", with_links(properties_to_json_text(r.properties), plinks, "properties"));
  std::string sva;
  for (const auto& p : r.properties) sva += emit_sva(p);
  put("properties.sva", sva);
  json proofs = json::array();
  for (const auto& p : r.proofs) proofs.push_back(json::parse(p.to_json_text()));
  json prlinks = base;
  prlinks["properties"] = artifacts["properties.json"];
  put("proofs.json", with_links(proofs.dump(), prlinks, "proofs"));
  json triggers = json::array();
  for (std::size_t i = 0; i < r.proofs.size(); ++i) {
    const auto& p = r.proofs[i];
    if (p.status != ProofStatus::Fail || !p.confirmed || !p.trigger) continue;
    const auto name = fmt::format("trigger_{}.json", i);
    put(name, with_links(p.trigger->to_json_text(), base));
    triggers.push_back({{"property", r.properties[i].id}, {"file", name}, {"trigger", json::parse(p.trigger->to_json_text())}});
  }
  if (r.patched) {
    json l = base;
    l["proofs"] = artifacts["proofs.json"];
    put("plan.json", with_links(r.plan.to_json_text(), l));
    put("patched.v", emit_netlist(*r.patched));
    json eq;
    eq["links"] = {{"netlist", n.hash}, {"patched", artifacts["patched.v"]}};
    eq["full"] = json::parse(equivalence_to_json_text(*r.equiv_full));
    eq["care_set"] = json::parse(equivalence_to_json_text(*r.equiv_care));
    put("equivalence.json", eq.dump(2) + "\n");
  }
  json mit = json::array();
  for (const auto& m : r.mitigations) {
    json j = json::parse(mitigation_to_json_text(m.report, m.signal));
    j["property"] = m.property;
    mit.push_back(j);
  }
  if (!mit.empty()) put("mitigation.json", with_links(mit.dump(), {{"netlist", n.hash}, {"patched", artifacts["patched.v"]}}, "checks"));
  const auto text = render_report(r);
  put("report.txt", text);

  json rep;
  rep["netlist"] = n.hash;
  rep["top"] = r.top;
  rep["seed"] = seed;
  rep["config"] = {{"schedule", cfg.converge.schedule},
                   {"stable_rounds", cfg.converge.stable_rounds},
                   {"conflict_budget", cfg.prove.conflict_budget},
                   {"max_depth", cfg.prove.max_depth},
                   {"bmc_depth", cfg.bmc_depth},
                   {"all_low_coverage", cfg.all_low_coverage},
                   {"random_vectors", cfg.mitigation.random_vectors}};
  rep["converged"] = r.convergence.converged;
  rep["low_switch"] = r.convergence.final.low_switch.size();
  rep["low_coverage"] = r.convergence.final.low_coverage.size();
  rep["trojan_confirmed"] = r.trojan_confirmed();
  rep["any_unknown"] = r.any_unknown();
  rep["triggers"] = triggers;
  rep["patched_cells"] = json::array();
  for (const auto& e : r.plan.patches) rep["patched_cells"].push_back(e.cell);
  if (!r.mitigations.empty()) rep["mitigated"] = r.mitigated();
  rep["artifacts"] = artifacts;
  write_file(dir / "report.json", rep.dump(2) + "\n");

  std::cout << text;
  if (r.trojan_confirmed()) return kTrojan;
  return r.any_unknown() ? kCap : kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"LUT-level hardware Trojan detection and prevention"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lutscope 0.1");

  Common c;
  std::function<int()> run;

  auto* sim = app.add_subcommand("simulate", "random or trigger simulation to VCD");
  std::uint64_t cycles = 1000, extra = 2;
  std::string trigger, stim_out;
  add_netlist(sim, c);
  auto* sim_seed = add_seed(sim, c);
  sim->add_option("--cycles", cycles, "random cycles");
  sim->add_option("--trigger", trigger, "replay this trigger JSON instead")->check(CLI::ExistingFile);
  sim->add_option("--extra-steps", extra, "steps after a replayed trigger");
  sim->add_option("--stimulus-out", stim_out, "also write the random stimulus JSON");
  sim->add_option("--out", c.out, "VCD output")->required();
  sim->callback([&] { c.seed_opt = sim_seed; run = [&] { return cmd_simulate(c, cycles, trigger, extra, stim_out); }; });

  auto* ana = app.add_subcommand("analyze", "switching and coverage analysis of a VCD trace");
  std::string vcd;
  add_netlist(ana, c);
  ana->add_option("--vcd", vcd, "trace")->required()->check(CLI::ExistingFile);
  ana->add_option("--out", c.out, "analysis JSON")->required();
  ana->callback([&] { run = [&] { return cmd_analyze(c, vcd); }; });

  auto* conv = app.add_subcommand("converge", "simulate over growing lengths until findings settle");
  std::string schedule;
  int stable = 3;
  bool full = false;
  add_netlist(conv, c);
  auto* conv_seed = add_seed(conv, c);
  conv->add_option("--schedule", schedule, "comma-separated trace lengths");
  conv->add_option("--stable-rounds", stable, "identical rounds needed (m)");
  conv->add_flag("--full-schedule", full, "keep going after convergence");
  conv->add_option("--out", c.out, "analysis JSON with history")->required();
  conv->callback([&] { c.seed_opt = conv_seed; run = [&] { return cmd_converge(c, schedule, stable, full); }; });

  auto* ext = app.add_subcommand("extract", "properties from analysis findings");
  std::string analysis, sva, blif_dir;
  add_netlist(ext, c);
  ext->add_option("--analysis", analysis, "analysis JSON")->required()->check(CLI::ExistingFile);
  ext->add_option("--sva", sva, "also write SVA assertions");
  ext->add_option("--blif-dir", blif_dir, "also write one BLIF per never-property");
  ext->add_option("--out", c.out, "properties JSON")->required();
  ext->callback([&] { run = [&] { return cmd_extract(c, analysis, sva, blif_dir); }; });

  auto* prv = app.add_subcommand("prove", "prove or refute properties");
  std::string props, method = "chain", trigger_dir, dimacs_dir;
  unsigned depth = 0;
  std::uint64_t budget = 200000;
  add_netlist(prv, c);
  prv->add_option("--properties", props, "properties JSON")->required()->check(CLI::ExistingFile);
  prv->add_option("--method", method, "chain, bmc or combinational")
      ->check(CLI::IsMember({"chain", "bmc", "combinational"}));
  prv->add_option("--depth", depth, "chain steps or BMC frames");
  prv->add_option("--budget", budget, "conflicts per SAT call (0 = unlimited)");
  prv->add_option("--trigger-dir", trigger_dir, "write each counterexample trigger here");
  prv->add_option("--dimacs-dir", dimacs_dir, "write each property CNF here");
  prv->add_option("--out", c.out, "proof transcript JSON")->required();
  prv->callback([&] { run = [&] { return cmd_prove(c, props, method, depth, budget, trigger_dir, dimacs_dir); }; });

  auto* pat = app.add_subcommand("patch", "plan and apply LUT reconfiguration");
  std::string proofs, plan_in, netlist_out, equiv_out;
  std::vector<std::string> cells;
  bool all = false;
  add_netlist(pat, c);
  auto* pat_seed = add_seed(pat, c);
  pat->add_option("--analysis", analysis, "analysis JSON")->check(CLI::ExistingFile);
  pat->add_option("--proofs", proofs, "proof transcript; patches the confirmed trigger LUTs")->check(CLI::ExistingFile);
  pat->add_option("--cell", cells, "patch these low-coverage LUTs");
  pat->add_flag("--all-low-coverage", all, "patch every low-coverage LUT");
  pat->add_option("--plan", plan_in, "apply an existing plan")->check(CLI::ExistingFile);
  pat->add_option("--netlist-out", netlist_out, "patched netlist");
  pat->add_option("--equiv-out", equiv_out, "run full and care-set equivalence, write JSON");
  pat->add_option("--out", c.out, "plan JSON")->required();
  pat->callback([&] { c.seed_opt = pat_seed; run = [&] { return cmd_patch(c, analysis, proofs, cells, all, plan_in, netlist_out, equiv_out); }; });

  auto* ver = app.add_subcommand("verify", "replay a trigger on original and patched designs");
  std::string original, patched, signal = "Tj_Trig", vcd_prefix;
  std::uint64_t vectors = 1000;
  ver->add_option("--original", original, "original netlist")->required()->check(CLI::ExistingFile);
  ver->add_option("--patched", patched, "patched netlist")->required()->check(CLI::ExistingFile);
  ver->add_option("--roles", c.roles, "port-role JSON")->check(CLI::ExistingFile);
  auto* ver_seed = add_seed(ver, c);
  ver->add_option("--trigger", trigger, "trigger JSON")->required()->check(CLI::ExistingFile);
  ver->add_option("--signal", signal, "trigger signal to watch");
  ver->add_option("--vectors", vectors, "random comparison vectors");
  ver->add_option("--vcd-prefix", vcd_prefix, "also write <prefix>_original.vcd and <prefix>_patched.vcd");
  ver->add_option("--out", c.out, "mitigation report JSON")->required();
  ver->callback([&] { c.seed_opt = ver_seed; run = [&] { return cmd_verify(c, original, patched, trigger, signal, vectors, vcd_prefix); }; });

  auto* ben = app.add_subcommand("bench", "generate a synthetic Trojan benchmark");
  std::string archetype = "pattern-lock", pattern, truth;
  unsigned width = 16, stages = 1, counter_bits = 8;
  std::uint64_t threshold = 0;
  auto* ben_seed = add_seed(ben, c);
  ben->add_option("--archetype", archetype, "pattern-lock, counter-lock or sdc-pair");
  ben->add_option("--width", width, "datapath width");
  ben->add_option("--pattern", pattern, "pattern-lock trigger input (hex)");
  ben->add_option("--stages", stages, "pattern-lock register stages");
  ben->add_option("--counter-bits", counter_bits, "counter-lock counter width");
  ben->add_option("--threshold", threshold, "counter-lock trigger count");
  ben->add_option("--truth", truth, "ground-truth JSON (default: netlist path with a .truth.json extension)");
  ben->add_option("--out", c.out, "netlist output")->required();
  ben->callback([&] { c.seed_opt = ben_seed; run = [&] { return cmd_bench(c, archetype, width, pattern, stages, counter_bits, threshold, truth); }; });

  auto* pipe = app.add_subcommand("pipeline", "run every stage and write a report directory");
  PipelineArgs pa;
  add_netlist(pipe, c);
  auto* pipe_seed = add_seed(pipe, c);
  pipe->add_option("--schedule", pa.schedule, "comma-separated trace lengths");
  pipe->add_option("--stable-rounds", pa.stable, "identical rounds needed (m)");
  pipe->add_option("--budget", pa.budget, "conflicts per SAT call");
  pipe->add_option("--depth", pa.depth, "back-trace steps");
  pipe->add_option("--bmc-depth", pa.bmc_depth, "BMC fallback frames for UNKNOWN chains (0 = off)");
  pipe->add_flag("--all-low-coverage", pa.all, "patch every low-coverage LUT");
  pipe->add_option("--vectors", pa.vectors, "random vectors for the mitigation check");
  pipe->add_option("--out", c.out, "output directory")->required();
  pipe->callback([&] { c.seed_opt = pipe_seed; run = [&] { return cmd_pipeline(c, pa); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return run();
  } catch (const StalePlanError& e) {
    std::cerr << "lutscope: " << e.what() << "\n";
    return kInput;
  } catch (const Error& e) {
    std::cerr << "lutscope: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "lutscope: internal error: " << e.what() << "\n";
    return kCap;
  }
}
