#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "lutscope/design.hpp"
#include "lutscope/netlist.hpp"
#include "lutscope/sim.hpp"
#include "support.hpp"

using namespace lutscope;
using lutscope::testing::read_fixture;

namespace {

bool has_kind(const std::vector<Diagnostic>& ds, Diagnostic::Kind k) {
  return std::any_of(ds.begin(), ds.end(), [k](const Diagnostic& d) { return d.kind == k; });
}

// Order-insensitive structural summary used to compare netlists.
std::multiset<std::string> cell_summary(const Module& m) {
  std::multiset<std::string> out;
  for (const auto& c : m.cells) {
    std::string s = c.name + "|" + std::to_string(static_cast<int>(c.kind)) + "|" + std::to_string(c.init) + "|" +
                    c.output.str();
    for (const auto& i : c.inputs) s += "|" + i.str();
    if (c.kind == CellKind::Dff) {
      s += "|" + c.clock.str() + "|" + c.data.str() + "|" + (c.reset ? c.reset->str() : "-") +
           (c.reset_value ? "1" : "0");
    }
    out.insert(s);
  }
  return out;
}

void expect_isomorphic(const Netlist& a, const Netlist& b) {
  ASSERT_EQ(a.top, b.top);
  ASSERT_EQ(a.modules.size(), b.modules.size());
  for (const auto& [name, ma] : a.modules) {
    const auto& mb = b.modules.at(name);
    EXPECT_EQ(cell_summary(ma), cell_summary(mb)) << name;
    ASSERT_EQ(ma.ports.size(), mb.ports.size());
    for (std::size_t i = 0; i < ma.ports.size(); ++i) {
      EXPECT_EQ(ma.ports[i].name, mb.ports[i].name);
      EXPECT_EQ(ma.ports[i].range, mb.ports[i].range);
    }
    ASSERT_EQ(ma.instances.size(), mb.instances.size());
    ASSERT_EQ(ma.assigns.size(), mb.assigns.size());
    for (std::size_t i = 0; i < ma.assigns.size(); ++i) {
      EXPECT_EQ(ma.assigns[i].lhs, mb.assigns[i].lhs);
      EXPECT_EQ(ma.assigns[i].rhs, mb.assigns[i].rhs);
    }
  }
}

} // namespace

TEST(Parse, AndLut) {
  auto n = parse_netlist(read_fixture("and2.v"));
  const auto& m = n.top_module();
  ASSERT_EQ(m.cells.size(), 1u);
  EXPECT_EQ(m.cells[0].kind, CellKind::Lut);
  EXPECT_EQ(m.cells[0].lut_size(), 2u);
  EXPECT_EQ(m.cells[0].init, 0x8u);
  EXPECT_EQ(m.cells[0].line, 2);
}

TEST(Parse, WorkedExampleInit) {
  auto n = parse_netlist(R"(
module p(input a, input b, input dc2, input dc1, output y);
  LUT4 #(.INIT(16'haccc)) pay (.I0(a), .I1(b), .I2(dc2), .I3(dc1), .O(y));
endmodule
)");
  EXPECT_EQ(n.top_module().cells[0].init, 0xACCCu);
}

TEST(Parse, MissingSemicolonNamesLine) {
  const char* text = "module m(input a, output y);\n"
                     "  wire w\n"
                     "  LUT1 #(.INIT(2'h2)) u (.I0(a), .O(y));\n"
                     "endmodule\n";
  try {
    parse_netlist(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("';'"), std::string::npos);
  }
}

TEST(Parse, UnknownPrimitive) {
  EXPECT_THROW(parse_netlist("module m(input a, output y);\n  FOO u (.I(a), .O(y));\nendmodule\n"), ParseError);
}

TEST(Parse, InitWidthMismatch) {
  try {
    parse_netlist("module m(input a, input b, output y);\n  LUT2 #(.INIT(8'h80)) u (.I0(a), .I1(b), .O(y));\nendmodule\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("INIT width mismatch"), std::string::npos);
  }
}

TEST(Parse, MultipleDriversIsError) {
  const char* text = "module m(input a, input b, output y);\n"
                     "  LUT1 #(.INIT(2'h2)) u1 (.I0(a), .O(y));\n"
                     "  LUT1 #(.INIT(2'h2)) u2 (.I0(b), .O(y));\n"
                     "endmodule\n";
  EXPECT_ANY_THROW(parse_netlist(text));
  auto n = parse_netlist(text, {.strict = false});
  auto ds = validate(n);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].kind, Diagnostic::Kind::MultiDriver);
  EXPECT_NE(ds[0].message.find("u1"), std::string::npos);
  EXPECT_NE(ds[0].message.find("u2"), std::string::npos);
}

TEST(Parse, VendorCellsBecomeLuts) {
  auto n = parse_netlist(read_fixture("mixed.v"));
  const auto& m = n.top_module();
  EXPECT_EQ(m.find_cell("i0")->init, 0x1u);
  EXPECT_EQ(m.find_cell("b1")->init, 0x2u);
  EXPECT_EQ(m.find_cell("mx")->init, 0xCAu);
  EXPECT_EQ(m.find_cell("mx")->lut_size(), 3u);
  EXPECT_EQ(m.find_cell("g")->kind, CellKind::Const0);
  EXPECT_EQ(m.find_cell("v")->kind, CellKind::Const1);
}

TEST(Parse, CommentsAndAttributes) {
  auto n = parse_netlist("/* block */ module m(input a, output y); // trailing\n"
                         "  (* keep *) LUT1 #(.INIT(2'b01)) u (.I0(a), .O(y));\nendmodule\n");
  EXPECT_EQ(n.top_module().cells[0].init, 0x1u);
}

TEST(Validate, WellFormedFixtures) {
  for (const char* f : {"and2.v", "counter3.v", "hier.v", "mixed.v"})
    EXPECT_TRUE(validate(parse_netlist(read_fixture(f))).empty()) << f;
}

TEST(Validate, SelfLoop) {
  auto n = parse_netlist("module m(input a, output y);\n  LUT2 #(.INIT(4'h6)) u (.I0(a), .I1(y), .O(y));\nendmodule\n",
                         {.strict = false});
  auto ds = validate(n);
  ASSERT_TRUE(has_kind(ds, Diagnostic::Kind::CombLoop));
}

TEST(Validate, UndeclaredNet) {
  auto n = parse_netlist("module m(input a, output y);\n  LUT1 #(.INIT(2'h2)) u (.I0(nope), .O(y));\nendmodule\n",
                         {.strict = false});
  EXPECT_TRUE(has_kind(validate(n), Diagnostic::Kind::Undeclared));
}

// Loop detection oracle: plain recursive DFS over the LUT graph with colours.
TEST(Validate, LoopDetectionMatchesDfsOracle) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 150; ++round) {
    const int cells = 2 + static_cast<int>(rng() % 7);
    std::string text = "module m(input a, output y);\n  wire [" + std::to_string(cells - 1) + ":0] w;\n";
    std::vector<std::vector<int>> reads(cells);
    for (int c = 0; c < cells; ++c) {
      int x = static_cast<int>(rng() % (cells + 1)) - 1; // -1 = input a
      int z = static_cast<int>(rng() % (cells + 1)) - 1;
      auto ref = [](int i) { return i < 0 ? std::string("a") : "w[" + std::to_string(i) + "]"; };
      if (x >= 0) reads[c].push_back(x);
      if (z >= 0) reads[c].push_back(z);
      text += "  LUT2 #(.INIT(4'h6)) c" + std::to_string(c) + " (.I0(" + ref(x) + "), .I1(" + ref(z) + "), .O(w[" +
              std::to_string(c) + "]));\n";
    }
    text += "  assign y = w[0];\nendmodule\n";
    std::vector<int> colour(cells, 0);
    bool cyclic = false;
    std::function<void(int)> dfs = [&](int v) {
      colour[v] = 1;
      for (int u : reads[v]) {
        if (colour[u] == 1) cyclic = true;
        else if (colour[u] == 0) dfs(u);
      }
      colour[v] = 2;
    };
    for (int c = 0; c < cells; ++c)
      if (colour[c] == 0) dfs(c);
    auto ds = validate(parse_netlist(text, {.strict = false}));
    EXPECT_EQ(has_kind(ds, Diagnostic::Kind::CombLoop), cyclic) << text;
  }
}

TEST(Validate, LoopThroughRegisterIsFine) {
  EXPECT_NO_THROW(parse_netlist(read_fixture("counter3.v")));
}

TEST(Flatten, RecursionIsRejected) {
  const char* text = "module a(input x, output y);\n  b u (.x(x), .y(y));\nendmodule\n"
                     "module b(input x, output y);\n  a u (.x(x), .y(y));\nendmodule\n"
                     "module top(input x, output y);\n  a u (.x(x), .y(y));\nendmodule\n";
  auto n = parse_netlist(text, {.strict = false, .top = "top"});
  EXPECT_THROW(flatten(n), Error);
}

TEST(Flatten, SingleModuleIsIdentity) {
  auto n = parse_netlist(read_fixture("counter3.v"));
  expect_isomorphic(flatten(n), n);
}

TEST(Flatten, HierarchicalNames) {
  auto f = flatten(parse_netlist(read_fixture("hier.v")));
  ASSERT_TRUE(f.is_flat());
  const auto& m = f.top_module();
  EXPECT_NE(m.find_cell("fa1.h0.carry"), nullptr);
  EXPECT_NE(m.find_cell("fa0.cor"), nullptr);
  EXPECT_NE(m.find_wire("fa0.h1.s"), nullptr);
}

TEST(Flatten, TracesMatchAcrossHierarchy) {
  auto hier = parse_netlist(read_fixture("hier.v"));
  auto flat = flatten(hier);
  auto dh = Design::build(hier);
  auto df = Design::build(parse_netlist(emit_netlist(flat)));
  auto s = random_stimulus(dh, 5, 100);
  auto th = simulate(dh, s, 100);
  auto tf = simulate(df, s, 100);
  EXPECT_EQ(th, tf);
}

TEST(Emit, RoundTripFixtures) {
  for (const char* f : {"and2.v", "counter3.v", "hier.v", "mixed.v"}) {
    auto a = parse_netlist(read_fixture(f));
    auto b = parse_netlist(emit_netlist(a));
    expect_isomorphic(a, b);
    EXPECT_EQ(emit_netlist(b), emit_netlist(a)) << f;
  }
}

TEST(Emit, EmptyModule) {
  auto n = parse_netlist("module empty();\nendmodule\n");
  auto text = emit_netlist(n);
  EXPECT_NE(text.find("module empty"), std::string::npos);
  EXPECT_NE(text.find("endmodule"), std::string::npos);
  EXPECT_NO_THROW(parse_netlist(text));
}

TEST(Emit, PatchedInitVerbatim) {
  auto n = parse_netlist("module p(input [3:0] a, output y);\n"
                         "  LUT4 #(.INIT(16'haccc)) pay (.I0(a[0]), .I1(a[1]), .I2(a[2]), .I3(a[3]), .O(y));\n"
                         "endmodule\n");
  n.top_module().find_cell("pay")->init = 0x5CCC;
  EXPECT_NE(emit_netlist(n).find(".INIT(16'h5ccc)"), std::string::npos);
}

TEST(Emit, EscapedIdentifiersSurvive) {
  auto n = parse_netlist("module m(input \\a.b , output y);\n  LUT1 #(.INIT(2'h2)) \\u$1 (.I0(\\a.b ), .O(y));\nendmodule\n");
  auto again = parse_netlist(emit_netlist(n));
  EXPECT_NE(again.top_module().find_cell("u$1"), nullptr);
  EXPECT_NE(again.top_module().find_port("a.b"), nullptr);
}

TEST(Design, AliasesMerge) {
  auto d = Design::build(parse_netlist(read_fixture("hier.v")));
  auto a = d.find_net("fa1.co");
  auto b = d.find_net("co");
  ASSERT_TRUE(a && b);
  EXPECT_EQ(*a, *b);
  EXPECT_EQ(d.net(*a).name, "co");
}

TEST(Design, ClockGuessedAndExcluded) {
  auto d = Design::build(parse_netlist(read_fixture("counter3.v")));
  EXPECT_EQ(d.find_port("clk")->role, PortRole::Clock);
  EXPECT_EQ(d.find_port("rst")->role, PortRole::Reset);
  EXPECT_EQ(d.stimulus_inputs().size(), 1u);
  EXPECT_FALSE(d.trace_index(*d.find_net("clk")));
}

TEST(Design, RolesSidecarOverrides) {
  auto roles = PortRoles::from_json_text(R"({"free": ["rst"], "reset_cycles": 3})");
  auto d = Design::build(parse_netlist(read_fixture("counter3.v")), roles);
  EXPECT_EQ(d.find_port("rst")->role, PortRole::Free);
  EXPECT_EQ(d.reset_cycles(), 3);
  EXPECT_THROW(Design::build(parse_netlist(read_fixture("counter3.v")), PortRoles::from_json_text(R"({"clock": ["nope"]})")),
               Error);
}
