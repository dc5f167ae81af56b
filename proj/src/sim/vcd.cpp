#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "lutscope/sim.hpp"

namespace lutscope {
namespace {

std::string id_code(std::uint32_t i) {
  std::string s;
  do {
    s += static_cast<char>('!' + i % 94);
    i /= 94;
  } while (i);
  return s;
}

// "a[3]" -> {"a", " [3]"}; scalar names unchanged.
std::pair<std::string, std::string> split_ref(const std::string& name) {
  if (!name.empty() && name.back() == ']') {
    auto open = name.rfind('[');
    if (open != std::string::npos && open > 0) return {name.substr(0, open), " " + name.substr(open)};
  }
  return {name, ""};
}

} // namespace

std::string export_vcd(const EventTrace& t, std::string_view top) {
  std::string out;
  out += "$timescale 1ns $end\n";
  out += fmt::format("$scope module {} $end\n", top);
  for (std::uint32_t i = 0; i < t.signals.size(); ++i) {
    auto [base, sel] = split_ref(t.signals[i]);
    out += fmt::format("$var wire 1 {} {}{} $end\n", id_code(i), base, sel);
  }
  out += "$upscope $end\n$enddefinitions $end\n";
  std::uint64_t cur = UINT64_MAX;
  for (const auto& e : t.events) {
    if (e.time != cur) {
      out += fmt::format("#{}\n", e.time);
      cur = e.time;
    }
    out += fmt::format("{}{}\n", to_char(e.value), id_code(e.signal));
  }
  if (t.length > 0 && (cur == UINT64_MAX || t.length > cur + 1)) out += fmt::format("#{}\n", t.length);
  else if (t.length == 0) out += "#0\n";
  return out;
}

namespace {

class VcdReader {
public:
  VcdReader(std::string_view text, const Design* d) : text_(text), d_(d) {}

  EventTrace run() {
    parse_header();
    parse_body();
    return std::move(trace_);
  }

private:
  struct Var {
    std::vector<std::int64_t> bits; // trace signal per bit, msb first; -1 = dropped
  };

  bool next_token(std::string_view& tok) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    tok = text_.substr(start, pos_ - start);
    return true;
  }

  std::string_view need(const char* what) {
    std::string_view t;
    if (!next_token(t)) throw VcdError(fmt::format("VCD line {}: unexpected end of file, expected {}", line_, what));
    return t;
  }

  void skip_to_end() {
    std::string_view t;
    while (next_token(t))
      if (t == "$end") return;
    throw VcdError(fmt::format("VCD line {}: missing $end", line_));
  }

  std::uint32_t signal_for(const std::string& raw) {
    std::string name = raw;
    if (d_) {
      auto n = d_->find_net(raw);
      if (!n) throw VcdError(fmt::format("VCD signal '{}' does not exist in the netlist", raw));
      if (!d_->trace_index(*n)) return UINT32_MAX; // clocks and literals are not traced
      name = d_->net(*n).name;
    }
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(trace_.signals.size());
    trace_.signals.push_back(name);
    index_.emplace(name, id);
    return id;
  }

  void parse_header() {
    std::vector<std::string> scopes;
    std::string_view t;
    while (next_token(t)) {
      if (t == "$enddefinitions") {
        skip_to_end();
        return;
      }
      if (t == "$scope") {
        need("scope type");
        scopes.emplace_back(need("scope name"));
        skip_to_end();
      } else if (t == "$upscope") {
        if (scopes.empty()) throw VcdError(fmt::format("VCD line {}: $upscope without $scope", line_));
        scopes.pop_back();
        skip_to_end();
      } else if (t == "$var") {
        need("var type");
        auto width_tok = need("var width");
        int width = 0;
        auto [p, ec] = std::from_chars(width_tok.data(), width_tok.data() + width_tok.size(), width);
        if (ec != std::errc{} || width <= 0) throw VcdError(fmt::format("VCD line {}: bad var width '{}'", line_, width_tok));
        std::string code(need("identifier code"));
        std::string ref(need("reference"));
        std::string sel;
        auto tail = need("$end");
        if (tail != "$end") {
          sel = std::string(tail);
          if (need("$end") != "$end") throw VcdError(fmt::format("VCD line {}: malformed $var", line_));
        }
        std::string path;
        for (std::size_t i = 1; i < scopes.size(); ++i) path += scopes[i] + ".";
        declare(code, path + ref, sel, width);
      } else if (t.starts_with("$")) {
        skip_to_end(); // $date, $version, $timescale, $comment
      } else {
        throw VcdError(fmt::format("VCD line {}: unexpected '{}' in header", line_, t));
      }
    }
    throw VcdError("VCD has no $enddefinitions");
  }

  void declare(const std::string& code, const std::string& ref, const std::string& sel, int width) {
    Var v;
    int msb = width - 1, lsb = 0;
    bool indexed = width > 1;
    if (!sel.empty()) {
      if (sel.front() != '[' || sel.back() != ']') throw VcdError(fmt::format("VCD line {}: bad bit select '{}'", line_, sel));
      auto inner = sel.substr(1, sel.size() - 2);
      auto colon = inner.find(':');
      try {
        if (colon == std::string::npos) {
          msb = lsb = std::stoi(inner);
        } else {
          msb = std::stoi(inner.substr(0, colon));
          lsb = std::stoi(inner.substr(colon + 1));
        }
      } catch (const std::exception&) {
        throw VcdError(fmt::format("VCD line {}: bad bit select '{}'", line_, sel));
      }
      indexed = true;
      if (std::abs(msb - lsb) + 1 != width) throw VcdError(fmt::format("VCD line {}: select width mismatch", line_));
    }
    int step = msb >= lsb ? -1 : 1;
    for (int i = msb;; i += step) {
      std::string name = indexed ? fmt::format("{}[{}]", ref, i) : ref;
      std::uint32_t s = signal_for(name);
      v.bits.push_back(s == UINT32_MAX ? -1 : static_cast<std::int64_t>(s));
      if (i == lsb) break;
    }
    auto& slot = vars_[code];
    slot.insert(slot.end(), {v});
  }

  void apply(std::string_view code, std::string_view bits) {
    auto it = vars_.find(std::string(code));
    if (it == vars_.end()) throw VcdError(fmt::format("VCD line {}: value for undeclared identifier '{}'", line_, code));
    for (const Var& v : it->second) {
      const std::size_t w = v.bits.size();
      if (bits.size() > w) bits = bits.substr(bits.size() - w);
      char pad = bits.empty() ? '0' : bits.front();
      if (pad == '1') pad = '0';
      for (std::size_t i = 0; i < w; ++i) {
        std::size_t from_right = w - 1 - i;
        char c = from_right < bits.size() ? bits[bits.size() - 1 - from_right] : pad;
        LogicValue lv;
        try {
          lv = logic_from_char(c);
        } catch (const std::invalid_argument&) {
          throw VcdError(fmt::format("VCD line {}: bad value character '{}'", line_, c));
        }
        if (v.bits[i] >= 0) pending_[static_cast<std::uint32_t>(v.bits[i])] = lv;
      }
    }
    had_changes_ = true;
  }

  void flush() {
    if (!have_time_) {
      if (!pending_.empty()) throw VcdError(fmt::format("VCD line {}: value change before first timestamp", line_));
      return;
    }
    if (current_.size() < trace_.signals.size()) current_.resize(trace_.signals.size(), LogicValue::X);
    for (auto [sig, v] : pending_) {
      if (current_[sig] == v) continue;
      current_[sig] = v;
      trace_.events.push_back({time_, sig, v});
    }
    pending_.clear();
    trace_.length = std::max(trace_.length, time_ + (had_changes_ ? 1 : 0));
    had_changes_ = false;
  }

  void parse_body() {
    std::string_view t;
    while (next_token(t)) {
      if (t.front() == '#') {
        flush();
        std::uint64_t ts = 0;
        auto body = t.substr(1);
        auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), ts);
        if (body.empty() || ec != std::errc{} || p != body.data() + body.size())
          throw VcdError(fmt::format("VCD line {}: malformed timestamp '{}'", line_, t));
        if (have_time_ && ts < time_)
          throw VcdError(fmt::format("VCD line {}: timestamp #{} goes backwards", line_, ts));
        time_ = ts;
        have_time_ = true;
        trace_.length = std::max(trace_.length, ts);
        continue;
      }
      if (t == "$dumpvars" || t == "$dumpall" || t == "$dumpon" || t == "$dumpoff" || t == "$end") continue;
      if (t == "$comment") {
        skip_to_end();
        continue;
      }
      char c = static_cast<char>(std::tolower(static_cast<unsigned char>(t.front())));
      if (c == 'b') {
        auto code = need("identifier code");
        apply(code, t.substr(1));
      } else if (c == 'r') {
        throw VcdError(fmt::format("VCD line {}: real values are not supported", line_));
      } else if (c == '0' || c == '1' || c == 'x' || c == 'z') {
        if (t.size() < 2) throw VcdError(fmt::format("VCD line {}: value without identifier", line_));
        apply(t.substr(1), t.substr(0, 1));
      } else {
        throw VcdError(fmt::format("VCD line {}: unexpected token '{}'", line_, t));
      }
    }
    flush();
    std::stable_sort(trace_.events.begin(), trace_.events.end(), [](const Event& a, const Event& b) {
      return a.time != b.time ? a.time < b.time : a.signal < b.signal;
    });
  }

  std::string_view text_;
  const Design* d_;
  std::size_t pos_ = 0;
  int line_ = 1;
  EventTrace trace_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::unordered_map<std::string, std::vector<Var>> vars_;
  std::map<std::uint32_t, LogicValue> pending_;
  std::vector<LogicValue> current_;
  std::uint64_t time_ = 0;
  bool have_time_ = false;
  bool had_changes_ = false;
};

} // namespace

EventTrace import_vcd(std::string_view text, const Design* d) { return VcdReader(text, d).run(); }

} // namespace lutscope
